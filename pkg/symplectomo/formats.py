"""On-disk formats: slice and grid CSVs, matrix and manifest JSON.

Numbers in CSVs are written with 9 significant digits, `.` as the decimal
separator and LF line endings; JSON numbers use Python's shortest round-trip
repr and complex values are ``[re, im]`` pairs. Every file is written to a
temporary sibling first and moved into place with ``os.replace``.
"""

import json
import os
import tempfile
from typing import List, Optional, Tuple

import numpy as np

from . import ensure_duckdb, logger
from .errors import FormatError
from .hilbert_core import OperatorMatrix, ReferenceFrame
from .tomography import TomogramSlice, UniformAxis

MANIFEST_NAME = "manifest.json"
SLICE_HEADER = ("X", "w")
GRID_HEADER = ("q", "p", "value")


def format_number(value: float) -> str:
    return "%.9g" % value


def atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def _csv_text(header, columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def write_slice_csv(path: str, slice_: TomogramSlice):
    atomic_write(path, _csv_text(SLICE_HEADER, (slice_.x_axis.values, slice_.density)))


def write_grid_csv(path: str, q_axis: UniformAxis, p_axis: UniformAxis, values):
    q, p = np.meshgrid(q_axis.values, p_axis.values, indexing="ij")
    columns = (q.reshape(-1), p.reshape(-1), np.asarray(values).reshape(-1))
    atomic_write(path, _csv_text(GRID_HEADER, columns))


def complex_pair(value: complex) -> List[float]:
    value = complex(value)
    return [value.real, value.imag]


def write_json(path: str, payload: dict):
    atomic_write(path, json.dumps(payload, indent=2) + "\n")


def matrix_payload(op: OperatorMatrix) -> dict:
    return {
        "dim": op.dim,
        "entries": [[complex_pair(v) for v in row] for row in op.entries],
    }


def write_matrix_json(path: str, op: OperatorMatrix):
    write_json(path, matrix_payload(op))


def read_matrix_json(path: str) -> OperatorMatrix:
    payload = read_json(path)
    try:
        dim = int(payload["dim"])
        entries = np.array(
            [[complex(re, im) for re, im in row] for row in payload["entries"]]
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{path} is not a matrix file: {e}")
    if entries.shape != (dim, dim):
        raise FormatError(f"{path} declares dim {dim} but holds {entries.shape}")
    return OperatorMatrix(entries)


def read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise FormatError(f"{path} is not valid JSON: {e}")


def _sql_path(path: str) -> str:
    return path.replace("'", "''")


def read_csv_columns(path: str, header: Tuple[str, ...]) -> List[np.ndarray]:
    """Read a numeric CSV through DuckDB and check its header."""
    ensure_duckdb()
    import duckdb

    if not os.path.exists(path):
        raise FormatError(f"missing file {path}")
    source = f"read_csv('{_sql_path(path)}', header=true, delim=',')"
    conn = duckdb.connect()
    try:
        schema = conn.execute(f"DESCRIBE SELECT * FROM {source}").fetchall()
        names = tuple(col[0] for col in schema)
        if names != header:
            raise FormatError(f"{path} has columns {names}, expected {header}")
        column_list = ", ".join(f'CAST("{name}" AS DOUBLE)' for name in header)
        rows = conn.execute(f"SELECT {column_list} FROM {source}").fetchall()
    except duckdb.Error as e:
        raise FormatError(f"cannot read {path}: {e}")
    finally:
        conn.close()
    if not rows:
        raise FormatError(f"{path} has no data rows")
    data = np.array(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path} holds non-finite values")
    return [data[:, i] for i in range(len(header))]


def read_slice_csv(
    path: str, frame: ReferenceFrame, x_axis: Optional[UniformAxis] = None
) -> TomogramSlice:
    X, w = read_csv_columns(path, SLICE_HEADER)
    if x_axis is None:
        x_axis = axis_from_values(X, path)
    elif X.size != x_axis.count or np.abs(X - x_axis.values).max() > 1e-6 * max(
        1.0, np.abs(X).max()
    ):
        raise FormatError(f"{path} does not match the manifest X axis")
    return TomogramSlice(frame, x_axis, w)


def axis_from_values(X: np.ndarray, what: str = "axis") -> UniformAxis:
    if X.size < 2:
        raise FormatError(f"{what} needs at least two samples")
    steps = np.diff(X)
    step = float(steps.mean())
    if step <= 0 or np.abs(steps - step).max() > 1e-6 * max(1.0, np.abs(X).max()):
        raise FormatError(f"{what} is not uniformly spaced")
    return UniformAxis(float(X[X.size // 2]), step, int(X.size))


def axis_payload(axis: UniformAxis) -> dict:
    return {"center": axis.center, "step": axis.step, "count": axis.count}


def slice_file_name(index: int) -> str:
    return f"slice_{index:04d}.csv"


def write_tomogram_dir(
    directory: str, slices: List[TomogramSlice], manifest: dict
) -> str:
    """Write one CSV per slice and a manifest listing frames; returns its path."""
    entries = []
    for index, sl in enumerate(slices):
        name = slice_file_name(index)
        write_slice_csv(os.path.join(directory, name), sl)
        entries.append({"file": name, "mu": sl.frame.mu, "nu": sl.frame.nu})
    payload = dict(manifest)
    payload["x_axis"] = axis_payload(slices[0].x_axis) if slices else None
    payload["slices"] = entries
    path = os.path.join(directory, MANIFEST_NAME)
    write_json(path, payload)
    logger.log(f"wrote {len(slices)} slices to {directory}")
    return path


def read_tomogram_dir(directory: str) -> Tuple[dict, List[TomogramSlice]]:
    manifest = read_json(os.path.join(directory, MANIFEST_NAME))
    try:
        axis = UniformAxis(**manifest["x_axis"])
        listed = [(e["file"], float(e["mu"]), float(e["nu"])) for e in manifest["slices"]]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"manifest in {directory} is malformed: {e}")
    if not listed:
        raise FormatError(f"manifest in {directory} lists no slices")
    slices = [
        read_slice_csv(os.path.join(directory, name), ReferenceFrame(mu, nu), axis)
        for name, mu, nu in listed
    ]
    return manifest, slices
