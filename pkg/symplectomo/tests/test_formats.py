import json
import os
from unittest.mock import MagicMock, patch

import duckdb
import numpy as np
import pytest

from symplectomo.errors import FormatError
from symplectomo.formats import (
    atomic_write,
    format_number,
    read_csv_columns,
    read_matrix_json,
    read_slice_csv,
    read_tomogram_dir,
    write_grid_csv,
    write_matrix_json,
    write_slice_csv,
    write_tomogram_dir,
)
from symplectomo.hilbert_core import FockState, ReferenceFrame, density_state
from symplectomo.tomography import UniformAxis, quantum_tomogram


@pytest.fixture
def small_axis():
    return UniformAxis(0.0, 0.1, 256)


@pytest.fixture
def slices(ground_state, small_axis):
    frames = (ReferenceFrame(1.0, 0.0), ReferenceFrame(0.6, 0.8))
    return [quantum_tomogram(ground_state, f, small_axis) for f in frames]


def test_format_number():
    assert format_number(0.5641895835477563) == "0.564189584"
    assert format_number(-2.0) == "-2"
    assert format_number(1.5e-12) == "1.5e-12"


def test_slice_csv_layout(tmp_path, slices):
    path = tmp_path / "slice.csv"
    write_slice_csv(str(path), slices[0])
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "X,w"
    assert len(lines) == 257
    assert lines[129].startswith("0,0.5641895")


def test_atomic_write_leaves_no_partial_files(tmp_path):
    target = tmp_path / "nested" / "out.txt"
    atomic_write(str(target), "first\n")
    atomic_write(str(target), "second\n")
    assert target.read_text() == "second\n"
    assert os.listdir(target.parent) == ["out.txt"]


def test_atomic_write_cleans_up_on_failure(tmp_path):
    target = tmp_path / "out.txt"
    with patch("symplectomo.formats.os.replace", side_effect=OSError("disk full")):
        with pytest.raises(OSError):
            atomic_write(str(target), "text")
    assert os.listdir(tmp_path) == []


def test_tomogram_dir_is_byte_stable(tmp_path, slices):
    """Writing what was read back reproduces every file byte for byte"""
    first = tmp_path / "first"
    second = tmp_path / "second"
    write_tomogram_dir(str(first), slices, {"kind": "quantum"})
    manifest, restored = read_tomogram_dir(str(first))
    assert manifest["kind"] == "quantum"
    assert [(s.frame.mu, s.frame.nu) for s in restored] == [(1, 0), (0.6, 0.8)]
    np.testing.assert_allclose(restored[0].density, slices[0].density, rtol=1e-8, atol=1e-15)
    write_tomogram_dir(str(second), restored, {"kind": "quantum"})
    for name in sorted(os.listdir(first)):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_manifest_layout(tmp_path, slices):
    path = write_tomogram_dir(str(tmp_path), slices, {"kind": "quantum"})
    manifest = json.loads(open(path).read())
    assert manifest["x_axis"] == {"center": 0.0, "step": 0.1, "count": 256}
    assert manifest["slices"][1] == {"file": "slice_0001.csv", "mu": 0.6, "nu": 0.8}


def test_matrix_json_round_trip(tmp_path, basis8):
    rho = density_state(FockState(2), basis8)
    path = tmp_path / "rho.json"
    write_matrix_json(str(path), rho.op)
    payload = json.loads(path.read_text())
    assert payload["dim"] == 8
    assert payload["entries"][2][2] == [1.0, 0.0]
    np.testing.assert_array_equal(read_matrix_json(str(path)).entries, rho.entries)


def test_grid_csv(tmp_path):
    axis = UniformAxis(0.0, 0.5, 4)
    path = tmp_path / "grid.csv"
    write_grid_csv(str(path), axis, axis, np.arange(16.0).reshape(4, 4))
    q, p, value = read_csv_columns(str(path), ("q", "p", "value"))
    assert q[0] == -1.0 and p[1] == -0.5
    assert value[5] == 5.0


def test_bad_matrix_files(tmp_path):
    wrong_dim = tmp_path / "wrong.json"
    wrong_dim.write_text(json.dumps({"dim": 3, "entries": [[[1, 0]]]}))
    with pytest.raises(FormatError):
        read_matrix_json(str(wrong_dim))
    garbage = tmp_path / "garbage.json"
    garbage.write_text("not json")
    with pytest.raises(FormatError):
        read_matrix_json(str(garbage))


def test_csv_errors(tmp_path, small_axis):
    header = tmp_path / "header.csv"
    header.write_text("x,density\n0,1\n1,2\n")
    with pytest.raises(FormatError, match="columns"):
        read_slice_csv(str(header), ReferenceFrame(1, 0))
    empty = tmp_path / "empty.csv"
    empty.write_text("X,w\n")
    with pytest.raises(FormatError):
        read_slice_csv(str(empty), ReferenceFrame(1, 0))
    uneven = tmp_path / "uneven.csv"
    uneven.write_text("X,w\n0,0.1\n1,0.2\n3,0.3\n")
    with pytest.raises(FormatError, match="uniformly"):
        read_slice_csv(str(uneven), ReferenceFrame(1, 0))
    with pytest.raises(FormatError, match="missing"):
        read_slice_csv(str(tmp_path / "absent.csv"), ReferenceFrame(1, 0))


def test_slice_must_match_manifest_axis(tmp_path, slices):
    path = tmp_path / "slice.csv"
    write_slice_csv(str(path), slices[0])
    with pytest.raises(FormatError, match="manifest"):
        read_slice_csv(str(path), ReferenceFrame(1, 0), UniformAxis(0.0, 0.05, 256))


def test_malformed_manifest(tmp_path):
    (tmp_path / "manifest.json").write_text(json.dumps({"slices": []}))
    with pytest.raises(FormatError):
        read_tomogram_dir(str(tmp_path))


@patch("duckdb.connect")
def test_duckdb_errors_become_format_errors(mock_connect, tmp_path):
    """DuckDB failures are reported as format errors and the connection is closed"""
    path = tmp_path / "slice.csv"
    path.write_text("X,w\n0,1\n")
    mock_conn = MagicMock()
    mock_conn.execute.side_effect = duckdb.Error("Invalid Input Error")
    mock_connect.return_value = mock_conn
    with pytest.raises(FormatError, match="Invalid Input Error"):
        read_csv_columns(str(path), ("X", "w"))
    mock_conn.close.assert_called_once()
