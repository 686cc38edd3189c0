"""Command-line interface: ``symplectomo <tomogram|invert|star|mean|verify>``."""

import functools
import json
import os
import sys
import typing

import click
import numpy as np

from . import __version__, logger
from .config import (
    NAMED_OPERATORS,
    RunConfig,
    is_classical,
    load_config,
    parse_floats,
    parse_operand,
    parse_point,
    parse_state_spec,
    read_config_file,
)
from .errors import NotTraceClass, ParseError, SymplectomoError, UsageError
from .formats import (
    axis_payload,
    complex_pair,
    read_tomogram_dir,
    write_grid_csv,
    write_json,
    write_matrix_json,
    write_tomogram_dir,
)
from .hilbert_core import ReferenceFrame, density_state, trace_product
from .star_product import (
    PolyObservable,
    mean_value,
    observable_operator,
    operator_symbol,
    star_trace,
    star_via_kernel,
)
from .tomography import (
    classical_inverse,
    classical_tomogram,
    density_from_tomogram,
    quantum_tomogram,
    quantum_tomogram_spectral,
    wigner_from_tomogram,
)
from .verify_oracle import SuiteConfig, load_profiles, run_suite

# fields set through dedicated options
_SPECIAL_FIELDS = ("frames", "tolerances")


def _click_type(annotation):
    if typing.get_origin(annotation) is typing.Literal:
        return click.Choice(typing.get_args(annotation))
    if typing.get_origin(annotation) is typing.Union:
        args = typing.get_args(annotation)
        annotation = next(a for a in args if a is not type(None))
    return {int: click.INT, float: click.FLOAT}.get(annotation, click.STRING)


def config_options(command):
    """One ``--field-name`` option per RunConfig field plus --config/--tolerance."""
    for name, field in reversed(list(RunConfig.model_fields.items())):
        if name in _SPECIAL_FIELDS:
            continue
        command = click.option(
            f"--{name.replace('_', '-')}",
            name,
            type=_click_type(field.annotation),
            default=None,
            help=field.description,
        )(command)
    command = click.option(
        "--tolerance",
        "tolerances",
        multiple=True,
        metavar="CHECK=VALUE",
        help="Override the tolerance of one verify check.",
    )(command)
    command = click.option(
        "--config",
        "config_path",
        type=click.Path(),
        default=None,
        help="JSON file with RunConfig fields.",
    )(command)
    return command


def _parse_tolerances(items):
    parsed = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"tolerance {item!r} is not of the form CHECK=VALUE")
        parsed[name] = parse_floats(value, 1, "tolerance")[0]
    return parsed


def _run_config(config_path, options, frames=()) -> RunConfig:
    overrides = {k: v for k, v in options.items() if k in RunConfig.model_fields}
    tolerances = _parse_tolerances(options.get("tolerances", ()))
    if tolerances:
        overrides["tolerances"] = tolerances
    if frames:
        overrides["frames"] = tuple(tuple(parse_floats(f, 2, "frame")) for f in frames)
    return load_config(config_path, overrides)


def reports_errors(command):
    """Turn library errors into a single stderr line and their exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SymplectomoError as e:
            click.echo(str(e), err=True)
            sys.exit(e.exit_code)
        except (OSError, ValueError) as e:
            click.echo(f"INTERNAL_ERROR: {e}", err=True)
            sys.exit(1)

    return wrapper


def _usage_exit(error: click.UsageError):
    err = UsageError(error.format_message())
    click.echo(str(err), err=True)
    sys.exit(err.exit_code)


class SymplectomoGroup(click.Group):
    """Group that reports click usage errors in the ``CODE: message`` form."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            _usage_exit(e)

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            _usage_exit(e)


@click.group(cls=SymplectomoGroup)
@click.version_option(__version__, prog_name="symplectomo")
@click.option("-v", "--verbose", is_flag=True, help="Log progress and diagnostics.")
def main(verbose):
    """Symplectic tomograms, their inversion and tomographic star products."""
    logger.configure(verbose)


@main.command()
@click.argument("state")
@click.option(
    "--frame", "frames", multiple=True, metavar="MU,NU", help="Frame; repeatable."
)
@click.option(
    "--route",
    type=click.Choice(["fft", "spectral"]),
    default="fft",
    help="FFT of the characteristic function or spectral decomposition.",
)
@click.option("--out", "out_dir", default="tomogram", type=click.Path(file_okay=False))
@config_options
@reports_errors
def tomogram(state, frames, route, out_dir, config_path, **options):
    """Write one `X,w` CSV per frame for STATE and a manifest."""
    cfg = _run_config(config_path, options, frames)
    spec = parse_state_spec(state, cfg.convention)
    axis = cfg.x_axis()
    frame_list = cfg.frame_list()
    if is_classical(spec):
        kind = "classical"
        slices = [classical_tomogram(spec, f, axis) for f in frame_list]
    else:
        kind = "quantum"
        rho = density_state(spec, cfg.basis())
        if route == "fft":
            slices = [quantum_tomogram(rho, f, axis) for f in frame_list]
        else:
            smearing = "gaussian" if cfg.smearing else "cell"
            slices = [
                quantum_tomogram_spectral(rho, f, axis, smearing, cfg.smearing)
                for f in frame_list
            ]
    manifest = {
        "kind": kind,
        "state": state,
        "route": route,
        "config": cfg.model_dump(mode="json"),
    }
    click.echo(write_tomogram_dir(out_dir, slices, manifest))


@main.command()
@click.argument("tomogram_dir", type=click.Path())
@click.option(
    "--target", type=click.Choice(["wigner", "density", "classical"]), required=True
)
@click.option("--out", "out_dir", default="inverted", type=click.Path(file_okay=False))
@config_options
@reports_errors
def invert(tomogram_dir, target, out_dir, config_path, **options):
    """Reconstruct a Wigner grid, density matrix or classical grid."""
    cfg = _run_config(config_path, options)
    _, slices = read_tomogram_dir(tomogram_dir)
    lattice = cfg.lattice()
    grid = cfg.grid_axis()
    if target == "density":
        rho, diagnostics = density_from_tomogram(
            slices, cfg.basis(), lattice, cfg.coverage_tol
        )
        output = os.path.join(out_dir, "density.json")
        write_matrix_json(output, rho.op)
        diagnostics = diagnostics.as_dict()
    elif target == "wigner":
        wigner = wigner_from_tomogram(slices, grid, grid, lattice, cfg.coverage_tol)
        output = os.path.join(out_dir, "wigner.csv")
        write_grid_csv(output, grid, grid, wigner.values)
        diagnostics = {"normalization": wigner.normalization()}
    else:
        dist = classical_inverse(
            slices, grid, grid, lattice, cfg.convention, cfg.coverage_tol
        )
        output = os.path.join(out_dir, "classical.csv")
        write_grid_csv(output, grid, grid, dist.values)
        diagnostics = {"normalization": float(np.sum(dist.values)) * grid.step**2}
    write_json(
        os.path.join(out_dir, "manifest.json"),
        {
            "target": target,
            "source": os.path.abspath(tomogram_dir),
            "output": os.path.basename(output),
            "grid": axis_payload(grid),
            "diagnostics": diagnostics,
            "config": cfg.model_dump(mode="json"),
        },
    )
    click.echo(output)


@main.command()
@click.argument("spec_a")
@click.argument("spec_b")
@click.option("--point", required=True, metavar="X,MU,NU", help="Label point.")
@click.option(
    "--route", type=click.Choice(["trace", "kernel", "both"]), default="trace"
)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@config_options
@reports_errors
def star(spec_a, spec_b, point, route, out_path, config_path, **options):
    """Star product of two operands (states or q, p, 1) at one label point."""
    cfg = _run_config(config_path, options)
    x = parse_point(point)
    basis = cfg.basis()
    A, B = parse_operand(spec_a, basis), parse_operand(spec_b, basis)
    result = {"x": [x.X, x.frame.mu, x.frame.nu]}
    trace_value = star_trace(A, B, x)
    result["trace_value"] = complex_pair(trace_value)
    if route in ("kernel", "both"):
        for text in (spec_a, spec_b):
            if text.strip() in NAMED_OPERATORS:
                raise NotTraceClass(f"{text!r} has a distributional symbol")
        kernel_value = star_via_kernel(operator_symbol(A), operator_symbol(B), x)
        result["kernel_value"] = complex_pair(kernel_value)
        result["abs_diff"] = abs(kernel_value - trace_value)
        if route == "kernel":
            del result["trace_value"]
            del result["abs_diff"]
    _emit(result, out_path)


@main.command()
@click.argument("state")
@click.argument("observable", type=click.Choice([o.value for o in PolyObservable]))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@config_options
@reports_errors
def mean(state, observable, out_path, config_path, **options):
    """Mean value of a polynomial observable from three tomogram slices."""
    cfg = _run_config(config_path, options)
    spec = parse_state_spec(state, cfg.convention)
    if is_classical(spec):
        raise ParseError(f"{state!r} is classical; mean values need a quantum state")
    basis = cfg.basis()
    rho = density_state(spec, basis)
    axis = cfg.x_axis()
    frames = (ReferenceFrame(1, 0), ReferenceFrame(0, 1), ReferenceFrame(1, 1))
    slices = [quantum_tomogram(rho, frame, axis) for frame in frames]
    tomographic = mean_value(slices, observable)
    trace_value = trace_product([rho.op, observable_operator(observable, basis)]).real
    _emit(
        {
            "observable": observable,
            "tomographic_value": tomographic,
            "trace_value": trace_value,
            "abs_diff": abs(tomographic - trace_value),
        },
        out_path,
    )


@main.command()
@click.argument("profile", type=click.Choice(sorted(load_profiles())), default="quick")
@click.option(
    "--out", "out_path", default="verify_report.json", type=click.Path(dir_okay=False)
)
@config_options
@reports_errors
def verify(profile, out_path, config_path, **options):
    """Run the property suite and write its report."""
    cfg = _run_config(config_path, options)
    dim_given = options.get("dim") is not None or (
        config_path is not None and "dim" in read_config_file(config_path)
    )
    suite = SuiteConfig(
        profile=profile,
        seed=cfg.seed,
        dim=cfg.dim if dim_given else None,
        smearing=cfg.smearing or 0.2,
        tolerances=cfg.tolerances,
    )
    report = run_suite(suite, progress=lambda message: logger.log(message))
    write_json(out_path, report.to_dict())
    for check in report.checks:
        if check.status != "skip":
            click.echo(f"{check.status.upper():4} {check.name} {check.measured}")
    if not report.passed:
        failed = [c.name for c in report.checks if c.status == "fail"]
        click.echo(f"{len(failed)} checks failed", err=True)
        sys.exit(1)


def _emit(payload: dict, out_path):
    if out_path:
        write_json(out_path, payload)
        click.echo(out_path)
    else:
        click.echo(json.dumps(payload))


if __name__ == "__main__":
    main()
