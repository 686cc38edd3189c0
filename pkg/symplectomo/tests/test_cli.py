import json
from unittest.mock import MagicMock, patch

import numpy as np
import pytest
from click.testing import CliRunner

from symplectomo import __version__
from symplectomo.cli import main
from symplectomo.formats import read_matrix_json, read_tomogram_dir


@pytest.fixture
def runner(monkeypatch):
    monkeypatch.delenv("SYMPLECTOMO_SEED", raising=False)
    return CliRunner()


def _read(path):
    with open(path) as f:
        return json.load(f)


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_tomogram_ground_state(runner, tmp_path):
    out = tmp_path / "tomo"
    result = runner.invoke(
        main, ["tomogram", "fock:0", "--frame", "1,0", "--dim", "16", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    manifest, slices = read_tomogram_dir(str(out))
    assert manifest["kind"] == "quantum"
    assert manifest["route"] == "fft"
    assert manifest["config"]["dim"] == 16
    lines = (out / "slice_0000.csv").read_text().splitlines()
    assert lines[0] == "X,w"
    assert lines[513].startswith("0,0.5641895")
    assert slices[0].normalization() == pytest.approx(1.0, abs=1e-8)


def test_tomogram_spectral_route(runner, tmp_path):
    out = tmp_path / "tomo"
    result = runner.invoke(
        main,
        ["tomogram", "fock:1", "--frame", "0.6,0.8", "--route", "spectral", "--dim", "64", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    _, slices = read_tomogram_dir(str(out))
    assert slices[0].normalization() == pytest.approx(1.0, abs=1e-3)


def test_tomogram_classical_point(runner, tmp_path):
    out = tmp_path / "point"
    result = runner.invoke(main, ["tomogram", "cpoint:1,0", "--frame", "1,0", "--out", str(out)])
    assert result.exit_code == 0, result.output
    manifest, slices = read_tomogram_dir(str(out))
    assert manifest["kind"] == "classical"
    sl = slices[0]
    assert sl.x_axis.values[np.argmax(sl.density)] == pytest.approx(1.0)


def test_tomogram_classical_mixture(runner, tmp_path):
    out = tmp_path / "mix"
    spec = "mix:0.5*cgauss:0,0,1,1,0+0.5*cgauss:1,0,1,1,0"
    result = runner.invoke(main, ["tomogram", spec, "--frame", "1,0", "--out", str(out)])
    assert result.exit_code == 0, result.output
    _, slices = read_tomogram_dir(str(out))
    expected = 0.5 * (1 + np.exp(-0.5)) / np.sqrt(2 * np.pi)
    assert slices[0].density[512] == pytest.approx(expected, abs=1e-8)


def test_tomogram_parse_error(runner, tmp_path):
    result = runner.invoke(main, ["tomogram", "fock:x", "--frame", "1,0", "--out", str(tmp_path / "t")])
    assert result.exit_code == 40
    assert "PARSE_ERROR" in result.output


def test_invert_density_round_trip(runner, tmp_path):
    tomo, inverted = tmp_path / "tomo", tmp_path / "inv"
    result = runner.invoke(main, ["tomogram", "fock:0", "--dim", "16", "--out", str(tomo)])
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        main, ["invert", str(tomo), "--target", "density", "--dim", "16", "--out", str(inverted)]
    )
    assert result.exit_code == 0, result.output
    rho = read_matrix_json(str(inverted / "density.json"))
    assert abs(rho.entries[0, 0] - 1) < 1e-3
    manifest = _read(inverted / "manifest.json")
    assert manifest["target"] == "density"
    assert manifest["output"] == "density.json"
    assert manifest["diagnostics"]["boundary_decay"] < 1e-3


def test_invert_wigner_grid(runner, tmp_path):
    tomo, inverted = tmp_path / "tomo", tmp_path / "inv"
    runner.invoke(main, ["tomogram", "fock:0", "--dim", "16", "--out", str(tomo)])
    result = runner.invoke(
        main,
        ["invert", str(tomo), "--target", "wigner", "--grid-step", "0.25", "--grid-count", "32", "--out", str(inverted)],
    )
    assert result.exit_code == 0, result.output
    manifest = _read(inverted / "manifest.json")
    assert manifest["diagnostics"]["normalization"] == pytest.approx(1.0, abs=1e-2)
    lines = (inverted / "wigner.csv").read_text().splitlines()
    assert lines[0] == "q,p,value"
    assert len(lines) == 32 * 32 + 1


def test_invert_with_short_lattice_fails(runner, tmp_path):
    tomo = tmp_path / "tomo"
    runner.invoke(main, ["tomogram", "fock:0", "--dim", "16", "--out", str(tomo)])
    result = runner.invoke(
        main, ["invert", str(tomo), "--target", "density", "--lattice-cutoff", "1", "--out", str(tmp_path / "inv")]
    )
    assert result.exit_code == 22
    assert "INSUFFICIENT_FRAME_COVERAGE" in result.output


def test_star_orthogonal_projectors(runner, tmp_path):
    out = tmp_path / "star.json"
    result = runner.invoke(
        main, ["star", "fock:0", "fock:1", "--point", "0,1,1", "--dim", "8", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    payload = _read(out)
    assert payload["x"] == [0.0, 1.0, 1.0]
    assert np.hypot(*payload["trace_value"]) < 1e-10
    assert "kernel_value" not in payload


def test_star_both_routes_agree(runner, tmp_path):
    out = tmp_path / "star.json"
    result = runner.invoke(
        main, ["star", "fock:0", "fock:0", "--point", "0,1,1", "--route", "both", "--dim", "8", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    payload = _read(out)
    assert payload["abs_diff"] < 1e-3
    assert set(payload) == {"x", "trace_value", "kernel_value", "abs_diff"}


def test_star_kernel_route_errors(runner):
    zero_nu = runner.invoke(main, ["star", "fock:0", "fock:0", "--point", "0,1,0", "--route", "kernel", "--dim", "8"])
    assert zero_nu.exit_code == 30
    assert "NU_ZERO_IN_KERNEL" in zero_nu.output
    named = runner.invoke(main, ["star", "q", "p", "--point", "0,1,1", "--route", "kernel", "--dim", "8"])
    assert named.exit_code == 33


def test_mean_value(runner, tmp_path):
    out = tmp_path / "mean.json"
    result = runner.invoke(main, ["mean", "coherent:1", "q", "--dim", "32", "--out", str(out)])
    assert result.exit_code == 0, result.output
    payload = _read(out)
    assert payload["observable"] == "q"
    assert payload["tomographic_value"] == pytest.approx(np.sqrt(2), abs=1e-4)
    assert payload["abs_diff"] < 1e-4


def test_mean_rejects_classical_states(runner):
    result = runner.invoke(main, ["mean", "cgauss:0,0,1,1,0", "q2"])
    assert result.exit_code == 40


def test_verify_rejects_zero_smearing(runner, tmp_path):
    report = tmp_path / "report.json"
    result = runner.invoke(main, ["verify", "quick", "--smearing", "0", "--out", str(report)])
    assert result.exit_code == 42
    assert "CONFIG_ERROR" in result.output
    assert not report.exists()


def test_verify_rejects_unknown_tolerance(runner, tmp_path):
    result = runner.invoke(
        main, ["verify", "quick", "--tolerance", "tomography.speed=1", "--out", str(tmp_path / "r.json")]
    )
    assert result.exit_code == 42


def test_usage_errors_use_the_error_line(runner, tmp_path):
    result = runner.invoke(
        main, ["tomogram", "fock:0", "--route", "fourier", "--out", str(tmp_path / "t")]
    )
    assert result.exit_code == 2
    assert result.output.startswith("USAGE_ERROR: ")
    assert "Usage:" not in result.output
    result = runner.invoke(main, ["star", "fock:0", "fock:1"])
    assert result.exit_code == 2
    assert "USAGE_ERROR" in result.output


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(
        main, ["tomogram", "fock:0", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "t")]
    )
    assert result.exit_code == 42
    assert result.output.startswith("CONFIG_ERROR: ")


def test_invert_missing_directory(runner, tmp_path):
    result = runner.invoke(
        main, ["invert", str(tmp_path / "nowhere"), "--target", "density", "--out", str(tmp_path / "inv")]
    )
    assert result.exit_code == 41
    assert "FORMAT_ERROR" in result.output


def test_tomogram_quantum_mixture_is_linear(runner, tmp_path):
    densities = []
    for name, spec in [("a", "fock:0"), ("b", "fock:1"), ("mix", "mix:0.5*fock:0+0.5*fock:1")]:
        out = tmp_path / name
        result = runner.invoke(main, ["tomogram", spec, "--frame", "1,0", "--out", str(out)])
        assert result.exit_code == 0, result.output
        densities.append(read_tomogram_dir(str(out))[1][0].density)
    a, b, mixed = densities
    np.testing.assert_allclose(mixed, 0.5 * (a + b), atol=1e-8)


def test_tomogram_classical_mixture_weights_must_sum_to_one(runner, tmp_path):
    spec = "mix:0.7*cgauss:0,0,1,1,0+0.7*cgauss:1,0,1,1,0"
    result = runner.invoke(main, ["tomogram", spec, "--frame", "1,0", "--out", str(tmp_path / "m")])
    assert result.exit_code == 14
    assert "INVALID_WEIGHTS" in result.output


def test_invert_density_round_trip_at_default_dim(runner, tmp_path):
    tomo, inverted = tmp_path / "tomo", tmp_path / "inv"
    result = runner.invoke(main, ["tomogram", "fock:0", "--out", str(tomo)])
    assert result.exit_code == 0, result.output
    result = runner.invoke(main, ["invert", str(tomo), "--target", "density", "--out", str(inverted)])
    assert result.exit_code == 0, result.output
    rho = read_matrix_json(str(inverted / "density.json"))
    assert rho.entries.shape == (64, 64)
    assert rho.entries[0, 0].real >= 0.999


@pytest.mark.parametrize("from_file, expected", [(True, 12), (False, None)])
def test_verify_takes_dim_from_config_file(runner, tmp_path, from_file, expected):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"dim": 12} if from_file else {"seed": 3}))
    report = MagicMock(checks=[], passed=True)
    report.to_dict.return_value = {}
    with patch("symplectomo.cli.run_suite", return_value=report) as run_suite:
        result = runner.invoke(
            main, ["verify", "quick", "--config", str(config), "--out", str(tmp_path / "r.json")]
        )
    assert result.exit_code == 0, result.output
    assert run_suite.call_args.args[0].dim == expected
