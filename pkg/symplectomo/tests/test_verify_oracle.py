from unittest.mock import patch

import numpy as np
import pytest

from symplectomo.errors import ConfigError
from symplectomo.hilbert_core import (
    FockState,
    ReferenceFrame,
    build_position,
    density_state,
    trace_product,
)
from symplectomo.tomography import GaussianDistribution, quantum_tomogram
from symplectomo.verify_oracle import (
    CHECKS,
    FAIL,
    PASS,
    SKIP,
    SuiteConfig,
    SuiteRunner,
    _Check,
    load_profiles,
    quadrature_oracle,
    radon_quadrature_oracle,
    run_suite,
    trace_oracle,
)

TINY_PROFILES = {
    "tiny": {
        "dim": 4,
        "checks": {
            "hilbert_core.hermitian_construction": {},
            "hilbert_core.canonical_commutator": {},
            "star_product.kernel_ratio": {"triples": 10, "tolerance": 1e-9},
        },
    }
}


@pytest.fixture
def tiny_profiles():
    with patch("symplectomo.verify_oracle.load_profiles", return_value=TINY_PROFILES):
        yield TINY_PROFILES


def test_bundled_profiles_name_known_checks():
    """Every check referenced by a bundled profile exists"""
    profiles = load_profiles()
    assert {"quick", "full"} <= set(profiles)
    for profile in profiles.values():
        assert set(profile["checks"]) <= set(CHECKS)
    assert set(profiles["full"]["checks"]) == set(CHECKS)


def test_radon_oracle_example():
    """Gaussian of unit covariance at frame (1, 1): 1/sqrt(4 pi) up to the smoothing"""
    value = radon_quadrature_oracle(GaussianDistribution(0, 0, 1, 1), ReferenceFrame(1, 1), 0.0)
    assert isinstance(value, float)
    assert value == pytest.approx(0.28209479, abs=5e-4)


def test_quadrature_oracle_matches_fft_route(basis32, x_axis):
    frame = ReferenceFrame(0.6, -0.8)
    for n in range(4):
        rho = density_state(FockState(n), basis32)
        expected = quantum_tomogram(rho, frame, x_axis).density
        np.testing.assert_allclose(quadrature_oracle(rho, frame, x_axis.values), expected, atol=1e-8)


def test_trace_oracle(canonical_states, basis32):
    q = build_position(basis32)
    for rho in canonical_states:
        assert trace_oracle(rho, q) == pytest.approx(trace_product([rho.op, q]), abs=1e-12)


def test_suite_config_validation():
    with pytest.raises(ConfigError):
        SuiteConfig(profile="nightly")
    with pytest.raises(ConfigError):
        SuiteConfig(smearing=0.0)
    with pytest.raises(ConfigError):
        SuiteConfig(dim=1)
    with pytest.raises(ConfigError):
        SuiteConfig(tolerances={"tomography.speed": 1.0})


def test_runner_skips_unselected_checks(tiny_profiles):
    report = run_suite(SuiteConfig(profile="tiny"))
    statuses = {c.name: c.status for c in report.checks}
    assert list(statuses) == list(CHECKS)
    assert statuses["hilbert_core.hermitian_construction"] == PASS
    assert statuses["star_product.kernel_ratio"] == PASS
    assert statuses["tomography.normalization"] == SKIP
    assert report.passed


def test_profile_and_config_tolerances(tiny_profiles):
    """Config overrides beat profile tolerances, which beat the defaults"""
    report = run_suite(
        SuiteConfig(profile="tiny", tolerances={"hilbert_core.canonical_commutator": 0.5})
    )
    tolerances = {c.name: c.tolerance for c in report.checks}
    assert tolerances["star_product.kernel_ratio"] == 1e-9
    assert tolerances["hilbert_core.canonical_commutator"] == 0.5
    assert tolerances["hilbert_core.hermitian_construction"] == 0.0


def test_crashing_check_is_reported(tiny_profiles):
    def boom(ctx):
        raise RuntimeError("no convergence")

    crashing = _Check("always crashes", 0.0, boom)
    with patch.dict(CHECKS, {"hilbert_core.canonical_commutator": crashing}):
        report = run_suite(SuiteConfig(profile="tiny"))
    record = next(c for c in report.checks if c.name == "hilbert_core.canonical_commutator")
    assert record.status == FAIL
    assert record.measured is None
    assert "RuntimeError: no convergence" in record.detail
    assert not report.passed
    assert report.to_dict()["passed"] is False


def test_kill_skips_remaining_checks(tiny_profiles):
    messages = []
    runner = SuiteRunner(SuiteConfig(profile="tiny"))

    def progress(message):
        messages.append(message)
        runner.kill()

    runner.progress = progress
    report = runner.run()
    assert len(messages) == 1
    statuses = {c.name: (c.status, c.detail) for c in report.checks}
    assert statuses["hilbert_core.hermitian_construction"][0] == PASS
    assert statuses["star_product.kernel_ratio"] == (SKIP, "killed")


def test_fingerprint_is_deterministic(tiny_profiles):
    first = run_suite(SuiteConfig(profile="tiny", seed=7))
    second = run_suite(SuiteConfig(profile="tiny", seed=7))
    assert first.fingerprint() == second.fingerprint()
    assert first.to_dict()["seed"] == 7
    assert all("runtime_ms" in c for c in first.to_dict()["checks"])


def test_round_trip_on_default_lattice_passes():
    """fock(0) and coherent(0.8) on the L = 6 lattice at dim 16 and 24"""
    assert load_profiles()["full"]["checks"]["tomography.default_lattice_round_trip"] == {
        "dims": [16, 24]
    }
    profiles = {
        "lattice": {
            "dim": 16,
            "checks": {
                "tomography.golden_values": {},
                "tomography.coherent_mean": {},
                "tomography.default_lattice_round_trip": {"dims": [16, 24]},
            },
        }
    }
    with patch("symplectomo.verify_oracle.load_profiles", return_value=profiles):
        report = run_suite(SuiteConfig(profile="lattice"))
    records = {c.name: c for c in report.checks if c.status != SKIP}
    assert report.passed, [(c.name, c.detail) for c in records.values()]
    assert records["tomography.golden_values"].tolerance == 1e-5
    assert records["tomography.coherent_mean"].tolerance == 1e-4
    assert records["tomography.default_lattice_round_trip"].measured <= 1e-3
