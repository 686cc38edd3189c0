"""Brute-force oracles and the consolidated property suite."""

import json
import os
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np
from scipy.integrate import trapezoid

from . import logger
from .errors import ConfigError, SupportNotCovered
from .hilbert_core import (
    BasisConfig,
    CoherentState,
    DensityMatrix,
    FockState,
    OperatorMatrix,
    ReferenceFrame,
    ThermalState,
    build_momentum,
    build_position,
    characteristic,
    density_state,
    eig_hermitian,
    exp_displacement,
    fidelity,
    hermite_functions,
    identity,
    quadrature,
    random_density,
    random_hermitian,
    trace_product,
)
from .star_product import (
    LabelPoint,
    PolyObservable,
    QuadratureConfig,
    associativity_residual,
    classical_symbol,
    dequantize_symbol,
    kernel_classical,
    kernel_dual,
    kernel_quantum,
    kernel_ratio_check,
    mean_value,
    observable_operator,
    operator_symbol,
    quantize_operator,
    regularized_identity_pairing,
    star_trace,
    star_via_kernel,
    weyl_symbol,
)
from .tomography import (
    GaussianDistribution,
    GridDistribution,
    MixtureDistribution,
    PointDistribution,
    PolarLattice,
    UniformAxis,
    classical_inverse,
    classical_tomogram,
    density_from_tomogram,
    quantum_tomogram,
    quantum_tomogram_spectral,
    tomogram_moments,
    wigner_from_tomogram,
)

PASS, FAIL, SKIP = "pass", "fail", "skip"
X_AXIS = UniformAxis(0.0, 0.05, 1024)
POINT_ORACLE_WIDTH = 0.1


# Oracles


def _as_gaussian(f):
    if isinstance(f, PointDistribution):
        return f.as_gaussian(POINT_ORACLE_WIDTH)
    return f


def _phase_space_box(f, step: float):
    f = _as_gaussian(f)
    if isinstance(f, GridDistribution):
        return f.q_axis.values, f.p_axis.values
    if isinstance(f, GaussianDistribution):
        reach = 8 * np.sqrt(np.linalg.eigvalsh(f.cov)[-1])
        q = np.arange(f.mean_q - reach, f.mean_q + reach + step / 2, step)
        p = np.arange(f.mean_p - reach, f.mean_p + reach + step / 2, step)
        return q, p
    if isinstance(f, MixtureDistribution):
        boxes = [_phase_space_box(c, step) for _, c in f.components]
        q_lo, q_hi = min(b[0][0] for b in boxes), max(b[0][-1] for b in boxes)
        p_lo, p_hi = min(b[1][0] for b in boxes), max(b[1][-1] for b in boxes)
        return (
            np.arange(q_lo, q_hi + step / 2, step),
            np.arange(p_lo, p_hi + step / 2, step),
        )
    raise TypeError(f"unsupported classical distribution {f!r}")


def _phase_space_values(f, q, p) -> np.ndarray:
    """Probability density of f on the (q, p) grid, whatever its convention."""
    f = _as_gaussian(f)
    if isinstance(f, GridDistribution):
        return np.asarray(f.values, dtype=float) / _mass_of(f)
    if isinstance(f, GaussianDistribution):
        qq, pp = np.meshgrid(q, p, indexing="ij")
        return f.density(qq, pp) / _mass_of(f)
    total = 0.0
    for weight, component in f.components:
        total = total + weight * _phase_space_values(component, q, p)
    return total


def _mass_of(f) -> float:
    return 1.0 if f.convention == "plain" else 2 * np.pi


def radon_quadrature_oracle(
    f, frame: ReferenceFrame, X, width: float = 0.05, step: float = 0.02
):
    """Direct 2D quadrature of f(q, p) * g_width(mu q + nu p - X).

    The smoothing width adds width**2 to the variance of the slice, so the
    result matches the exact tomogram only up to O(width**2 * w'').
    """
    frame.require_valid()
    q, p = _phase_space_box(f, step)
    values = _phase_space_values(f, q, p)
    edge = max(
        np.abs(values[0]).max(),
        np.abs(values[-1]).max(),
        np.abs(values[:, 0]).max(),
        np.abs(values[:, -1]).max(),
    )
    if edge > 1e-6 * np.abs(values).max():
        raise SupportNotCovered(f"quadrature box edge holds {edge:.3e}")
    if isinstance(f, GridDistribution):
        spacing = max(f.q_axis.step, f.p_axis.step)
        width = max(width, 1.5 * spacing * frame.norm)
    projection = frame.mu * q[:, None] + frame.nu * p[None, :]
    out = []
    for x in np.atleast_1d(X):
        smeared = np.exp(-0.5 * ((projection - x) / width) ** 2) / (
            np.sqrt(2 * np.pi) * width
        )
        out.append(trapezoid(trapezoid(values * smeared, p, axis=1), q))
    out = np.array(out)
    return float(out[0]) if np.ndim(X) == 0 else out


def _rotated_quadrature_vectors(dim: int, frame: ReferenceFrame, X) -> np.ndarray:
    x = np.atleast_1d(np.asarray(X, dtype=float)) / frame.norm
    phases = np.exp(1j * np.arange(dim) * frame.angle)
    return hermite_functions(x, dim) * phases[:, None]


def quadrature_oracle(rho, frame: ReferenceFrame, X) -> np.ndarray:
    """<x_theta|rho|x_theta>/r from Hermite functions rotated by exp(i n theta)."""
    frame.require_valid()
    vectors = _rotated_quadrature_vectors(rho.dim, frame, X)
    values = np.einsum("mx,mn,nx->x", vectors.conj(), rho.entries, vectors)
    return values.real / frame.norm


def trace_oracle(rho, A) -> complex:
    return complex(np.sum(rho.entries * np.asarray(A.entries).T))


# Suite plumbing


@dataclass
class CheckRecord:
    name: str
    invariant: str
    status: str
    measured: Optional[float]
    tolerance: float
    runtime_ms: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "invariant": self.invariant,
            "status": self.status,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "runtime_ms": self.runtime_ms,
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    profile: str
    seed: int
    checks: List[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def fingerprint(self) -> list:
        """Everything except runtimes."""
        return [(c.name, c.status, c.measured, c.tolerance) for c in self.checks]

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def load_profiles() -> dict:
    base_path = os.path.dirname(os.path.abspath(__file__))
    profiles_path = os.path.join(base_path, "data", "profiles.json")
    with open(profiles_path, "r") as f:
        return json.load(f)


@dataclass(frozen=True)
class SuiteConfig:
    profile: str = "quick"
    seed: int = 0
    dim: Optional[int] = None
    smearing: float = 0.2
    tolerances: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.profile not in load_profiles():
            raise ConfigError(f"unknown verify profile {self.profile!r}")
        if self.smearing <= 0:
            raise ConfigError(f"smearing must be positive, got {self.smearing}")
        if self.dim is not None and self.dim < 2:
            raise ConfigError(f"dim must be >= 2, got {self.dim}")
        for name in self.tolerances:
            if name not in CHECKS:
                raise ConfigError(f"tolerance given for unknown check {name!r}")


@dataclass
class _Context:
    rng: np.random.Generator
    dim: int
    smearing: float
    cache: Dict[str, object]


def _random_frames(rng, count):
    angles = rng.uniform(0, 2 * np.pi, count)
    norms = rng.uniform(0.5, 1.5, count)
    return [
        ReferenceFrame(r * np.cos(a), r * np.sin(a)) for r, a in zip(norms, angles)
    ]


def _law_states():
    return [FockState(n) for n in range(6)] + [
        CoherentState(1 + 0.5j),
        ThermalState(0.5),
    ]


def _label_points(rng, count):
    points = []
    for frame in _random_frames(rng, count):
        nu = frame.nu if abs(frame.nu) > 0.2 else np.copysign(0.2, frame.nu) + frame.nu
        points.append(LabelPoint.of(rng.uniform(-1, 1), frame.mu, nu))
    return points


def _low_level_density(dim: int, occupied: int, rng) -> DensityMatrix:
    """Random density supported on the lowest levels of a larger space."""
    small = random_density(occupied, rng).entries
    entries = np.zeros((dim, dim), dtype=complex)
    entries[:occupied, :occupied] = small
    return DensityMatrix(OperatorMatrix(entries))


# hilbert_core checks


def _check_hermitian_construction(ctx):
    cfg = BasisConfig(ctx.dim)
    return max(
        build_position(cfg).hermiticity_error(),
        build_momentum(cfg).hermiticity_error(),
    )


def _check_commutator(ctx):
    cfg = BasisConfig(ctx.dim)
    q, p = build_position(cfg), build_momentum(cfg)
    block = (q @ p - p @ q).entries[:-1, :-1]
    return float(np.abs(block - 1j * np.eye(ctx.dim - 1)).max())


def _check_unitarity(ctx, samples=10):
    cfg = BasisConfig(ctx.dim)
    worst = 0.0
    for mu, nu in ctx.rng.uniform(-10, 10, (samples, 2)):
        U = exp_displacement(0.0, ReferenceFrame(mu, nu), cfg).entries
        worst = max(worst, np.abs(U @ U.conj().T - np.eye(ctx.dim)).max())
    return float(worst)


def _check_unit_spectra(ctx, samples=10):
    cfg = BasisConfig(ctx.dim)
    base = eig_hermitian(build_position(cfg)).values
    worst = 0.0
    for theta in ctx.rng.uniform(0, 2 * np.pi, samples):
        values = eig_hermitian(quadrature(ReferenceFrame.unit(theta), cfg)).values
        worst = max(worst, np.abs(values - base).max())
    return float(worst)


def _check_trace_cyclicity(ctx, samples=20):
    worst = 0.0
    for _ in range(samples):
        a, b, c = (random_hermitian(ctx.dim, ctx.rng) for _ in range(3))
        worst = max(worst, abs(trace_product([a, b, c]) - trace_product([b, c, a])))
    return float(worst)


def _check_ground_characteristic(ctx, dim=32, samples=10):
    cfg = BasisConfig(dim)
    rho = density_state(FockState(0), cfg)
    worst = 0.0
    for mu, nu in ctx.rng.uniform(-2, 2, (samples, 2)):
        U = exp_displacement(0.0, ReferenceFrame(mu, nu), cfg)
        value = trace_product([rho.op, U])
        worst = max(worst, abs(value - np.exp(-(mu**2 + nu**2) / 4)))
    return float(worst)


def _check_closed_form_displacement(ctx, dim=32, occupied=8, samples=10):
    cfg = BasisConfig(dim)
    rho = _low_level_density(dim, occupied, ctx.rng)
    worst = 0.0
    for mu, nu in ctx.rng.uniform(-1.5, 1.5, (samples, 2)):
        exact = complex(characteristic(rho.op, mu, nu))
        U = exp_displacement(0.0, ReferenceFrame(mu, nu), cfg)
        worst = max(worst, abs(exact - trace_product([rho.op, U])))
    return float(worst)


# tomography checks


def _law_slices(ctx, frames):
    key = f"law_slices_{frames}"
    if key not in ctx.cache:
        cfg = BasisConfig(ctx.dim)
        frame_list = _random_frames(ctx.rng, frames)
        ctx.cache[key] = [
            (spec, frame, quantum_tomogram(density_state(spec, cfg), frame, X_AXIS))
            for spec in _law_states()
            for frame in frame_list
        ]
    return ctx.cache[key]


def _check_normalization(ctx, frames=12):
    return max(abs(sl.normalization() - 1) for _, _, sl in _law_slices(ctx, frames))


def _check_nonnegativity(ctx, frames=12):
    return max(max(0.0, -sl.density.min()) for _, _, sl in _law_slices(ctx, frames))


def _check_homogeneity(ctx, frames=12, lambdas=(-2.0, 0.5, 3.0)):
    cfg = BasisConfig(ctx.dim)
    worst = 0.0
    for spec, frame, sl in _law_slices(ctx, frames):
        rho = density_state(spec, cfg)
        for lam in lambdas:
            scaled = quantum_tomogram(rho, frame.scaled(lam), X_AXIS.scaled(lam))
            density = abs(lam) * scaled.density
            if lam < 0:
                # point n - j of the scaled axis sits at lam * X_j
                diff = np.abs(density[:0:-1] - sl.density[1:])
            else:
                diff = np.abs(density - sl.density)
            worst = max(worst, diff.max())
    return float(worst)


def _check_golden(ctx, dim=16):
    cfg = BasisConfig(dim)
    axis = UniformAxis(0.0, 0.05, 512)
    mid = axis.count // 2
    frame = ReferenceFrame(1, 0)
    ground = quantum_tomogram(density_state(FockState(0), cfg), frame, axis)
    first = quantum_tomogram(density_state(FockState(1), cfg), frame, axis)
    return max(
        abs(ground.density[mid] - 0.5641896),
        abs(first.density[mid + 20] - 0.4151075),
    )


def _check_coherent_mean(ctx, dim=32):
    rho = density_state(CoherentState(1.0), BasisConfig(dim))
    coherent = quantum_tomogram(rho, ReferenceFrame(1, 0), X_AXIS)
    return abs(tomogram_moments(coherent, 1) - 1.414214)


def _check_route_agreement(ctx, dim=64, frames=3):
    cfg = BasisConfig(dim)
    frame_list = [ReferenceFrame(1, 0)] + [
        ReferenceFrame.unit(t) for t in ctx.rng.uniform(0, 2 * np.pi, frames)
    ]
    worst = 0.0
    for spec in (FockState(0), FockState(1), ThermalState(0.5)):
        rho = density_state(spec, cfg)
        for frame in frame_list:
            fft = quantum_tomogram(rho, frame, X_AXIS).density
            spectral = quantum_tomogram_spectral(rho, frame, X_AXIS).density
            worst = max(worst, np.abs(fft - spectral).max())
    return float(worst)


def _check_optical_slice(ctx, frames=6):
    cfg = BasisConfig(ctx.dim)
    worst = 0.0
    for spec in (FockState(2), CoherentState(0.5 - 0.5j), ThermalState(0.5)):
        rho = density_state(spec, cfg)
        for theta in ctx.rng.uniform(0, 2 * np.pi, frames):
            frame = ReferenceFrame.unit(theta)
            fft = quantum_tomogram(rho, frame, X_AXIS)
            exact = quadrature_oracle(rho, frame, X_AXIS.values)
            worst = max(
                worst,
                np.abs(fft.density - exact).max(),
                abs(fft.normalization() - 1),
            )
    return float(worst)


def _check_classical_quantum(ctx, frames=6):
    rho = density_state(FockState(0), BasisConfig(ctx.dim))
    gaussian = GaussianDistribution(0.0, 0.0, 0.5, 0.5)
    worst = 0.0
    for frame in _random_frames(ctx.rng, frames):
        quantum = quantum_tomogram(rho, frame, X_AXIS).density
        classical = classical_tomogram(gaussian, frame, X_AXIS).density
        worst = max(worst, np.abs(quantum - classical).max())
    return float(worst)


def _bimodal():
    return MixtureDistribution(
        (
            (0.5, GaussianDistribution(-2.0, 0.0, 1.0, 1.0)),
            (0.5, GaussianDistribution(2.0, 0.0, 1.0, 1.0)),
        )
    )


def _check_radon_oracle(ctx):
    X = np.linspace(-3, 3, 7)
    axis = UniformAxis(0.0, 1.0, 7)
    dists = [
        GaussianDistribution(0.0, 0.0, 1.0, 1.0),
        GaussianDistribution(0.5, -0.3, 1.0, 1.2, 0.2),
        _bimodal(),
    ]
    frames = [
        ReferenceFrame(1, 1),
        ReferenceFrame(1, 0),
        ReferenceFrame(0, 1),
        ReferenceFrame(1, -1),
    ]
    worst = 0.0
    for dist in dists:
        for frame in frames:
            closed = classical_tomogram(dist, frame, axis).density
            oracle = radon_quadrature_oracle(dist, frame, X)
            worst = max(worst, np.abs(closed - oracle).max())
        doubled = 2 * radon_quadrature_oracle(dist, ReferenceFrame(2, 0), 2 * X)
        single = radon_quadrature_oracle(dist, ReferenceFrame(1, 0), X)
        worst = max(worst, np.abs(doubled - single).max())
    return float(worst)


def _check_classical_round_trip(ctx, grid=128, step=0.1):
    q_axis = p_axis = UniformAxis(0.0, step, grid)
    cases = [
        (GaussianDistribution(0.0, 0.0, 1.0, 1.0), PolarLattice()),
        (_bimodal(), PolarLattice()),
        (PointDistribution(1.0, 0.0, 0.5), PolarLattice(cutoff=8.0)),
    ]
    worst = 0.0
    for dist, lattice in cases:
        slices = [classical_tomogram(dist, f, X_AXIS) for f in lattice.unit_frames()]
        recovered = classical_inverse(slices, q_axis, p_axis, lattice)
        exact = _phase_space_values(dist, q_axis.values, p_axis.values)
        worst = max(worst, np.abs(recovered.values - exact).max())
    return float(worst)


def _unit_slices(rho, lattice, axis=X_AXIS):
    return [quantum_tomogram(rho, f, axis) for f in lattice.unit_frames()]


def _check_quantum_round_trip(ctx, dim=16, cutoff=8.0):
    cfg = BasisConfig(dim)
    lattice = PolarLattice(cutoff=cutoff)
    worst = 0.0
    for spec in (FockState(0), FockState(1), CoherentState(0.8), ThermalState(0.5)):
        rho = density_state(spec, cfg)
        recovered, _ = density_from_tomogram(_unit_slices(rho, lattice), cfg, lattice)
        worst = max(worst, 1 - fidelity(recovered.op, rho.op))
    return float(worst)


def _check_default_lattice_round_trip(ctx, dims=(16, 24)):
    lattice = PolarLattice()
    worst = 0.0
    for dim in dims:
        cfg = BasisConfig(dim)
        for spec in (FockState(0), CoherentState(0.8)):
            rho = density_state(spec, cfg)
            slices = _unit_slices(rho, lattice)
            recovered, _ = density_from_tomogram(slices, cfg, lattice)
            worst = max(worst, 1 - fidelity(recovered.op, rho.op))
    return float(worst)


def _check_wigner_round_trip(ctx, dim=16, grid=64, step=0.1):
    rho = density_state(FockState(0), BasisConfig(dim))
    lattice = PolarLattice()
    q_axis = p_axis = UniformAxis(0.0, step, grid)
    wigner = wigner_from_tomogram(_unit_slices(rho, lattice), q_axis, p_axis, lattice)
    qq, pp = np.meshgrid(q_axis.values, p_axis.values, indexing="ij")
    return float(np.abs(wigner.values - 2 * np.exp(-(qq**2) - pp**2)).max())


def _check_unit_circle(ctx, dim=8):
    cfg = BasisConfig(dim)
    lattice = PolarLattice(cutoff=6.0, radial_step=0.5, angular_step=np.pi / 16)
    wide = UniformAxis(0.0, 0.1, 1024)
    worst = 0.0
    for spec in (FockState(0), CoherentState(0.5)):
        rho = density_state(spec, cfg)
        full = [quantum_tomogram(rho, f, wide) for f in lattice.frames()]
        from_full, _ = density_from_tomogram(full, cfg, lattice)
        from_unit, _ = density_from_tomogram(_unit_slices(rho, lattice), cfg, lattice)
        worst = max(
            worst,
            abs(fidelity(from_full.op, rho.op) - fidelity(from_unit.op, rho.op)),
        )
    return float(worst)


# star_product checks


def _check_dequantizer_oracle(ctx, samples=5):
    worst = 0.0
    for point in _label_points(ctx.rng, samples):
        rho = random_density(ctx.dim, ctx.rng)
        value = dequantize_symbol(rho.op, point)
        exact = quadrature_oracle(rho, point.frame, point.X)[0]
        worst = max(worst, abs(value - exact))
    return float(worst)


def _check_trace_identity(ctx, samples=5):
    worst = 0.0
    for point in _label_points(ctx.rng, samples):
        a = random_density(ctx.dim, ctx.rng).op
        b = random_density(ctx.dim, ctx.rng).op
        vector = _rotated_quadrature_vectors(ctx.dim, point.frame, point.X)[:, 0]
        exact = vector.conj() @ (a @ b).entries @ vector / point.frame.norm
        worst = max(worst, abs(star_trace(a, b, point) - exact))
    return float(worst)


def _check_compatibility(ctx, dim=8, samples=5):
    cfg = BasisConfig(dim)
    lattice = PolarLattice()
    worst = 0.0
    for spec in (FockState(0), CoherentState(0.5)):
        rho = density_state(spec, cfg)
        op, _ = quantize_operator(_unit_slices(rho, lattice), cfg, lattice)
        for point in _label_points(ctx.rng, samples):
            diff = dequantize_symbol(op, point) - dequantize_symbol(rho.op, point)
            worst = max(worst, abs(diff))
    return float(worst)


def _check_kernel_route(ctx, pairs=20, points=5, dim=8):
    worst = 0.0
    for _ in range(pairs):
        a = random_density(dim, ctx.rng).op
        b = random_density(dim, ctx.rng).op
        fa, fb = operator_symbol(a), operator_symbol(b)
        for point in _label_points(ctx.rng, points):
            exact = star_trace(a, b, point)
            value = star_via_kernel(fa, fb, point)
            worst = max(worst, abs(value - exact) / max(abs(exact), 1e-3))
    return float(worst)


def _check_associativity_trace(ctx, triples=50, dim=8):
    worst = 0.0
    for point in _label_points(ctx.rng, triples):
        a, b, c = (random_density(dim, ctx.rng).op for _ in range(3))
        worst = max(worst, associativity_residual(a, b, c, point, "trace"))
    return float(worst)


def _check_associativity_kernel(ctx, triples=5, dim=8):
    worst = 0.0
    for point in _label_points(ctx.rng, triples):
        a, b, c = (random_density(dim, ctx.rng).op for _ in range(3))
        residual = associativity_residual(a, b, c, point, "kernel", QuadratureConfig())
        worst = max(worst, residual)
    return float(worst)


def _random_triples(rng, count):
    for _ in range(count):
        x1, x2 = (LabelPoint.of(*rng.uniform(-2, 2, 3)) for _ in range(2))
        mu, nu = rng.uniform(-2, 2), rng.choice([-1, 1]) * rng.uniform(0.1, 2)
        yield x1, x2, LabelPoint.of(rng.uniform(-2, 2), mu, nu)


def _check_classical_symmetry(ctx, triples=1000):
    worst = 0.0
    for x1, x2, x in _random_triples(ctx.rng, triples):
        forward, backward = kernel_classical(x1, x2, x), kernel_classical(x2, x1, x)
        worst = max(
            worst,
            abs(forward.prefactor - backward.prefactor),
            abs(forward.constraint_residual - backward.constraint_residual),
        )
    return float(worst)


def _check_kernel_ratio(ctx, triples=1000):
    worst = 0.0
    for x1, x2, x in _random_triples(ctx.rng, triples):
        twist = x2.frame.mu * x1.frame.nu - x1.frame.mu * x2.frame.nu
        worst = max(worst, abs(kernel_ratio_check(x1, x2, x) - np.exp(0.5j * twist)))
        quantum, classical = kernel_quantum(x1, x2, x), kernel_classical(x1, x2, x)
        if quantum.constraint_residual != classical.constraint_residual:
            worst = max(worst, 1.0)
    return float(worst)


def _check_classical_star_symmetry(ctx, samples=2):
    worst = 0.0
    for point in _label_points(ctx.rng, samples):
        a = GaussianDistribution(*ctx.rng.uniform(-1, 1, 2), 1.0, 0.8, 0.1)
        b = GaussianDistribution(*ctx.rng.uniform(-1, 1, 2), 0.7, 1.1, -0.1)
        fa, fb = classical_symbol(a), classical_symbol(b)
        forward = star_via_kernel(fa, fb, point, kernel="classical")
        backward = star_via_kernel(fb, fa, point, kernel="classical")
        worst = max(worst, abs(forward - backward))
    return float(worst)


def _check_kernel_dual(ctx, samples=3):
    cfg = BasisConfig(ctx.dim)
    worst = 0.0
    for _ in range(samples):
        x1, x2, x = _label_points(ctx.rng, 3)
        flipped = LabelPoint.of(-x.X, -x.frame.mu, -x.frame.nu)
        forward = kernel_dual(x1, x2, x, cfg, ctx.smearing)
        backward = kernel_dual(x2, x1, flipped, cfg, ctx.smearing)
        worst = max(worst, abs(backward - forward.conjugate()))
    return float(worst)


def _check_mean_values(ctx, dim=32):
    cfg = BasisConfig(dim)
    frames = (ReferenceFrame(1, 0), ReferenceFrame(0, 1), ReferenceFrame(1, 1))
    states = [FockState(n) for n in range(4)] + [
        CoherentState(1.0),
        ThermalState(0.5),
    ]
    worst = 0.0
    for spec in states:
        rho = density_state(spec, cfg)
        slices = [quantum_tomogram(rho, f, X_AXIS) for f in frames]
        for observable in PolyObservable:
            exact = trace_oracle(rho, observable_operator(observable, cfg)).real
            worst = max(worst, abs(mean_value(slices, observable) - exact))
    return float(worst)


def _check_weyl_coordinates(ctx, dim=64):
    cfg = BasisConfig(dim)
    q_op, p_op = build_position(cfg), build_momentum(cfg)
    worst = 0.0
    for q in np.linspace(-2, 2, 5):
        for p in np.linspace(-2, 2, 5):
            worst = max(
                worst,
                abs(weyl_symbol(q_op, q, p) - q),
                abs(weyl_symbol(p_op, q, p) - p),
            )
    return float(worst)


def _check_weyl_identity(ctx, dim=64):
    one = identity(BasisConfig(dim))
    grid = np.linspace(-2, 2, 5)
    return float(max(abs(weyl_symbol(one, q, p) - 1) for q in grid for p in grid))


def _check_identity_pairing(ctx, epsilon=1e-3):
    return abs(regularized_identity_pairing(epsilon) - 1)


@dataclass(frozen=True)
class _Check:
    invariant: str
    tolerance: float
    run: Callable


CHECKS: Dict[str, _Check] = {
    "hilbert_core.hermitian_construction": _Check(
        "q and p are exactly Hermitian", 0.0, _check_hermitian_construction
    ),
    "hilbert_core.canonical_commutator": _Check(
        "[q, p] = i on the leading (dim-1) block", 1e-12, _check_commutator
    ),
    "hilbert_core.exp_displacement_unitary": _Check(
        "exp_displacement is unitary", 1e-8, _check_unitarity
    ),
    "hilbert_core.unit_frame_spectra": _Check(
        "unit-frame quadratures share the spectrum of q", 1e-9, _check_unit_spectra
    ),
    "hilbert_core.trace_cyclicity": _Check(
        "Tr(ABC) = Tr(BCA)", 1e-10, _check_trace_cyclicity
    ),
    "hilbert_core.ground_state_characteristic": _Check(
        "Tr(rho0 exp(-i xi.R)) = exp(-|xi|^2/4)", 1e-6, _check_ground_characteristic
    ),
    "hilbert_core.closed_form_displacement": _Check(
        "closed-form and spectral exponentials agree on low levels",
        1e-6,
        _check_closed_form_displacement,
    ),
    "tomography.normalization": _Check(
        "slices integrate to 1", 1e-4, _check_normalization
    ),
    "tomography.nonnegativity": _Check(
        "slices are nonnegative", 1e-6, _check_nonnegativity
    ),
    "tomography.homogeneity": _Check(
        "|l| w(lX; l mu, l nu) = w(X; mu, nu)", 1e-3, _check_homogeneity
    ),
    "tomography.golden_values": _Check(
        "analytic ground and first-excited values", 1e-5, _check_golden
    ),
    "tomography.coherent_mean": _Check(
        "coherent(1) mean of q from its slice is sqrt 2", 1e-4, _check_coherent_mean
    ),
    "tomography.route_agreement": _Check(
        "FFT and spectral routes agree", 1e-3, _check_route_agreement
    ),
    "tomography.optical_slice": _Check(
        "unit-frame slices equal rotated-quadrature distributions",
        1e-6,
        _check_optical_slice,
    ),
    "tomography.classical_quantum_consistency": _Check(
        "Gaussian of covariance 1/2 matches the ground state",
        1e-4,
        _check_classical_quantum,
    ),
    "tomography.radon_oracle": _Check(
        "closed-form Radon matches direct quadrature", 1e-3, _check_radon_oracle
    ),
    "tomography.classical_round_trip": _Check(
        "classical inverse recovers the distribution",
        1e-2,
        _check_classical_round_trip,
    ),
    "tomography.quantum_round_trip": _Check(
        "density reconstruction fidelity >= 0.999", 1e-3, _check_quantum_round_trip
    ),
    "tomography.default_lattice_round_trip": _Check(
        "fidelity >= 0.999 on the default lattice",
        1e-3,
        _check_default_lattice_round_trip,
    ),
    "tomography.wigner_round_trip": _Check(
        "Wigner reconstruction of the ground state", 1e-2, _check_wigner_round_trip
    ),
    "tomography.unit_circle_sufficiency": _Check(
        "unit-circle slices reconstruct as well as the full lattice",
        1e-3,
        _check_unit_circle,
    ),
    "star_product.dequantizer_oracle": _Check(
        "symbols of densities equal quadrature distributions",
        1e-6,
        _check_dequantizer_oracle,
    ),
    "star_product.trace_route_identity": _Check(
        "star_trace(A, B) = <x|AB|x>/r", 1e-6, _check_trace_identity
    ),
    "star_product.compatibility": _Check(
        "dequantize(quantize(f)) = f", 2e-3, _check_compatibility
    ),
    "star_product.kernel_route": _Check(
        "kernel route agrees with trace route", 1e-3, _check_kernel_route
    ),
    "star_product.associativity_trace": _Check(
        "trace-route associativity", 1e-10, _check_associativity_trace
    ),
    "star_product.associativity_kernel": _Check(
        "kernel-route associativity", 2e-3, _check_associativity_kernel
    ),
    "star_product.classical_kernel_symmetry": _Check(
        "classical kernel is exchange symmetric", 0.0, _check_classical_symmetry
    ),
    "star_product.kernel_ratio": _Check(
        "quantum/classical kernel ratio is the twist phase", 1e-12, _check_kernel_ratio
    ),
    "star_product.classical_star_symmetry": _Check(
        "classical star product is commutative",
        1e-12,
        _check_classical_star_symmetry,
    ),
    "star_product.kernel_dual_conjugation": _Check(
        "K(x1, x2, x)* = K(x2, x1, -x)", 1e-10, _check_kernel_dual
    ),
    "star_product.mean_values": _Check(
        "tomographic mean values equal Tr(rho A)", 1e-4, _check_mean_values
    ),
    "star_product.weyl_coordinates": _Check(
        "Weyl symbols of q and p are the coordinates", 1e-3, _check_weyl_coordinates
    ),
    "star_product.weyl_identity": _Check(
        "Weyl symbol of the identity is 1", 1e-6, _check_weyl_identity
    ),
    "star_product.identity_pairing": _Check(
        "regularized identity pairing tends to 1", 1e-2, _check_identity_pairing
    ),
}


class SuiteRunner:
    """Runs the checks of a profile one after another.

    ``progress`` receives a message per check; ``kill()`` stops the run after
    the current check and leaves the remaining checks skipped.
    """

    def __init__(
        self, config: SuiteConfig, progress: Optional[Callable[[str], None]] = None
    ):
        self.config = config
        self.progress = progress or (lambda message: None)
        self.killed = False

    def kill(self):
        self.killed = True

    def _tolerance(self, name: str, params: dict) -> float:
        profile_tolerance = params.pop("tolerance", CHECKS[name].tolerance)
        return float(self.config.tolerances.get(name, profile_tolerance))

    def _run_check(self, name: str, ctx: _Context, params: dict, tolerance: float):
        check = CHECKS[name]
        start = time.perf_counter()
        try:
            measured = float(check.run(ctx, **params))
            status = PASS if measured <= tolerance else FAIL
            detail = ""
        except Exception as e:
            measured, status, detail = None, FAIL, f"{type(e).__name__}: {e}"
        runtime_ms = (time.perf_counter() - start) * 1000
        if status == FAIL:
            logger.log(
                f"{name} failed: measured {measured}, tolerance {tolerance} {detail}",
                1,
            )
        return CheckRecord(
            name, check.invariant, status, measured, tolerance, runtime_ms, detail
        )

    def run(self) -> SuiteReport:
        profile = load_profiles()[self.config.profile]
        dim = self.config.dim or profile.get("dim", 8)
        selected = profile.get("checks", {})
        report = SuiteReport(self.config.profile, self.config.seed)
        cache = {}
        for index, name in enumerate(CHECKS):
            params = dict(selected.get(name, {}))
            tolerance = self._tolerance(name, params)
            if name not in selected or self.killed:
                reason = "killed" if self.killed else "not in profile"
                report.checks.append(
                    CheckRecord(
                        name, CHECKS[name].invariant, SKIP, None, tolerance, 0.0, reason
                    )
                )
                continue
            self.progress(f"[{index + 1}/{len(CHECKS)}] {name}")
            seed = [self.config.seed, zlib.crc32(name.encode())]
            ctx = _Context(np.random.default_rng(seed), dim, self.config.smearing, cache)
            report.checks.append(self._run_check(name, ctx, params, tolerance))
        logger.log(
            f"verify {self.config.profile}: "
            f"{sum(c.status == PASS for c in report.checks)} passed, "
            f"{sum(c.status == FAIL for c in report.checks)} failed, "
            f"{sum(c.status == SKIP for c in report.checks)} skipped"
        )
        return report


def run_suite(
    config: SuiteConfig, progress: Optional[Callable[[str], None]] = None
) -> SuiteReport:
    return SuiteRunner(config, progress).run()
