"""Symplectic tomograms of classical and quantum states and their inversion.

A tomogram slice w(X; mu, nu) is the distribution of X = mu*q + nu*p. For a
quantum state it is computed from the characteristic function
chi(k) = Tr(rho exp(-ik(mu q + nu p))) by an FFT on a k-grid matched to the
X-axis, or from the spectral decomposition of mu q + nu p. Inversion goes
through G(xi) = integral w(X; xi) e^{iX} dX sampled on a polar lattice.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage
from scipy.integrate import simpson, trapezoid
from scipy.interpolate import CubicSpline

from . import logger
from .errors import (
    ImaginaryResidueTooLarge,
    InsufficientFrameCoverage,
    NotNormalized,
    NyquistViolation,
    SupportNotCovered,
)
from .hilbert_core import (
    RADIAL_CUTOFF,
    BasisConfig,
    DensityMatrix,
    OperatorMatrix,
    ReferenceFrame,
    characteristic,
    check_mixture_weights,
    displacement_radial,
    eig_hermitian,
    hermite_functions,
    quadrature,
)

CONVENTIONS = ("plain", "wigner")
NYQUIST_TOL = 1e-8
EDGE_TOL = 1e-6
IMAG_TOL_SLICE = 1e-8
IMAG_TOL_INVERSE = 1e-6
NORMALIZATION_TOL = 1e-3
DEFAULT_COVERAGE_TOL = 1e-3
RECONSTRUCTION_PSD_TOL = 1e-6


@dataclass(frozen=True)
class UniformAxis:
    center: float
    step: float
    count: int

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"axis step must be positive, got {self.step}")
        if self.count < 2:
            raise ValueError(f"axis needs at least 2 points, got {self.count}")

    @property
    def values(self) -> np.ndarray:
        return self.center + (np.arange(self.count) - self.count // 2) * self.step

    def scaled(self, factor: float) -> "UniformAxis":
        return UniformAxis(factor * self.center, abs(factor) * self.step, self.count)


# Classical distributions


def _mass(convention: str) -> float:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    return 1.0 if convention == "plain" else 2 * np.pi


@dataclass(frozen=True)
class GaussianDistribution:
    mean_q: float
    mean_p: float
    cov_qq: float
    cov_pp: float
    cov_qp: float = 0.0
    convention: str = "plain"

    def __post_init__(self):
        _mass(self.convention)
        if self.cov_qq <= 0 or self.cov_qq * self.cov_pp - self.cov_qp**2 <= 0:
            raise ValueError("covariance must be positive definite")

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mean_q, self.mean_p])

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.cov_qq, self.cov_qp], [self.cov_qp, self.cov_pp]])

    def density(self, q, p) -> np.ndarray:
        dq = np.asarray(q) - self.mean_q
        dp = np.asarray(p) - self.mean_p
        det = self.cov_qq * self.cov_pp - self.cov_qp**2
        quad = (self.cov_pp * dq**2 - 2 * self.cov_qp * dq * dp + self.cov_qq * dp**2) / det
        return _mass(self.convention) * np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(det))


@dataclass(frozen=True, eq=False)
class GridDistribution:
    q_axis: UniformAxis
    p_axis: UniformAxis
    values: np.ndarray
    convention: str = "plain"

    def __post_init__(self):
        _mass(self.convention)
        values = np.array(self.values, dtype=float)
        if values.shape != (self.q_axis.count, self.p_axis.count):
            raise ValueError(f"grid values have shape {values.shape}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def density(self, q, p) -> np.ndarray:
        qi = (np.asarray(q) - self.q_axis.values[0]) / self.q_axis.step
        pi = (np.asarray(p) - self.p_axis.values[0]) / self.p_axis.step
        return ndimage.map_coordinates(
            self.values, [qi, pi], order=3, mode="grid-constant", cval=0.0
        )


@dataclass(frozen=True)
class PointDistribution:
    """A point mass.

    Slices render it as a Gaussian of width ``width`` in X, whatever the frame
    norm; without a width the slice uses twice the X step. Phase-space uses
    (inversion oracles, symbols) take the isotropic Gaussian of ``as_gaussian``.
    """

    q0: float
    p0: float
    width: Optional[float] = None
    convention: str = "plain"

    def as_gaussian(self, default_width: float) -> GaussianDistribution:
        width = self.width if self.width is not None else default_width
        return GaussianDistribution(
            self.q0, self.p0, width**2, width**2, 0.0, self.convention
        )


@dataclass(frozen=True)
class MixtureDistribution:
    components: Tuple[Tuple[float, "ClassicalDistribution"], ...]
    convention: str = "plain"

    def __post_init__(self):
        check_mixture_weights([w for w, _ in self.components])


ClassicalDistribution = Union[
    GaussianDistribution, GridDistribution, PointDistribution, MixtureDistribution
]


@dataclass(frozen=True, eq=False)
class TomogramSlice:
    frame: ReferenceFrame
    x_axis: UniformAxis
    density: np.ndarray

    def __post_init__(self):
        density = np.array(self.density, dtype=float)
        if density.shape != (self.x_axis.count,):
            raise ValueError(f"density has shape {density.shape}")
        density.flags.writeable = False
        object.__setattr__(self, "density", density)

    def normalization(self) -> float:
        return float(trapezoid(self.density, self.x_axis.values))


@dataclass(frozen=True, eq=False)
class WignerGrid:
    q_axis: UniformAxis
    p_axis: UniformAxis
    values: np.ndarray

    def normalization(self) -> float:
        inner = trapezoid(self.values, self.p_axis.values, axis=1)
        return float(trapezoid(inner, self.q_axis.values)) / (2 * np.pi)


@dataclass(frozen=True)
class PolarLattice:
    cutoff: float = 6.0
    radial_step: float = 0.1
    angular_step: float = np.pi / 64

    def __post_init__(self):
        if self.cutoff <= 0 or self.radial_step <= 0 or self.angular_step <= 0:
            raise ValueError("lattice cutoff and steps must be positive")

    @property
    def radii(self) -> np.ndarray:
        return np.linspace(0.0, self.cutoff, int(round(self.cutoff / self.radial_step)) + 1)

    @property
    def angles(self) -> np.ndarray:
        return self.angular_step * np.arange(int(round(2 * np.pi / self.angular_step)))

    def unit_frames(self):
        half = int(round(np.pi / self.angular_step))
        return [ReferenceFrame.unit(theta) for theta in self.angles[:half]]

    def frames(self):
        return [
            ReferenceFrame(r * np.cos(theta), r * np.sin(theta))
            for r in self.radii[1:]
            for theta in self.angles
        ]


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class ReconstructionDiagnostics:
    hermiticity_error: float
    trace_deviation: float
    boundary_decay: float
    min_eigenvalue: float

    def as_dict(self) -> dict:
        return {
            "hermiticity_error": self.hermiticity_error,
            "trace_deviation": self.trace_deviation,
            "boundary_decay": self.boundary_decay,
            "min_eigenvalue": self.min_eigenvalue,
        }


# Classical forward transform


def _normal_pdf(x, mean, var):
    return np.exp(-0.5 * (x - mean) ** 2 / var) / np.sqrt(2 * np.pi * var)


def _check_grid_support(dist: GridDistribution):
    values = dist.values
    edge = max(
        np.abs(values[0]).max(),
        np.abs(values[-1]).max(),
        np.abs(values[:, 0]).max(),
        np.abs(values[:, -1]).max(),
    )
    if edge > EDGE_TOL * np.abs(values).max():
        raise SupportNotCovered(f"grid distribution is {edge:.3e} at its boundary")


def _grid_line_integral(dist: GridDistribution, frame: ReferenceFrame, X) -> np.ndarray:
    _check_grid_support(dist)
    q = dist.q_axis.values
    p = dist.p_axis.values
    mu, nu = frame.mu, frame.nu
    # integrate along the grid axis that is least parallel to the line
    if abs(nu) >= abs(mu):
        along = q
        other = (X[:, None] - mu * q[None, :]) / nu
        qi = np.broadcast_to(np.arange(q.size)[None, :], other.shape)
        pi = (other - p[0]) / dist.p_axis.step
        scale = abs(nu)
    else:
        along = p
        other = (X[:, None] - nu * p[None, :]) / mu
        qi = (other - q[0]) / dist.q_axis.step
        pi = np.broadcast_to(np.arange(p.size)[None, :], other.shape)
        scale = abs(mu)
    samples = ndimage.map_coordinates(
        dist.values, [qi, pi], order=3, mode="grid-constant", cval=0.0
    )
    line = trapezoid(samples, along, axis=1) / scale
    return np.clip(line, 0.0, None) / _mass(dist.convention)


def _classical_density(f: ClassicalDistribution, frame: ReferenceFrame, X, step: float):
    if isinstance(f, PointDistribution):
        width = f.width if f.width is not None else 2 * step
        return _normal_pdf(X, frame.mu * f.q0 + frame.nu * f.p0, width**2)
    if isinstance(f, GaussianDistribution):
        mean = frame.mu * f.mean_q + frame.nu * f.mean_p
        var = (
            frame.mu**2 * f.cov_qq
            + 2 * frame.mu * frame.nu * f.cov_qp
            + frame.nu**2 * f.cov_pp
        )
        return _normal_pdf(X, mean, var)
    if isinstance(f, GridDistribution):
        return _grid_line_integral(f, frame, X)
    if isinstance(f, MixtureDistribution):
        total = np.zeros_like(X, dtype=float)
        for weight, component in f.components:
            total = total + weight * _classical_density(component, frame, X, step)
        return total
    raise TypeError(f"unsupported classical distribution {f!r}")


def classical_tomogram(
    f: ClassicalDistribution, frame: ReferenceFrame, x_axis: UniformAxis
) -> TomogramSlice:
    frame.require_valid()
    density = _classical_density(f, frame, x_axis.values, x_axis.step)
    return TomogramSlice(frame, x_axis, density)


# Quantum forward transforms


def _operator(rho) -> OperatorMatrix:
    return rho.op if isinstance(rho, DensityMatrix) else rho


def _band_density(op: OperatorMatrix, frame: ReferenceFrame, x_axis: UniformAxis):
    """Complex symbol density on x_axis by FFT of the characteristic function."""
    count, step = x_axis.count, x_axis.step
    dk = 2 * np.pi / (count * step)
    k = (np.arange(count) - count // 2) * dk
    chi = characteristic(op, k * frame.mu, k * frame.nu)
    scale = np.abs(chi).max()
    edge = max(abs(chi[0]), abs(chi[-1]))
    if scale > 0 and edge > NYQUIST_TOL * scale:
        raise NyquistViolation(
            f"characteristic function is {edge / scale:.3e} of its peak at the band "
            f"edge; reduce the X step below {step}"
        )
    chi = chi * np.exp(1j * k * x_axis.center)
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(chi))) / step


def _check_edges(density: np.ndarray, what: str):
    peak = np.abs(density).max()
    edge = max(abs(density[0]), abs(density[-1]))
    if peak > 0 and edge > EDGE_TOL * peak:
        raise SupportNotCovered(f"{what} is {edge / peak:.3e} of its peak at the axis edge")


def quantum_tomogram(rho, frame: ReferenceFrame, x_axis: UniformAxis) -> TomogramSlice:
    frame.require_valid()
    values = _band_density(_operator(rho), frame, x_axis)
    residue = np.abs(values.imag).max()
    if residue > IMAG_TOL_SLICE * max(np.abs(values.real).max(), 1e-300):
        raise ImaginaryResidueTooLarge(f"slice imaginary part {residue:.3e}")
    _check_edges(values.real, "tomogram")
    result = TomogramSlice(frame, x_axis, values.real)
    norm = result.normalization()
    if abs(norm - 1) > 1e-4:
        logger.log(f"slice at ({frame.mu:g}, {frame.nu:g}) integrates to {norm:.6f}", 1)
    return result


def characteristic_density(op: OperatorMatrix, frame: ReferenceFrame, X) -> np.ndarray:
    """(1/2pi) * integral e^{ikX} Tr(op exp(-ik(mu q + nu p))) dk at arbitrary X."""
    frame.require_valid()
    X = np.atleast_1d(np.asarray(X, dtype=float))
    dim = op.dim
    r = frame.norm
    support = r * (np.sqrt(2 * dim + 1) + 6.0)
    k_max = (np.sqrt(dim) + RADIAL_CUTOFF) * np.sqrt(2.0) / r
    dk = np.pi / (support + np.abs(X).max())
    k = dk * np.arange(-int(np.ceil(k_max / dk)), int(np.ceil(k_max / dk)) + 1)
    chi = characteristic(op, k * frame.mu, k * frame.nu)
    return dk / (2 * np.pi) * (np.exp(1j * np.outer(X, k)) @ chi)


def spectral_measure(rho, frame: ReferenceFrame) -> SpectralMeasure:
    op = _operator(rho)
    eig = eig_hermitian(quadrature(frame, BasisConfig(op.dim)))
    weights = np.einsum("nj,nm,mj->j", eig.vectors.conj(), op.entries, eig.vectors).real
    total = weights.sum()
    if abs(total - 1) > 1e-10 or weights.min() < -1e-12:
        logger.log(
            f"spectral weights sum to {total:.12f}, smallest {weights.min():.3e}", 1
        )
    return SpectralMeasure(eig.values, weights)


def quantum_tomogram_spectral(
    rho,
    frame: ReferenceFrame,
    x_axis: UniformAxis,
    smearing: str = "cell",
    width: Optional[float] = None,
) -> TomogramSlice:
    """Tomogram from the eigen-decomposition of mu q + nu p.

    ``smearing="gaussian"`` places a Gaussian of ``width`` (default twice the
    X step) on every node. The default ``smearing="cell"`` instead divides
    each spectral weight by the Christoffel cell of its node and interpolates
    the node densities. Eigenvalue spacing of a truncated quadrature is
    several X steps, so Gaussian deltas of width 2*step leave ripples well
    above 1e-3 against the FFT route; the cell form stays within it at
    dim >= 64. The CLI switches to the Gaussian form when ``--smearing`` is
    given.
    """
    frame.require_valid()
    measure = spectral_measure(rho, frame)
    X = x_axis.values
    if smearing == "gaussian":
        eps = width if width is not None else 2 * x_axis.step
        density = _normal_pdf(X[:, None], measure.nodes[None, :], eps**2) @ measure.weights
        return TomogramSlice(frame, x_axis, density)
    if smearing != "cell":
        raise ValueError(f"unknown smearing {smearing!r}")
    r = frame.norm
    dim = _operator(rho).dim
    cells = np.sum(hermite_functions(measure.nodes / r, dim) ** 2, axis=0)
    node_density = measure.weights * cells / r
    spline = CubicSpline(measure.nodes, node_density)
    inside = (X >= measure.nodes[0]) & (X <= measure.nodes[-1])
    density = np.where(inside, spline(np.clip(X, measure.nodes[0], measure.nodes[-1])), 0.0)
    return TomogramSlice(frame, x_axis, density)


def tomogram_moments(slice_: TomogramSlice, order: int) -> float:
    if order not in (1, 2):
        raise ValueError(f"moment order must be 1 or 2, got {order}")
    X = slice_.x_axis.values
    norm = slice_.normalization()
    if abs(norm - 1) > NORMALIZATION_TOL:
        raise NotNormalized(f"slice integrates to {norm:.6f}")
    return float(trapezoid(X**order * slice_.density, X))


# Inversion


def _trapezoid_weights(axis: UniformAxis) -> np.ndarray:
    weights = np.full(axis.count, axis.step)
    weights[[0, -1]] *= 0.5
    return weights


def _matching_slices(slices: Sequence[TomogramSlice], theta: float):
    """Slices parallel to direction theta with their signed frame norm."""
    found = []
    for sl in slices:
        norm = sl.frame.norm
        if norm == 0:
            continue
        cross = np.cos(theta) * sl.frame.nu - np.sin(theta) * sl.frame.mu
        if abs(cross) > 1e-9 * norm:
            continue
        dot = np.cos(theta) * sl.frame.mu + np.sin(theta) * sl.frame.nu
        found.append((sl, norm if dot > 0 else -norm))
    return found


def characteristic_samples(
    slices: Sequence[TomogramSlice],
    lattice: PolarLattice,
    coverage_tol: float = DEFAULT_COVERAGE_TOL,
) -> np.ndarray:
    """G(r, theta) = integral w(X; r*u) e^{iX} dX on the polar lattice.

    A slice along s*u serves every radius r on that ray through
    G(r*u) = integral w(X; s*u) e^{i(r/s)X} dX.
    """
    radii = lattice.radii
    angles = lattice.angles
    G = np.empty((radii.size, angles.size), dtype=complex)
    for j, theta in enumerate(angles):
        found = _matching_slices(slices, theta)
        if not found:
            raise InsufficientFrameCoverage(f"no slice along direction {theta:.6f} rad")
        signed = np.array([s for _, s in found])
        for i, r in enumerate(radii):
            pick = int(np.argmin(np.abs(np.abs(signed) - r)))
            sl, s = found[pick]
            X = sl.x_axis.values
            weights = _trapezoid_weights(sl.x_axis) * sl.density
            G[i, j] = np.exp(1j * (r / s) * X) @ weights
    boundary = float(np.abs(G[-1]).max())
    if boundary > coverage_tol:
        raise InsufficientFrameCoverage(
            f"|G| = {boundary:.3e} at the lattice cutoff {lattice.cutoff}; "
            "increase the cutoff"
        )
    return G


def _radial_weights(radii: np.ndarray) -> np.ndarray:
    return simpson(np.eye(radii.size), x=radii, axis=1)


def _fourier_inversion(
    G: np.ndarray,
    lattice: PolarLattice,
    q_axis: UniformAxis,
    p_axis: UniformAxis,
    prefactor: float,
) -> np.ndarray:
    radii = lattice.radii
    q, p = np.meshgrid(q_axis.values, p_axis.values, indexing="ij")
    q = q.reshape(-1)
    p = p.reshape(-1)
    radial = _radial_weights(radii) * radii
    total = np.zeros(q.size, dtype=complex)
    for j, theta in enumerate(lattice.angles):
        s = q * np.cos(theta) + p * np.sin(theta)
        total += np.exp(-1j * np.outer(s, radii)) @ (radial * G[:, j])
    values = prefactor * lattice.angular_step * total
    residue = np.abs(values.imag).max()
    if residue > IMAG_TOL_INVERSE * np.abs(values.real).max():
        raise ImaginaryResidueTooLarge(f"reconstruction imaginary part {residue:.3e}")
    return values.real.reshape(q_axis.count, p_axis.count)


def classical_inverse(
    slices: Sequence[TomogramSlice],
    q_axis: UniformAxis,
    p_axis: UniformAxis,
    lattice: PolarLattice,
    convention: str = "plain",
    coverage_tol: float = DEFAULT_COVERAGE_TOL,
) -> GridDistribution:
    G = characteristic_samples(slices, lattice, coverage_tol)
    prefactor = _mass(convention) / (4 * np.pi**2)
    values = _fourier_inversion(G, lattice, q_axis, p_axis, prefactor)
    lowest = values.min()
    if lowest < 0:
        logger.log(f"clipped reconstruction undershoot {lowest:.3e}")
    return GridDistribution(q_axis, p_axis, np.clip(values, 0.0, None), convention)


def wigner_from_tomogram(
    slices: Sequence[TomogramSlice],
    q_axis: UniformAxis,
    p_axis: UniformAxis,
    lattice: PolarLattice,
    coverage_tol: float = DEFAULT_COVERAGE_TOL,
) -> WignerGrid:
    G = characteristic_samples(slices, lattice, coverage_tol)
    values = _fourier_inversion(G, lattice, q_axis, p_axis, 1 / (2 * np.pi))
    return WignerGrid(q_axis, p_axis, values)


def reconstruct_operator(
    slices: Sequence[TomogramSlice],
    cfg: BasisConfig,
    lattice: PolarLattice,
    coverage_tol: float = DEFAULT_COVERAGE_TOL,
) -> Tuple[OperatorMatrix, ReconstructionDiagnostics]:
    """(1/2pi) * integral G(xi) exp(-i xi.R) d^2 xi in the Fock basis."""
    G = characteristic_samples(slices, lattice, coverage_tol)
    dim = cfg.dim
    radii = lattice.radii
    gaps = np.arange(-(dim - 1), dim)
    # angular Fourier components of G for every level gap m - n
    harmonics = lattice.angular_step * (G @ np.exp(1j * np.outer(lattice.angles, gaps)))
    levels = np.arange(dim)
    gap = np.subtract.outer(levels, levels)
    index = gap + dim - 1
    radial = displacement_radial(radii / np.sqrt(2.0), dim)
    integrand = radial * harmonics[:, index] * np.exp(-0.5j * np.pi * gap)
    weights = _radial_weights(radii) * radii
    entries = np.tensordot(weights, integrand, axes=(0, 0)) / (2 * np.pi)
    op = OperatorMatrix(entries)
    hermitian = 0.5 * (entries + entries.conj().T)
    diagnostics = ReconstructionDiagnostics(
        hermiticity_error=op.hermiticity_error(),
        trace_deviation=abs(op.trace() - 1),
        boundary_decay=float(np.abs(G[-1]).max()),
        min_eigenvalue=float(np.linalg.eigvalsh(hermitian)[0]),
    )
    return op, diagnostics


def density_from_tomogram(
    slices: Sequence[TomogramSlice],
    cfg: BasisConfig,
    lattice: PolarLattice,
    coverage_tol: float = DEFAULT_COVERAGE_TOL,
) -> Tuple[DensityMatrix, ReconstructionDiagnostics]:
    op, diagnostics = reconstruct_operator(slices, cfg, lattice, coverage_tol)
    logger.log(
        "reconstruction: hermiticity error {hermiticity_error:.3e}, trace deviation "
        "{trace_deviation:.3e}, boundary |G| {boundary_decay:.3e}, smallest "
        "eigenvalue {min_eigenvalue:.3e}".format(**diagnostics.as_dict())
    )
    entries = 0.5 * (op.entries + op.entries.conj().T)
    entries = entries / np.trace(entries).real
    # lattice truncation leaves a small negative tail in the spectrum
    values, vectors = np.linalg.eigh(entries)
    clipped = float(-values[values < 0].sum())
    if clipped > 0:
        logger.log(f"clipped negative reconstruction spectrum of mass {clipped:.3e}")
        values = np.clip(values, 0.0, None)
        values = values / values.sum()
        entries = (vectors * values) @ vectors.conj().T
        entries = 0.5 * (entries + entries.conj().T)
    rho = DensityMatrix(OperatorMatrix(entries), psd_tol=RECONSTRUCTION_PSD_TOL)
    return rho, diagnostics
