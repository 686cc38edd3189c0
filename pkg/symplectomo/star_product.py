"""Tomographic symbols and their star products.

The dequantizer U(X, mu, nu) = delta(X - mu q - nu p) maps an operator A to
its symbol f_A(X, mu, nu) = Tr(A U); the quantizer
D(X, mu, nu) = (1/2pi) exp(i(X - mu q - nu p)) maps it back. Star products are
computed either through the operator product (trace route) or through the
closed-form kernels (kernel route).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, signal
from scipy.interpolate import CubicSpline
from scipy.special import erfc

from . import logger
from .errors import (
    MissingRequiredFrame,
    NotTraceClass,
    NuZeroInKernel,
    QuadratureNotConverged,
)
from .hilbert_core import (
    RADIAL_CUTOFF,
    BasisConfig,
    OperatorMatrix,
    ReferenceFrame,
    build_momentum,
    build_position,
    displacement,
    displacement_radial,
    eig_hermitian,
    exp_displacement,
    identity,
    quadrature,
    trace_product,
    weyl_beta,
)
from .tomography import (
    DEFAULT_COVERAGE_TOL,
    GaussianDistribution,
    MixtureDistribution,
    PointDistribution,
    PolarLattice,
    ReconstructionDiagnostics,
    TomogramSlice,
    characteristic_density,
    reconstruct_operator,
    tomogram_moments,
)

TRACE_CLASS = "trace_class_numeric"
DISTRIBUTIONAL = "distributional"
FRAME_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class LabelPoint:
    X: float
    frame: ReferenceFrame

    @classmethod
    def of(cls, X: float, mu: float, nu: float) -> "LabelPoint":
        return cls(float(X), ReferenceFrame(float(mu), float(nu)))


@dataclass(frozen=True)
class KernelValue:
    """prefactor * delta(constraint_residual)."""

    constraint_residual: float
    prefactor: complex


# Symbol maps


def dequantize_symbol(A: OperatorMatrix, x: LabelPoint) -> complex:
    return complex(characteristic_density(A, x.frame, [x.X])[0])


def quantize_operator(
    slices: Sequence[TomogramSlice],
    cfg: BasisConfig,
    lattice: PolarLattice,
    coverage_tol: float = DEFAULT_COVERAGE_TOL,
) -> Tuple[OperatorMatrix, ReconstructionDiagnostics]:
    return reconstruct_operator(slices, cfg, lattice, coverage_tol)


def star_trace(A: OperatorMatrix, B: OperatorMatrix, x: LabelPoint) -> complex:
    return dequantize_symbol(A @ B, x)


def dual_symbol(A: OperatorMatrix, x: LabelPoint) -> complex:
    D = exp_displacement(x.X, x.frame, BasisConfig(A.dim))
    return trace_product([A, D]) / (2 * np.pi)


# Closed-form kernels


def _frame_sums(x1: LabelPoint, x2: LabelPoint, x: LabelPoint):
    mu_sum = x1.frame.mu + x2.frame.mu
    nu_sum = x1.frame.nu + x2.frame.nu
    residual = x.frame.mu * nu_sum - x.frame.nu * mu_sum
    return nu_sum, residual


def kernel_quantum(x1: LabelPoint, x2: LabelPoint, x: LabelPoint) -> KernelValue:
    if x.frame.nu == 0:
        raise NuZeroInKernel("the closed-form kernel needs nu != 0 at the output point")
    nu_sum, residual = _frame_sums(x1, x2, x)
    twist = x1.frame.nu * x2.frame.mu - x2.frame.nu * x1.frame.mu
    phase = 0.5 * (twist + 2 * x1.X + 2 * x2.X - 2 * nu_sum * x.X / x.frame.nu)
    return KernelValue(residual, np.exp(1j * phase) / (4 * np.pi**2))


def kernel_classical(x1: LabelPoint, x2: LabelPoint, x: LabelPoint) -> KernelValue:
    if x.frame.nu == 0:
        raise NuZeroInKernel("the closed-form kernel needs nu != 0 at the output point")
    nu_sum, residual = _frame_sums(x1, x2, x)
    phase = x1.X + x2.X - nu_sum * x.X / x.frame.nu
    return KernelValue(residual, np.exp(1j * phase) / (4 * np.pi**2))


def kernel_ratio_check(x1: LabelPoint, x2: LabelPoint, x: LabelPoint) -> complex:
    return kernel_quantum(x1, x2, x).prefactor / kernel_classical(x1, x2, x).prefactor


def kernel_dual(
    x1: LabelPoint,
    x2: LabelPoint,
    x: LabelPoint,
    cfg: BasisConfig,
    width: float = 0.2,
) -> complex:
    """Tr(U(x2) U(x1) D(x)) with spectrally smeared dequantizers."""

    def smeared(point: LabelPoint) -> OperatorMatrix:
        point.frame.require_valid()
        eig = eig_hermitian(quadrature(point.frame, cfg))
        g = np.exp(-0.5 * ((point.X - eig.values) / width) ** 2) / (
            np.sqrt(2 * np.pi) * width
        )
        return OperatorMatrix((eig.vectors * g) @ eig.vectors.conj().T)

    D = exp_displacement(x.X, x.frame, cfg) * (1 / (2 * np.pi))
    return trace_product([smeared(x2), smeared(x1), D])


# Symbol fields


class _RadialCharacteristic:
    """Spline of G_A(mu, nu) = Tr(A exp(i(mu q + nu p))) by level gap."""

    STEP = 0.005

    def __init__(self, A: OperatorMatrix):
        dim = A.dim
        self.dim = dim
        self.t_max = np.sqrt(dim) + RADIAL_CUTOFF
        t = np.linspace(0.0, self.t_max, int(np.ceil(self.t_max / self.STEP)) + 1)
        gaps = np.arange(-(dim - 1), dim)
        columns = np.empty((t.size, gaps.size), dtype=complex)
        chunk = max(1, 2**21 // dim**2)
        for start in range(0, t.size, chunk):
            products = displacement_radial(t[start : start + chunk], dim) * A.entries.T
            # component d collects the elements with m - n = d
            columns[start : start + chunk] = np.stack(
                [np.diagonal(products, offset=-d, axis1=1, axis2=2).sum(-1) for d in gaps],
                axis=1,
            )
        self.gaps = gaps
        self.spline = CubicSpline(t, np.hstack([columns.real, columns.imag]), axis=0)

    def __call__(self, mu, nu) -> np.ndarray:
        mu, nu = np.broadcast_arrays(np.asarray(mu, float), np.asarray(nu, float))
        beta = weyl_beta(-mu, -nu).reshape(-1)
        radius = np.abs(beta)
        out = np.zeros(beta.size, dtype=complex)
        live = radius <= self.t_max
        if np.any(live):
            raw = self.spline(radius[live])
            width = self.gaps.size
            comps = raw[:, :width] + 1j * raw[:, width:]
            phase = np.exp(1j * np.outer(np.angle(beta[live]), self.gaps))
            out[live] = np.sum(comps * phase, axis=1)
        return out.reshape(mu.shape)


@dataclass(frozen=True, eq=False)
class SymbolField:
    """A tomographic symbol f(X, mu, nu).

    ``transform`` is the closed-form G(mu, nu) = integral f(X, mu, nu) e^{iX} dX
    when one exists. ``support`` bounds |(mu, nu)| where G is not negligible and
    ``extent`` is the phase-space radius of the symbol, i.e. its X half-width
    per unit frame norm.
    """

    evaluator: Callable
    kind: str = TRACE_CLASS
    transform: Optional[Callable] = None
    support: float = 12.0
    extent: float = 8.0

    def __call__(self, X, mu, nu):
        return self.evaluator(X, mu, nu)

    def x_transform(self, mu, nu) -> np.ndarray:
        if self.transform is not None:
            return self.transform(mu, nu)
        mu, nu = np.broadcast_arrays(np.asarray(mu, float), np.asarray(nu, float))
        flat_mu = mu.reshape(-1)
        flat_nu = nu.reshape(-1)
        radius = np.hypot(flat_mu, flat_nu)
        # the origin is reached as a limit along the mu axis
        origin = radius < 1e-12
        flat_mu = np.where(origin, 1e-12, flat_mu)
        radius = np.where(origin, 1e-12, radius)
        u = np.arange(-self.extent, self.extent + 1e-12, 0.02)
        X = radius[:, None] * u[None, :]
        values = self.evaluator(X, flat_mu[:, None], flat_nu[:, None])
        out = integrate.trapezoid(values * np.exp(1j * X), u, axis=1) * radius
        return out.reshape(mu.shape)


def _occupied_block(A: OperatorMatrix, rel_tol: float = 1e-14) -> OperatorMatrix:
    """A restricted to the levels up to the last non-negligible row or column."""
    magnitude = np.abs(A.entries)
    live = np.nonzero(
        (magnitude.max(axis=0) > rel_tol * magnitude.max())
        | (magnitude.max(axis=1) > rel_tol * magnitude.max())
    )[0]
    size = max(2, int(live[-1]) + 1) if live.size else 2
    if size == A.dim:
        return A
    return OperatorMatrix(A.entries[:size, :size])


def operator_symbol(A: OperatorMatrix) -> SymbolField:
    A = _occupied_block(A)
    G = _RadialCharacteristic(A)

    def evaluator(X, mu, nu):
        X, mu, nu = np.broadcast_arrays(
            np.asarray(X, float), np.asarray(mu, float), np.asarray(nu, float)
        )
        flat = zip(X.reshape(-1), mu.reshape(-1), nu.reshape(-1))
        values = [dequantize_symbol(A, LabelPoint.of(*point)) for point in flat]
        return np.array(values, dtype=complex).reshape(X.shape)

    return SymbolField(
        evaluator,
        TRACE_CLASS,
        G,
        support=np.sqrt(2.0) * (np.sqrt(A.dim) + 6.0),
        extent=np.sqrt(2 * A.dim + 1) + 3.0,
    )


def _gaussian_parts(dist):
    if isinstance(dist, PointDistribution):
        if dist.width is None:
            raise ValueError("point symbols need an explicit width")
        dist = dist.as_gaussian(dist.width)
    if isinstance(dist, GaussianDistribution):
        return [(1.0, dist)]
    if isinstance(dist, MixtureDistribution):
        parts = []
        for weight, component in dist.components:
            parts.extend((weight * w, g) for w, g in _gaussian_parts(component))
        return parts
    raise TypeError(f"no closed-form symbol for {dist!r}")


def classical_symbol(dist) -> SymbolField:
    """Symbol of a Gaussian, point or mixture distribution (its tomogram)."""
    parts = _gaussian_parts(dist)

    def evaluator(X, mu, nu):
        total = 0.0
        for weight, g in parts:
            mean = mu * g.mean_q + nu * g.mean_p
            var = mu**2 * g.cov_qq + 2 * mu * nu * g.cov_qp + nu**2 * g.cov_pp
            total = total + weight * np.exp(-0.5 * (X - mean) ** 2 / var) / np.sqrt(
                2 * np.pi * var
            )
        return total

    def transform(mu, nu):
        total = 0.0
        for weight, g in parts:
            var = mu**2 * g.cov_qq + 2 * mu * nu * g.cov_qp + nu**2 * g.cov_pp
            total = total + weight * np.exp(
                1j * (mu * g.mean_q + nu * g.mean_p) - 0.5 * var
            )
        return np.asarray(total, dtype=complex)

    smallest = min(np.linalg.eigvalsh(g.cov)[0] for _, g in parts)
    largest = max(np.linalg.eigvalsh(g.cov)[-1] for _, g in parts)
    reach = max(np.hypot(g.mean_q, g.mean_p) for _, g in parts)
    return SymbolField(
        evaluator,
        TRACE_CLASS,
        transform,
        support=float(np.sqrt(2 * np.log(1e10) / smallest)),
        extent=float(reach + 7 * np.sqrt(largest)),
    )


# Kernel-route star product


@dataclass(frozen=True)
class QuadratureConfig:
    """Trapezoid steps for the kernel route; None derives them from the symbols.

    The eta grid is aligned with the output frame and t moves along it in
    steps of 2 * eta_step / |xi|, so ``t_step`` only caps the eta step.
    """

    eta_step: Optional[float] = None
    t_step: Optional[float] = None
    rel_tol: float = 1e-3
    abs_floor: float = 1e-3
    max_refinements: int = 2


def _frame_grid(f: SymbolField, x: LabelPoint, step: float, half: int) -> np.ndarray:
    """G_f at m*step along the frame direction plus k*step across it."""
    r = x.frame.norm
    u = np.array([x.frame.mu, x.frame.nu]) / r
    v = np.array([-u[1], u[0]])
    index = step * np.arange(-half, half + 1)
    along, across = np.meshgrid(index, index, indexing="ij")
    mu = along * u[0] + across * v[0]
    nu = along * u[1] + across * v[1]
    values = np.zeros(mu.shape, dtype=complex)
    keep = np.hypot(mu, nu) <= f.support
    if np.any(keep):
        values[keep] = f.x_transform(mu[keep], nu[keep])
    return values


def _kernel_sum(ga: np.ndarray, gb: np.ndarray, x: LabelPoint, step: float, kernel: str):
    """Trapezoid sum of the delta-resolved kernel integral on a frame grid.

    With eta = j*step along the frame, k*step across it and t*|xi|/2 = n*step,
    xi1 sits at (n + j, k) and xi2 at (n - j, -k), so the eta sum for every t
    is a convolution along the frame direction.
    """
    half = (ga.shape[0] - 1) // 2
    r = x.frame.norm
    conv = signal.fftconvolve(ga, gb[:, ::-1], axes=0)[::2]
    n = np.arange(-half, half + 1)
    if kernel == "quantum":
        k = np.arange(-half, half + 1)
        # (i/2) t (mu eta_nu - nu eta_mu) = i n k step^2
        conv = conv * np.exp(1j * step**2 * np.outer(n, k))
    inner = conv.sum(axis=1) * step**2
    t_step = 2 * step / r
    phases = np.exp(-1j * t_step * n * x.X)
    return complex(phases @ inner) * t_step / (4 * np.pi**2)


def star_via_kernel(
    fa: SymbolField,
    fb: SymbolField,
    x: LabelPoint,
    quad: QuadratureConfig = QuadratureConfig(),
    kernel: str = "quantum",
) -> complex:
    """Star product of two symbols through the closed-form kernel.

    The delta constraint is resolved with xi1 + xi2 = t*xi and
    xi1,2 = t*xi/2 +- eta, which leaves
    (1/4pi^2) int dt e^{-itX} int d^2eta G_A(xi1) G_B(xi2) e^{(i/2) t (mu eta_nu - nu eta_mu)}
    (no phase for the classical kernel). Both symbols are sampled once per
    step size; the coarse sum reuses every other sample of the fine grid.
    """
    if kernel not in ("quantum", "classical"):
        raise ValueError(f"unknown kernel {kernel!r}")
    for f in (fa, fb):
        if f.kind != TRACE_CLASS:
            raise NotTraceClass("the kernel route needs trace-class symbols")
    if x.frame.nu == 0:
        raise NuZeroInKernel("the closed-form kernel needs nu != 0 at the output point")
    x.frame.require_valid()
    norm = x.frame.norm
    reach = fa.support + fb.support
    radius = fa.extent + fb.extent
    step = quad.eta_step or 2 * np.pi / (radius + reach / 2)
    t_step = quad.t_step or 2 * np.pi / (abs(x.X) + norm * radius)
    step = min(step, 0.5 * t_step * norm)
    support = max(fa.support, fb.support)

    def fine_sum(step):
        half = 2 * int(np.ceil(support / (2 * step)))
        ga = _frame_grid(fa, x, step, half)
        gb = _frame_grid(fb, x, step, half)
        coarse = _kernel_sum(ga[::2, ::2], gb[::2, ::2], x, 2 * step, kernel)
        return coarse, _kernel_sum(ga, gb, x, step, kernel)

    coarse, fine = fine_sum(step)
    for refinement in range(quad.max_refinements + 1):
        change = abs(fine - coarse)
        if change <= quad.rel_tol * max(abs(fine), quad.abs_floor):
            return fine
        if refinement == quad.max_refinements:
            break
        step = step / 2
        logger.log(f"kernel quadrature refined to eta step {step:.4f}")
        coarse, fine = fine, fine_sum(step)[1]
    raise QuadratureNotConverged(
        f"halving the steps still changes the result by {change:.3e}"
    )


def associativity_residual(
    A: OperatorMatrix,
    B: OperatorMatrix,
    C: OperatorMatrix,
    x: LabelPoint,
    route: str = "trace",
    quad: QuadratureConfig = QuadratureConfig(),
) -> float:
    if route == "trace":
        left = dequantize_symbol((A @ B) @ C, x)
        right = dequantize_symbol(A @ (B @ C), x)
    elif route == "kernel":
        left = star_via_kernel(operator_symbol(A @ B), operator_symbol(C), x, quad)
        right = star_via_kernel(operator_symbol(A), operator_symbol(B @ C), x, quad)
    else:
        raise ValueError(f"unknown route {route!r}")
    return abs(left - right)


# Mean values


class PolyObservable(str, Enum):
    ONE = "1"
    Q = "q"
    P = "p"
    Q2 = "q2"
    P2 = "p2"
    QP_PQ = "qp+pq"


def _slice_at(slices: Sequence[TomogramSlice], mu: float, nu: float) -> TomogramSlice:
    for sl in slices:
        if abs(sl.frame.mu - mu) <= FRAME_MATCH_TOL and abs(sl.frame.nu - nu) <= FRAME_MATCH_TOL:
            return sl
    raise MissingRequiredFrame(f"no slice at frame ({mu:g}, {nu:g})")


def mean_value(slices: Sequence[TomogramSlice], observable) -> float:
    observable = PolyObservable(observable)
    if observable is PolyObservable.ONE:
        return _slice_at(slices, 1, 0).normalization()
    if observable is PolyObservable.Q:
        return tomogram_moments(_slice_at(slices, 1, 0), 1)
    if observable is PolyObservable.P:
        return tomogram_moments(_slice_at(slices, 0, 1), 1)
    if observable is PolyObservable.Q2:
        return tomogram_moments(_slice_at(slices, 1, 0), 2)
    if observable is PolyObservable.P2:
        return tomogram_moments(_slice_at(slices, 0, 1), 2)
    diagonal = tomogram_moments(_slice_at(slices, 1, 1), 2)
    return (
        diagonal
        - tomogram_moments(_slice_at(slices, 1, 0), 2)
        - tomogram_moments(_slice_at(slices, 0, 1), 2)
    )


def observable_operator(observable, cfg: BasisConfig) -> OperatorMatrix:
    observable = PolyObservable(observable)
    q, p = build_position(cfg), build_momentum(cfg)
    return {
        PolyObservable.ONE: identity(cfg),
        PolyObservable.Q: q,
        PolyObservable.P: p,
        PolyObservable.Q2: q @ q,
        PolyObservable.P2: p @ p,
        PolyObservable.QP_PQ: q @ p + p @ q,
    }[observable]


# Weyl symbols


def weyl_symbol(A: OperatorMatrix, q: float, p: float) -> complex:
    """W_A(q, p) = 2 Tr(A D(2 alpha) Pi), alpha = (q + ip)/sqrt(2).

    Evaluated as 2 sum_k (-1)^k g(k) <k|D(alpha)^dag A D(alpha)|k> with a smooth
    taper g that stops the alternating sum before the displaced states reach
    the truncation edge.
    """
    dim = A.dim
    alpha = (q + 1j * p) / np.sqrt(2.0)
    room = np.sqrt(dim) - abs(alpha) - 1.0
    top = room**2 if room > 0 else 0.0
    if top < 9:
        logger.log(
            f"Weyl symbol at |alpha| = {abs(alpha):.3f} is outside the accurate "
            f"region of dim {dim}",
            1,
        )
        top = max(top, 1.0)
    k = np.arange(dim)
    taper = 0.5 * erfc((k - top / 2) / (top / 8))
    M = displacement(-alpha, BasisConfig(dim)).entries
    diagonal = np.einsum("km,mn,kn->k", M, A.entries, M.conj())
    return complex(2 * np.sum((-1.0) ** k * taper * diagonal))


# Distributional symbols


@dataclass(frozen=True)
class DistributionalTerm:
    """coefficient * g(X) * delta^(mu_order)(mu) * delta^(nu_order)(nu)."""

    coefficient: float
    profile: str  # "abs" for |X|, "xabs" for X|X|
    mu_order: int
    nu_order: int

    def profile_values(self, X):
        return np.abs(X) if self.profile == "abs" else X * np.abs(X)


def _regularized_profile_integral(profile: str, epsilon: float) -> complex:
    """integral g(X) e^{iX - eps X^2} dX over the real line."""
    if profile == "abs":
        half, _ = integrate.quad(
            lambda t: t * np.exp(-epsilon * t * t), 0, np.inf, weight="cos", wvar=1.0
        )
        return complex(2 * half)
    half, _ = integrate.quad(
        lambda t: t * t * np.exp(-epsilon * t * t), 0, np.inf, weight="sin", wvar=1.0
    )
    return 2j * half


@dataclass(frozen=True)
class DistributionalSymbol:
    terms: Tuple[DistributionalTerm, ...]

    def pair(
        self, test: Callable, h: float = 1e-3, x_max: float = 40.0, x_step: float = 0.01
    ) -> complex:
        """Pairing with a smooth test symbol test(X, mu, nu) decaying in X."""
        X = np.arange(-x_max, x_max + x_step / 2, x_step)
        total = 0.0
        for term in self.terms:
            if term.mu_order == 0 and term.nu_order == 0:
                deriv = test(X, 0.0, 0.0)
            elif term.nu_order == 0:
                deriv = (test(X, h, 0.0) - test(X, -h, 0.0)) / (2 * h)
            else:
                deriv = (test(X, 0.0, h) - test(X, 0.0, -h)) / (2 * h)
            sign = (-1) ** (term.mu_order + term.nu_order)
            total = total + sign * term.coefficient * integrate.trapezoid(
                term.profile_values(X) * deriv, X
            )
        return complex(total)

    def quantize(self, cfg: BasisConfig, epsilon: float = 1e-3) -> OperatorMatrix:
        """Pairing with the quantizer under the e^{-eps X^2} regularization."""
        generators = {
            (0, 0): identity(cfg),
            (1, 0): build_position(cfg) * (-1j),
            (0, 1): build_momentum(cfg) * (-1j),
        }
        total = identity(cfg) * 0.0
        for term in self.terms:
            weight = term.coefficient / (2 * np.pi)
            weight *= _regularized_profile_integral(term.profile, epsilon)
            weight *= (-1) ** (term.mu_order + term.nu_order)
            total = total + generators[(term.mu_order, term.nu_order)] * weight
        return total


def distributional_symbol(which: str) -> DistributionalSymbol:
    terms = {
        "identity": (DistributionalTerm(-np.pi, "abs", 0, 0),),
        "position": (DistributionalTerm(np.pi / 2, "xabs", 1, 0),),
        "momentum": (DistributionalTerm(np.pi / 2, "xabs", 0, 1),),
    }
    if which not in terms:
        raise ValueError(f"no distributional symbol for {which!r}")
    return DistributionalSymbol(terms[which])


def regularized_identity_pairing(epsilon: float) -> float:
    """(1/2pi) * (-pi) * integral |X| e^{iX - eps X^2} dX, tending to 1."""
    return float((-0.5 * _regularized_profile_integral("abs", epsilon)).real)
