"""Operator algebra in a truncated harmonic-oscillator (Fock) basis.

Units: hbar = mass = frequency = 1, with q = (a + a^dag)/sqrt(2) and
p = i(a^dag - a)/sqrt(2). Every operator is a dense ``dim x dim`` complex matrix.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import eval_genlaguerre, gammaln

from . import logger
from .errors import (
    ConfigError,
    DimensionMismatch,
    FockLevelOutOfRange,
    InvalidFrame,
    InvalidWeights,
    NotADensityMatrix,
    NotHermitian,
)

DEFAULT_DIM = 64
HERMITIAN_TOL = 1e-10
DENSITY_HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
RENORMALIZATION_LOG_THRESHOLD = 1e-8

# Matrix elements of D(beta) between the first dim levels are below 1e-60
# once |beta| exceeds sqrt(dim) by this much.
RADIAL_CUTOFF = 12.0


@dataclass(frozen=True)
class BasisConfig:
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigError(f"basis dimension must be an integer >= 2, got {self.dim}")


@dataclass(frozen=True)
class ReferenceFrame:
    """A direction (mu, nu) in the frame plane; X is measured along mu*q + nu*p."""

    mu: float
    nu: float

    @property
    def norm(self) -> float:
        return float(np.hypot(self.mu, self.nu))

    @property
    def angle(self) -> float:
        return float(np.arctan2(self.nu, self.mu))

    def require_valid(self):
        if self.mu == 0 and self.nu == 0:
            raise InvalidFrame("frame (0, 0) has no direction")
        if not (np.isfinite(self.mu) and np.isfinite(self.nu)):
            raise InvalidFrame(f"frame ({self.mu}, {self.nu}) is not finite")
        return self

    def scaled(self, factor: float) -> "ReferenceFrame":
        return ReferenceFrame(factor * self.mu, factor * self.nu)

    @classmethod
    def unit(cls, theta: float) -> "ReferenceFrame":
        return cls(float(np.cos(theta)), float(np.sin(theta)))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {entries.shape}")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _check(self, other: "OperatorMatrix"):
        if other.dim != self.dim:
            raise DimensionMismatch(f"dimensions {self.dim} and {other.dim} differ")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.entries @ other.entries)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.entries - other.entries)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(scalar * self.entries)

    __rmul__ = __mul__

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    op: OperatorMatrix
    psd_tol: float = PSD_TOL

    def __post_init__(self):
        herm = self.op.hermiticity_error()
        if herm > DENSITY_HERMITIAN_TOL:
            raise NotADensityMatrix(f"Hermiticity error {herm:.3e}")
        trace = self.op.trace()
        if abs(trace - 1) > TRACE_TOL:
            raise NotADensityMatrix(f"trace {trace.real:.12f} differs from 1")
        smallest = float(np.linalg.eigvalsh(self.op.entries)[0])
        if smallest < -self.psd_tol:
            raise NotADensityMatrix(f"smallest eigenvalue {smallest:.3e} is negative")

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    @property
    def dim(self) -> int:
        return self.op.dim


@dataclass(frozen=True, eq=False)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


# State specifications


@dataclass(frozen=True)
class FockState:
    n: int


@dataclass(frozen=True)
class CoherentState:
    alpha: complex


@dataclass(frozen=True)
class ThermalState:
    nbar: float


@dataclass(frozen=True)
class MixtureState:
    components: Tuple[Tuple[float, "StateSpec"], ...]


StateSpec = Union[FockState, CoherentState, ThermalState, MixtureState]


def _ladder(dim: int) -> np.ndarray:
    return np.sqrt(np.arange(1, dim) / 2.0)


def build_position(cfg: BasisConfig) -> OperatorMatrix:
    off = _ladder(cfg.dim)
    return OperatorMatrix(np.diag(off, 1) + np.diag(off, -1))


def build_momentum(cfg: BasisConfig) -> OperatorMatrix:
    off = _ladder(cfg.dim)
    return OperatorMatrix(1j * (np.diag(off, -1) - np.diag(off, 1)))


def build_annihilation(cfg: BasisConfig) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1, cfg.dim)), 1))


def identity(cfg: BasisConfig) -> OperatorMatrix:
    return OperatorMatrix(np.eye(cfg.dim))


def parity(cfg: BasisConfig) -> OperatorMatrix:
    return OperatorMatrix(np.diag((-1.0) ** np.arange(cfg.dim)))


def quadrature(frame: ReferenceFrame, cfg: BasisConfig) -> OperatorMatrix:
    """mu*q + nu*p as a single matrix."""
    off = _ladder(cfg.dim)
    upper = (frame.mu - 1j * frame.nu) * off
    return OperatorMatrix(np.diag(upper, 1) + np.diag(upper.conj(), -1))


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    log_mod = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mod) * np.exp(1j * n * np.angle(alpha))


def _renormalize(total: float, label: str) -> float:
    if abs(1 - total) > RENORMALIZATION_LOG_THRESHOLD:
        logger.log(f"{label} truncated to {total:.10f} of its norm, renormalized", 1)
    return total


def check_mixture_weights(weights: Sequence[float]) -> np.ndarray:
    weights = np.array(weights, dtype=float)
    if len(weights) == 0 or np.any(weights < 0) or abs(weights.sum() - 1) > 1e-9:
        raise InvalidWeights(
            f"mixture weights {weights.tolist()} must be >= 0 and sum to 1"
        )
    return weights


def _state_entries(spec: StateSpec, dim: int) -> np.ndarray:
    if isinstance(spec, FockState):
        if not 0 <= spec.n < dim:
            raise FockLevelOutOfRange(f"level {spec.n} outside basis of dimension {dim}")
        rho = np.zeros((dim, dim), dtype=complex)
        rho[spec.n, spec.n] = 1.0
        return rho
    if isinstance(spec, CoherentState):
        amps = _coherent_amplitudes(complex(spec.alpha), dim)
        norm = _renormalize(float(np.sum(np.abs(amps) ** 2)), f"coherent({spec.alpha})")
        amps = amps / np.sqrt(norm)
        return np.outer(amps, amps.conj())
    if isinstance(spec, ThermalState):
        if spec.nbar < 0:
            raise InvalidWeights(f"mean occupation {spec.nbar} is negative")
        if spec.nbar == 0:
            return _state_entries(FockState(0), dim)
        ratio = spec.nbar / (spec.nbar + 1.0)
        probs = ratio ** np.arange(dim) / (spec.nbar + 1.0)
        probs = probs / _renormalize(float(np.sum(probs)), f"thermal({spec.nbar})")
        return np.diag(probs).astype(complex)
    if isinstance(spec, MixtureState):
        check_mixture_weights([w for w, _ in spec.components])
        rho = np.zeros((dim, dim), dtype=complex)
        for weight, component in spec.components:
            rho = rho + weight * _state_entries(component, dim)
        return rho
    raise TypeError(f"unsupported state specification {spec!r}")


def density_state(spec: StateSpec, cfg: BasisConfig) -> DensityMatrix:
    rho = _state_entries(spec, cfg.dim)
    rho = rho / np.trace(rho).real
    return DensityMatrix(OperatorMatrix(rho))


def eig_hermitian(op: OperatorMatrix) -> EigenSystem:
    error = op.hermiticity_error()
    if error > HERMITIAN_TOL:
        raise NotHermitian(f"Hermiticity error {error:.3e} exceeds {HERMITIAN_TOL}")
    values, vectors = linalg.eigh(op.entries)
    return EigenSystem(values, vectors)


def exp_displacement(s: float, frame: ReferenceFrame, cfg: BasisConfig) -> OperatorMatrix:
    """exp(i*s - i*(mu*q + nu*p)) through the eigendecomposition of mu*q + nu*p."""
    eig = eig_hermitian(quadrature(frame, cfg))
    phases = np.exp(1j * (s - eig.values))
    return OperatorMatrix((eig.vectors * phases) @ eig.vectors.conj().T)


def displacement_radial(t, dim: int) -> np.ndarray:
    """Phase-free part R_mn(|beta|) of <m|D(beta)|n>, shape t.shape + (dim, dim).

    <m|D(beta)|n> = R_mn(|beta|) * exp(i*(m - n)*arg(beta)).
    """
    t = np.asarray(t, dtype=float)
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    low = np.minimum(m, n)
    gap = np.abs(m - n)
    sign = np.where(m < n, (-1.0) ** gap, 1.0)
    base = 0.5 * (gammaln(low + 1) - gammaln(low + gap + 1))

    flat = t.reshape(-1)
    out = np.zeros((flat.size, dim, dim))
    live = flat < np.sqrt(dim) + RADIAL_CUTOFF
    if np.any(live):
        tt = flat[live][:, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            log_pref = base - 0.5 * tt**2 + np.where(gap == 0, 0.0, gap * np.log(tt))
            values = sign * np.exp(log_pref) * eval_genlaguerre(low, gap, tt**2)
        out[live] = np.nan_to_num(values, nan=0.0)
    return out.reshape(t.shape + (dim, dim))


def displacement(beta: complex, cfg: BasisConfig) -> OperatorMatrix:
    radial = displacement_radial(abs(beta), cfg.dim)
    gap = np.subtract.outer(np.arange(cfg.dim), np.arange(cfg.dim))
    return OperatorMatrix(radial * np.exp(1j * gap * np.angle(beta)))


def weyl_beta(mu, nu):
    """exp(-i(mu*q + nu*p)) = D(beta) with this beta."""
    return (np.asarray(nu) - 1j * np.asarray(mu)) / np.sqrt(2.0)


def characteristic(op: OperatorMatrix, mu, nu, chunk: int = 4096) -> np.ndarray:
    """Tr(op * exp(-i(mu*q + nu*p))) for broadcast arrays mu, nu."""
    mu, nu = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(nu, dtype=float))
    beta = weyl_beta(mu, nu).reshape(-1)
    dim = op.dim
    levels = np.arange(dim)
    out = np.zeros(beta.size, dtype=complex)
    # Tr(A D) = sum_mn A_nm R_mn e^{i m phi} e^{-i n phi}
    a_t = op.entries.T
    step = max(1, min(chunk, 2**22 // dim**2))
    for start in range(0, beta.size, step):
        part = beta[start : start + step]
        radial = displacement_radial(np.abs(part), dim)
        phase = np.exp(1j * np.outer(np.angle(part), levels))
        out[start : start + step] = np.einsum(
            "mn,pmn,pm,pn->p", a_t, radial, phase, phase.conj()
        )
    return out.reshape(mu.shape)


def trace_product(ops: Sequence[OperatorMatrix]) -> complex:
    if not ops:
        raise ValueError("trace_product needs at least one operator")
    dim = ops[0].dim
    for op in ops[1:]:
        if op.dim != dim:
            raise DimensionMismatch(f"dimensions {dim} and {op.dim} differ")
    if len(ops) == 1:
        return ops[0].trace()
    head = ops[0].entries
    for op in ops[1:-1]:
        head = head @ op.entries
    return complex(np.sum(head * ops[-1].entries.T))


def fidelity(a: OperatorMatrix, b: OperatorMatrix) -> float:
    overlap = trace_product([a, b]).real
    return overlap / max(trace_product([a, a]).real, trace_product([b, b]).real)


def hermite_functions(x, dim: int) -> np.ndarray:
    """psi_n(x) = <x|n> for n < dim, shape (dim, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = np.zeros((dim, x.size))
    psi[0] = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if dim > 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for n in range(1, dim - 1):
        psi[n + 1] = np.sqrt(2.0 / (n + 1)) * x * psi[n] - np.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def random_hermitian(dim: int, rng: np.random.Generator) -> OperatorMatrix:
    raw = rng.uniform(-1, 1, (dim, dim)) + 1j * rng.uniform(-1, 1, (dim, dim))
    return OperatorMatrix(0.5 * (raw + raw.conj().T))


def random_density(dim: int, rng: np.random.Generator) -> DensityMatrix:
    raw = rng.uniform(-1, 1, (dim, dim)) + 1j * rng.uniform(-1, 1, (dim, dim))
    gram = raw @ raw.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    return DensityMatrix(OperatorMatrix(gram / np.trace(gram).real))
