"""Run configuration and the state-specification grammar used by the CLI."""

import json
import os
import re
from typing import Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import logger
from .errors import ConfigError, ParseError
from .hilbert_core import (
    BasisConfig,
    CoherentState,
    FockState,
    MixtureState,
    OperatorMatrix,
    ReferenceFrame,
    StateSpec,
    ThermalState,
    density_state,
)
from .star_product import LabelPoint, PolyObservable, observable_operator
from .tomography import (
    ClassicalDistribution,
    GaussianDistribution,
    MixtureDistribution,
    PointDistribution,
    PolarLattice,
    UniformAxis,
)

SEED_ENV_VAR = "SYMPLECTOMO_SEED"
NAMED_OPERATORS = ("q", "p", "1")


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(64, ge=2, description="Fock truncation N")
    x_center: float = Field(0.0, description="center of the X axis")
    x_step: float = Field(0.05, gt=0, description="X axis step")
    x_count: int = Field(1024, ge=8, description="number of X samples")
    lattice_cutoff: float = Field(6.0, gt=0, description="polar lattice cutoff L")
    lattice_radial_step: float = Field(0.1, gt=0, description="polar lattice dr")
    lattice_angular_step: float = Field(
        np.pi / 64, gt=0, description="polar lattice dtheta"
    )
    frames: Optional[Tuple[Tuple[float, float], ...]] = Field(
        None, description="explicit frames instead of the lattice directions"
    )
    smearing: Optional[float] = Field(
        None, gt=0, description="smearing width epsilon"
    )
    coverage_tol: float = Field(1e-3, gt=0, description="boundary |G| tolerance")
    grid_step: float = Field(0.1, gt=0, description="q/p grid step for inversion")
    grid_count: int = Field(128, ge=8, description="q/p grid points per axis")
    convention: Literal["plain", "wigner"] = Field(
        "wigner", description="classical normalization convention"
    )
    seed: int = Field(0, description="random seed")
    tolerances: Dict[str, float] = Field(
        default_factory=dict, description="per-check tolerance overrides"
    )

    def basis(self) -> BasisConfig:
        return BasisConfig(self.dim)

    def x_axis(self) -> UniformAxis:
        return UniformAxis(self.x_center, self.x_step, self.x_count)

    def grid_axis(self) -> UniformAxis:
        return UniformAxis(0.0, self.grid_step, self.grid_count)

    def lattice(self) -> PolarLattice:
        return PolarLattice(
            self.lattice_cutoff, self.lattice_radial_step, self.lattice_angular_step
        )

    def frame_list(self) -> List[ReferenceFrame]:
        if self.frames is not None:
            return [ReferenceFrame(mu, nu) for mu, nu in self.frames]
        return self.lattice().unit_frames()


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(loc) for loc in item["loc"]) or "config"
        parts.append(f"{where}: {item['msg']}")
    return "; ".join(parts)


def load_defaults() -> dict:
    base_path = os.path.dirname(os.path.abspath(__file__))
    defaults_path = os.path.join(base_path, "data", "defaults.json")
    with open(defaults_path, "r") as f:
        return json.load(f)


def read_config_file(path: str) -> dict:
    try:
        with open(path, "r") as f:
            from_file = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(from_file, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return from_file


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, object]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Packaged defaults < config file < overrides < SYMPLECTOMO_SEED."""
    data = load_defaults()
    if path is not None:
        data.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    environ = os.environ if environ is None else environ
    if environ.get(SEED_ENV_VAR):
        try:
            data["seed"] = int(environ[SEED_ENV_VAR])
        except ValueError:
            raise ConfigError(
                f"{SEED_ENV_VAR} must be an integer, got {environ[SEED_ENV_VAR]!r}"
            )
        logger.log(f"seed taken from {SEED_ENV_VAR}: {data['seed']}")
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(_describe(e))


# State specifications

_MIX_SPLIT = re.compile(r"\+(?=[^+*]*\*)")


def _numbers(token: str, args: str, count: Tuple[int, ...]) -> List[float]:
    fields = args.split(",") if args else []
    if len(fields) not in count:
        raise ParseError(f"{token!r} expects {' or '.join(map(str, count))} values")
    try:
        return [float(x) for x in fields]
    except ValueError:
        raise ParseError(f"{token!r} holds a non-numeric value")


def _single_spec(token: str, convention: str):
    kind, sep, args = token.strip().partition(":")
    if not sep:
        raise ParseError(f"{token!r} is not of the form kind:values")
    if kind == "fock":
        if not args.strip().isdigit():
            raise ParseError(f"{token!r} needs a nonnegative integer level")
        return FockState(int(args))
    if kind == "coherent":
        values = _numbers(token, args, (1, 2))
        return CoherentState(complex(values[0], values[1] if len(values) == 2 else 0.0))
    if kind == "thermal":
        return ThermalState(_numbers(token, args, (1,))[0])
    if kind == "cgauss":
        q0, p0, sqq, spp, sqp = _numbers(token, args, (5,))
        try:
            return GaussianDistribution(q0, p0, sqq, spp, sqp, convention)
        except ValueError as e:
            raise ParseError(f"{token!r}: {e}")
    if kind == "cpoint":
        q0, p0 = _numbers(token, args, (2,))
        return PointDistribution(q0, p0, convention=convention)
    raise ParseError(f"unknown state kind {kind!r} in {token!r}")


def is_classical(spec) -> bool:
    return isinstance(
        spec,
        (GaussianDistribution, PointDistribution, MixtureDistribution),
    )


def parse_state_spec(
    text: str, convention: str = "wigner"
) -> Union[StateSpec, ClassicalDistribution]:
    """Parse fock:n | coherent:re[,im] | thermal:nbar | cgauss:q0,p0,sqq,spp,sqp
    | cpoint:q0,p0 | mix:w1*spec1+w2*spec2."""
    text = text.strip()
    if not text.startswith("mix:"):
        return _single_spec(text, convention)
    components = []
    for part in _MIX_SPLIT.split(text[len("mix:") :]):
        weight, sep, token = part.partition("*")
        if not sep:
            raise ParseError(f"mixture term {part!r} is not of the form weight*spec")
        try:
            weight = float(weight)
        except ValueError:
            raise ParseError(f"mixture weight {weight!r} is not a number")
        if token.strip().startswith("mix:"):
            raise ParseError(f"nested mixture {token!r}")
        components.append((weight, _single_spec(token, convention)))
    kinds = {is_classical(spec) for _, spec in components}
    if len(kinds) != 1:
        raise ParseError(f"{text!r} mixes classical and quantum components")
    if kinds.pop():
        return MixtureDistribution(tuple(components), convention)
    return MixtureState(tuple(components))


def parse_operand(text: str, cfg: BasisConfig) -> OperatorMatrix:
    """A quantum state (as its density matrix) or one of the operators q, p, 1."""
    text = text.strip()
    if text in NAMED_OPERATORS:
        return observable_operator(PolyObservable(text), cfg)
    spec = parse_state_spec(text)
    if is_classical(spec):
        raise ParseError(f"{text!r} is classical; star operands are quantum")
    return density_state(spec, cfg).op


def parse_floats(text: str, count: int, what: str) -> List[float]:
    fields = text.split(",")
    if len(fields) != count:
        raise ParseError(f"{what} {text!r} needs {count} comma-separated values")
    try:
        return [float(x) for x in fields]
    except ValueError:
        raise ParseError(f"{what} {text!r} holds a non-numeric value")


def parse_frame(text: str) -> ReferenceFrame:
    mu, nu = parse_floats(text, 2, "frame")
    return ReferenceFrame(mu, nu)


def parse_point(text: str) -> LabelPoint:
    X, mu, nu = parse_floats(text, 3, "point")
    return LabelPoint.of(X, mu, nu)
