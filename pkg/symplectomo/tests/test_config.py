import json

import numpy as np
import pytest

from symplectomo.config import (
    RunConfig,
    is_classical,
    load_config,
    load_defaults,
    parse_frame,
    parse_operand,
    parse_point,
    parse_state_spec,
    read_config_file,
)
from symplectomo.errors import ConfigError, ParseError
from symplectomo.hilbert_core import (
    BasisConfig,
    CoherentState,
    FockState,
    MixtureState,
    ThermalState,
    build_position,
)
from symplectomo.tomography import (
    GaussianDistribution,
    MixtureDistribution,
    PointDistribution,
)


def test_defaults_are_a_valid_config():
    cfg = load_config(environ={})
    assert cfg == RunConfig(**load_defaults())
    assert cfg.dim == 64
    assert cfg.convention == "wigner"
    assert cfg.x_axis().count == 1024
    assert len(cfg.frame_list()) == 64


def test_precedence(tmp_path):
    """Defaults < config file < explicit overrides < environment seed"""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"dim": 16, "seed": 3, "x_step": 0.1}))
    cfg = load_config(str(path), {"dim": 24, "x_count": None}, environ={})
    assert cfg.dim == 24
    assert cfg.seed == 3
    assert cfg.x_step == 0.1
    assert cfg.x_count == 1024
    seeded = load_config(str(path), environ={"SYMPLECTOMO_SEED": "11"})
    assert seeded.seed == 11


def test_explicit_frames():
    cfg = load_config(overrides={"frames": ((1.0, 0.0), (0.5, 0.5))}, environ={})
    assert [(f.mu, f.nu) for f in cfg.frame_list()] == [(1.0, 0.0), (0.5, 0.5)]


@pytest.mark.parametrize(
    "overrides",
    [{"smearing": 0.0}, {"dim": 1}, {"x_step": -0.05}, {"convention": "husimi"}, {"colour": 1}],
)
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides, environ={})


def test_bad_config_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{dim: 4")
    with pytest.raises(ConfigError):
        load_config(str(broken), environ={})
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(str(listed), environ={})
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"), environ={})


def test_bad_seed_variable():
    with pytest.raises(ConfigError):
        load_config(environ={"SYMPLECTOMO_SEED": "seven"})


def test_config_is_frozen():
    cfg = load_config(environ={})
    with pytest.raises(Exception):
        cfg.dim = 8


def test_parse_quantum_states():
    assert parse_state_spec("fock:3") == FockState(3)
    assert parse_state_spec("coherent:1") == CoherentState(1 + 0j)
    assert parse_state_spec("coherent:0.5,-0.25") == CoherentState(0.5 - 0.25j)
    assert parse_state_spec(" thermal:0.5 ") == ThermalState(0.5)
    mix = parse_state_spec("mix:0.25*fock:0+0.75*coherent:1,-0.5")
    assert isinstance(mix, MixtureState)
    assert mix.components == ((0.25, FockState(0)), (0.75, CoherentState(1 - 0.5j)))


def test_parse_classical_states():
    gauss = parse_state_spec("cgauss:0,0,1,1,0", "plain")
    assert gauss == GaussianDistribution(0, 0, 1, 1, 0, "plain")
    point = parse_state_spec("cpoint:1,-2")
    assert isinstance(point, PointDistribution)
    assert point.convention == "wigner"
    mix = parse_state_spec("mix:0.5*cgauss:0,0,1,1,0+0.5*cpoint:1,0")
    assert isinstance(mix, MixtureDistribution)
    assert is_classical(mix)
    assert not is_classical(FockState(0))


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("fock:-1", "fock:-1"),
        ("fock", "fock"),
        ("squeezed:0.5", "squeezed"),
        ("coherent:1,2,3", "coherent:1,2,3"),
        ("thermal:abc", "thermal:abc"),
        ("cgauss:0,0,-1,1,0", "cgauss:0,0,-1,1,0"),
        ("mix:0.5*fock:0+0.5*cpoint:0,0", "mixes"),
        ("mix:half*fock:0", "half"),
        ("mix:fock:0", "weight"),
    ],
)
def test_parse_errors_name_the_token(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_state_spec(text)


def test_parse_operand():
    cfg = BasisConfig(8)
    np.testing.assert_array_equal(parse_operand("q", cfg).entries, build_position(cfg).entries)
    assert parse_operand("fock:1", cfg).entries[1, 1] == 1.0
    with pytest.raises(ParseError):
        parse_operand("cpoint:0,0", cfg)


def test_parse_frame_and_point():
    frame = parse_frame("1,-0.5")
    assert (frame.mu, frame.nu) == (1.0, -0.5)
    point = parse_point("0.5,1,1")
    assert (point.X, point.frame.mu, point.frame.nu) == (0.5, 1.0, 1.0)
    with pytest.raises(ParseError):
        parse_frame("1")
    with pytest.raises(ParseError):
        parse_point("a,b,c")


def test_read_config_file(tmp_path):
    good = tmp_path / "good.json"
    good.write_text('{"dim": 12}')
    assert read_config_file(str(good)) == {"dim": 12}
    with pytest.raises(ConfigError, match="cannot read"):
        read_config_file(str(tmp_path / "missing.json"))
    listed = tmp_path / "list.json"
    listed.write_text("[1]")
    with pytest.raises(ConfigError, match="JSON object"):
        read_config_file(str(listed))
