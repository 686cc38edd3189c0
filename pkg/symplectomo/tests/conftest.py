import numpy as np
import pytest

from symplectomo.hilbert_core import (
    BasisConfig,
    CoherentState,
    FockState,
    ThermalState,
    density_state,
)
from symplectomo.tomography import PolarLattice, UniformAxis


@pytest.fixture
def basis8():
    """Small basis for algebra and kernel tests"""
    return BasisConfig(8)


@pytest.fixture
def basis32():
    """Basis large enough for low-lying states to be truncation free"""
    return BasisConfig(32)


@pytest.fixture
def rng():
    """Seeded random generator"""
    return np.random.default_rng(20240611)


@pytest.fixture
def x_axis():
    """Default X axis: step 0.05, 1024 points centred on 0"""
    return UniformAxis(0.0, 0.05, 1024)


@pytest.fixture
def lattice():
    """Default polar lattice with cutoff 6"""
    return PolarLattice()


@pytest.fixture
def ground_state(basis32):
    return density_state(FockState(0), basis32)


@pytest.fixture
def canonical_states(basis32):
    """Fock, coherent and thermal densities used across modules"""
    specs = [FockState(0), FockState(1), CoherentState(0.8), ThermalState(0.5)]
    return [density_state(spec, basis32) for spec in specs]
