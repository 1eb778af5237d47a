import os
import sys

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from conduction import BoundarySchedule, Grid1D
from material import MaterialModel, preset
from radiation import SpectralBand


@pytest.fixture
def constant_material():
    return preset("constant")


@pytest.fixture
def pmma_material():
    return preset("pmma-default")


@pytest.fixture
def linear_k_material():
    # K proportional to T / 298.15
    return MaterialModel(k_ref=0.19, k_coeffs=(0.0, 1.0), rho_cp_ref=1.7e6)


@pytest.fixture
def small_grid():
    return Grid1D(0.01, 41)


@pytest.fixture
def held_schedule():
    return BoundarySchedule(ramp_rate=0.0, ramp_end=0.0, base_T=350.0, T_E=300.0, after_ramp="hold")


@pytest.fixture
def gray_band():
    return SpectralBand(lambda_lo=1e-6, lambda_hi=50e-6, beta=2.0)


@pytest.fixture(autouse=True)
def _no_log_files(monkeypatch):
    monkeypatch.setenv("THERMOFLUX_LOG_DIR", "")
