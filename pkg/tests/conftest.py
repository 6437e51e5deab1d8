"""Shared fixtures: settings without file logging and the scenes used across the suite."""

import math
import os
import sys
from pathlib import Path

os.environ.setdefault("MODMIRROR_LOG_TO_FILE", "false")

# Add project root to path
ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

import pytest  # noqa: E402

from config.settings import Settings  # noqa: E402
from src.models.schemas.scene import (  # noqa: E402
    DriveConfig,
    EmitterParams,
    ModulationConfig,
    WaveguideArray,
)
from src.utils.units import mhz_to_angular  # noqa: E402


def emitter_mhz(f0=6129.0, gamma1=4.4, gamma2=3.9, am=0.0, alpha=0.0) -> EmitterParams:
    """Emitter from lab numbers (MHz, alpha in rad)."""
    return EmitterParams(
        omega0=mhz_to_angular(f0),
        gamma1=mhz_to_angular(gamma1),
        gamma2=mhz_to_angular(gamma2),
        mod_amp=mhz_to_angular(am),
        mod_phase=alpha,
    )


def pair(emitter: EmitterParams, alpha2: float = 0.0, phi: float = 0.5 * math.pi) -> WaveguideArray:
    """Two copies of ``emitter``, the second with modulation phase ``alpha2``."""
    return WaveguideArray(
        emitters=(emitter, emitter.model_copy(update={"mod_phase": alpha2})),
        phi=phi,
    )


@pytest.fixture
def settings() -> Settings:
    return Settings(LOG_TO_FILE=False, WORKERS=1)


@pytest.fixture
def root() -> Path:
    return ROOT


@pytest.fixture
def bare_qubit() -> EmitterParams:
    """Unmodulated qubit with the measured decay rates."""
    return emitter_mhz()


@pytest.fixture
def modulated_qubit() -> EmitterParams:
    return emitter_mhz(am=20.0)


@pytest.fixture
def modulation_20() -> ModulationConfig:
    return ModulationConfig(omega_mod=mhz_to_angular(20.0))


@pytest.fixture
def directional_pair() -> WaveguideArray:
    """Two qubits a quarter wavelength apart, A_m = 30 MHz, in phase."""
    return pair(emitter_mhz(gamma2=4.1, am=30.0))


@pytest.fixture
def stokes_probe(directional_pair) -> DriveConfig:
    """Weak probe one modulation quantum below resonance."""
    return DriveConfig(omega=directional_pair.reference_frequency - mhz_to_angular(20.0))


# Dimensionless scenes (G1 = 1) keep the time-domain solvers cheap.


@pytest.fixture
def unit_qubit() -> EmitterParams:
    return EmitterParams(omega0=0.0, gamma1=1.0, gamma2=0.6, mod_amp=2.0)


@pytest.fixture
def unit_modulation() -> ModulationConfig:
    return ModulationConfig(omega_mod=2.0)
