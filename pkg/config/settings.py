# config\settings.py
from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

from src.models.enums import DissipatorConvention, ModulationDepthConvention

CONFIG_DIR = Path(__file__).resolve().parent


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_prefix="MODMIRROR_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "modmirror"
    ENVIRONMENT: str = "development"
    DEBUG: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = True

    # Runs
    WORKERS: int = 1
    OUTPUT_DIR: str = "./output"
    PRESETS_PATH: str = str(CONFIG_DIR / "presets.yaml")

    # Floquet (weak drive)
    FLOQUET_TRUNCATION_TOL: float = 1e-8
    FLOQUET_EDGE_TOL: float = 1e-6  # |p| at +-n_max relative to the peak
    FLOQUET_NMAX_CEILING: int = 64
    FLOQUET_RESIDUAL_TOL: float = 1e-10
    BESSEL_TAIL_TOL: float = 1e-12
    BESSEL_CUT_CEILING: int = 400

    # Time integration
    MAX_STEP_FRACTION: float = 0.05  # dt * fastest rate / 2pi
    BLOCH_STEP_FRACTION: float = 0.01
    LINDBLAD_STEP_FRACTION: float = 0.01
    ABSOLUTE_TIME_PHASES: int = 64
    TRANSIENT_DECAY_TIMES: float = 16.0
    ATTRACTOR_TOL: float = 1e-5
    CORRELATION_CUTOFF: float = 1e-6
    CORRELATION_CAP_DECAY_TIMES: float = 200.0
    STEP_DOUBLING_TOL: float = 1e-5
    MODULATION_DEPTH_CONVENTION: ModulationDepthConvention = ModulationDepthConvention.AMPLITUDE

    # Master equation
    LINDBLAD_MAX_EMITTERS: int = 8
    PSD_MAX_EMITTERS: int = 4
    LINDBLAD_AVERAGE_PERIODS: int = 4
    DISSIPATOR_CONVENTION: DissipatorConvention = DissipatorConvention.PURE_DEPHASING
    DENSITY_TRACE_TOL: float = 1e-8
    DENSITY_HERMITIAN_TOL: float = 1e-10
    DENSITY_POSITIVITY_TOL: float = 1e-8

    # Calibration fits
    FIT_XTOL: float = 1e-9
    FIT_CONFIDENCE: float = 0.95
    FIT_AM_SCAN_POINTS: int = 401
    FIT_AM_SCAN_MAX_RATIO: float = 8.0  # A_m / Omega upper end of the start scan


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
