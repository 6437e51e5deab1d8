# src/repositories/measurement_repository.py
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.models.schemas.calibration import MeasuredSpectrum
from src.repositories.base import BaseRepository, PathLike
from src.utils.errors import GridMismatch, InvalidParameter
from src.utils.logger import get_logger
from src.utils.units import MHZ

logger = get_logger(__name__)

SPECTRUM_COLUMNS = ("freq_mhz", "power")
PAIR_COLUMNS = ("av_vpp", "am_mhz")


class MeasurementRepository(BaseRepository):
    """CSV ingestion of transmission spectra and voltage calibration pairs."""

    def _read(self, name: PathLike, required: Sequence[str]) -> pd.DataFrame:
        path = self.resolve(name)
        try:
            frame = pd.read_csv(path, float_precision="round_trip")
        except FileNotFoundError as e:
            raise InvalidParameter([str(name)], f"file not found: {path}") from e
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            logger.error(f"✗ Cannot read {path}: {e}")
            raise InvalidParameter([str(name)], f"cannot parse {path}") from e
        frame.columns = [str(c).strip() for c in frame.columns]
        missing = [c for c in required if c not in frame.columns]
        if missing:
            raise InvalidParameter(missing, f"{path} is missing columns")
        values = frame[list(required)]
        if not np.all(np.isfinite(values.to_numpy(dtype=float))):
            raise InvalidParameter(list(required), f"{path} has non-numeric or non-finite values")
        logger.debug(f"Read {len(frame)} rows from {path}")
        return frame

    def load_spectrum(self, name: PathLike, background: Optional[PathLike] = None) -> MeasuredSpectrum:
        """``freq_mhz,power`` rows; the grid is kept in Hz."""
        frame = self._read(name, SPECTRUM_COLUMNS)
        power = frame["power"].to_numpy(dtype=float)
        if np.any(power < 0):
            raise InvalidParameter(["power"], "power values must be >= 0")
        spectrum = MeasuredSpectrum(
            frequencies=frame["freq_mhz"].to_numpy(dtype=float) * MHZ,
            power=power,
        )
        if background is None:
            return spectrum
        bg = self.load_spectrum(background)
        if bg.power.shape != spectrum.power.shape or not np.allclose(
            bg.frequencies, spectrum.frequencies, rtol=1e-12, atol=0.0
        ):
            raise GridMismatch(f"background {background} is on a different probe grid")
        return spectrum.model_copy(update={"background": bg.power})

    def load_pairs(self, name: PathLike) -> pd.DataFrame:
        """``av_vpp,am_mhz[,omega_mhz]`` rows."""
        return self._read(name, PAIR_COLUMNS)

    def save_spectrum(self, spectrum: MeasuredSpectrum, name: PathLike) -> Path:
        path = self.resolve(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(
            {
                "freq_mhz": np.asarray(spectrum.frequencies) / MHZ,
                "power": np.asarray(spectrum.power),
            }
        )
        frame.to_csv(path, index=False, float_format="%.17e", lineterminator="\n")
        return path

