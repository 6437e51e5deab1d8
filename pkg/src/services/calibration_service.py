# src/services/calibration_service.py
"""Background normalization and least-squares calibration fits.

Single-emitter fits run in MHz (f/2pi convention) so that the optimizer sees
parameters of order one; results are returned in rad/s.
"""

import math
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize, stats

from config.settings import Settings, get_settings
from src.models.schemas.calibration import (
    CalibrationCurve,
    MeasuredSpectrum,
    ModulationFit,
    QubitFit,
)
from src.models.schemas.scene import EmitterParams, ModulationConfig
from src.services.floquet_service import FloquetService
from src.services.scene_service import SceneService
from src.utils.errors import (
    DegenerateInput,
    FitDiverged,
    GridMismatch,
    InvalidParameter,
    ZeroBackground,
)
from src.utils.logger import get_logger
from src.utils.units import angular_to_mhz, hz_to_angular, mhz_to_angular

logger = get_logger(__name__)

KnownParams = Union[QubitFit, EmitterParams, Tuple[float, float, float]]


def lorentzian_dip(f, f0: float, g2: float, q: float) -> np.ndarray:
    """|t0|^2 of one unmodulated emitter, q = 1 - G1/(2 G2)."""
    d2 = (np.asarray(f) - f0) ** 2
    return (q * q * g2 * g2 + d2) / (g2 * g2 + d2)


def _intervals(result, dof: int, confidence: float) -> Tuple[np.ndarray, float]:
    """Covariance from the Jacobian at the optimum and the two-sided t quantile."""
    jac = np.atleast_2d(result.jac)
    s2 = float(np.sum(result.fun**2)) / max(dof, 1)
    cov = np.linalg.pinv(jac.T @ jac) * s2
    return cov, float(stats.t.ppf(0.5 * (1.0 + confidence), max(dof, 1)))


class CalibrationService:
    """Data normalization and the single-emitter, modulation and voltage calibrations."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.floquet = FloquetService(self.settings)

    # ------------------------------------------------------------------
    # Data
    # ------------------------------------------------------------------

    @staticmethod
    def normalize_transmission(
        raw: MeasuredSpectrum,
        background: Optional[MeasuredSpectrum] = None,
    ) -> MeasuredSpectrum:
        """|t0|^2 = |t|^2 / |t_bg|^2 on a shared grid."""
        if background is None:
            if raw.background is None:
                raise InvalidParameter(["background"], "no background spectrum given")
            bg_freq, bg_power = raw.frequencies, np.asarray(raw.background, dtype=float)
        else:
            bg_freq, bg_power = background.frequencies, np.asarray(background.power, dtype=float)

        freq = np.asarray(raw.frequencies, dtype=float)
        bg_freq = np.asarray(bg_freq, dtype=float)
        power = np.asarray(raw.power, dtype=float)
        if freq.shape != bg_freq.shape or power.shape != freq.shape or bg_power.shape != freq.shape:
            raise GridMismatch(f"grid shapes differ: {freq.shape} vs {bg_freq.shape}")
        if not np.allclose(freq, bg_freq, rtol=1e-12, atol=0.0):
            raise GridMismatch("probe grids of data and background are not aligned")
        if np.any(bg_power <= 0):
            bad = int(np.count_nonzero(bg_power <= 0))
            raise ZeroBackground(f"background is zero in {bad} bin(s)")
        return MeasuredSpectrum(frequencies=freq, power=power / bg_power)

    def synthesize_transmission(
        self,
        grid_hz: Sequence[float],
        params: EmitterParams,
        m: Optional[ModulationConfig] = None,
        background: Optional[Sequence[float]] = None,
    ) -> MeasuredSpectrum:
        """Forward model |t0(w)|^2, optionally multiplied by a background."""
        if m is None:
            if params.mod_amp > 0:
                raise InvalidParameter(["m"], "a modulated emitter needs a ModulationConfig")
            m = ModulationConfig(omega_mod=1.0)
        freq = np.asarray(grid_hz, dtype=float)
        power = np.abs(self.floquet.single_qubit_t0(params, m, hz_to_angular(freq))) ** 2
        if background is None:
            return MeasuredSpectrum(frequencies=freq, power=power)
        background = np.asarray(background, dtype=float)
        if background.shape != freq.shape:
            raise GridMismatch("background does not match the probe grid")
        return MeasuredSpectrum(frequencies=freq, power=power * background, background=background)

    # ------------------------------------------------------------------
    # Single emitter
    # ------------------------------------------------------------------

    @staticmethod
    def _initial_guess(f: np.ndarray, power: np.ndarray) -> Tuple[float, float, float]:
        """f0 at the minimum, G2 from the half-depth width, q from the depth."""
        k = int(np.argmin(power))
        q0 = math.sqrt(max(float(power[k]), 0.0))
        level = 0.5 * (1.0 + q0 * q0)
        lo, hi = k, k
        while lo > 0 and power[lo - 1] <= level:
            lo -= 1
        while hi < f.size - 1 and power[hi + 1] <= level:
            hi += 1
        spacing = float(np.min(np.diff(f)))
        g2 = max(0.5 * float(f[hi] - f[lo]), spacing)
        return float(f[k]), g2, q0

    def fit_qubit_params(self, spec: MeasuredSpectrum) -> QubitFit:
        """Fit (w0, G1, G2) of an unmodulated emitter to a normalized |t0|^2."""
        f = angular_to_mhz(hz_to_angular(np.asarray(spec.frequencies, dtype=float)))
        power = np.asarray(spec.power, dtype=float)
        if f.size < 4 or f.shape != power.shape:
            raise DegenerateInput("need at least four aligned samples")
        order = np.argsort(f)
        f, power = f[order], power[order]
        if not np.all(np.isfinite(power)):
            raise DegenerateInput("spectrum contains non-finite values")
        if np.ptp(power) < 1e-6 * max(float(np.max(np.abs(power))), 1e-300):
            raise FitDiverged("spectrum is flat; no resonance to fit")

        f0, g2, q0 = self._initial_guess(f, power)
        span = float(f[-1] - f[0])
        if span < 5.0 * g2:
            raise DegenerateInput(f"grid spans {span:.3g} MHz, fewer than five linewidths ({g2:.3g} MHz)")

        x0 = np.array([f0, g2, min(max(q0, 1e-6), 1.0 - 1e-6)])
        lower = np.array([f[0], 1e-9 * span, 0.0])
        upper = np.array([f[-1], span, 1.0])

        def residual(x):
            return lorentzian_dip(f, *x) - power

        try:
            result = optimize.least_squares(
                residual,
                x0,
                jac="3-point",
                bounds=(lower, upper),
                xtol=self.settings.FIT_XTOL,
                ftol=1e-14,
                gtol=1e-14,
            )
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.error(f"✗ Qubit fit failed: {e}")
            raise FitDiverged(f"least squares failed: {e}") from e

        f0, g2, q = result.x
        if not result.success or not np.all(np.isfinite(result.x)) or q >= 1.0 - 1e-6:
            logger.error(f"✗ Qubit fit diverged: status={result.status}, x={result.x}")
            raise FitDiverged(f"no dip fitted ({result.message})")

        confidence = self.settings.FIT_CONFIDENCE
        cov, tq = _intervals(result, f.size - 3, confidence)
        g1 = 2.0 * g2 * (1.0 - q)
        grad = np.array([2.0 * (1.0 - q), -2.0 * g2])
        half = tq * np.sqrt(np.maximum([cov[0, 0], cov[1, 1], grad @ cov[1:, 1:] @ grad], 0.0))
        rms = float(np.sqrt(np.mean(result.fun**2)))

        def band(value, width):
            return (float(mhz_to_angular(value - width)), float(mhz_to_angular(value + width)))

        logger.info(f"Qubit fit: f0={f0:.6f} MHz, G1={g1:.4f} MHz, G2={g2:.4f} MHz, rms={rms:.2e}")
        return QubitFit(
            omega0=float(mhz_to_angular(f0)),
            gamma1=float(mhz_to_angular(g1)),
            gamma2=float(mhz_to_angular(g2)),
            omega0_ci=band(f0, half[0]),
            gamma1_ci=band(g1, half[2]),
            gamma2_ci=band(g2, half[1]),
            residual=rms,
            confidence=confidence,
        )

    # ------------------------------------------------------------------
    # Modulation amplitude
    # ------------------------------------------------------------------

    @staticmethod
    def _known(known: KnownParams) -> EmitterParams:
        if isinstance(known, EmitterParams):
            return known.model_copy(update={"mod_amp": 0.0})
        if isinstance(known, QubitFit):
            return EmitterParams(omega0=known.omega0, gamma1=known.gamma1, gamma2=known.gamma2)
        omega0, gamma1, gamma2 = known
        return EmitterParams(omega0=omega0, gamma1=gamma1, gamma2=gamma2)

    def fit_modulation_amplitude(
        self,
        spec: MeasuredSpectrum,
        known: KnownParams,
        m: ModulationConfig,
    ) -> ModulationFit:
        """One-parameter fit of A_m with w0, G1, G2 held fixed.

        A coarse scan of A_m/W picks the basin, then a bounded refinement
        polishes it; the Bessel pattern makes neighbouring basins distinct.
        """
        base = self._known(known)
        SceneService.check(emitter=base, modulation=m)
        omega = hz_to_angular(np.asarray(spec.frequencies, dtype=float))
        power = np.asarray(spec.power, dtype=float)
        if omega.size < 2 or omega.shape != power.shape:
            raise DegenerateInput("need at least two aligned samples")

        def model(x: float) -> np.ndarray:
            p = base.model_copy(update={"mod_amp": float(x) * m.omega_mod})
            return np.abs(self.floquet.single_qubit_t0(p, m, omega)) ** 2

        top = self.settings.FIT_AM_SCAN_MAX_RATIO
        scan = np.linspace(0.0, top, self.settings.FIT_AM_SCAN_POINTS)
        cost = np.array([np.sum((model(x) - power) ** 2) for x in scan])
        k = int(np.argmin(cost))
        step = scan[1] - scan[0]
        lower, upper = max(0.0, scan[k] - 2 * step), min(top, scan[k] + 2 * step)
        logger.debug(f"A_m scan minimum at A/W={scan[k]:.4f}")

        try:
            result = optimize.least_squares(
                lambda x: model(x[0]) - power,
                np.array([scan[k]]),
                jac="3-point",
                bounds=([lower], [upper]),
                xtol=self.settings.FIT_XTOL,
                ftol=1e-14,
                gtol=1e-14,
            )
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.error(f"✗ Modulation fit failed: {e}")
            raise FitDiverged(f"least squares failed: {e}") from e
        if not result.success or not np.isfinite(result.x[0]):
            logger.error(f"✗ Modulation fit diverged: {result.message}")
            raise FitDiverged(f"modulation fit did not converge ({result.message})")

        x = float(result.x[0])
        confidence = self.settings.FIT_CONFIDENCE
        cov, tq = _intervals(result, omega.size - 1, confidence)
        half = tq * math.sqrt(max(float(cov[0, 0]), 0.0))
        mod_amp = x * m.omega_mod
        logger.info(f"Modulation fit: A_m/W={x:.6f}")
        return ModulationFit(
            mod_amp=mod_amp,
            mod_amp_ci=(max(0.0, x - half) * m.omega_mod, (x + half) * m.omega_mod),
            residual=float(np.sqrt(np.mean(result.fun**2))),
            confidence=confidence,
        )

    # ------------------------------------------------------------------
    # Voltage calibration
    # ------------------------------------------------------------------

    @staticmethod
    def fit_linear_calibration(
        pairs: Sequence[Tuple[float, float]],
        omega_mod: Optional[float] = None,
    ) -> CalibrationCurve:
        """Least-squares line A_m = slope * A_V + intercept."""
        data = np.asarray(pairs, dtype=float).reshape(-1, 2)
        volts, amps = data[:, 0], data[:, 1]
        if not np.all(np.isfinite(data)):
            raise DegenerateInput("calibration pairs contain non-finite values")
        if np.unique(volts).size < 2:
            raise DegenerateInput("need at least two distinct A_V values")
        slope, intercept = np.polyfit(volts, amps, 1)
        residual = float(np.linalg.norm(amps - (slope * volts + intercept)))
        return CalibrationCurve(
            slope=float(slope),
            intercept=float(intercept),
            residual=residual,
            omega_mod=omega_mod,
        )

    def fit_calibration_table(self, table: pd.DataFrame) -> Dict[float, CalibrationCurve]:
        """One line per modulation frequency from columns ``av_vpp, am_mhz, omega_mhz``.

        Keys and curve values are in rad/s.
        """
        missing = [c for c in ("av_vpp", "am_mhz", "omega_mhz") if c not in table.columns]
        if missing:
            raise InvalidParameter(missing, "calibration table is missing columns")
        curves = {}
        for omega_mhz, group in table.groupby("omega_mhz", sort=True):
            omega_mod = float(mhz_to_angular(omega_mhz))
            pairs = np.column_stack([group["av_vpp"].to_numpy(), mhz_to_angular(group["am_mhz"].to_numpy())])
            curves[omega_mod] = self.fit_linear_calibration(pairs, omega_mod)
            logger.debug(f"Calibration at {omega_mhz} MHz: slope={angular_to_mhz(curves[omega_mod].slope):.4g} MHz/V")
        return curves

    @staticmethod
    def required_voltage(curve: CalibrationCurve, target_am: float) -> float:
        """A_V that produces ``target_am`` (rad/s) on ``curve``."""
        if curve.slope == 0 or not math.isfinite(curve.slope):
            raise DegenerateInput("calibration slope is zero")
        return (target_am - curve.intercept) / curve.slope
