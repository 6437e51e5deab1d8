# src/services/analysis_service.py
"""Directionality, isolator and gyrator figures of merit and the sweep maps built on them."""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import Settings, get_settings
from src.models.enums import Port, SolverTier
from src.models.schemas.analysis import (
    IsolatorMetrics,
    IsolatorScan,
    PowerMap,
    SweepMap,
)
from src.models.schemas.scene import DriveConfig, ModulationConfig, WaveguideArray
from src.services.floquet_service import FloquetService
from src.services.lindblad_service import LindbladService
from src.services.scene_service import SceneService
from src.services.sweep_service import SweepService
from src.utils.errors import AmplitudeTooSmall, InvalidParameter, Undefined
from src.utils.logger import get_logger

logger = get_logger(__name__)

Cell = Tuple[Settings, str, WaveguideArray, DriveConfig, ModulationConfig, int]


def _solve_cell(cell: Cell) -> Tuple[np.ndarray, np.ndarray]:
    """(r, t) for one grid cell; module level so worker processes can unpickle it."""
    settings, tier, array, drive, m, n_max = cell
    if SolverTier(tier) == SolverTier.LINDBLAD:
        result = LindbladService(settings).sidebands(array, drive, m, n_max)
    else:
        result = FloquetService(settings).floquet_spectrum(array, drive, m, n_max)
    return result.r, result.t


def _at(values: np.ndarray, n: int, n_max: int, elastic: complex = 0j) -> complex:
    return complex(values[n + n_max]) if abs(n) <= n_max else elastic


class AnalysisService:
    """Figures of merit over the solvers; grid sweeps go through SweepService."""

    def __init__(self, settings: Optional[Settings] = None, workers: Optional[int] = None):
        self.settings = settings or get_settings()
        self.floquet = FloquetService(self.settings)
        self.sweeps = SweepService(workers, self.settings)

    # ------------------------------------------------------------------
    # Scalar metrics
    # ------------------------------------------------------------------

    @staticmethod
    def directivity(p_forward: float, p_backward: float) -> float:
        """D = (P_fwd - P_bwd) / (P_fwd + P_bwd)."""
        if p_forward < 0 or p_backward < 0:
            raise InvalidParameter(["p_forward", "p_backward"], "powers must be >= 0")
        total = p_forward + p_backward
        if total == 0:
            raise Undefined("directivity of zero forward and backward power")
        return (p_forward - p_backward) / total

    @staticmethod
    def isolator_metrics(s21: float, s12: float) -> IsolatorMetrics:
        """Isolation 10 log10(S21/S12) and insertion loss -10 log10(S21), in dB."""
        if s12 <= 0 or s21 <= 0:
            raise Undefined("isolation needs nonzero transmission both ways")
        return IsolatorMetrics(
            isolation_db=10.0 * math.log10(s21 / s12),
            insertion_loss_db=-10.0 * math.log10(s21),
        )

    @staticmethod
    def zero_crossings(alphas: Sequence[float], values: Sequence[float]) -> List[float]:
        """Linearly interpolated positions where ``values`` changes sign."""
        alphas = np.asarray(alphas, dtype=float)
        values = np.asarray(values, dtype=float)
        crossings = []
        for k in range(len(values) - 1):
            a, b = values[k], values[k + 1]
            if a == 0.0:
                crossings.append(float(alphas[k]))
            elif a * b < 0:
                crossings.append(float(alphas[k] - a * (alphas[k + 1] - alphas[k]) / (b - a)))
        return crossings

    # ------------------------------------------------------------------
    # Maps
    # ------------------------------------------------------------------

    def _n_max(self, array, drive, m, n: int, alphas=None, omegas=None) -> int:
        """Truncation that holds at the extremes of the alpha and probe-frequency grids,
        plus one order for interior cells when a grid is given."""
        variants = [array]
        if alphas is not None and len(alphas):
            variants += [array.with_phase(1, float(a)) for a in np.unique(np.asarray(alphas)[[0, -1]])]
        probes = [drive.omega]
        if omegas is not None and len(omegas):
            probes = np.unique(np.asarray(omegas, dtype=float)[[0, -1]]).tolist()
        chosen = [
            self.floquet.choose_truncation(variant, m, drive=drive.model_copy(update={"omega": omega}))
            for variant in variants
            for omega in probes
        ]
        margin = 1 if alphas is not None or omegas is not None else 0
        return max(abs(n), max(chosen) + margin)

    def alpha_frequency_map(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        alpha_grid: Sequence[float],
        detuning_grid: Sequence[float],
        n: int = -1,
        tier: SolverTier = SolverTier.FLOQUET,
    ) -> SweepMap:
        """Sideband-n powers over (alpha of the second emitter, probe detuning from the mean resonance)."""
        SceneService.check(array=array, drive=drive, modulation=m)
        if array.size < 2:
            raise InvalidParameter(["array.emitters"], "an alpha sweep needs at least two emitters")
        alphas = np.asarray(alpha_grid, dtype=float)
        detunings = np.asarray(detuning_grid, dtype=float)
        if alphas.size == 0 or detunings.size == 0:
            raise InvalidParameter(["alpha_grid", "detuning_grid"], "grids must not be empty")

        reference = array.reference_frequency
        n_max = self._n_max(array, drive, m, n, alphas=alphas, omegas=reference + detunings)
        tier = SolverTier(tier)
        cells = [
            (
                self.settings,
                tier.value,
                array.with_phase(1, alpha),
                drive.model_copy(update={"omega": reference + detuning}),
                m,
                n_max,
            )
            for alpha in alphas
            for detuning in detunings
        ]
        logger.info(f"α–ω map: {alphas.size}x{detunings.size} cells, n={n}, tier={tier.value}")
        results = self.sweeps.map(_solve_cell, cells)

        shape = (alphas.size, detunings.size)
        forward = np.array([abs(_at(t, n, n_max, 1.0 if n == 0 else 0j)) ** 2 for _, t in results]).reshape(shape)
        backward = np.array([abs(_at(r, n, n_max)) ** 2 for r, _ in results]).reshape(shape)
        total = forward + backward
        with np.errstate(invalid="ignore", divide="ignore"):
            directivity = np.where(total > 0, (forward - backward) / total, np.nan)
        return SweepMap(
            alphas=alphas,
            detunings=detunings,
            sideband=n,
            forward=forward,
            backward=backward,
            directivity=directivity,
            tier=tier,
        )

    def directivity_cut(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        alpha_grid: Sequence[float],
        n: int = -1,
        tier: SolverTier = SolverTier.FLOQUET,
    ) -> SweepMap:
        """D(alpha) at the probe frequency of ``drive``; a one-column map."""
        detuning = drive.omega - array.reference_frequency
        return self.alpha_frequency_map(array, drive, m, alpha_grid, [detuning], n, tier)

    # ------------------------------------------------------------------
    # Two-port properties
    # ------------------------------------------------------------------

    def _transmission(self, array, drive, m, n, n_max, port: Port) -> complex:
        spectrum = self.floquet.floquet_spectrum(array, drive.model_copy(update={"port": port}), m, n_max)
        return spectrum.t_n(n)

    def gyrator_check(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        n: int = -1,
    ) -> float:
        """arg(t_n from the left) - arg(t_n from the right), wrapped to [0, 2pi)."""
        SceneService.check(array=array, drive=drive, modulation=m)
        n_max = self._n_max(array, drive, m, n)
        left = self._transmission(array, drive, m, n, n_max, Port.LEFT)
        right = self._transmission(array, drive, m, n, n_max, Port.RIGHT)
        if min(abs(left), abs(right)) < 1e-9:
            raise AmplitudeTooSmall(f"|t_{n}| below 1e-9; phase undefined")
        return float(np.mod(np.angle(left) - np.angle(right), 2.0 * math.pi))

    def isolator_scan(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        alpha_grid: Sequence[float],
        n: int = 1,
    ) -> IsolatorScan:
        """S21 = |t_n|^2 from the left, S12 from the right, along the second emitter's alpha."""
        SceneService.check(array=array, drive=drive, modulation=m)
        if array.size < 2:
            raise InvalidParameter(["array.emitters"], "an alpha sweep needs at least two emitters")
        alphas = np.asarray(alpha_grid, dtype=float)
        n_max = self._n_max(array, drive, m, n, alphas=alphas)
        s21, s12 = [], []
        for alpha in alphas:
            variant = array.with_phase(1, alpha)
            s21.append(abs(self._transmission(variant, drive, m, n, n_max, Port.LEFT)) ** 2)
            s12.append(abs(self._transmission(variant, drive, m, n, n_max, Port.RIGHT)) ** 2)
        s21, s12 = np.array(s21), np.array(s12)
        with np.errstate(divide="ignore", invalid="ignore"):
            isolation = 10.0 * np.log10(s21 / s12)
            loss = -10.0 * np.log10(s21)
        return IsolatorScan(
            alphas=alphas,
            sideband=n,
            s21=s21,
            s12=s12,
            isolation_db=isolation,
            insertion_loss_db=loss,
        )

    # ------------------------------------------------------------------
    # Drive-power dependence
    # ------------------------------------------------------------------

    def power_map(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        rabi_grid: Sequence[float],
        detuning_grid: Sequence[float],
        alpha: float = math.pi,
    ) -> PowerMap:
        """Coherent elastic and inelastic |r|^2, |t|^2 over (rabi, detuning) from the master equation.

        The second emitter's phase is set to the first one's plus ``alpha``.
        """
        SceneService.check(array=array, drive=drive, modulation=m)
        rabis = np.asarray(rabi_grid, dtype=float)
        detunings = np.asarray(detuning_grid, dtype=float)
        if rabis.size == 0:
            raise InvalidParameter(["rabi_grid"], "rabi grid must not be empty")
        if detunings.size == 0:
            raise InvalidParameter(["detuning_grid"], "detuning grid must not be empty")
        if np.any(rabis <= 0):
            raise InvalidParameter(["rabi_grid"], "Rabi frequencies must be > 0")
        if array.size >= 2:
            array = array.with_phase(1, array.emitters[0].mod_phase + alpha)

        reference = array.reference_frequency
        n_max = self._n_max(array, drive, m, 1, omegas=reference + detunings)
        cells = [
            (
                self.settings,
                SolverTier.LINDBLAD.value,
                array,
                drive.model_copy(update={"omega": reference + detuning, "rabi": rabi}),
                m,
                n_max,
            )
            for rabi in rabis
            for detuning in detunings
        ]
        logger.info(f"Power map: {rabis.size}x{detunings.size} master-equation cells")
        results = self.sweeps.map(_solve_cell, cells)

        shape = (rabis.size, detunings.size)
        mask = np.arange(-n_max, n_max + 1) != 0

        def collect(fn):
            return np.array([fn(r, t) for r, t in results]).reshape(shape)

        return PowerMap(
            rabis=rabis,
            detunings=detunings,
            gamma1=array.gamma1,
            elastic_r=collect(lambda r, t: abs(r[n_max]) ** 2),
            elastic_t=collect(lambda r, t: abs(t[n_max]) ** 2),
            inelastic_r=collect(lambda r, t: float(np.sum(np.abs(r[mask]) ** 2))),
            inelastic_t=collect(lambda r, t: float(np.sum(np.abs(t[mask]) ** 2))),
            stokes_r=collect(lambda r, t: abs(r[n_max - 1]) ** 2),
            stokes_t=collect(lambda r, t: abs(t[n_max - 1]) ** 2),
        )
