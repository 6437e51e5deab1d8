# src/cli/commands.py
"""Subcommand handlers. Each takes a RunContext and returns an Outcome of tables and records.

Frequencies on the command line and in outputs are ordinary frequencies in
MHz (value / 2pi); everything passed to the services is rad/s.
"""

import argparse
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import Settings
from src.models.enums import Direction, ModulationDepthConvention, SolverTier
from src.models.schemas.calibration import QubitFit
from src.models.schemas.config_file import SceneFile
from src.models.schemas.scene import FrequencyGrid, ModulationConfig, Scene
from src.repositories.measurement_repository import MeasurementRepository
from src.services.analysis_service import AnalysisService
from src.services.bloch_service import BlochService
from src.services.calibration_service import CalibrationService
from src.services.floquet_service import FloquetService
from src.services.lindblad_service import LindbladService
from src.utils.errors import AmplitudeTooSmall, FitDiverged, InvalidParameter, Undefined
from src.utils.logger import get_logger
from src.utils.units import angular_to_mhz, mhz_to_angular

logger = get_logger(__name__)


@dataclass
class RunContext:
    args: argparse.Namespace
    settings: Settings
    measurements: MeasurementRepository
    config: Optional[SceneFile] = None
    scene: Optional[Scene] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def require_scene(self) -> Scene:
        if self.scene is None:
            raise InvalidParameter(["config"], f"'{self.args.command}' needs --config or --preset")
        return self.scene

    def option(self, name: str, fallback: Any = None) -> Any:
        """Command-line value, else the preset's option, else ``fallback``."""
        value = getattr(self.args, name, None)
        if value is None:
            value = self.options.get(name, fallback)
        return value

    @property
    def workers(self) -> int:
        return self.args.workers if self.args.workers is not None else self.settings.WORKERS


@dataclass
class Outcome:
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    records: Dict[str, Any] = field(default_factory=dict)
    tier: Optional[str] = None
    grid_shapes: Dict[str, List[int]] = field(default_factory=dict)


# ----------------------------------------------------------------------
# Argument parsing helpers
# ----------------------------------------------------------------------


def parse_sweep(text: str) -> Tuple[float, float, int]:
    """``START:STOP:COUNT`` in MHz."""
    try:
        start, stop, count = text.split(":")
        return float(start), float(stop), int(count)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected START:STOP:COUNT, got '{text}'") from e


def parse_floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from e


def parse_nmax(text: str) -> Optional[int]:
    if text == "auto":
        return None
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError("--nmax takes 'auto' or an integer") from e
    if value < 0:
        raise argparse.ArgumentTypeError("--nmax must be >= 0")
    return value


def _grid(sweep, fallback: Tuple[float, float, int]) -> FrequencyGrid:
    start, stop, count = sweep if sweep is not None else fallback
    return FrequencyGrid(start=mhz_to_angular(start), stop=mhz_to_angular(stop), count=int(count))


def _emitter(ctx: RunContext, scene: Scene):
    index = ctx.args.qubit
    if not 0 <= index < scene.array.size:
        raise InvalidParameter(["qubit"], f"scene has {scene.array.size} qubit(s)")
    return scene.array.emitters[index]


def _offsets(span_mhz: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise InvalidParameter(["detuning_steps"], "need at least one step")
    if steps == 1:
        return np.zeros(1)
    return mhz_to_angular(np.linspace(-span_mhz, span_mhz, steps))


def _alphas(steps: int) -> np.ndarray:
    if steps < 2:
        raise InvalidParameter(["alpha_steps"], "need at least two steps")
    return np.linspace(-math.pi, math.pi, steps)


def _mhz(values):
    return angular_to_mhz(np.asarray(values, dtype=float))


# ----------------------------------------------------------------------
# Floquet
# ----------------------------------------------------------------------


def single_qubit(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    emitter = _emitter(ctx, scene)
    if ctx.args.am_mhz is not None:
        emitter = emitter.model_copy(update={"mod_amp": mhz_to_angular(ctx.args.am_mhz)})
    m = scene.modulation

    centre = angular_to_mhz(emitter.omega0)
    reach = 10.0 * emitter.gamma2 + (2.0 * (emitter.mod_amp + m.omega_mod) if emitter.mod_amp > 0 else 0.0)
    half = angular_to_mhz(reach)
    grid = _grid(ctx.option("sweep"), (centre - half, centre + half, 401))

    t0 = FloquetService(ctx.settings).single_qubit_t0(emitter, m, grid.values)
    table = pd.DataFrame(
        {
            "f_mhz": _mhz(grid.values),
            "re_t0": t0.real,
            "im_t0": t0.imag,
            "power": np.abs(t0) ** 2,
        }
    )
    return Outcome(
        tables={"t0": table},
        records={"qubit": ctx.args.qubit, "am_mhz": angular_to_mhz(emitter.mod_amp)},
        tier=SolverTier.FLOQUET.value,
        grid_shapes={"t0": [grid.count]},
    )


def sidebands(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    service = FloquetService(ctx.settings)
    spectrum = service.floquet_spectrum(scene.array, scene.drive, scene.modulation, ctx.args.nmax)
    table = pd.DataFrame(
        {
            "n": spectrum.orders,
            "re_r": spectrum.r.real,
            "im_r": spectrum.r.imag,
            "re_t": spectrum.t.real,
            "im_t": spectrum.t.imag,
        }
    )
    refl, trans = spectrum.inelastic_power()
    return Outcome(
        tables={"sidebands": table},
        records={
            "n_max": spectrum.n_max,
            "total_power": service.total_power(spectrum),
            "inelastic_reflected": refl,
            "inelastic_transmitted": trans,
        },
        tier=SolverTier.FLOQUET.value,
        grid_shapes={"sidebands": [len(spectrum.orders)]},
    )


# ----------------------------------------------------------------------
# Strong drive
# ----------------------------------------------------------------------


def mollow(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    settings = ctx.settings
    if ctx.args.depth_convention is not None:
        settings = settings.model_copy(
            update={"MODULATION_DEPTH_CONVENTION": ModulationDepthConvention(ctx.args.depth_convention)}
        )
    bloch = BlochService(settings)
    emitter = _emitter(ctx, scene)
    drive, m = scene.drive, scene.modulation

    half = 2.5 * angular_to_mhz(max(drive.rabi, m.omega_mod))
    grid = _grid(ctx.option("sweep"), (-half, half, 801))
    outcome = Outcome(tier="bloch")

    omegas = ctx.option("omega_mhz")
    if omegas:
        modulations = [ModulationConfig(omega_mod=mhz_to_angular(w)) for w in omegas]
        rows = np.vstack([s.psd for s in bloch.avoided_crossing_scan(emitter, drive, modulations, grid)])
        outcome.tables["scan"] = pd.DataFrame(
            {
                "omega_mhz": np.repeat(np.asarray(omegas, dtype=float), grid.count),
                "nu_mhz": np.tile(_mhz(grid.values), len(omegas)),
                "psd": rows.ravel(),
            }
        )
        outcome.grid_shapes["scan"] = [len(omegas), grid.count]
        return outcome

    spectrum = bloch.emission_spectrum(emitter, drive, m, grid)
    outcome.tables["spectrum"] = pd.DataFrame(
        {
            "nu_mhz": _mhz(spectrum.frequencies),
            "psd": spectrum.psd,
            "incoherent": spectrum.incoherent,
            "coherent": spectrum.coherent,
        }
    )
    outcome.grid_shapes["spectrum"] = [grid.count]

    if drive.rabi > 0:
        depth = bloch.modulation_depth(emitter)
        lines = bloch.nested_mollow_lines(drive.rabi, emitter.omega0 - drive.omega, depth, m)
        # the triplet sits at the modulation frequency, its outer lines at +- R''
        try:
            splitting = angular_to_mhz(
                bloch.inner_triplet_splitting(
                    spectrum, m.omega_mod, 1.5 * lines.rabi_double_prime, guess=lines.rabi_double_prime
                )
            )
        except (InvalidParameter, FitDiverged) as e:
            logger.warning(f"Inner triplet not resolved: {e}")
            splitting = None
        outcome.records = {
            "rabi_prime_mhz": angular_to_mhz(lines.rabi_prime),
            "rabi_double_prime_mhz": angular_to_mhz(lines.rabi_double_prime),
            "lines_mhz": _mhz(lines.lines).tolist(),
            "inner_triplet_splitting_mhz": splitting,
        }
    return outcome


def psd(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    service = LindbladService(ctx.settings)
    drive, m = scene.drive, scene.modulation
    half = 2.5 * angular_to_mhz(max(drive.rabi, m.omega_mod))
    grid = _grid(ctx.option("sweep"), (-half, half, 801))

    directions = [Direction.FORWARD, Direction.BACKWARD] if ctx.args.direction == "both" else [
        Direction(ctx.args.direction)
    ]
    columns: Dict[str, np.ndarray] = {"nu_mhz": _mhz(grid.values)}
    for direction in directions:
        spectrum = service.emission_psd(scene.array, drive, m, grid, direction)
        columns[direction.value] = spectrum.psd
        columns[f"{direction.value}_incoherent"] = spectrum.incoherent
        columns[f"{direction.value}_coherent"] = spectrum.coherent
    return Outcome(
        tables={"psd": pd.DataFrame(columns)},
        tier=SolverTier.LINDBLAD.value,
        grid_shapes={"psd": [grid.count]},
    )


# ----------------------------------------------------------------------
# Directionality
# ----------------------------------------------------------------------


def _map_frame(smap) -> pd.DataFrame:
    alphas, detunings = np.meshgrid(smap.alphas, smap.detunings, indexing="ij")
    return pd.DataFrame(
        {
            "alpha_over_pi": (alphas / math.pi).ravel(),
            "detuning_mhz": _mhz(detunings).ravel(),
            "p_fwd": smap.forward.ravel(),
            "p_bwd": smap.backward.ravel(),
            "directivity": smap.directivity.ravel(),
            "forward_norm": smap.forward_normalized.ravel(),
            "backward_norm": smap.backward_normalized.ravel(),
        }
    )


def sweep_map(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    analysis = AnalysisService(ctx.settings, ctx.workers)
    array, drive, m = scene.array, scene.drive, scene.modulation
    tier = SolverTier(ctx.option("tier", SolverTier.FLOQUET.value))
    sideband = int(ctx.option("sideband", -1))
    alphas = _alphas(int(ctx.option("alpha_steps", 81)))
    span = ctx.option("detuning_span_mhz", 2.0 * angular_to_mhz(m.omega_mod))
    detunings = _offsets(float(span), int(ctx.option("detuning_steps", 161)))

    smap = analysis.alpha_frequency_map(array, drive, m, alphas, detunings, sideband, tier)
    cut = analysis.directivity_cut(array, drive, m, alphas, sideband, tier)
    d_cut = cut.directivity[:, 0]
    cut_frame = pd.DataFrame(
        {
            "alpha_over_pi": alphas / math.pi,
            "p_fwd": cut.forward[:, 0],
            "p_bwd": cut.backward[:, 0],
            "directivity": d_cut,
        }
    )
    finite = d_cut[np.isfinite(d_cut)]
    return Outcome(
        tables={"map": _map_frame(smap), "cut": cut_frame},
        records={
            "sideband": sideband,
            "cut_detuning_mhz": angular_to_mhz(drive.omega - array.reference_frequency),
            "zero_crossings_over_pi": [a / math.pi for a in analysis.zero_crossings(alphas, d_cut)],
            "directivity_max": float(np.max(finite)) if finite.size else None,
            "directivity_min": float(np.min(finite)) if finite.size else None,
        },
        tier=tier.value,
        grid_shapes={"map": [alphas.size, detunings.size], "cut": [alphas.size]},
    )


def power_map(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    analysis = AnalysisService(ctx.settings, ctx.workers)
    array, drive, m = scene.array, scene.drive, scene.modulation
    powers = np.asarray(ctx.option("powers", [0.01, 0.1, 0.3, 1.0, 3.0, 9.0, 30.0, 100.0]), dtype=float)
    if powers.size == 0 or np.any(powers <= 0):
        raise InvalidParameter(["powers"], "powers must be positive")
    span = ctx.option("detuning_span_mhz", 2.0 * angular_to_mhz(m.omega_mod))
    detunings = _offsets(float(span), int(ctx.option("detuning_steps", 41)))
    alpha = float(ctx.option("alpha_over_pi", 1.0)) * math.pi

    pmap = analysis.power_map(array, drive, m, np.sqrt(powers) * array.gamma1, detunings, alpha)
    grid_p, grid_d = np.meshgrid(pmap.powers, pmap.detunings, indexing="ij")
    total = pmap.stokes_t + pmap.stokes_r
    with np.errstate(invalid="ignore", divide="ignore"):
        directivity = np.where(total > 0, (pmap.stokes_t - pmap.stokes_r) / total, np.nan)
    table = pd.DataFrame(
        {
            "power": grid_p.ravel(),
            "detuning_mhz": _mhz(grid_d).ravel(),
            "elastic_r": pmap.elastic_r.ravel(),
            "elastic_t": pmap.elastic_t.ravel(),
            "inelastic_r": pmap.inelastic_r.ravel(),
            "inelastic_t": pmap.inelastic_t.ravel(),
            "stokes_r": pmap.stokes_r.ravel(),
            "stokes_t": pmap.stokes_t.ravel(),
            "stokes_directivity": directivity.ravel(),
        }
    )
    return Outcome(
        tables={"power_map": table},
        records={"alpha_over_pi": alpha / math.pi},
        tier=SolverTier.LINDBLAD.value,
        grid_shapes={"power_map": [powers.size, detunings.size]},
    )


def gyrator(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    analysis = AnalysisService(ctx.settings, ctx.workers)
    array, drive, m = scene.array, scene.drive, scene.modulation
    sideband = int(ctx.option("sideband", -1))
    span = ctx.option("detuning_span_mhz", angular_to_mhz(m.omega_mod))
    offsets = _offsets(float(span), int(ctx.option("detuning_steps", 21)))

    phases = []
    for offset in offsets:
        probe = drive.model_copy(update={"omega": array.reference_frequency + offset})
        try:
            phases.append(analysis.gyrator_check(array, probe, m, sideband))
        except AmplitudeTooSmall as e:
            logger.warning(f"Gyrator phase skipped at {angular_to_mhz(offset):.3f} MHz: {e}")
            phases.append(math.nan)
    phases = np.asarray(phases)
    return Outcome(
        tables={
            "gyrator": pd.DataFrame(
                {
                    "detuning_mhz": _mhz(offsets),
                    "phase_difference": phases,
                    "phase_difference_over_pi": phases / math.pi,
                }
            )
        },
        records={"sideband": sideband},
        tier=SolverTier.FLOQUET.value,
        grid_shapes={"gyrator": [offsets.size]},
    )


def isolator(ctx: RunContext) -> Outcome:
    scene = ctx.require_scene()
    analysis = AnalysisService(ctx.settings, ctx.workers)
    array, drive, m = scene.array, scene.drive, scene.modulation
    sideband = int(ctx.option("sideband", 1))
    alphas = _alphas(int(ctx.option("alpha_steps", 81)))

    scan = analysis.isolator_scan(array, drive, m, alphas, sideband)
    records: Dict[str, Any] = {"sideband": sideband}
    if array.size >= 2:
        alpha = array.emitters[1].mod_phase
        point = analysis.isolator_scan(array, drive, m, [alpha], sideband)
        try:
            metrics = analysis.isolator_metrics(float(point.s21[0]), float(point.s12[0]))
            records.update(
                alpha_over_pi=alpha / math.pi,
                isolation_db=metrics.isolation_db,
                insertion_loss_db=metrics.insertion_loss_db,
            )
        except Undefined as e:
            logger.warning(f"Isolator metrics undefined at the scene's alpha: {e}")
    return Outcome(
        tables={
            "isolator": pd.DataFrame(
                {
                    "alpha_over_pi": scan.alphas / math.pi,
                    "s21": scan.s21,
                    "s12": scan.s12,
                    "isolation_db": scan.isolation_db,
                    "insertion_loss_db": scan.insertion_loss_db,
                }
            )
        },
        records=records,
        tier=SolverTier.FLOQUET.value,
        grid_shapes={"isolator": [alphas.size]},
    )


# ----------------------------------------------------------------------
# Calibration
# ----------------------------------------------------------------------


def _interval_mhz(ci: Sequence[float]) -> List[float]:
    return [angular_to_mhz(ci[0]), angular_to_mhz(ci[1])]


def fit(ctx: RunContext) -> Outcome:
    args = ctx.args
    calibration = CalibrationService(ctx.settings)
    outcome = Outcome(tier="calibration")
    if not (args.spectrum or args.modulated or args.pairs):
        raise InvalidParameter(["spectrum", "modulated", "pairs"], "nothing to fit")

    qubit: Optional[QubitFit] = None
    if args.spectrum:
        spectrum = ctx.measurements.load_spectrum(args.spectrum, args.background)
        if spectrum.background is not None:
            spectrum = calibration.normalize_transmission(spectrum)
            outcome.tables["normalized"] = pd.DataFrame(
                {"freq_mhz": spectrum.frequencies / 1e6, "power": spectrum.power}
            )
        qubit = calibration.fit_qubit_params(spectrum)
        outcome.records["qubit"] = {
            "f0_mhz": angular_to_mhz(qubit.omega0),
            "gamma1_mhz": angular_to_mhz(qubit.gamma1),
            "gamma2_mhz": angular_to_mhz(qubit.gamma2),
            "f0_ci_mhz": _interval_mhz(qubit.omega0_ci),
            "gamma1_ci_mhz": _interval_mhz(qubit.gamma1_ci),
            "gamma2_ci_mhz": _interval_mhz(qubit.gamma2_ci),
            "residual": qubit.residual,
            "confidence": qubit.confidence,
        }

    omega_mod = None
    if args.omega_mhz is not None:
        omega_mod = mhz_to_angular(args.omega_mhz)
    elif ctx.scene is not None:
        omega_mod = ctx.scene.modulation.omega_mod

    if args.modulated:
        known = qubit or (_emitter(ctx, ctx.scene) if ctx.scene is not None else None)
        if known is None:
            raise InvalidParameter(["spectrum", "config"], "modulation fit needs qubit parameters")
        if omega_mod is None:
            raise InvalidParameter(["omega_mhz"], "modulation fit needs the modulation frequency")
        measured = ctx.measurements.load_spectrum(args.modulated)
        result = calibration.fit_modulation_amplitude(measured, known, ModulationConfig(omega_mod=omega_mod))
        outcome.records["modulation"] = {
            "omega_mhz": angular_to_mhz(omega_mod),
            "am_mhz": angular_to_mhz(result.mod_amp),
            "am_ci_mhz": _interval_mhz(result.mod_amp_ci),
            "residual": result.residual,
            "confidence": result.confidence,
        }

    if args.pairs:
        table = ctx.measurements.load_pairs(args.pairs)
        if "omega_mhz" not in table.columns:
            if omega_mod is None:
                raise InvalidParameter(["omega_mhz"], "pairs file has no omega_mhz column")
            table = table.assign(omega_mhz=angular_to_mhz(omega_mod))
        curves = calibration.fit_calibration_table(table)
        rows = []
        for omega, curve in curves.items():
            row = {
                "omega_mhz": angular_to_mhz(omega),
                "slope_mhz_per_v": angular_to_mhz(curve.slope),
                "intercept_mhz": angular_to_mhz(curve.intercept),
                "residual_mhz": angular_to_mhz(curve.residual),
            }
            if args.target_am_mhz is not None:
                row["required_v"] = calibration.required_voltage(curve, mhz_to_angular(args.target_am_mhz))
            rows.append(row)
        outcome.tables["calibration"] = pd.DataFrame(rows)
        outcome.records["calibration"] = rows
    return outcome


COMMANDS: Dict[str, Callable[[RunContext], Outcome]] = {
    "single-qubit": single_qubit,
    "sidebands": sidebands,
    "mollow": mollow,
    "psd": psd,
    "map": sweep_map,
    "power-map": power_map,
    "fit": fit,
    "gyrator": gyrator,
    "isolator": isolator,
}
