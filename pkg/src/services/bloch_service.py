# src/services/bloch_service.py
"""Bloch-vector dynamics of one driven, frequency-modulated emitter and its fluorescence.

Heisenberg form  dS/dt = B(t) x S - G (S - S0)  with relaxation
[G2 Sx, G2 Sy, G1 (Sz + 1/2)] and S0 = (0, 0, -1/2). In the frame rotating at
the drive frequency w the field is

    B'(t) = (R, 0, w0 - w + dw cos(W t + a)),

in the lab frame (R cos wt, R sin wt, w0 + dw cos(W t + a)); the two are related
by S_lab = Rz(w t) S'.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.signal import find_peaks

from config.settings import Settings, get_settings
from src.models.enums import BlochFrame, ModulationDepthConvention
from src.models.schemas.bloch import (
    MollowLines,
    SpectralDensity,
    SpinState,
    SpinTrajectory,
)
from src.models.schemas.scene import (
    DriveConfig,
    EmitterParams,
    FrequencyGrid,
    ModulationConfig,
)
from src.services.scene_service import SceneService
from src.utils.errors import FitDiverged, InvalidParameter, NonStationary, StepSizeTooLarge
from src.utils.integrators import advance, integrate_fixed
from src.utils.logger import get_logger
from src.utils.spectra import bin_lines, correlation_to_psd, fourier_lines, orders_in_band

logger = get_logger(__name__)

_RELAX_CONST = np.array([0.0, 0.0, -0.5])


def _cross_matrix(bx, by, bz) -> np.ndarray:
    """Matrices M with M @ S = B x S; inputs broadcast over a leading axis."""
    bx, by, bz = np.broadcast_arrays(
        np.asarray(bx, dtype=float), np.asarray(by, dtype=float), np.asarray(bz, dtype=float)
    )
    zero = np.zeros_like(bx)
    return np.stack(
        [
            np.stack([zero, -bz, by], axis=-1),
            np.stack([bz, zero, -bx], axis=-1),
            np.stack([-by, bx, zero], axis=-1),
        ],
        axis=-2,
    )


class BlochService:
    """Optical Bloch equations, Mollow spectra and nested-Mollow line positions."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    # ------------------------------------------------------------------
    # Field and generator
    # ------------------------------------------------------------------

    def modulation_depth(self, p: EmitterParams) -> float:
        """dw entering the Bloch field for this emitter."""
        if self.settings.MODULATION_DEPTH_CONVENTION == ModulationDepthConvention.PEAK_TO_PEAK:
            return 2.0 * p.mod_amp
        return p.mod_amp

    def _field(self, p, drive, m, t, frame: BlochFrame):
        dw = self.modulation_depth(p)
        t = np.asarray(t, dtype=float)
        wobble = dw * np.cos(m.omega_mod * t + p.mod_phase)
        if frame == BlochFrame.LAB:
            return (
                drive.rabi * np.cos(drive.omega * t),
                drive.rabi * np.sin(drive.omega * t),
                p.omega0 + wobble,
            )
        return np.full_like(t, drive.rabi), np.zeros_like(t), (p.omega0 - drive.omega) + wobble

    def _relaxation(self, p: EmitterParams) -> np.ndarray:
        return np.diag([p.gamma2, p.gamma2, p.gamma1])

    def _generator(self, p, drive, m, frame):
        """(homogeneous matrix at time t, affine vector)."""
        relax = self._relaxation(p)
        affine = relax @ _RELAX_CONST

        def matrix(t):
            return _cross_matrix(*self._field(p, drive, m, t, frame)) - relax

        return matrix, affine

    def _fastest_rate(self, p, drive, m, frame) -> float:
        dw = self.modulation_depth(p)
        if frame == BlochFrame.LAB:
            return max(abs(p.omega0) + dw, abs(drive.omega), drive.rabi, m.omega_mod)
        return max(abs(p.omega0 - drive.omega) + dw, drive.rabi, m.omega_mod)

    def max_step(self, p, drive, m, frame: BlochFrame = BlochFrame.ROTATING) -> float:
        fastest = self._fastest_rate(p, drive, m, frame)
        return math.inf if fastest == 0 else self.settings.MAX_STEP_FRACTION * 2.0 * math.pi / fastest

    def _steps_per_period(self, p, drive, m) -> int:
        """Whole number of steps per modulation period, a multiple of the phase count."""
        fastest = max(self._fastest_rate(p, drive, m, BlochFrame.ROTATING), p.gamma1, p.gamma2)
        raw = m.period * fastest / (self.settings.BLOCH_STEP_FRACTION * 2.0 * math.pi)
        phases = self.settings.ABSOLUTE_TIME_PHASES
        return phases * max(1, math.ceil(raw / phases))

    # ------------------------------------------------------------------
    # Trajectories
    # ------------------------------------------------------------------

    def integrate_bloch(
        self,
        p: EmitterParams,
        drive: DriveConfig,
        m: ModulationConfig,
        t_span: Tuple[float, float],
        dt: float,
        frame: BlochFrame = BlochFrame.ROTATING,
        initial: Optional[SpinState] = None,
    ) -> SpinTrajectory:
        """Fixed-step RK4 trajectory on [t_span[0], t_span[1]]."""
        SceneService.check(emitter=p, drive=drive, modulation=m)
        t0, t1 = float(t_span[0]), float(t_span[1])
        if not (t1 > t0 and dt > 0):
            raise InvalidParameter(["t_span", "dt"], "need t_span[1] > t_span[0] and dt > 0")
        limit = self.max_step(p, drive, m, frame)
        if dt > limit:
            raise StepSizeTooLarge(f"dt={dt:.3e} s exceeds {limit:.3e} s for the fastest scale")

        frame = BlochFrame(frame)
        matrix, affine = self._generator(p, drive, m, frame)
        n_steps = int(math.ceil((t1 - t0) / dt - 1e-9))
        start = (initial or SpinState.ground()).as_vector()

        times, states, _ = integrate_fixed(
            lambda t, s: matrix(t) @ s + affine, start, t0, dt, n_steps
        )
        if not np.all(np.isfinite(states)):
            raise StepSizeTooLarge("Bloch trajectory diverged")
        logger.debug(f"Bloch trajectory: {n_steps} steps, frame={frame.value}")
        return SpinTrajectory(times=times, states=states, dt=dt, frame=frame)

    @staticmethod
    def to_lab(trajectory: SpinTrajectory, drive: DriveConfig) -> np.ndarray:
        """Rotate rotating-frame states into the lab frame."""
        c = np.cos(drive.omega * trajectory.times)
        s = np.sin(drive.omega * trajectory.times)
        sx, sy, sz = trajectory.states.T
        return np.stack([c * sx - s * sy, s * sx + c * sy, sz], axis=-1)

    def _attractor(self, p, drive, m) -> Tuple[np.ndarray, float, int]:
        """Bloch vector at the start of a period on the periodic attractor."""
        steps = self._steps_per_period(p, drive, m)
        dt = m.period / steps
        decay = min(p.gamma1, p.gamma2)
        periods = max(1, math.ceil(self.settings.TRANSIENT_DECAY_TIMES / decay / m.period))
        matrix, affine = self._generator(p, drive, m, BlochFrame.ROTATING)

        def rhs(t, s):
            return matrix(t) @ s + affine

        state = advance(rhs, SpinState.ground().as_vector(), 0.0, dt, periods * steps)
        t_start = periods * steps * dt
        self.periodic_attractor_check(rhs, state, t_start, dt, steps)
        return state, t_start, steps

    def periodic_attractor_check(self, rhs, state, t_start, dt, steps) -> float:
        """Raise NonStationary unless S(t + T) matches S(t)."""
        after = advance(rhs, state, t_start, dt, steps)
        drift = float(np.max(np.abs(after - state)))
        if drift > self.settings.ATTRACTOR_TOL:
            logger.error(f"✗ Bloch attractor not reached: drift {drift:.2e}")
            raise NonStationary(f"Bloch vector changed by {drift:.2e} over one period")
        return drift

    def periodic_attractor(self, p, drive, m) -> SpinTrajectory:
        """One modulation period of the periodic attractor, closing point excluded."""
        SceneService.check(emitter=p, drive=drive, modulation=m)
        state, t_start, steps = self._attractor(p, drive, m)
        dt = m.period / steps
        matrix, affine = self._generator(p, drive, m, BlochFrame.ROTATING)
        times, states, _ = integrate_fixed(
            lambda t, s: matrix(t) @ s + affine, state, t_start, dt, steps - 1
        )
        return SpinTrajectory(times=times, states=states, dt=dt)

    # ------------------------------------------------------------------
    # Emission spectrum
    # ------------------------------------------------------------------

    def emission_spectrum(
        self,
        p: EmitterParams,
        drive: DriveConfig,
        m: ModulationConfig,
        grid: FrequencyGrid,
    ) -> SpectralDensity:
        """Fluorescence spectrum on ``grid`` (detuning from the drive, rad/s).

        The incoherent part is Re int_0^inf e^{-i nu tau} <<dS+(t+tau) dS-(t)>> d tau by
        quantum regression on the Bloch generator, averaged over phases of one
        modulation period; coherent lines of <S-> are binned onto the grid.
        """
        SceneService.check(emitter=p, drive=drive, modulation=m, grid=grid)
        settings = self.settings
        period = self.periodic_attractor(p, drive, m)
        steps = len(period.times)
        dt = period.dt
        phases = settings.ABSOLUTE_TIME_PHASES
        stride = steps // phases
        picks = np.arange(0, steps, stride)[:phases]
        t_k = period.times[picks]
        s_k = period.states[picks]

        lowering = s_k[:, 0] - 1j * s_k[:, 1]
        if drive.rabi == 0.0:
            # Ground state does not radiate; seed the free-emission line from |1>.
            sz = np.full(phases, 0.5)
            lowering = np.zeros(phases, dtype=complex)
            mean = np.zeros((phases, 3))
        else:
            sz = s_k[:, 2]
            mean = s_k
        seed = np.stack([(0.5 + sz) / 2.0, (0.5 + sz) / 2.0j, -lowering / 2.0], axis=-1)
        seed = seed - mean * lowering[:, None]

        correlation = self._regress(p, drive, m, t_k, seed, dt)
        frequencies = grid.values
        incoherent = correlation_to_psd(dt, correlation, frequencies)

        orders = orders_in_band(frequencies[0], frequencies[-1], m.omega_mod, pad=1)
        if drive.rabi == 0.0:
            coherent = np.zeros_like(frequencies)
        else:
            lines = fourier_lines(period.lowering, period.times, m.omega_mod, orders)
            # <S+(t+tau)><S-(t)> averaged over t has lines at +k W with weight |a_k|^2
            coherent = bin_lines(frequencies, orders * m.omega_mod, np.abs(lines) ** 2)

        logger.info(
            f"Emission spectrum: {grid.count} points, {len(correlation)} tau samples, "
            f"{phases} phases"
        )
        return SpectralDensity(
            frequencies=frequencies,
            psd=incoherent + coherent,
            incoherent=incoherent,
            coherent=coherent,
            label="bloch",
        )

    def _regress(self, p, drive, m, t_k, seed, dt) -> np.ndarray:
        """Phase-averaged C(tau) = G_x + i G_y with dG/dtau = M(t_k + tau) G."""
        settings = self.settings
        relax = self._relaxation(p)

        def rhs(tau, g):
            bx, by, bz = self._field(p, drive, m, t_k + tau, BlochFrame.ROTATING)
            mats = _cross_matrix(bx, by, bz) - relax
            return np.einsum("pij,pj->pi", mats, g)

        chunk = max(1, int(round(m.period / dt)))
        cap = settings.CORRELATION_CAP_DECAY_TIMES / p.gamma1
        max_chunks = max(1, math.ceil(cap / (chunk * dt)))
        start = float(np.max(np.abs(seed[:, 0] + 1j * seed[:, 1])))
        if start == 0.0:
            return np.zeros(2, dtype=complex)

        pieces: List[np.ndarray] = []
        g = seed.astype(complex)
        tau = 0.0
        for index in range(max_chunks):
            _, records, g = integrate_fixed(
                rhs, g, tau, dt, chunk, observe=lambda t, y: y[:, 0] + 1j * y[:, 1]
            )
            tau += chunk * dt
            averaged = records.mean(axis=1)
            pieces.append(averaged if index == 0 else averaged[1:])
            if np.max(np.abs(records[-chunk // 2:])) < settings.CORRELATION_CUTOFF * start:
                break
        else:
            logger.warning(f"Correlation window capped at {cap:.3e} s before decaying")
        return np.concatenate(pieces)

    # ------------------------------------------------------------------
    # Nested Mollow structure
    # ------------------------------------------------------------------

    def nested_mollow_lines(
        self,
        rabi: float,
        detuning: float,
        dw: float,
        m: ModulationConfig,
        drive_omega: float = 0.0,
        omega0: Optional[float] = None,
    ) -> MollowLines:
        """w_{p,q} = w + p R' + q R'' with R' = sqrt(R^2 + D^2), R'' = sqrt((R dw / 2R')^2 + (R' - W)^2).

        ``detuning`` is w0 - w. With the default ``drive_omega`` the lines are
        detunings from the drive.
        """
        SceneService.check(modulation=m)
        if rabi < 0 or dw < 0:
            raise InvalidParameter(["rabi", "dw"], "must be >= 0")
        rabi_p = math.hypot(rabi, detuning)
        coupling = 0.0 if rabi_p == 0 else rabi * dw / (2.0 * rabi_p)
        rabi_pp = math.hypot(coupling, rabi_p - m.omega_mod)
        if not (dw < 0.3 * rabi) or (omega0 is not None and not rabi < 0.3 * abs(omega0)):
            logger.warning(
                "Nested Mollow formula used outside dw << rabi << w0 "
                f"(dw/rabi={dw / rabi if rabi else math.inf:.2f})"
            )
        index = np.arange(-1, 2)
        lines = drive_omega + index[:, None] * rabi_p + index[None, :] * rabi_pp
        return MollowLines(lines=lines, rabi_prime=rabi_p, rabi_double_prime=rabi_pp)

    def avoided_crossing_scan(
        self,
        p: EmitterParams,
        drive: DriveConfig,
        modulations: Sequence[ModulationConfig],
        grid: FrequencyGrid,
    ) -> List[SpectralDensity]:
        """Emission spectra for a list of modulation frequencies, one per entry."""
        return [self.emission_spectrum(p, drive, m, grid) for m in modulations]

    @staticmethod
    def inner_triplet_splitting(
        spectrum: SpectralDensity,
        centre: float,
        window: float,
        prominence: float = 0.05,
        guess: Optional[float] = None,
    ) -> float:
        """Separation of the outer lines of the triplet within ``centre +- window``.

        Lines are taken from the incoherent part when available so binned
        coherent lines do not count. Without ``guess`` the outermost peaks are
        used (``prominence`` relative to the largest value in the window). With
        ``guess`` (expected line offset, e.g. R'') three Lorentzians at c, c +- s
        are fitted, which also resolves a side line that shows only as a shoulder.
        """
        values = spectrum.incoherent if spectrum.incoherent is not None else spectrum.psd
        mask = np.abs(spectrum.frequencies - centre) <= window
        freqs = spectrum.frequencies[mask]
        local = values[mask]
        if local.size < 3:
            raise InvalidParameter(["window"], "window holds fewer than three grid points")
        if guess is not None:
            return BlochService._fit_triplet(freqs, local, centre, guess)
        peaks, _ = find_peaks(local, prominence=prominence * float(np.max(local)))
        if peaks.size < 2:
            raise InvalidParameter(["window"], f"found {peaks.size} peak(s) near {centre:.4g}")
        return float(freqs[peaks[-1]] - freqs[peaks[0]])

    @staticmethod
    def _fit_triplet(freqs: np.ndarray, values: np.ndarray, centre: float, guess: float) -> float:
        """2 s from b + sum_k a_k / (1 + ((nu - c - k s) / w)^2), k = -1, 0, 1, shared width."""
        if not guess > 0:
            raise InvalidParameter(["guess"], "expected line offset must be > 0")
        if freqs.size < 8:
            raise InvalidParameter(["window"], "window holds too few points for a triplet fit")
        u = (freqs - centre) / guess
        scale = float(np.max(np.abs(values))) or 1.0
        y = values / scale

        def model(x: np.ndarray) -> np.ndarray:
            c, s, w, b = x[:4]
            out = np.full_like(u, b)
            for height, position in zip(x[4:], (c - s, c, c + s)):
                out += height / (1.0 + ((u - position) / w) ** 2)
            return out

        heights = [min(max(float(np.interp(pos, u, y)), 1e-3), 10.0) for pos in (-1.0, 0.0, 1.0)]
        x0 = np.array([0.0, 1.0, 0.3, float(np.clip(np.min(y), -0.99, 0.99)), *heights])
        lower = [-0.5, 0.3, 0.02, -1.0, 0.0, 0.0, 0.0]
        upper = [0.5, 2.0, 1.5, 1.0, np.inf, np.inf, np.inf]
        result = optimize.least_squares(lambda x: model(x) - y, x0, bounds=(lower, upper), x_scale="jac")
        if not result.success or not np.all(np.isfinite(result.x)):
            logger.error(f"✗ Triplet fit failed near {centre:.4g}: {result.message}")
            raise FitDiverged(f"triplet fit did not converge: {result.message}")
        logger.debug(f"Triplet fit: s={result.x[1] * guess:.4g}, width={result.x[2] * guess:.4g}")
        return float(2.0 * result.x[1] * guess)
