# src/services/lindblad_service.py
"""Master equation for N driven, modulated emitters with waveguide-correlated decay.

In a frame rotating at ``reference`` (the mean resonance unless stated otherwise):

    H(t) = sum_j [(w0_j - ref) + A_j cos(W t + a_j)] n_j
           + sum_{j != k} (G1/2) sin(phi |j - k|) s_j^+ s_k
           + (R/2) sum_j (e^{i phi j - i (w - ref) t} s_j^+ + h.c.)

    drho/dt = -i (H_eff rho - rho H_eff^+) + sum_m L_m rho L_m^+

The radiative kernel (G1/2) cos(phi (j - k)) acting as 2 s_j rho s_k^+ - {s_k^+ s_j, rho}
is diagonalized into collective jump operators; pure dephasing at
G2 - G1/2 is a separate channel on each n_j. Basis states are Kronecker
products with emitter 0 as the most significant factor and |0> = ground.
Emitter index j counts from the port the probe enters.
"""

import math
from functools import reduce
from typing import Optional, Tuple

import numpy as np

from config.settings import Settings, get_settings
from src.models.enums import Direction, DissipatorConvention
from src.models.schemas.bloch import SpectralDensity
from src.models.schemas.lindblad import CoherentSidebands, DensityTrajectory
from src.models.schemas.scene import (
    DriveConfig,
    FrequencyGrid,
    ModulationConfig,
    WaveguideArray,
)
from src.services.scene_service import SceneService
from src.utils.errors import (
    DimensionTooLarge,
    InvalidParameter,
    NonStationary,
    PositivityLost,
    StepSizeTooLarge,
)
from src.utils.integrators import advance, integrate_fixed
from src.utils.logger import get_logger
from src.utils.spectra import bin_lines, correlation_to_psd, fourier_lines, orders_in_band

logger = get_logger(__name__)

_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def lowering_operators(size: int) -> np.ndarray:
    """sigma_j^- for j = 0..size-1, shape (size, 2**size, 2**size)."""
    eye = np.eye(2, dtype=complex)
    ops = []
    for j in range(size):
        factors = [_LOWER if k == j else eye for k in range(size)]
        ops.append(reduce(np.kron, factors))
    return np.array(ops)


def coupling_matrices(array: WaveguideArray) -> Tuple[np.ndarray, np.ndarray]:
    """(dissipative kernel, coherent exchange) between emitters, both (N, N).

    kernel_jk = (G1/2) cos(phi (j - k)); exchange_jk = (G1/2) sin(phi |j - k|).
    """
    j = np.arange(array.size)
    separation = j[:, None] - j[None, :]
    half = 0.5 * array.gamma1
    return half * np.cos(array.phi * separation), half * np.sin(array.phi * np.abs(separation))


def excitation_numbers(size: int) -> np.ndarray:
    """n_j on the diagonal of the Kronecker basis, shape (size, 2**size)."""
    index = np.arange(2**size)
    return np.array([(index >> (size - 1 - j)) & 1 for j in range(size)], dtype=float)


class MasterEquation:
    """Time-dependent Lindblad generator; callable as ``(t, rho) -> drho/dt``.

    ``rho`` may carry a leading batch axis, in which case ``t`` is either a
    scalar or an array with that batch shape.
    """

    def __init__(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        reference: float,
        convention: DissipatorConvention = DissipatorConvention.PURE_DEPHASING,
    ):
        size = array.size
        self.size = size
        self.dim = 2**size
        self.sigma = lowering_operators(size)
        self.numbers = excitation_numbers(size)
        self.omega_mod = m.omega_mod
        self.mod_amp = array.mod_amp
        self.mod_phase = array.mod_phase
        self.offset = drive.omega - reference

        j = np.arange(size)
        g1 = array.gamma1
        kernel, exchange = coupling_matrices(array)
        sigma_dag = self.sigma.conj().transpose(0, 2, 1)

        hamiltonian = np.diag((array.omega0 - reference) @ self.numbers).astype(complex)
        for a in range(size):
            for b in range(size):
                if a != b and exchange[a, b] != 0.0:
                    hamiltonian += exchange[a, b] * (sigma_dag[a] @ self.sigma[b])

        dephasing = array.gamma2 - 0.5 * g1
        if DissipatorConvention(convention) == DissipatorConvention.PRINTED_DIAGONAL:
            kernel = kernel + np.diag(array.gamma2)
            dephasing = np.zeros(size)
        values, vectors = np.linalg.eigh(kernel)
        jumps = [
            math.sqrt(2.0 * lam) * np.tensordot(vectors[:, k], self.sigma, axes=1)
            for k, lam in enumerate(values)
            if lam > 1e-12 * max(values.max(), 1e-300)
        ]
        for k in range(size):
            if dephasing[k] > 0:
                jumps.append(math.sqrt(2.0 * dephasing[k]) * np.diag(self.numbers[k]).astype(complex))
        self.jumps = np.array(jumps) if jumps else np.zeros((0, self.dim, self.dim), dtype=complex)
        self.jumps_dag = self.jumps.conj().transpose(0, 2, 1)
        damping = np.einsum("mij,mjk->ik", self.jumps_dag, self.jumps)

        self.static = hamiltonian - 0.5j * damping
        self.raise_drive = 0.5 * drive.rabi * np.tensordot(np.exp(1j * array.phi * j), sigma_dag, axes=1)
        self.lower_drive = self.raise_drive.conj().T

    def effective_hamiltonian(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        wobble = np.cos(self.omega_mod * t[..., None] + self.mod_phase) * self.mod_amp
        diagonal = wobble @ self.numbers
        h = self.static + diagonal[..., None] * np.eye(self.dim)
        if self.offset != 0.0:
            rot = np.exp(-1j * self.offset * t)[..., None, None]
            return h + rot * self.raise_drive + rot.conj() * self.lower_drive
        return h + self.raise_drive + self.lower_drive

    def __call__(self, t, rho: np.ndarray) -> np.ndarray:
        h = self.effective_hamiltonian(t)
        out = -1j * (h @ rho - rho @ np.conj(np.swapaxes(h, -1, -2)))
        for jump, jump_dag in zip(self.jumps, self.jumps_dag):
            out = out + jump @ rho @ jump_dag
        return out

    def max_rate(self, drive: DriveConfig, g1: float) -> float:
        """Upper bound on the fastest frequency scale of the generator."""
        return self.omega_mod + abs(self.offset) + float(np.max(self.mod_amp, initial=0.0)) + drive.rabi + g1


class LindbladService:
    """Strong-drive sidebands, steady populations and emission spectra."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    # ------------------------------------------------------------------
    # Generator
    # ------------------------------------------------------------------

    def _master_equation(self, array, drive, m, reference=None, limit=None) -> MasterEquation:
        SceneService.check(array=array, drive=drive, modulation=m)
        limit = self.settings.LINDBLAD_MAX_EMITTERS if limit is None else limit
        if array.size > limit:
            raise DimensionTooLarge(f"{array.size} emitters exceed the limit of {limit}")
        ordered = array.ordered_for(drive.port)
        ref = ordered.reference_frequency if reference is None else reference
        return MasterEquation(ordered, drive, m, ref, self.settings.DISSIPATOR_CONVENTION)

    def build_generator(self, array, drive, m, t: float):
        """Liouvillian action rho -> drho/dt at time ``t``."""
        equation = self._master_equation(array, drive, m)
        return lambda rho: equation(t, rho)

    # ------------------------------------------------------------------
    # Density-matrix checks
    # ------------------------------------------------------------------

    def check_density_matrix(self, rho: np.ndarray) -> None:
        settings = self.settings
        trace = np.trace(rho)
        if abs(trace - 1.0) > settings.DENSITY_TRACE_TOL:
            raise PositivityLost(f"trace drifted to {trace.real:.10f}")
        skew = float(np.max(np.abs(rho - rho.conj().T)))
        if skew > settings.DENSITY_HERMITIAN_TOL:
            raise PositivityLost(f"Hermiticity lost ({skew:.2e})")
        lowest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if lowest < -settings.DENSITY_POSITIVITY_TOL:
            raise PositivityLost(f"negative eigenvalue {lowest:.2e}")

    # ------------------------------------------------------------------
    # Time evolution
    # ------------------------------------------------------------------

    def _step_plan(self, equation: MasterEquation, drive, m, g1) -> Tuple[float, int]:
        """(dt, steps per modulation period)."""
        rate = equation.max_rate(drive, g1)
        raw = m.period * rate / (self.settings.LINDBLAD_STEP_FRACTION * 2.0 * math.pi)
        phases = self.settings.ABSOLUTE_TIME_PHASES
        steps = phases * max(1, math.ceil(raw / phases))
        return m.period / steps, steps

    def _evolve(self, equation, rho0, t0, dt, n_steps, store_states=False, positivity_every=1):
        sigma = equation.sigma
        numbers = equation.numbers

        def observe(t, rho):
            expect = np.einsum("jab,ba->j", sigma, rho)
            excited = numbers @ np.real(np.diagonal(rho))
            return np.concatenate([expect, excited.astype(complex)])

        if store_states:
            def observe_all(t, rho):
                return rho.copy()

        def check(k, t, rho):
            if k % positivity_every == 0 or k == n_steps:
                self.check_density_matrix(rho)
            else:
                trace = np.trace(rho)
                if abs(trace - 1.0) > self.settings.DENSITY_TRACE_TOL:
                    raise PositivityLost(f"trace drifted to {trace.real:.10f} at t={t:.3e}")

        times, records, final = integrate_fixed(equation, rho0, t0, dt, n_steps, observe=observe, check=check)
        states = None
        if store_states:
            _, states, _ = integrate_fixed(equation, rho0, t0, dt, n_steps, observe=observe_all)
        size = equation.size
        return times, records[:, :size], np.real(records[:, size:]), final, states

    def evolve(
        self,
        rho0: np.ndarray,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        t_span: Tuple[float, float],
        dt: Optional[float] = None,
        store_states: bool = False,
    ) -> DensityTrajectory:
        """Fixed-step RK4 from ``rho0``; every step keeps the density-matrix invariants."""
        equation = self._master_equation(array, drive, m)
        rho0 = np.asarray(rho0, dtype=complex)
        if rho0.shape != (equation.dim, equation.dim):
            raise InvalidParameter(["rho0"], f"expected shape {(equation.dim, equation.dim)}")
        try:
            self.check_density_matrix(rho0)
        except PositivityLost as e:
            raise InvalidParameter(["rho0"], str(e)) from e

        auto_dt, _ = self._step_plan(equation, drive, m, array.gamma1)
        limit = self.settings.MAX_STEP_FRACTION * 2.0 * math.pi / equation.max_rate(drive, array.gamma1)
        dt = auto_dt if dt is None else float(dt)
        if dt > limit:
            raise StepSizeTooLarge(f"dt={dt:.3e} exceeds {limit:.3e}")
        t0, t1 = float(t_span[0]), float(t_span[1])
        if not t1 > t0:
            raise InvalidParameter(["t_span"], "need t_span[1] > t_span[0]")
        n_steps = int(math.ceil((t1 - t0) / dt - 1e-9))
        stride = 1 if equation.dim <= 16 else max(1, int(round(m.period / dt)))
        times, sigma, excited, final, states = self._evolve(
            equation, rho0, t0, dt, n_steps, store_states, positivity_every=stride
        )
        logger.debug(f"Master equation: dim={equation.dim}, {n_steps} steps of {dt:.3e}")
        return DensityTrajectory(
            times=times,
            sigma=sigma,
            excited=excited,
            final_state=final,
            reference=drive.omega - equation.offset,
            dt=dt,
            states=states,
        )

    def ground_state(self, size: int) -> np.ndarray:
        rho = np.zeros((2**size, 2**size), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def _transient_periods(self, array, m) -> int:
        decay = min(array.gamma1, float(np.min(array.gamma2)))
        return max(1, math.ceil(self.settings.TRANSIENT_DECAY_TIMES / decay / m.period))

    def _check_step_doubling(self, equation, rho0, dt, steps) -> None:
        coarse = advance(equation, rho0, 0.0, dt, steps)
        fine = advance(equation, rho0, 0.0, 0.5 * dt, 2 * steps)
        error = float(np.max(np.abs(coarse - fine)))
        if error > self.settings.STEP_DOUBLING_TOL:
            logger.error(f"✗ Step-doubling error {error:.2e} over the first period")
            raise StepSizeTooLarge(f"step-doubling error {error:.2e} over one period")

    def steady_trajectory(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        periods: Optional[int] = None,
    ) -> DensityTrajectory:
        """Records over whole modulation periods on the attractor (closing point excluded)."""
        equation = self._master_equation(array, drive, m)
        dt, steps = self._step_plan(equation, drive, m, array.gamma1)
        rho = self.ground_state(array.size)
        self._check_step_doubling(equation, rho, dt, steps)

        transient = self._transient_periods(array, m) * steps
        stride = 1 if equation.dim <= 16 else steps
        _, _, _, rho, _ = self._evolve(equation, rho, 0.0, dt, transient, positivity_every=stride)
        periods = periods or self.settings.LINDBLAD_AVERAGE_PERIODS
        t_start = transient * dt
        times, sigma, excited, final, _ = self._evolve(
            equation, rho, t_start, dt, periods * steps - 1, positivity_every=stride
        )
        logger.info(
            f"Master-equation attractor: N={array.size}, {transient} transient + "
            f"{periods * steps} recorded steps"
        )
        return DensityTrajectory(
            times=times,
            sigma=sigma,
            excited=excited,
            final_state=final,
            reference=drive.omega - equation.offset,
            dt=dt,
        )

    def steady_excited_population(self, trajectory: DensityTrajectory) -> np.ndarray:
        """Time-averaged <s_j^+ s_j> per emitter over the recorded window."""
        return trajectory.excited.mean(axis=0)

    # ------------------------------------------------------------------
    # Coherent sidebands
    # ------------------------------------------------------------------

    def _stationarity(self, demodulated: np.ndarray, steps: int) -> None:
        if demodulated.shape[0] < 2 * steps:
            return
        first, second = demodulated[:steps], demodulated[steps:2 * steps]
        scale = max(float(np.max(np.abs(first))), 1e-300)
        drift = float(np.max(np.abs(second - first))) / scale
        if drift > self.settings.ATTRACTOR_TOL:
            logger.error(f"✗ Master-equation attractor not periodic: drift {drift:.2e}")
            raise NonStationary(f"relative drift {drift:.2e} between consecutive periods")

    def coherent_sidebands(
        self,
        trajectory: DensityTrajectory,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        n_max: int,
    ) -> CoherentSidebands:
        """p_j^(n) = < <s_j^-> e^{i (w - ref + n W) t} > over whole periods, then the
        floquet r^(n), t^(n) formulas."""
        SceneService.check(array=array, drive=drive, modulation=m)
        if drive.rabi <= 0:
            raise InvalidParameter(["drive.rabi"], "coherent sidebands need a nonzero drive")
        offset = drive.omega - trajectory.reference
        times = trajectory.times
        steps = int(round(m.period / trajectory.dt))
        whole = (len(times) // steps) * steps
        if whole == 0:
            raise NonStationary("trajectory shorter than one modulation period")
        times, sigma = times[:whole], trajectory.sigma[:whole]
        demodulated = sigma * np.exp(1j * offset * times)[:, None]
        self._stationarity(demodulated, steps)

        orders = np.arange(-n_max, n_max + 1)
        phase = np.exp(1j * np.outer(orders * m.omega_mod, times))
        amplitudes = (phase @ demodulated / whole).T  # (N, 2 n_max + 1)

        j = np.arange(array.size)
        scale = -1j * array.gamma1 / drive.rabi
        r = scale * (np.exp(1j * array.phi * j) @ amplitudes)
        t = scale * (np.exp(-1j * array.phi * j) @ amplitudes)
        t[n_max] += 1.0
        return CoherentSidebands(r=r, t=t, n_max=n_max, power=(drive.rabi / array.gamma1) ** 2)

    def sidebands(self, array, drive, m, n_max: int) -> CoherentSidebands:
        trajectory = self.steady_trajectory(array, drive, m)
        return self.coherent_sidebands(trajectory, array, drive, m, n_max)

    # ------------------------------------------------------------------
    # Emission spectrum
    # ------------------------------------------------------------------

    def emission_psd(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        grid: FrequencyGrid,
        direction: Direction = Direction.FORWARD,
    ) -> SpectralDensity:
        """PSD of b = sum_j e^{-+i phi j} s_j (forward/backward) versus detuning from the drive.

        Coherent lines come from the Fourier series of <b>(t); the incoherent
        part is regressed from (b - <b>) rho over phases of one modulation period.
        """
        SceneService.check(grid=grid)
        settings = self.settings
        equation = self._master_equation(array, drive, m, reference=drive.omega, limit=settings.PSD_MAX_EMITTERS)
        direction = Direction(direction)
        frequencies = grid.values
        label = direction.value
        if drive.rabi == 0.0:
            zeros = np.zeros_like(frequencies)
            return SpectralDensity(frequencies=frequencies, psd=zeros, incoherent=zeros, coherent=zeros, label=label)

        dt, steps = self._step_plan(equation, drive, m, array.gamma1)
        rho = self.ground_state(array.size)
        transient = self._transient_periods(array, m) * steps
        stride = 1 if equation.dim <= 16 else steps
        _, _, _, rho, _ = self._evolve(equation, rho, 0.0, dt, transient, positivity_every=stride)
        t_start = transient * dt
        times, states, closing = integrate_fixed(equation, rho, t_start, dt, steps)
        drift = float(np.max(np.abs(closing - states[0])))
        if drift > settings.ATTRACTOR_TOL:
            raise NonStationary(f"density matrix changed by {drift:.2e} over one period")
        times, states = times[:steps], states[:steps]

        j = np.arange(array.size)
        sign = -1.0 if direction == Direction.FORWARD else 1.0
        b = np.tensordot(np.exp(sign * 1j * array.phi * j), equation.sigma, axes=1)
        b_dag = b.conj().T
        mean_b = np.einsum("ij,tji->t", b, states)

        orders = orders_in_band(frequencies[0], frequencies[-1], m.omega_mod, pad=1)
        lines = fourier_lines(mean_b, times, m.omega_mod, orders)
        coherent = bin_lines(frequencies, orders * m.omega_mod, np.abs(lines) ** 2)

        phases = settings.ABSOLUTE_TIME_PHASES
        picks = np.arange(0, steps, steps // phases)[:phases]
        t_k = times[picks]
        seed = b @ states[picks] - mean_b[picks, None, None] * states[picks]
        correlation = self._regress(equation, array, m, t_k, seed, b_dag, dt, steps)
        incoherent = correlation_to_psd(dt, correlation, frequencies)

        logger.info(f"Emission PSD ({label}): N={array.size}, {len(correlation)} tau samples")
        return SpectralDensity(
            frequencies=frequencies,
            psd=incoherent + coherent,
            incoherent=incoherent,
            coherent=coherent,
            label=label,
        )

    def _regress(self, equation, array, m, t_k, seed, b_dag, dt, steps) -> np.ndarray:
        settings = self.settings

        def trace_with(x):
            return np.einsum("ij,pji->p", b_dag, x)

        start = float(np.max(np.abs(trace_with(seed))))
        if start == 0.0:
            return np.zeros(2, dtype=complex)
        cap = settings.CORRELATION_CAP_DECAY_TIMES / array.gamma1
        max_chunks = max(1, math.ceil(cap / (steps * dt)))
        pieces = []
        x = seed
        tau = 0.0
        for index in range(max_chunks):
            _, records, x = integrate_fixed(
                lambda s, y: equation(t_k + s, y), x, tau, dt, steps, observe=lambda s, y: trace_with(y)
            )
            tau += steps * dt
            averaged = records.mean(axis=1)
            pieces.append(averaged if index == 0 else averaged[1:])
            if np.max(np.abs(records[-(steps // 2):])) < settings.CORRELATION_CUTOFF * start:
                break
        else:
            logger.warning(f"Correlation window capped at {cap:.3e} s before decaying")
        return np.concatenate(pieces)
