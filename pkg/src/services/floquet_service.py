# src/services/floquet_service.py
"""Weak-drive Floquet solver for a modulated emitter chain.

Unknowns are the single-excitation amplitudes p_j^(n) of emitter j oscillating
at the probe frequency shifted by n modulation quanta. For each (j, n):

    (w + n W - w0_j + i (G2_j - G1/2)) p_j^n + (i G1/2) sum_k e^{i phi |j-k|} p_k^n
        - (A_j/2) (e^{-i a_j} p_j^{n-1} + e^{+i a_j} p_j^{n+1}) = (R/2) e^{i phi j} delta_{n,0}

The k = j term of the collective sum carries the radiative G1/2, so each
emitter's coherence decays at its total G2. Sidebands beyond +-n_max are zero.
"""

from typing import Dict, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.special import jv

from config.settings import Settings, get_settings
from src.models.enums import Port
from src.models.schemas.floquet import FloquetSolution, SidebandSpectrum
from src.models.schemas.scene import (
    DriveConfig,
    EmitterParams,
    ModulationConfig,
    WaveguideArray,
)
from src.services.scene_service import SceneService
from src.utils.bessel import bessel_cut, bessel_weights
from src.utils.errors import InvalidParameter, NonConvergence, SingularSystem
from src.utils.logger import get_logger

logger = get_logger(__name__)


class FloquetService:
    """Sideband amplitudes and scattering coefficients in linear response."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    # ------------------------------------------------------------------
    # Single emitter, closed form
    # ------------------------------------------------------------------

    def _cut(self, p: EmitterParams, m: ModulationConfig) -> int:
        return bessel_cut(
            p.mod_amp / m.omega_mod,
            tol=self.settings.BESSEL_TAIL_TOL,
            ceiling=self.settings.BESSEL_CUT_CEILING,
        )

    def single_qubit_t0(self, p: EmitterParams, m: ModulationConfig, omega):
        """Elastic transmission of one modulated emitter (scalar or array ``omega``).

        t0 = 1 + sum_n (i G1/2) J_n(A/W)^2 / (w0 + n W - w - i G2)
        """
        SceneService.check(emitter=p, modulation=m)
        n_cut = self._cut(p, m)
        orders, weights = bessel_weights(p.mod_amp / m.omega_mod, n_cut)
        omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
        denom = p.omega0 + np.outer(np.ones_like(omega_arr), orders * m.omega_mod)
        denom = denom - omega_arr[:, None] - 1j * p.gamma2
        t0 = 1.0 + (0.5j * p.gamma1) * np.sum(weights**2 / denom, axis=1)
        return t0 if np.ndim(omega) else complex(t0[0])

    def single_qubit_pn(
        self,
        p: EmitterParams,
        m: ModulationConfig,
        omega: float,
        n: int,
        rabi: float,
    ) -> complex:
        """Closed-form sideband amplitude of one emitter.

        p^(n) = (-1)^n e^{-i n a} (R/2) sum_k J_{k-n}(x) J_k(x) / (w + k W - w0 + i G2),
        x = A/W.
        """
        SceneService.check(emitter=p, modulation=m)
        x = p.mod_amp / m.omega_mod
        if x == 0.0:
            if n != 0:
                return 0j
            return complex(0.5 * rabi / (omega - p.omega0 + 1j * p.gamma2))
        n_cut = self._cut(p, m)
        span = n_cut + abs(n)
        orders = np.arange(-span, span + 1)
        _, j_k = bessel_weights(x, span)
        j_shift = jv(orders - n, x)
        terms = j_shift * j_k / (omega + orders * m.omega_mod - p.omega0 + 1j * p.gamma2)
        prefactor = (-1) ** (n % 2) * np.exp(-1j * n * p.mod_phase) * 0.5 * rabi
        return complex(prefactor * np.sum(terms))

    # ------------------------------------------------------------------
    # Chain, linear system
    # ------------------------------------------------------------------

    def assemble_floquet_system(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        n_max: int,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Dense matrix and right-hand side, emitters taken in the order given.

        Unknowns are ordered sideband-major: index (n + n_max) * N + j.
        """
        SceneService.check(array=array, drive=drive, modulation=m)
        if n_max < 0 or (n_max == 0 and np.any(array.mod_amp > 0)):
            raise InvalidParameter(["n_max"], "n_max must be >= 1 when A_m > 0")

        size = array.size
        orders = np.arange(-n_max, n_max + 1)
        blocks = orders.size
        j = np.arange(size)

        g1 = array.gamma1
        collective = 0.5j * g1 * np.exp(1j * array.phi * np.abs(j[:, None] - j[None, :]))
        local = collective + np.diag(1j * (array.gamma2 - 0.5 * g1))
        detuning = np.add.outer(drive.omega + orders * m.omega_mod, -array.omega0).ravel()

        matrix = np.kron(np.eye(blocks), local) + np.diag(detuning)
        lower = np.diag(-0.5 * array.mod_amp * np.exp(-1j * array.mod_phase))
        upper = np.diag(-0.5 * array.mod_amp * np.exp(1j * array.mod_phase))
        matrix = matrix + np.kron(np.eye(blocks, k=-1), lower) + np.kron(np.eye(blocks, k=1), upper)

        rhs = np.zeros(blocks * size, dtype=complex)
        rhs[n_max * size:(n_max + 1) * size] = 0.5 * drive.rabi * np.exp(1j * array.phi * j)
        return matrix, rhs

    def solve_sidebands(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        n_max: int,
        check_edges: bool = True,
    ) -> FloquetSolution:
        """Solve for p_j^(n); amplitudes are returned in physical emitter order.

        Linear response does not depend on the probe strength, so a zero Rabi
        frequency is replaced by a unit reference amplitude.
        """
        probe = drive.rabi if drive.rabi > 0 else 1.0
        ordered = array.ordered_for(drive.port)
        matrix, rhs = self.assemble_floquet_system(
            ordered, drive.model_copy(update={"rabi": probe}), m, n_max
        )
        try:
            x = scipy.linalg.solve(matrix, rhs)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            logger.error(f"✗ Floquet solve failed for dimension {rhs.size}: {e}")
            raise SingularSystem(f"Floquet system is singular: {e}") from e

        residual = float(np.linalg.norm(matrix @ x - rhs) / np.linalg.norm(rhs))
        if not np.all(np.isfinite(x)) or residual >= self.settings.FLOQUET_RESIDUAL_TOL:
            logger.error(f"✗ Floquet residual {residual:.3e} for dimension {rhs.size}")
            raise SingularSystem(f"relative residual {residual:.3e} exceeds tolerance")

        amplitudes = x.reshape(2 * n_max + 1, array.size).T
        if Port(drive.port) == Port.RIGHT:
            amplitudes = amplitudes[::-1]

        if check_edges and n_max >= 1:
            peak = np.max(np.abs(amplitudes))
            edge = max(np.max(np.abs(amplitudes[:, 0])), np.max(np.abs(amplitudes[:, -1])))
            if peak > 0 and edge > self.settings.FLOQUET_EDGE_TOL * peak:
                logger.warning(
                    f"Sideband amplitudes not decayed at n_max={n_max}: edge/peak={edge / peak:.2e}"
                )

        logger.debug(f"Floquet solve: N={array.size}, n_max={n_max}, residual={residual:.2e}")
        return FloquetSolution(
            amplitudes=np.ascontiguousarray(amplitudes),
            n_max=n_max,
            rabi=probe,
            port=drive.port,
            residual=residual,
        )

    def scattering_coefficients(
        self,
        sol: FloquetSolution,
        array: WaveguideArray,
        drive: DriveConfig,
    ) -> SidebandSpectrum:
        """r^(n) = -(i G1/R) sum_j e^{i phi j} p_j^n ;  t^(n) = delta_n0 - (i G1/R) sum_j e^{-i phi j} p_j^n.

        ``j`` counts emitters from the port the probe enters.
        """
        amplitudes = sol.amplitudes
        if Port(drive.port) == Port.RIGHT:
            amplitudes = amplitudes[::-1]
        j = np.arange(array.size)
        scale = -1j * array.gamma1 / sol.rabi
        r = scale * (np.exp(1j * array.phi * j) @ amplitudes)
        t = scale * (np.exp(-1j * array.phi * j) @ amplitudes)
        t[sol.n_max] += 1.0
        return SidebandSpectrum(r=r, t=t, n_max=sol.n_max, port=drive.port)

    # ------------------------------------------------------------------
    # Truncation and convenience chain
    # ------------------------------------------------------------------

    def _coefficients(self, array, drive, m, n_max, check_edges=True) -> SidebandSpectrum:
        sol = self.solve_sidebands(array, drive, m, n_max, check_edges=check_edges)
        return self.scattering_coefficients(sol, array, drive)

    @staticmethod
    def edge_ratio(sol: FloquetSolution) -> float:
        """Largest |p_j| at n = +-n_max over the largest |p_j| anywhere."""
        amplitudes = np.abs(sol.amplitudes)
        peak = float(np.max(amplitudes))
        if peak == 0.0:
            return 0.0
        return max(float(np.max(amplitudes[:, 0])), float(np.max(amplitudes[:, -1]))) / peak

    def choose_truncation(
        self,
        array: WaveguideArray,
        m: ModulationConfig,
        tol: Optional[float] = None,
        drive: Optional[DriveConfig] = None,
    ) -> int:
        """Smallest n_max such that doubling it moves every |r^n|, |t^n| by less than ``tol``
        and the amplitudes at +-n_max have decayed below FLOQUET_EDGE_TOL of their peak.

        Without an explicit probe a resonant unit-Rabi drive is used.
        """
        tol = self.settings.FLOQUET_TRUNCATION_TOL if tol is None else tol
        if not tol > 0:
            raise InvalidParameter(["tol"], "tolerance must be > 0")
        SceneService.check(array=array, modulation=m)
        if not np.any(array.mod_amp > 0):
            return 0
        drive = drive or DriveConfig(omega=array.reference_frequency, rabi=1.0)

        cache: Dict[int, Tuple[FloquetSolution, SidebandSpectrum]] = {}

        def solve(n: int) -> Tuple[FloquetSolution, SidebandSpectrum]:
            if n not in cache:
                sol = self.solve_sidebands(array, drive, m, n, check_edges=False)
                cache[n] = (sol, self.scattering_coefficients(sol, array, drive))
            return cache[n]

        ceiling = self.settings.FLOQUET_NMAX_CEILING
        for n in range(1, ceiling + 1):
            sol, small = solve(n)
            if self.edge_ratio(sol) > self.settings.FLOQUET_EDGE_TOL:
                continue
            _, large = solve(2 * n)
            window = slice(n, 3 * n + 1)
            change = max(
                np.max(np.abs(np.abs(small.r) - np.abs(large.r[window]))),
                np.max(np.abs(np.abs(small.t) - np.abs(large.t[window]))),
            )
            if change < tol:
                logger.debug(f"Truncation n_max={n} (change {change:.2e} < {tol:g})")
                return n
        logger.error(f"✗ Floquet truncation did not converge below n_max={ceiling}")
        raise NonConvergence(f"sideband truncation not converged at n_max={ceiling}")

    def floquet_spectrum(
        self,
        array: WaveguideArray,
        drive: DriveConfig,
        m: ModulationConfig,
        n_max: Optional[int] = None,
    ) -> SidebandSpectrum:
        """choose_truncation -> solve_sidebands -> scattering_coefficients; ``None`` means auto."""
        if n_max is None:
            n_max = self.choose_truncation(array, m, drive=drive)
        return self._coefficients(array, drive, m, n_max)

    @staticmethod
    def total_power(spectrum: SidebandSpectrum) -> float:
        """sum_n |r^n|^2 + |t^n|^2; equals 1 for a lossless chain."""
        return spectrum.total_power()
