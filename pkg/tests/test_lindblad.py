import math

import numpy as np
import pytest

from src.models.enums import Direction, DissipatorConvention, Port
from src.models.schemas.scene import (
    DriveConfig,
    EmitterParams,
    FrequencyGrid,
    ModulationConfig,
    WaveguideArray,
)
from src.services.bloch_service import BlochService
from src.services.floquet_service import FloquetService
from src.services.lindblad_service import (
    LindbladService,
    MasterEquation,
    excitation_numbers,
    lowering_operators,
)
from src.utils.errors import DimensionTooLarge, InvalidParameter, PositivityLost

from conftest import pair


@pytest.fixture
def lindblad(settings):
    return LindbladService(settings)


def lone(emitter):
    return WaveguideArray(emitters=(emitter,), phi=0.0)


class TestOperators:
    def test_basis_order(self):
        np.testing.assert_array_equal(excitation_numbers(2), [[0, 0, 1, 1], [0, 1, 0, 1]])
        sigma = lowering_operators(2)
        assert sigma.shape == (2, 4, 4)
        np.testing.assert_array_equal(lowering_operators(1)[0], [[0, 1], [0, 0]])
        # emitter 0 is the most significant factor: |10> -> |00>
        assert sigma[0][0, 2] == 1.0
        assert sigma[1][0, 1] == 1.0

    def test_quarter_wave_spacing_gives_pure_exchange(self, unit_qubit, unit_modulation):
        array = pair(unit_qubit)
        equation = MasterEquation(array, DriveConfig(omega=0.0), unit_modulation, reference=0.0)
        assert equation.static[2, 1] == pytest.approx(0.5 * array.gamma1, abs=1e-12)
        assert equation.static[1, 2] == pytest.approx(0.5 * array.gamma1, abs=1e-12)

    @pytest.mark.parametrize(
        "convention, size, expected",
        [
            (DissipatorConvention.PURE_DEPHASING, 1, 2),
            (DissipatorConvention.PRINTED_DIAGONAL, 1, 1),
            (DissipatorConvention.PURE_DEPHASING, 2, 4),
            (DissipatorConvention.PRINTED_DIAGONAL, 2, 2),
        ],
    )
    def test_jump_operator_count(self, unit_qubit, unit_modulation, convention, size, expected):
        array = pair(unit_qubit) if size == 2 else lone(unit_qubit)
        equation = MasterEquation(array, DriveConfig(omega=0.0), unit_modulation, 0.0, convention)
        assert len(equation.jumps) == expected

    def test_undriven_generator_decays_excited_state(self, lindblad, unit_qubit, unit_modulation):
        generator = lindblad.build_generator(lone(unit_qubit), DriveConfig(omega=0.0), unit_modulation, t=0.0)
        excited = np.diag([0.0, 1.0]).astype(complex)
        rate = generator(excited)
        assert rate[1, 1].real == pytest.approx(-unit_qubit.gamma1)
        assert rate[0, 0].real == pytest.approx(unit_qubit.gamma1)


class TestEvolution:
    def test_density_matrix_invariants_hold(self, lindblad, unit_qubit, unit_modulation):
        array = pair(unit_qubit, alpha2=math.pi)
        drive = DriveConfig(omega=-1.0, rabi=1.0)
        traj = lindblad.evolve(lindblad.ground_state(2), array, drive, unit_modulation, (0.0, 5.0))
        rho = traj.final_state
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(rho)[0] >= -1e-8
        assert np.all((traj.excited >= -1e-10) & (traj.excited <= 1.0 + 1e-10))

    def test_recorded_coherence_is_the_expectation_value(self, lindblad, unit_qubit, unit_modulation):
        drive = DriveConfig(omega=0.5, rabi=1.0)
        traj = lindblad.evolve(lindblad.ground_state(1), lone(unit_qubit), drive, unit_modulation, (0.0, 2.0))
        rho = traj.final_state
        # <sigma^-> = Tr(sigma^- rho) = rho[e, g]
        assert traj.sigma[-1, 0] == pytest.approx(rho[1, 0], abs=1e-12)
        assert abs(rho[1, 0].imag) > 1e-3

    def test_check_density_matrix(self, lindblad):
        lindblad.check_density_matrix(np.diag([0.25, 0.75]).astype(complex))
        with pytest.raises(PositivityLost):
            lindblad.check_density_matrix(np.diag([1.2, -0.2]).astype(complex))
        with pytest.raises(PositivityLost):
            lindblad.check_density_matrix(np.diag([0.5, 0.4]).astype(complex))

    def test_invalid_initial_state(self, lindblad, unit_qubit, unit_modulation):
        drive = DriveConfig(omega=0.0, rabi=1.0)
        with pytest.raises(InvalidParameter):
            lindblad.evolve(np.eye(2) * 0.45, lone(unit_qubit), drive, unit_modulation, (0.0, 1.0))
        with pytest.raises(InvalidParameter):
            lindblad.evolve(np.eye(4) / 4, lone(unit_qubit), drive, unit_modulation, (0.0, 1.0))

    def test_dimension_limit(self, settings, unit_qubit, unit_modulation):
        service = LindbladService(settings.model_copy(update={"LINDBLAD_MAX_EMITTERS": 2}))
        array = WaveguideArray(emitters=(unit_qubit,) * 3, phi=0.5 * math.pi)
        with pytest.raises(DimensionTooLarge):
            service.evolve(service.ground_state(3), array, DriveConfig(omega=0.0), unit_modulation, (0.0, 1.0))

    def test_single_emitter_steady_population(self, lindblad):
        p = EmitterParams(omega0=0.0, gamma1=1.0, gamma2=0.8)
        drive = DriveConfig(omega=0.0, rabi=1.5)
        traj = lindblad.steady_trajectory(lone(p), drive, ModulationConfig(omega_mod=1.0))
        s = 1.5**2 / 0.8
        assert lindblad.steady_excited_population(traj)[0] == pytest.approx(0.5 * s / (1 + s), rel=1e-4)

    def test_single_emitter_matches_bloch_under_modulation(self, settings, lindblad, unit_qubit, unit_modulation):
        drive = DriveConfig(omega=0.0, rabi=1.5)
        traj = lindblad.steady_trajectory(lone(unit_qubit), drive, unit_modulation)
        period = BlochService(settings).periodic_attractor(unit_qubit, drive, unit_modulation)
        bloch_population = float(np.mean(period.states[:, 2])) + 0.5
        assert lindblad.steady_excited_population(traj)[0] == pytest.approx(bloch_population, rel=1e-4)


class TestSidebands:
    def test_zero_drive_has_no_coherent_sidebands(self, lindblad, unit_qubit, unit_modulation):
        with pytest.raises(InvalidParameter):
            lindblad.sidebands(lone(unit_qubit), DriveConfig(omega=0.0), unit_modulation, n_max=2)

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [0.0, 0.5 * math.pi, math.pi])
    def test_weak_drive_agrees_with_linear_response(self, settings, lindblad, unit_qubit, unit_modulation, alpha):
        array = pair(unit_qubit, alpha2=alpha)
        drive = DriveConfig(omega=-unit_modulation.omega_mod, rabi=0.01)
        strong = lindblad.sidebands(array, drive, unit_modulation, n_max=2)
        linear = FloquetService(settings).floquet_spectrum(array, drive, unit_modulation)
        for n in range(-2, 3):
            assert strong.r_n(n) == pytest.approx(linear.r_n(n), rel=1e-2, abs=1e-4)
            assert strong.t_n(n) == pytest.approx(linear.t_n(n), rel=1e-2, abs=1e-4)

    @pytest.mark.slow
    def test_out_of_phase_pair_is_a_gyrator(self, lindblad, unit_qubit, unit_modulation):
        array = pair(unit_qubit, alpha2=math.pi)
        drive = DriveConfig(omega=-unit_modulation.omega_mod, rabi=0.01)
        left = lindblad.sidebands(array, drive, unit_modulation, n_max=2)
        right = lindblad.sidebands(array, drive.model_copy(update={"port": Port.RIGHT}), unit_modulation, n_max=2)
        for n in range(-2, 3):
            assert right.t_n(n) == pytest.approx((-1) ** abs(n) * left.t_n(n), rel=1e-3, abs=1e-5)
        assert abs(left.t_n(1)) > 1e-3


class TestEmission:
    grid = FrequencyGrid(start=-6.0, stop=6.0, count=61)

    def test_undriven_chain_is_dark(self, lindblad, unit_qubit, unit_modulation):
        spectrum = lindblad.emission_psd(pair(unit_qubit), DriveConfig(omega=0.0), unit_modulation, self.grid)
        assert np.all(spectrum.psd == 0.0)
        assert spectrum.label == "forward"

    def test_single_emitter_radiates_symmetrically(self, lindblad, unit_qubit, unit_modulation):
        drive = DriveConfig(omega=0.0, rabi=1.0)
        forward = lindblad.emission_psd(lone(unit_qubit), drive, unit_modulation, self.grid)
        backward = lindblad.emission_psd(
            lone(unit_qubit), drive, unit_modulation, self.grid, direction=Direction.BACKWARD
        )
        np.testing.assert_allclose(forward.psd, backward.psd)
        assert np.max(forward.incoherent) > 0.0

    def test_spectrum_size_limit(self, lindblad, unit_qubit, unit_modulation):
        array = WaveguideArray(emitters=(unit_qubit,) * 5, phi=0.5 * math.pi)
        with pytest.raises(DimensionTooLarge):
            lindblad.emission_psd(array, DriveConfig(omega=0.0, rabi=1.0), unit_modulation, self.grid)
