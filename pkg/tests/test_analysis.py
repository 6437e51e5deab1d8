import logging
import math

import numpy as np
import pytest

from src.models.schemas.scene import DriveConfig, EmitterParams, ModulationConfig, WaveguideArray
from src.services.analysis_service import AnalysisService
from src.utils.errors import AmplitudeTooSmall, InvalidParameter, Undefined
from src.utils.units import mhz_to_angular

from conftest import emitter_mhz, pair


@pytest.fixture
def analysis(settings):
    return AnalysisService(settings, workers=1)


def wrapped_distance(angle, target):
    d = (angle - target) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


class TestMetrics:
    def test_directivity(self):
        assert AnalysisService.directivity(3.0, 1.0) == pytest.approx(0.5)
        assert AnalysisService.directivity(0.0, 2.0) == pytest.approx(-1.0)

    def test_directivity_of_nothing_is_undefined(self):
        with pytest.raises(Undefined):
            AnalysisService.directivity(0.0, 0.0)
        with pytest.raises(InvalidParameter):
            AnalysisService.directivity(-1.0, 1.0)

    def test_isolator_metrics(self):
        metrics = AnalysisService.isolator_metrics(0.5, 0.25)
        assert metrics.isolation_db == pytest.approx(3.0103, abs=1e-4)
        assert metrics.insertion_loss_db == pytest.approx(3.0103, abs=1e-4)
        with pytest.raises(Undefined):
            AnalysisService.isolator_metrics(0.5, 0.0)

    def test_zero_crossings(self):
        assert AnalysisService.zero_crossings([0, 1, 2, 3], [1.0, -1.0, -1.0, 1.0]) == pytest.approx([0.5, 2.5])
        assert AnalysisService.zero_crossings([0, 1], [1.0, 2.0]) == []


class TestAlphaFrequencyMap:
    alphas = [0.0, 0.5 * math.pi, math.pi]

    def detunings(self):
        return mhz_to_angular(np.array([-30.0, -20.0, -10.0]))

    def test_shape_and_normalization(self, analysis, directional_pair, stokes_probe, modulation_20):
        result = analysis.alpha_frequency_map(directional_pair, stokes_probe, modulation_20, self.alphas, self.detunings())
        assert result.forward.shape == (3, 3)
        assert result.directivity.shape == (3, 3)
        peak = max(result.forward_normalized.max(), result.backward_normalized.max())
        assert peak == pytest.approx(1.0)
        assert np.all(np.abs(result.directivity) <= 1.0)
        assert len(list(result.records())) == 9

    def test_alpha_is_periodic(self, analysis, directional_pair, stokes_probe, modulation_20):
        a = analysis.alpha_frequency_map(directional_pair, stokes_probe, modulation_20, [0.4], self.detunings())
        b = analysis.alpha_frequency_map(
            directional_pair, stokes_probe, modulation_20, [0.4 + 2 * math.pi], self.detunings()
        )
        np.testing.assert_allclose(a.forward, b.forward, atol=1e-12)
        np.testing.assert_allclose(a.backward, b.backward, atol=1e-12)

    def test_worker_count_does_not_change_results(self, settings, directional_pair, stokes_probe, modulation_20):
        serial = AnalysisService(settings, workers=1).alpha_frequency_map(
            directional_pair, stokes_probe, modulation_20, self.alphas, self.detunings()
        )
        parallel = AnalysisService(settings, workers=2).alpha_frequency_map(
            directional_pair, stokes_probe, modulation_20, self.alphas, self.detunings()
        )
        np.testing.assert_array_equal(serial.forward, parallel.forward)
        np.testing.assert_array_equal(serial.backward, parallel.backward)

    def test_truncation_covers_the_whole_grid(self, analysis, directional_pair, stokes_probe, modulation_20, caplog):
        detunings = mhz_to_angular(np.array([-40.0, 0.0, 40.0]))
        with caplog.at_level(logging.WARNING, logger="src.services.floquet_service"):
            analysis.alpha_frequency_map(directional_pair, stokes_probe, modulation_20, self.alphas, detunings)
        assert not any("not decayed" in record.message for record in caplog.records)

    def test_unmodulated_sideband_is_undefined(self, analysis, stokes_probe, modulation_20):
        array = pair(emitter_mhz(gamma2=4.1))
        result = analysis.alpha_frequency_map(array, stokes_probe, modulation_20, self.alphas, self.detunings())
        assert np.all(np.isnan(result.directivity))

    def test_needs_two_emitters_and_grids(self, analysis, bare_qubit, directional_pair, stokes_probe, modulation_20):
        with pytest.raises(InvalidParameter):
            analysis.alpha_frequency_map(
                WaveguideArray(emitters=(bare_qubit,), phi=0.0), stokes_probe, modulation_20, self.alphas, [0.0]
            )
        with pytest.raises(InvalidParameter):
            analysis.alpha_frequency_map(directional_pair, stokes_probe, modulation_20, [], [0.0])

    def test_directivity_flips_with_modulation_phase(self, analysis, directional_pair, stokes_probe, modulation_20):
        alphas = np.linspace(-math.pi, math.pi, 25)
        cut = analysis.directivity_cut(directional_pair, stokes_probe, modulation_20, alphas)
        d = cut.directivity[:, 0]
        assert d[12] > 0.5  # alpha = 0
        assert d[0] < -0.9 and d[-1] < -0.9  # alpha = -pi, pi
        assert len(AnalysisService.zero_crossings(alphas, d)) >= 2


class TestTwoPort:
    @pytest.mark.parametrize("offset_mhz", [-8.0, 0.0, 5.0])
    def test_out_of_phase_pair_is_a_gyrator(self, analysis, directional_pair, stokes_probe, modulation_20, offset_mhz):
        drive = stokes_probe.model_copy(update={"omega": stokes_probe.omega + mhz_to_angular(offset_mhz)})
        phase = analysis.gyrator_check(directional_pair.with_phase(1, math.pi), drive, modulation_20)
        assert wrapped_distance(phase, math.pi) < 1e-4

    def test_in_phase_pair_is_reciprocal(self, analysis, directional_pair, stokes_probe, modulation_20):
        phase = analysis.gyrator_check(directional_pair, stokes_probe, modulation_20)
        assert wrapped_distance(phase, 0.0) < 1e-6

    def test_gyrator_phase_needs_a_sideband(self, analysis, stokes_probe, modulation_20):
        with pytest.raises(AmplitudeTooSmall):
            analysis.gyrator_check(pair(emitter_mhz(gamma2=4.1)), stokes_probe, modulation_20)

    def test_isolation_is_odd_in_alpha(self, analysis, directional_pair, stokes_probe, modulation_20):
        alphas = np.array([-2.0, -1.0, -0.3 * math.pi, 0.3 * math.pi, 1.0, 2.0])
        scan = analysis.isolator_scan(directional_pair, stokes_probe, modulation_20, alphas, n=-1)
        np.testing.assert_allclose(scan.isolation_db, -scan.isolation_db[::-1], atol=1e-8)
        np.testing.assert_allclose(scan.s21, scan.s12[::-1], rtol=1e-9)
        assert abs(scan.isolation_db[2]) > 0.01
        assert np.all(scan.insertion_loss_db > 0)

    def test_isolator_working_point(self, analysis, directional_pair, stokes_probe, modulation_20):
        scan = analysis.isolator_scan(directional_pair, stokes_probe, modulation_20, [-0.3 * math.pi], n=1)
        assert 1.8 <= scan.isolation_db[0] <= 4.8
        assert 9.0 <= scan.insertion_loss_db[0] <= 13.0


@pytest.mark.slow
def test_power_map_loses_coherence_at_strong_drive(settings):
    emitter = EmitterParams(omega0=0.0, gamma1=1.0, gamma2=0.5, mod_amp=5.0)
    array = WaveguideArray(emitters=(emitter, emitter), phi=0.5 * math.pi)
    m = ModulationConfig(omega_mod=5.0)
    rabis = np.sqrt([0.01, 9.0, 100.0])
    detunings = np.array([-1.25, -1.0, -0.75]) * m.omega_mod
    result = AnalysisService(settings, workers=1).power_map(array, DriveConfig(omega=0.0), m, rabis, detunings)

    np.testing.assert_allclose(result.powers, [0.01, 9.0, 100.0])
    coherent = result.elastic_r + result.elastic_t + result.inelastic_r + result.inelastic_t
    np.testing.assert_allclose(coherent[0], 1.0, atol=0.1)
    assert np.all(coherent[2] < 0.2)
    assert np.all(result.stokes_r[0] > 0)

    best = int(np.argmax(result.inelastic_r[0]))
    assert result.inelastic_r[0, best] >= 10.0 * result.inelastic_r[2, best]
    # backward Stokes light still wins at intermediate power
    peak = int(np.argmax(result.stokes_r[1] + result.stokes_t[1]))
    assert AnalysisService.directivity(result.stokes_t[1, peak], result.stokes_r[1, peak]) < 0.0


def test_power_map_rejects_bad_grids(analysis, directional_pair, stokes_probe, modulation_20):
    with pytest.raises(InvalidParameter):
        analysis.power_map(directional_pair, stokes_probe, modulation_20, [0.0], [0.0])
    with pytest.raises(InvalidParameter):
        analysis.power_map(directional_pair, stokes_probe, modulation_20, [1.0], [])
