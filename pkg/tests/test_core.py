import math

import numpy as np
import pytest

from src.models.enums import Port
from src.models.schemas.config_file import SceneFile
from src.models.schemas.scene import (
    DriveConfig,
    EmitterParams,
    FrequencyGrid,
    ModulationConfig,
    Scene,
    WaveguideArray,
)
from src.services.scene_service import SceneService
from src.utils.errors import InvalidParameter, ValidationError
from src.utils.units import angular_to_mhz, hz_to_angular, mhz_to_angular

from conftest import emitter_mhz, pair


def make_scene(array, omega_mod=20.0) -> Scene:
    return Scene(
        array=array,
        drive=DriveConfig(omega=array.reference_frequency, rabi=mhz_to_angular(1.0)),
        modulation=ModulationConfig(omega_mod=mhz_to_angular(omega_mod)),
    )


def test_validate_accepts_measured_parameters(directional_pair):
    scene = make_scene(directional_pair)
    assert SceneService.validate(scene) is scene


def test_validate_rejects_gamma2_below_radiative_limit():
    array = WaveguideArray(emitters=(emitter_mhz(gamma1=4.4, gamma2=2.0),), phi=0.0)
    with pytest.raises(InvalidParameter) as info:
        SceneService.validate(make_scene(array))
    assert info.value.fields == ("array.emitters.0.gamma2",)


def test_validate_reports_every_bad_field():
    array = WaveguideArray(
        emitters=(emitter_mhz(), emitter_mhz(gamma1=5.0, am=-1.0)),
        phi=7.0,
    )
    scene = Scene(
        array=array,
        drive=DriveConfig(omega=0.0, rabi=-1.0),
        modulation=ModulationConfig(omega_mod=0.0),
    )
    with pytest.raises(InvalidParameter) as info:
        SceneService.validate(scene)
    fields = set(info.value.fields)
    assert {
        "array.emitters.1.gamma1",
        "array.emitters.1.mod_amp",
        "array.phi",
        "drive.rabi",
        "modulation.omega_mod",
    } <= fields


def test_empty_array_is_invalid():
    with pytest.raises(InvalidParameter) as info:
        SceneService.check(array=WaveguideArray(emitters=(), phi=0.0))
    assert "array.emitters" in info.value.fields


def test_invalid_parameter_is_a_validation_error():
    assert issubclass(InvalidParameter, ValidationError)
    assert issubclass(InvalidParameter, ValueError)


def test_frequency_grid_checks():
    assert FrequencyGrid(start=0.0, stop=1.0, count=11).spacing == pytest.approx(0.1)
    with pytest.raises(InvalidParameter):
        SceneService.check(grid=FrequencyGrid(start=1.0, stop=0.0, count=1))


def test_unit_conversions():
    assert mhz_to_angular(1.0) == pytest.approx(2 * math.pi * 1e6)
    assert hz_to_angular(1.0) == pytest.approx(2 * math.pi)
    assert angular_to_mhz(mhz_to_angular(4.4)) == pytest.approx(4.4)
    np.testing.assert_allclose(angular_to_mhz(mhz_to_angular(np.array([1.0, 20.0]))), [1.0, 20.0])


def test_dephasing_rate(bare_qubit):
    assert bare_qubit.dephasing == pytest.approx(bare_qubit.gamma2 - 0.5 * bare_qubit.gamma1)


def test_right_port_sees_reversed_chain():
    array = pair(emitter_mhz(am=30.0), alpha2=1.0)
    reversed_array = array.ordered_for(Port.RIGHT)
    assert reversed_array.emitters[0].mod_phase == 1.0
    assert reversed_array.emitters[1].mod_phase == 0.0
    assert array.ordered_for(Port.LEFT) is array


def test_with_phase_only_touches_one_emitter(directional_pair):
    changed = directional_pair.with_phase(1, 0.7)
    assert changed.emitters[1].mod_phase == 0.7
    assert changed.emitters[0] == directional_pair.emitters[0]
    assert directional_pair.emitters[1].mod_phase == 0.0


def test_config_round_trip():
    raw = {
        "qubits": [
            {"f0_mhz": 6129.0, "gamma1_mhz": 4.4, "gamma2_mhz": 4.1, "am_mhz": 30.0, "alpha_over_pi": 0.0},
            {"f0_mhz": 6129.0, "gamma1_mhz": 4.4, "gamma2_mhz": 4.1, "am_mhz": 30.0, "alpha_over_pi": 1.0},
        ],
        "phi_over_pi": 0.5,
        "drive": {"f_mhz": 6109.0, "rabi_mhz": 0.5, "port": "right"},
        "modulation": {"omega_mhz": 20.0},
    }
    scene = SceneService.scene_from_config(SceneService.parse_config(raw))
    assert scene.array.size == 2
    assert scene.array.phi == pytest.approx(0.5 * math.pi)
    assert scene.array.emitters[1].mod_phase == pytest.approx(math.pi)
    assert scene.drive.port == Port.RIGHT
    assert scene.modulation.omega_mod == pytest.approx(mhz_to_angular(20.0))

    back = SceneService.scene_to_config(scene)
    assert isinstance(back, SceneFile)
    assert back.qubits[0].gamma1_mhz == pytest.approx(4.4)
    again = SceneService.scene_from_config(SceneService.parse_config(back.model_dump(mode="json")))
    assert again.array.emitters[1].mod_phase == pytest.approx(scene.array.emitters[1].mod_phase)


def test_parse_config_names_missing_and_unknown_fields():
    with pytest.raises(InvalidParameter) as info:
        SceneService.parse_config({"qubits": [], "modulation": {"omega_mhz": 20.0}, "colour": 1})
    assert "drive" in info.value.fields
    assert "colour" in info.value.fields


def test_emitter_rejects_non_finite_values():
    bad = EmitterParams(omega0=math.nan, gamma1=1.0, gamma2=1.0)
    assert ("emitter.omega0", "must be finite") in bad.problems("emitter.")
