import json

import numpy as np
import pandas as pd
import pytest

from src.models.schemas.calibration import MeasuredSpectrum
from src.repositories.measurement_repository import MeasurementRepository
from src.repositories.result_repository import ResultRepository
from src.repositories.scene_repository import SceneRepository
from src.services.scene_service import SceneService
from src.utils.errors import GridMismatch, InvalidParameter


def test_every_preset_builds_a_valid_scene(root, settings):
    scenes = SceneRepository(root, settings)
    assert "directional_map" in scenes.preset_names()
    for name in scenes.preset_names():
        SceneService.validate(SceneService.scene_from_config(scenes.preset(name)))
    assert scenes.preset_options("nested_mollow_scan")["omega_mhz"][0] == 36.0


def test_unknown_preset(root, settings):
    with pytest.raises(InvalidParameter):
        SceneRepository(root, settings).preset("missing")


def test_scene_file_round_trip(tmp_path, root, settings):
    scenes = SceneRepository(tmp_path, settings)
    config = SceneRepository(root, settings).preset("isolator")
    for name in ("scene.json", "scene.yaml"):
        scenes.save(config, name)
        assert scenes.load(name) == config


def test_malformed_scene_file(tmp_path, settings):
    (tmp_path / "broken.yaml").write_text("qubits: [\n", encoding="utf-8")
    (tmp_path / "list.yaml").write_text("- 1\n- 2\n", encoding="utf-8")
    scenes = SceneRepository(tmp_path, settings)
    for name in ("broken.yaml", "list.yaml", "absent.yaml"):
        with pytest.raises(InvalidParameter):
            scenes.load(name)


def test_spectrum_csv_round_trip(tmp_path):
    repo = MeasurementRepository(tmp_path)
    grid = np.linspace(6100.0, 6150.0, 11) * 1e6
    spectrum = MeasuredSpectrum(frequencies=grid, power=np.linspace(0.2, 1.0, 11))
    repo.save_spectrum(spectrum, "qubit.csv")
    repo.save_spectrum(spectrum, "bg.csv")
    loaded = repo.load_spectrum("qubit.csv", background="bg.csv")
    np.testing.assert_allclose(loaded.frequencies, grid, rtol=1e-15)
    np.testing.assert_array_equal(loaded.power, spectrum.power)
    np.testing.assert_array_equal(loaded.background, spectrum.power)


def test_background_on_another_grid(tmp_path):
    repo = MeasurementRepository(tmp_path)
    grid = np.linspace(6100.0, 6150.0, 11) * 1e6
    repo.save_spectrum(MeasuredSpectrum(frequencies=grid, power=np.ones(11)), "qubit.csv")
    repo.save_spectrum(MeasuredSpectrum(frequencies=grid + 1e6, power=np.ones(11)), "bg.csv")
    with pytest.raises(GridMismatch):
        repo.load_spectrum("qubit.csv", background="bg.csv")


def test_measurement_columns_are_checked(tmp_path):
    (tmp_path / "pairs.csv").write_text("av_vpp,omega_mhz\n0.1,20\n", encoding="utf-8")
    (tmp_path / "nan.csv").write_text("freq_mhz,power\n6129,nan\n", encoding="utf-8")
    repo = MeasurementRepository(tmp_path)
    with pytest.raises(InvalidParameter):
        repo.load_pairs("pairs.csv")
    with pytest.raises(InvalidParameter):
        repo.load_spectrum("nan.csv")


def test_results_are_written_deterministically(tmp_path):
    repo = ResultRepository(tmp_path / "out")
    frame = pd.DataFrame({"x": [0.1, 1.0 / 3.0], "y": [1e-300, -2.5]})
    first = repo.write_table("table", frame).read_bytes()
    second = repo.write_table("table", frame).read_bytes()
    assert first == second
    assert b"\r\n" not in first
    written = pd.read_csv(tmp_path / "out" / "table.csv", float_precision="round_trip")
    np.testing.assert_array_equal(written.to_numpy(), frame.to_numpy())
    path = repo.write_json("records", {"b": 1, "a": [1.5]})
    assert json.loads(path.read_text()) == {"a": [1.5], "b": 1}
