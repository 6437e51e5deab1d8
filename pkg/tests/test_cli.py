import json

import numpy as np
import pandas as pd
import pytest

from src.cli import run
from src.models.schemas.calibration import MeasuredSpectrum
from src.repositories.measurement_repository import MeasurementRepository
from src.repositories.result_repository import ResultRepository
from src.services.calibration_service import CalibrationService
from src.services.scene_service import SceneService

from conftest import emitter_mhz

QUBIT = {"f0_mhz": 6129.0, "gamma1_mhz": 4.4, "gamma2_mhz": 4.1, "am_mhz": 30.0}


def write_config(path, qubits=None, **overrides):
    data = {
        "qubits": qubits if qubits is not None else [QUBIT, {**QUBIT, "alpha_over_pi": 1.0}],
        "phi_over_pi": 0.5,
        "drive": {"f_mhz": 6109.0, "rabi_mhz": 0.0, "port": "left"},
        "modulation": {"omega_mhz": 20.0},
    }
    data.update(overrides)
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def config(tmp_path):
    return write_config(tmp_path / "scene.json")


def test_sidebands_writes_table_and_manifest(tmp_path, config, capsys):
    out = tmp_path / "out"
    assert run(["sidebands", "--config", config, "--output-dir", str(out)]) == 0

    table = pd.read_csv(out / "sidebands_sidebands.csv")
    assert list(table.columns) == ["n", "re_r", "im_r", "re_t", "im_t"]
    assert 0 in table["n"].tolist()

    manifest = ResultRepository(out).read_manifest("sidebands.manifest.json")
    assert manifest.subcommand == "sidebands"
    assert manifest.tier == "floquet"
    scene = SceneService.scene_from_config(SceneService.parse_config(manifest.config))
    assert scene.array.size == 2
    assert str(out / "sidebands_sidebands.csv") in capsys.readouterr().out


def test_single_qubit_sweep(tmp_path, config):
    out = tmp_path / "out"
    code = run(["single-qubit", "--config", config, "--am-mhz", "0", "--sweep", "6060:6200:281", "--output-dir", str(out)])
    assert code == 0
    table = pd.read_csv(out / "single-qubit_t0.csv")
    assert len(table) == 281
    dip = table.loc[table["power"].idxmin()]
    assert dip["f_mhz"] == pytest.approx(6129.0, abs=0.5)


def test_invalid_config_names_the_field(tmp_path, capsys):
    bad = write_config(tmp_path / "bad.json", qubits=[{**QUBIT, "gamma2_mhz": 1.0}])
    assert run(["sidebands", "--config", bad, "--output-dir", str(tmp_path)]) == 2
    assert "gamma2" in capsys.readouterr().err


def test_missing_config_is_invalid_input(tmp_path):
    assert run(["sidebands", "--config", str(tmp_path / "nope.yaml"), "--output-dir", str(tmp_path)]) == 2


def test_scene_is_required(tmp_path):
    assert run(["sidebands", "--output-dir", str(tmp_path)]) == 2


def test_bad_sweep_argument():
    assert run(["single-qubit", "--sweep", "6060:6200"]) == 2


def test_unknown_preset(tmp_path, root, monkeypatch):
    monkeypatch.chdir(root)
    assert run(["sidebands", "--preset", "no_such_scene", "--output-dir", str(tmp_path)]) == 2


def test_preset_run(tmp_path, root, monkeypatch):
    monkeypatch.chdir(root)
    out = tmp_path / "out"
    assert run(["sidebands", "--preset", "gyrator", "--output-dir", str(out), "--tag", "gy"]) == 0
    assert (out / "gy_sidebands.csv").is_file()
    assert json.loads((out / "gy.json").read_text())["n_max"] >= 1


def test_preset_outside_the_repository(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["sidebands", "--preset", "gyrator", "--output-dir", "out", "--tag", "gy"]) == 0
    assert (tmp_path / "out" / "gy_sidebands.csv").is_file()


def test_spectrum_size_limit_is_a_solver_error(tmp_path, capsys):
    config = write_config(
        tmp_path / "five.json",
        qubits=[QUBIT] * 5,
        drive={"f_mhz": 6129.0, "rabi_mhz": 2.0, "port": "left"},
    )
    assert run(["psd", "--config", config, "--output-dir", str(tmp_path)]) == 3
    assert "DimensionTooLarge" in capsys.readouterr().err


def test_map_output_does_not_depend_on_workers(tmp_path, config):
    outputs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        args = ["map", "--config", config, "--alpha-steps", "5", "--detuning-steps", "3", "--workers", workers]
        assert run(args + ["--output-dir", str(out)]) == 0
        outputs.append(((out / "map_map.csv").read_bytes(), (out / "map_cut.csv").read_bytes()))
    assert outputs[0] == outputs[1]


def test_map_table_columns(tmp_path, config):
    out = tmp_path / "out"
    args = ["map", "--config", config, "--alpha-steps", "3", "--detuning-steps", "2", "--workers", "1"]
    assert run(args + ["--output-dir", str(out)]) == 0
    table = pd.read_csv(out / "map_map.csv")
    assert list(table.columns[:5]) == ["alpha_over_pi", "detuning_mhz", "p_fwd", "p_bwd", "directivity"]
    assert len(table) == 6
    cut = pd.read_csv(out / "map_cut.csv")
    assert list(cut.columns) == ["alpha_over_pi", "p_fwd", "p_bwd", "directivity"]


def test_replay_reproduces_outputs(tmp_path, config):
    first, second = tmp_path / "first", tmp_path / "second"
    assert run(["sidebands", "--config", config, "--output-dir", str(first)]) == 0
    assert run(["replay", str(first / "sidebands.manifest.json"), "--output-dir", str(second)]) == 0
    name = "sidebands_sidebands.csv"
    assert (first / name).read_bytes() == (second / name).read_bytes()


def test_fit_from_csv(tmp_path, settings):
    qubit = emitter_mhz()
    grid = (6129.0 + np.linspace(-50.0, 50.0, 401)) * 1e6
    clean = CalibrationService(settings).synthesize_transmission(grid, qubit)
    path = MeasurementRepository(tmp_path).save_spectrum(clean, "qubit.csv")
    flat = MeasuredSpectrum(frequencies=grid, power=np.full(grid.size, 0.5))
    background = MeasurementRepository(tmp_path).save_spectrum(flat, "background.csv")
    raw = MeasuredSpectrum(frequencies=grid, power=0.5 * clean.power)
    raw_path = MeasurementRepository(tmp_path).save_spectrum(raw, "raw.csv")

    out = tmp_path / "out"
    assert run(["fit", "--spectrum", str(path), "--output-dir", str(out)]) == 0
    fitted = json.loads((out / "fit.json").read_text())["qubit"]
    assert fitted["f0_mhz"] == pytest.approx(6129.0, rel=1e-7)
    assert fitted["gamma1_mhz"] == pytest.approx(4.4, rel=1e-5)
    assert fitted["gamma2_mhz"] == pytest.approx(3.9, rel=1e-5)

    assert run(["fit", "--spectrum", str(raw_path), "--background", str(background), "--output-dir", str(out), "--tag", "bg"]) == 0
    assert json.loads((out / "bg.json").read_text())["qubit"]["gamma1_mhz"] == pytest.approx(4.4, rel=1e-5)
    assert (out / "bg_normalized.csv").is_file()


def test_fit_needs_data(tmp_path):
    assert run(["fit", "--output-dir", str(tmp_path)]) == 2
