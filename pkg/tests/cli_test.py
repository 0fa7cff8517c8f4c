import json

import pandas as pd
import pytest

from assembly.commands import run_subcommand
from assembly.config import ConfigError, ExperimentConfig
from assembly.validate import FAIL, PASS, SKIP, run_validate
from field.shear import FieldSpec
from run_lab import main

ZERO_CONFIG = {
    "field": {"model": "zero"},
    "slope": {"m": 0.6, "n": 0.8},
    "c_list": [0.5],
    "p_grid": {"p_min": -0.8, "p_max": 0.8, "count": 3},
    "window": 1.0,
}


def write_config(path, data):
    path.write_text(json.dumps(data, indent=2))
    return str(path)


def test_golden_config():
    config = ExperimentConfig.golden()
    assert config.field == FieldSpec.golden()
    assert (config.m, config.n) == (0.6, 0.8)
    assert config.window == 10.0


def test_config_round_trip():
    config = ExperimentConfig.golden()
    twin = ExperimentConfig.from_dict(config.to_dict())
    assert twin == config
    assert twin.config_hash() == config.config_hash()


def test_config_hash_changes():
    config = ExperimentConfig.golden()
    assert config.override(c_list=(0.0, 0.7)).config_hash() != config.config_hash()
    assert config.override(window=None).config_hash() == config.config_hash()


def test_config_hash_ignores_output_dir(tmp_path):
    config = ExperimentConfig.golden()
    moved = config.override(output_dir=str(tmp_path / "elsewhere"))
    assert moved.output_dir != config.output_dir
    assert moved.config_hash() == config.config_hash()


def test_c_grid_section():
    data = {key: val for key, val in ZERO_CONFIG.items() if key != "c_list"}
    data["c_grid"] = {"c_min": 0, "c_max": 1, "c_steps": 3}
    config = ExperimentConfig.from_dict(data)
    assert config.c_list == (0.0, 0.5, 1.0)


def test_slope_normalized(caplog):
    config = ExperimentConfig.from_dict({**ZERO_CONFIG, "slope": {"m": 1.2, "n": 1.6}})
    assert config.m == pytest.approx(0.6)
    assert config.n == pytest.approx(0.8)
    assert "normalizing" in caplog.text


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "field": \n}\n')
    with pytest.raises(ConfigError, match="line 3"):
        ExperimentConfig.from_file(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        ExperimentConfig.from_file(tmp_path / "absent.json")


@pytest.mark.parametrize(
    "changes, key",
    [
        ({"slop": {"m": 0.6}}, "slop"),
        ({"slope": {"m": 0.6, "n": 0.8, "k": 1.0}}, "slope.k"),
        ({"slope": {"m": 0.0, "n": 0.0}}, "slope"),
        ({"slope": {"m": "0.6", "n": 0.8}}, "slope.m"),
        ({"slope": {"m": 0.6}}, "slope.n"),
        ({"discount": {"deltas": [0.01, 0.02]}}, "discount.deltas"),
        ({"discount": {"deltas": [0.01, -0.02]}}, "discount.deltas"),
        ({"c_list": [0.5, 0.1]}, "c_grid"),
        ({"field": {"model": "turbulent"}}, "field"),
        ({"simulate": {"grid": 4}}, "simulate.grid"),
        ({"window": -1.0}, "window"),
    ],
)
def test_config_errors_name_the_key(changes, key):
    with pytest.raises(ConfigError, match=key):
        ExperimentConfig.from_dict({**ZERO_CONFIG, **changes})


def test_unknown_subcommand():
    with pytest.raises(ValueError):
        run_subcommand("plot", ExperimentConfig.golden())


def test_main_bad_config_exit_code(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", {**ZERO_CONFIG, "slope": {"m": 0.0, "n": 0.0}})
    assert main(["validate", "--config", path]) == 2
    assert "config error" in capsys.readouterr().err


def test_main_bad_c_range(tmp_path):
    assert main(["strain-curve", "--c-min", "1", "--c-max", "0", "--output-dir", str(tmp_path)]) == 2


def test_main_needs_horizontal_slope(tmp_path):
    assert main(["effective", "--m", "0", "--n", "1", "--output-dir", str(tmp_path)]) == 2


def test_main_dump_field(tmp_path):
    assert main(["dump-field", "--output-dir", str(tmp_path)]) == 0
    df = pd.read_csv(tmp_path / "field.csv")
    assert list(df.columns) == ["x", "v", "v_prime"]
    assert df["v"].iloc[0] == pytest.approx(0.5)
    assert df["x"].iloc[-1] == pytest.approx(10.0)


def test_main_dump_hamiltonian(tmp_path):
    path = write_config(tmp_path / "cfg.json", ZERO_CONFIG)
    assert main(["dump-hamiltonian", "--config", path, "--output-dir", str(tmp_path)]) == 0
    df = pd.read_csv(tmp_path / "hamiltonian.csv")
    assert len(df) == 3 * 129
    assert df["H"].min() == pytest.approx(0.6)


def test_main_effective_zero_field(tmp_path):
    path = write_config(tmp_path / "cfg.json", ZERO_CONFIG)
    assert main(["effective", "--config", path, "--output-dir", str(tmp_path)]) == 0
    curve = pd.read_csv(tmp_path / "effective.csv")
    assert list(curve.columns) == ["c", "p", "H_bar"]
    assert list(curve["H_bar"]) == pytest.approx([1.0, 0.6, 1.0], abs=1e-9)
    table = pd.read_csv(tmp_path / "branches.csv")
    assert list(table.columns) == ["c", "mu", "P_plus", "P_minus"]


def test_main_strain_curve_zero_field(tmp_path):
    path = write_config(tmp_path / "cfg.json", {**ZERO_CONFIG, "c_list": [0.0, 0.5]})
    assert main(["strain-curve", "--config", path, "--output-dir", str(tmp_path)]) == 0
    df = pd.read_csv(tmp_path / "strain_curve.csv")
    assert list(df["h"]) == pytest.approx([1.0, 1.0], abs=1e-9)
    verdicts = json.loads((tmp_path / "strain_verdicts.json").read_text())
    assert verdicts["checks"]["sandwich"]["status"] == PASS
    assert verdicts["checks"]["quench"]["c_bar"] is None


def test_main_discount_zero_field(tmp_path):
    path = write_config(tmp_path / "cfg.json", {**ZERO_CONFIG, "discount": {"deltas": [0.1, 0.05], "grid_step": 0.01}})
    assert main(["discount", "--config", path, "--output-dir", str(tmp_path)]) == 0
    df = pd.read_csv(tmp_path / "discount.csv")
    assert list(df["delta"]) == [0.1, 0.05, 0.0]
    assert list(df["estimate"]) == pytest.approx([1.0, 1.0, 1.0], abs=1e-8)


def test_main_simulate_zero_field(tmp_path):
    path = write_config(tmp_path / "cfg.json", ZERO_CONFIG)
    assert main(["simulate", "--config", path, "--grid", "16", "--T", "0.5", "--output-dir", str(tmp_path)]) == 0
    speed = pd.read_csv(tmp_path / "speed.csv")
    assert list(speed.columns) == ["t", "shift", "speed"]
    assert speed["shift"].iloc[-1] == pytest.approx(0.5, abs=1e-10)
    header = json.loads((tmp_path / "front.json").read_text())
    assert header["nx"] == 16
    assert (tmp_path / "front.bin").stat().st_size == 16 * 16 * 8


@pytest.mark.slow
def test_validate_vertical_slope_skips_strain(tmp_path):
    config = ExperimentConfig.golden().override(
        m=0.0, n=1.0, window=1.0, c_list=(0.0, 0.5), sim_grid=32, sim_T=1.0, output_dir=str(tmp_path)
    )
    manifest = run_validate(config)
    for name in ("strain.lipschitz", "strain.quench", "discount.agreement", "run.reproducible"):
        assert manifest.status_of(name) == SKIP
    details = {v.name: v.detail for v in manifest.verdicts}
    assert details["strain.lipschitz"] == "m=0 trivial case"
    assert manifest.status_of("strain.edges") == PASS
    assert manifest.status_of("hamiltonian.plateau_witness") == PASS


@pytest.mark.slow
def test_validate_golden(tmp_path):
    out = tmp_path / "golden"
    assert main(["validate", "--output-dir", str(out)]) == 0
    first = (out / "manifest.json").read_text()
    manifest = json.loads(first)
    assert manifest["summary"][FAIL] == 0
    checks = {check["name"]: check for check in manifest["checks"]}
    for name in ("discount.agreement", "discount.bounded", "discount.shift", "discount.lipschitz_c", "strain.identity"):
        assert checks[name]["status"] == PASS
    assert "np.float64" not in checks["run.reproducible"]["detail"]
    assert manifest["config_hash"] == ExperimentConfig.golden().override(output_dir=str(out)).config_hash()
    assert (out / "timings.json").exists()

    assert main(["validate", "--output-dir", str(out)]) == 0
    assert (out / "manifest.json").read_text() == first
