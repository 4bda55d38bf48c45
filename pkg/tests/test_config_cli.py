import csv
import json

import pytest

from eophot.cli import main
from eophot.config import SCENARIOS, ConfigError, ScenarioConfig, load_config, load_defaults


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run_cli(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_defaults_cover_every_scenario():
    values = load_defaults()
    for sc in SCENARIOS:
        assert any(k.startswith(sc + ".") for k in values)
        ScenarioConfig(sc, values)


def test_scenario_override_wins_over_shared_value():
    cfg = ScenarioConfig("switch_response")
    assert cfg.num("mzi.extinction_visibility") == pytest.approx(0.979)
    assert ScenarioConfig("fringes").num("mzi.extinction_visibility") == 1.0


def test_user_file_overrides(tmp_path):
    p = write(tmp_path, '[fringes]\nvoltage_step = 0.5\n"detector1.efficiency" = 0.3\n[source]\nrep_rate = 7e7\n')
    cfg = ScenarioConfig("fringes", load_config(p))
    assert cfg.num("voltage_step") == 0.5
    assert cfg.num("detector1.efficiency") == 0.3
    assert cfg.num("source.rep_rate") == 7e7


@pytest.mark.parametrize(
    "text,field",
    [
        ("[fringes]\nbogus = 1\n", "fringes.bogus"),
        ("[fringes]\nvoltage_step = \"x\"\n", "fringes.voltage_step"),
        ("[mzi]\nv_cross = \"auto\"\n", "mzi.v_cross"),
        ("[feedback]\nruns = 2.5\n", "feedback.runs"),
    ],
)
def test_invalid_values_name_the_field(tmp_path, text, field):
    with pytest.raises(ConfigError) as info:
        load_config(write(tmp_path, text))
    assert info.value.field == field


def test_nonpositive_step_is_rejected():
    cfg = ScenarioConfig("fringes").with_values(voltage_step=0.0)
    with pytest.raises(ConfigError) as info:
        cfg.sweep("voltage")
    assert info.value.field == "fringes.voltage_step"


def test_model_errors_are_reported_against_section():
    cfg = ScenarioConfig("fringes").with_values(detector1__efficiency=1.5)
    with pytest.raises(ConfigError) as info:
        cfg.detector(1)
    assert "detector1" in info.value.field


def test_sweep_is_inclusive():
    cfg = ScenarioConfig("fringes")
    v = cfg.sweep("voltage")
    assert v[0] == -5.0 and v[-1] == pytest.approx(5.0) and len(v) == 51


def test_seed_range():
    with pytest.raises(ConfigError):
        ScenarioConfig("fringes", seed=2**64)


def test_cli_run_writes_csv_and_summary(tmp_path, capsys):
    code, out, err = run_cli(["run", "switch_response", "--seed", "5", "--out", str(tmp_path)], capsys)
    assert code == 0 and err == ""
    assert set(out.split()) == {"switch_response.csv", "switch_response_summary.csv"}
    with open(tmp_path / "switch_response_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0].keys() == {"quantity", "value", "uncertainty", "unit"}
    assert "switching_efficiency" in {r["quantity"] for r in rows}


def test_cli_fit_reads_scenario_output(tmp_path, capsys):
    run_cli(["run", "fringes", "--out", str(tmp_path), "--noise", "off"], capsys)
    code, out, _ = run_cli(["fit", "sinusoid", "--in", str(tmp_path / "fringes.csv"), "--y", "coincidence_counts"], capsys)
    assert code == 0
    rows = {r[0]: r for r in csv.reader(out.splitlines())}
    assert float(rows["visibility"][1]) == pytest.approx(0.952, abs=1e-9)


@pytest.mark.parametrize(
    "argv,kind,code",
    [
        (["run", "nope", "--out", "x"], "usage", 2),
        (["run", "fringes"], "usage", 2),
        (["run", "fringes", "--seed", "-1", "--out", "x"], "usage", 2),
        (["fit", "dip", "--in", "/nonexistent.csv"], "io", 4),
    ],
)
def test_cli_errors_are_one_json_line(argv, kind, code, capsys):
    got, out, err = run_cli(argv, capsys)
    assert got == code
    lines = err.strip().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["error"] == kind


def test_cli_config_error_leaves_no_output(tmp_path, capsys):
    cfg = write(tmp_path, "[fringes]\nintegration_time = -1\n")
    out_dir = tmp_path / "out"
    code, _, err = run_cli(["run", "fringes", "--config", str(cfg), "--out", str(out_dir)], capsys)
    assert code == 3
    assert json.loads(err)["field"] == "fringes.integration_time"
    assert not out_dir.exists() or not any(out_dir.iterdir())


def test_cli_bad_fit_column(tmp_path, capsys):
    p = write(tmp_path, "x,y\n1,2\n", "d.csv")
    code, _, err = run_cli(["fit", "dip", "--in", str(p), "--y", "counts"], capsys)
    assert code == 4 and json.loads(err)["field"] == "--y"
