import json

import pytest

from qprivacy.cli import main
from qprivacy.config import Tolerances
from qprivacy.errors import ConfigError, ParseError
from qprivacy.harness import RunConfig, cmd_verify, num, parse_range
from qprivacy.scenario_io import load_scenario, parse_scenario

# a single maximally mixed signal: P_min = 0 exceeds I_c < 0, so pmin_le_ic fails
MIXED_SIGNAL = """
initial: {named: bell, dims: [2, 2]}
legs:
  - name: B
    channel: {kind: depolarizing, params: {p: 0.6}}
ensembles:
  - members:
      - p: 1.0
        state: {dims: [2], density: [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}
"""


def records(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_compute_bell_fixture(fixtures_dir, tmp_path):
    out = tmp_path / "bell.jsonl"
    code = main(["compute", "--scenario", str(fixtures_dir / "bell_depolarizing.scn"),
                 "--format", "records", "--out", str(out)])
    assert code == 0
    lines = records(out)
    assert lines[0]["type"] == "meta"
    priv = [x for x in lines if x["type"] == "privacy"]
    assert priv[0]["ic"] == pytest.approx(1, abs=1e-9)


def test_compute_ghz_saturates(fixtures_dir, tmp_path):
    out = tmp_path / "ghz.jsonl"
    assert main(["compute", "--scenario", str(fixtures_dir / "ghz_identity.scn"),
                 "--format", "records", "--out", str(out)]) == 0
    checks = {x["check"]: x for x in records(out) if x["type"] == "check"}
    assert abs(checks["theorem1_pmin_sum_le_0"]["slack"]) <= 1e-8


def test_compute_w_fixture(fixtures_dir, capsys):
    assert main(["compute", "--scenario", str(fixtures_dir / "w_amplitude_damping.scn")]) == 0
    assert "failures: 0" in capsys.readouterr().out


def test_report_record_schema(fixtures_dir, tmp_path):
    out = tmp_path / "r.jsonl"
    main(["compute", "--scenario", str(fixtures_dir / "ghz_identity.scn"), "--format", "records", "--out", str(out)])
    lines = records(out)
    meta = lines[0]
    assert {"version", "seed", "config_hash", "created", "command"} <= set(meta)
    for rec in (x for x in lines if x["type"] == "check"):
        assert {"check", "left", "right", "slack", "tolerance", "verdict", "seed", "provenance"} <= set(rec)
    summary = lines[-1]
    assert summary["type"] == "summary" and summary["failures"] == 0


def test_failing_inequality_exits_one(tmp_path, capsys):
    scn = tmp_path / "mixed.scn"
    scn.write_text(MIXED_SIGNAL)
    assert main(["compute", "--scenario", str(scn)]) == 1
    assert "FAIL pmin_le_ic" in capsys.readouterr().out


def test_usage_errors_exit_two(tmp_path, capsys):
    assert main(["verify", "--tolerance", "-1", "--trials", "1"]) == 2
    assert main(["verify", "--dims", "2,x,2"]) == 2
    assert main(["compute"]) == 2
    assert main(["compute", "--scenario", str(tmp_path / "missing.scn")]) == 2
    assert main(["sweep", "--channel", "identity", "--range", "0:1:0.1"]) == 2
    assert main(["sweep", "--channel", "depolarizing", "--range", "1:0:0.1"]) == 2
    assert main(["frobnicate"]) == 2
    assert "error" in capsys.readouterr().err


def test_malformed_dims_leaves_no_output(tmp_path):
    scn = tmp_path / "bad.scn"
    scn.write_text("initial: {dims: [2, -1], vector: [[1, 0]]}\nlegs: [{channel: {kind: identity}}]\n")
    out = tmp_path / "report.txt"
    assert main(["compute", "--scenario", str(scn), "--out", str(out)]) == 2
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [scn]


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        assert main(["verify", "--seed", "42", "--trials", "5", "--format", "records", "--out", str(path)]) == 0
    body = lambda p: p.read_text().splitlines()[1:]  # drop the timestamped meta line
    assert body(a) == body(b)
    assert json.loads(a.read_text().splitlines()[0])["config_hash"] == json.loads(
        b.read_text().splitlines()[0])["config_hash"]


def test_verify_trial_one_body_identical():
    cfg = RunConfig("verify", trials=1, seed=42)
    assert cmd_verify(cfg).body_lines() == cmd_verify(cfg).body_lines()


def test_verify_checks_subset_and_skips(capsys):
    assert main(["verify", "--trials", "2", "--dims", "2,2", "--checks", "ssa,theorem1"]) == 0
    out = capsys.readouterr().out
    assert "strong_subadditivity" in out
    assert "theorem1" in out and "skipped" in out


def test_verify_table_format(capsys):
    assert main(["verify", "--trials", "2", "--format", "table", "--checks", "ssa"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("trial,check,left,right,slack")
    assert len(lines) == 3


def test_sweep_rows(capsys):
    assert main(["sweep", "--channel", "amplitude-damping", "--range", "0:1:0.25", "--format", "table"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split(",")[:2] == ["gamma", "ic"]
    assert len(lines) == 6
    half = dict(zip(lines[0].split(","), lines[3].split(",")))
    assert float(half["gamma"]) == 0.5 and abs(float(half["ic"])) <= 1e-8


def test_sweep_step_larger_than_range(capsys):
    assert main(["sweep", "--channel", "depolarizing", "--range", "0.2:0.3:1", "--format", "table"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and lines[1].startswith("0.2,")


def test_parse_range():
    assert parse_range("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
    assert len(parse_range("0:1:0.05")) == 21
    with pytest.raises(ConfigError):
        parse_range("0:1")
    with pytest.raises(ConfigError):
        parse_range("0:1:0")


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig("verify", trials=0)
    with pytest.raises(ConfigError):
        RunConfig("verify", checks=("nope",))
    with pytest.raises(ConfigError):
        Tolerances(inequality=-1)
    assert RunConfig("verify", seed=1).config_hash() != RunConfig("verify", seed=2).config_hash()


def test_num_rounds_and_normalises_zero():
    assert num(-0.0) == 0.0 and str(num(-0.0)) == "0.0"
    assert num(0.1 + 0.2) == 0.3
    assert num({"a": [1e-20, 2]}) == {"a": [1e-20, 2]}


def test_scenario_parsing(fixtures_dir):
    s = load_scenario(fixtures_dir / "w_amplitude_damping.scn")
    assert [l.name for l in s.legs] == ["B", "C"]
    with pytest.raises(ParseError, match="legs"):
        parse_scenario({"initial": {"named": "bell", "dims": [2, 2]}, "legs": []})
    with pytest.raises(ParseError, match="unknown"):
        parse_scenario({"initial": {"named": "bell", "dims": [2, 2]}, "legs": [], "extra": 1})
    with pytest.raises(ParseError, match="ensembles"):
        parse_scenario({"initial": {"named": "bell", "dims": [2, 2]},
                        "legs": [{"channel": {"kind": "identity"}}],
                        "ensembles": [{"random": 1, "seed": 0}]})


def test_density_initial_is_purified():
    doc = {"initial": {"dims": [2], "density": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]},
           "legs": [{"channel": {"kind": "identity"}}]}
    s = parse_scenario(doc)
    assert s.initial.dims == (2, 2)


def test_invalid_yaml_reports_location(tmp_path):
    p = tmp_path / "x.scn"
    p.write_text("initial: [unclosed\n")
    with pytest.raises(ParseError, match="line"):
        load_scenario(p)
