import json
from pathlib import Path

import pytest

from screenaudit.cli import LOCK_NAME, SIDECAR, run


def files_of(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != SIDECAR}


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("inputs")
    assert run(["scenario", "--name", "structural_admissions", "--n", "2000", "--seed", "1",
                "--out", str(root / "sc")]) == 0
    assert run(["train", "--data", str(root / "sc/dataset.csv"), "--schema", str(root / "sc/schema.json"),
                "--outcome", "gpa", "--variant", "aware", "--seed", "1", "--out", str(root / "tr")]) == 0
    cfg = root / "audit.json"
    cfg.write_text(json.dumps({"seed": 3, "audits": [{"kind": "simulated_probe", "probe_n": 1000},
                                                     {"kind": "simulated_probe", "penalty": 10.0, "probe_n": 1000}]}))
    return root


def commands(root: Path) -> dict[str, list[str]]:
    data = ["--data", str(root / "sc/dataset.csv"), "--schema", str(root / "sc/schema.json")]
    scr = ["--screener", str(root / "tr/screener.json")]
    return {
        "scenario": ["scenario", "--name", "false_arrests", "--n", "500", "--seed", "2"],
        "train": ["train", *data, "--outcome", "gpa", "--seed", "2"],
        "decompose": ["decompose", "--world", "trivial", "--plot-data"],
        "select": ["select", *data, *scr, "--k", "200", "--target-share", "0.4", "--outcome", "gpa"],
        "counterfactual": ["counterfactual", *data, *scr, "--candidate", "r00000007", "--set", "group=0",
                           "--k", "200"],
        "tradeoff": ["tradeoff", *data, "--outcome", "gpa", "--cut", "2.75", "--seed", "2", "--plot-data"],
        "audit": ["audit", "--config", str(root / "audit.json")],
        "release-sim": ["release-sim", "--n", "3000", "--seed", "2"],
    }


@pytest.mark.parametrize("name", ["scenario", "train", "decompose", "select", "counterfactual", "tradeoff",
                                  "audit", "release-sim"])
def test_subcommand_twice_is_byte_identical(inputs, tmp_path, name):
    argv = commands(inputs)[name]
    assert run([*argv, "--out", str(tmp_path / "a")]) == 0
    assert run([*argv, "--out", str(tmp_path / "b")]) == 0
    a, b = files_of(tmp_path / "a"), files_of(tmp_path / "b")
    assert a and a == b
    assert (tmp_path / "a" / SIDECAR).exists()
    assert not (tmp_path / "a" / LOCK_NAME).exists()


def test_outputs_embed_run_config(inputs, tmp_path):
    assert run([*commands(inputs)["tradeoff"], "--out", str(tmp_path)]) == 0
    dom = json.loads((tmp_path / "dominance.json").read_text())
    assert dom["run_config"]["seed"] == 2 and dom["run_config"]["subcommand"] == "tradeoff"
    assert set(dom["verdicts"]) == {"blind_vs_aware", "aware_vs_blind"}
    for csv_name in ("curve_blind.csv", "curve_aware.csv", "deciles_disadvantaged.csv"):
        assert (tmp_path / csv_name).read_text().startswith("# run_config: ")


def test_decompose_trivial_world(tmp_path):
    assert run(["decompose", "--world", "trivial", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "decomposition.json").read_text())
    assert rep["outcome_bias"] == rep["input_bias"] == rep["training_bias"] == 0.0
    assert rep["total"] == rep["structural"]


def test_audit_battery_files(inputs, tmp_path):
    assert run(["audit", "--config", str(inputs / "audit.json"), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "audit_summary.json").read_text())
    assert [f["verdict"] for f in summary["findings"]] == ["pass", "flag"]


def test_config_overridden_by_flag(inputs, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5, "n": 100, "name": "biased_ratings"}))
    assert run(["scenario", "--config", str(cfg), "--n", "50", "--out", str(tmp_path / "o")]) == 0
    notes = json.loads((tmp_path / "o" / "notes.json").read_text())
    assert notes["run_config"]["params"]["n"] == 50 and notes["run_config"]["seed"] == 5


@pytest.mark.parametrize("argv,code", [
    (["scenario", "--name", "biased_ratings"], "missing_seed"),
    (["train", "--data", "missing.csv", "--schema", "missing.json", "--outcome", "y", "--seed", "1"],
     "unreadable_input"),
    (["scenario", "--name", "biased_ratings", "--seed", "1", "--param", "bogus=1"], "invalid_parameter"),
])
def test_errors_have_codes(tmp_path, argv, code):
    out = tmp_path / "err"
    assert run([*argv, "--out", str(out)]) == 1
    report = json.loads((out / "error.json").read_text())
    assert report["error"] == code


def test_usage_error_goes_to_stderr(tmp_path, capsys):
    assert run(["train", "--bogus", "--out", str(tmp_path)]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "usage"


def test_schema_mismatch_code(inputs, tmp_path):
    assert run(["scenario", "--name", "false_arrests", "--n", "100", "--seed", "1", "--out", str(tmp_path / "fa")]) == 0
    argv = ["select", "--data", str(tmp_path / "fa/dataset.csv"), "--schema", str(tmp_path / "fa/schema.json"),
            "--screener", str(inputs / "tr/screener.json"), "--k", "5", "--out", str(tmp_path / "e")]
    assert run(argv) == 1
    assert json.loads((tmp_path / "e" / "error.json").read_text())["error"] == "schema_mismatch"


def test_lock_blocks_concurrent_run(tmp_path):
    tmp_path.joinpath(LOCK_NAME).write_text("1")
    assert run(["decompose", "--world", "trivial", "--out", str(tmp_path)]) == 1
    assert json.loads((tmp_path / "error.json").read_text())["error"] == "output_locked"


def test_env_var_sets_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("SCREENAUDIT_OUT", str(tmp_path))
    assert run(["decompose", "--world", "trivial"]) == 0
    assert (tmp_path / "decompose" / "decomposition.json").exists()
