"""Command-line surface: flags, config precedence, exit codes and report output"""
import csv
import io
import json

import pytest
import yaml

from action.experiment_router import ExperimentRouter
from main import build_parser, build_run_config, load_config, run
from core.errors import UsageError
from reporting.digest import canonical_json, verify_digest
from reporting.report_builder import CSV_COLUMNS


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    monkeypatch.delenv("COINLAB_CONFIG", raising=False)
    monkeypatch.chdir(tmp_path)


def _report(capsys, argv):
    code = run(argv)
    return code, json.loads(capsys.readouterr().out)


def test_constants_report(capsys):
    code, report = _report(capsys, ["constants", "--n", "1000", "--t", "5", "--seed", "1"])
    assert code == 0
    assert [entry["kind"] for entry in report["results"]] == ["claims"]
    assert report["results"][0]["verdict"] == "pass"
    assert report["summary"]["fail"] == 0
    assert verify_digest(report)
    assert set(report) == {"tool_version", "config", "results", "summary", "digest", "timing"}


def test_missing_seed(capsys):
    assert run(["constants", "--n", "1000"]) == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_flag():
    assert run(["constants", "--seed", "1", "--bogus", "3"]) == 2


def test_unknown_subcommand():
    assert run(["lemma99", "--seed", "1"]) == 2


def test_invalid_parameters_rejected_before_running(capsys):
    assert run(["constants", "--n", "10", "--t", "5", "--seed", "1"]) == 2
    assert capsys.readouterr().out == ""


def test_scientific_count_literal():
    args = build_parser().parse_args(["fact3", "--trials", "1e6", "--seed", "0"])
    assert args.trials == 1000000
    with pytest.raises(UsageError):
        build_parser().parse_args(["fact3", "--trials", "1.5", "--seed", "0"])


class TestConfigFile:

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# lab run\nn=1000\nt=5\nseed=3\nt-excluded=1\n", encoding="utf-8")
        args = build_parser().parse_args(["constants", "--config", str(path), "--t", "4"])
        run_config = build_run_config(args, load_config())
        assert run_config.seed == 3
        assert run_config.experiments["constants"]["t"] == 4
        assert run_config.experiments["constants"]["n"] == 1000
        assert run_config.experiments["constants"]["t_excluded"] == 1

    def test_yaml_defaults_fill_the_rest(self):
        args = build_parser().parse_args(["lemma71", "--seed", "0"])
        settings = build_run_config(args, load_config()).experiments["lemma71"]
        assert (settings["n"], settings["t"], settings["m"], settings["c1"]) == (40, 2, 10, 0.05)

    def test_all_ignores_parameter_overrides(self):
        args = build_parser().parse_args(["all", "--seed", "0", "--n", "5"])
        run_config = build_run_config(args, load_config())
        assert list(run_config.experiments)[0] == "constants"
        assert run_config.experiments["fact3"]["n"] == 16

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed=1\nflavour=mint\n", encoding="utf-8")
        assert run(["constants", "--config", str(path)]) == 2

    def test_missing_file(self, tmp_path):
        assert run(["constants", "--seed", "1", "--config", str(tmp_path / "absent.cfg")]) == 2


def test_fact3_entries(capsys):
    code, report = _report(capsys, ["fact3", "--n", "4", "--trials", "2000", "--seed", "1"])
    assert code == 0
    kinds = [entry["kind"] for entry in report["results"]]
    assert kinds == ["exact"] + ["verdict"] * 4
    assert report["results"][1]["claim_id"] == "fact3:n=4:r=1"


def test_digest_ignores_worker_count(capsys):
    argv = ["fact3", "--n", "6", "--r", "2", "--trials", "20000", "--seed", "5"]
    _, single = _report(capsys, argv + ["--workers", "1"])
    _, pooled = _report(capsys, argv + ["--workers", "2"])
    assert single["digest"] == pooled["digest"]
    assert single["results"] == pooled["results"]


def test_csv_output(tmp_path):
    out = tmp_path / "report.csv"
    assert run(["constants", "--n", "1000", "--t", "5", "--seed", "1", "--format", "csv", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text(encoding="utf-8"))))
    assert list(rows[0]) == CSV_COLUMNS
    assert rows[0]["claim_id"] == "constants"


def test_records_out(tmp_path, capsys):
    records = tmp_path / "records.jsonl"
    code, report = _report(capsys, ["coin-iter", "--n", "12", "--t", "1", "--t-excluded", "1", "--t-stopped", "1",
                                    "--iterations", "50", "--seed", "2", "--records-out", str(records)])
    assert code == 0
    lines = records.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 50
    assert json.loads(lines[0])["iteration"] == 0
    assert {entry["claim_id"] for entry in report["results"]} >= {"coin-good-event", "coin-additivity"}


SMALL_DEFAULTS = {
    "constants": {"n": 1000, "t": 5, "epsilon": 0.1},
    "fact3": {"n": 6, "trials": 2000},
    "lemma52-1": {"n": 200, "t": 1, "trials": 2000},
    "lemma52-2": {"n": 12, "t": 1, "trials": 2000, "direction": 1},
    "lemma71": {"n": 40, "t": 2, "m": 10, "c1": 0.05, "trials": 500},
    "coin-iter": {"n": 12, "t": 1, "t_excluded": 1, "t_stopped": 1, "iterations": 200},
    "agreement": {"n": 4, "t": 0, "runs": 20, "max_iterations": 200},
    "spectral": {"n": 6, "m": 4, "t": 1, "epsilon": 0.1, "trials": 20},
}


def test_all_is_identical_across_workers(tmp_path, monkeypatch, capsys):
    config = load_config()
    config["experiments"] = SMALL_DEFAULTS
    config["monte_carlo"]["block_trials"] = 256
    config["spectral"]["oracle_samples"] = 50
    path = tmp_path / "small.yaml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    monkeypatch.setenv("COINLAB_CONFIG", str(path))

    _, single = _report(capsys, ["all", "--seed", "11", "--workers", "1"])
    _, pooled = _report(capsys, ["all", "--seed", "11", "--workers", "3"])
    assert "error" not in {entry["kind"] for entry in single["results"]}
    assert {entry["experiment"] for entry in single["results"]} == set(SMALL_DEFAULTS)
    assert canonical_json(single["results"]) == canonical_json(pooled["results"])
    assert single["digest"] == pooled["digest"]


def test_unexpected_exception_becomes_error_entry(monkeypatch, capsys):
    def broken(self, command):
        raise RuntimeError("kernel exploded")

    monkeypatch.setattr(ExperimentRouter, "route", broken)
    code, report = _report(capsys, ["constants", "--n", "1000", "--t", "5", "--seed", "1"])
    assert code == 1
    assert report["results"][0]["kind"] == "error"
    assert report["results"][0]["data"]["type"] == "RuntimeError"
    assert report["summary"]["fail"] == 1
    assert verify_digest(report)


def test_spectral_subcommand_reports(capsys):
    code, report = _report(capsys, ["spectral", "--n", "6", "--m", "4", "--t", "1", "--trials", "10", "--seed", "3"])
    assert "error" not in {entry["kind"] for entry in report["results"]}
    assert report["results"][0]["claim_id"] == "spectral-norm-bound"
    assert code == 0
