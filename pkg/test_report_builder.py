"""Report entries, digests, run state, pre-run guard and experiment routing"""
import json

import pytest

from core.errors import ConvergenceError, ParameterError, UsageError
from core.run_state import RunState
from core.verdict_engine import Verdict
from action.experiment_router import ExperimentRouter
from montecarlo.estimates import McEstimate
from montecarlo.montecarlo_lab import VerificationVerdict
from reporting.digest import canonical_json, results_digest, verify_digest
from reporting.report_builder import CSV_COLUMNS, EntryKind, ReportBuilder
from risk.param_guard import ParamGuard
from spectral.spectral_norms import NormEstimate


def _verdict(successes=3, verdict=Verdict.PASS):
    estimate = McEstimate.from_counts(successes, 1000, seed=1)
    return VerificationVerdict(claim_id="demo", empirical=estimate, analytic_bound=0.5, relation="<=",
                               verdict=verdict, reason="demo")


class TestReportBuilder:

    def test_verdict_entry(self):
        entry = ReportBuilder.create_verdict("fact3", _verdict())
        assert entry["kind"] == EntryKind.VERDICT
        assert entry["verdict"] == "pass"
        assert entry["data"]["empirical"]["successes"] == 3

    def test_error_entry_carries_best_estimate(self):
        error = ConvergenceError("stalled", NormEstimate(2.0, 0.1, 20, 1))
        entry = ReportBuilder.create_error("spectral", error)
        assert entry["verdict"] == "fail"
        assert entry["data"]["type"] == "ConvergenceError"
        assert entry["data"]["best_estimate"]["value"] == 2.0

    def test_estimate_entry_has_no_verdict(self):
        entry = ReportBuilder.create_estimate("coin-iter", "coin-good-event", McEstimate.from_counts(1, 2, 0))
        assert entry["verdict"] is None

    def test_report_summary_and_digest(self):
        results = [
            ReportBuilder.create_verdict("a", _verdict()),
            ReportBuilder.create_verdict("b", _verdict(verdict=Verdict.INCONCLUSIVE)),
            ReportBuilder.create_exact("c", "c-check", False, {}),
        ]
        report = ReportBuilder.create_report("1.0.0", {"seed": 1}, results, {"a": 0.5})
        assert report["summary"] == {"pass": 1, "fail": 1, "inconclusive": 1}
        assert verify_digest(report)
        assert json.loads(ReportBuilder.serialize(report)) == report

    def test_digest_ignores_timing(self):
        results = [ReportBuilder.create_verdict("a", _verdict())]
        one = ReportBuilder.create_report("1.0.0", {"workers": 1}, results, {"a": 0.1})
        two = ReportBuilder.create_report("1.0.0", {"workers": 8}, results, {"a": 9.9})
        assert one["digest"] == two["digest"]

    def test_digest_sees_results(self):
        assert results_digest([{"p": 0.1}]) != results_digest([{"p": 0.2}])
        assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'

    def test_csv_rows(self):
        results = [ReportBuilder.create_verdict("a", _verdict()), ReportBuilder.create_exact("c", "c", True, {})]
        lines = ReportBuilder.to_csv(ReportBuilder.create_report("1.0.0", {}, results, {})).splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1].startswith("a,verdict,demo,pass,0.003,")
        assert len(lines) == 3


class TestRunState:

    def test_tallies_and_timing(self):
        state = RunState()
        state.start("fact3")
        assert state.get_state()["status"] == "running"
        state.finish([{"verdict": "pass"}, {"verdict": "inconclusive"}, {"verdict": None}])
        snapshot = state.get_state()
        assert snapshot["tally"] == {"pass": 1, "fail": 0, "inconclusive": 1}
        assert snapshot["timing"]["fact3"] >= 0
        assert not state.failed

    def test_errors_fail_the_run(self):
        state = RunState()
        state.record_error("spectral", ConvergenceError("stalled"))
        assert state.failed


class TestParamGuard:
    guard = ParamGuard({"limits": {"max_trials": 1000, "max_n": 500}})

    def test_approves(self):
        assert self.guard.validate({"experiment": "fact3", "n": 16, "trials": 100, "seed": 0})

    @pytest.mark.parametrize("command", [
        {"experiment": "fact3", "n": 16, "trials": 100},
        {"experiment": "fact3", "n": 16, "trials": 100, "seed": -1},
        {"experiment": "fact3", "n": 16, "trials": 0, "seed": 0},
        {"experiment": "fact3", "n": 16, "trials": 1001, "seed": 0},
        {"experiment": "fact3", "n": 501, "trials": 10, "seed": 0},
        {"experiment": "fact3", "n": 16, "trials": 10, "seed": 0, "r": 0},
        {"experiment": "fact3", "trials": 10, "seed": 0},
        {"experiment": "constants", "n": 10, "t": 5, "seed": 0},
        {"experiment": "lemma71", "n": 10, "t": 1, "c1": 0.001, "m": 1, "trials": 10, "seed": 0},
        {"experiment": "coin-iter", "n": 10, "t": 1, "t_excluded": 2, "iterations": 10, "seed": 0},
        {"experiment": "fact3", "n": 16, "trials": 10, "seed": 0, "workers": 0},
        {"experiment": "fact3", "n": 16, "trials": 10, "seed": 0, "confidence": 1.5},
    ])
    def test_rejects(self, command):
        with pytest.raises(ParameterError):
            self.guard.validate(command)


class TestExperimentRouter:
    router = ExperimentRouter({})

    def test_every_subcommand_is_registered(self):
        names = {name for names in self.router.list_experiments().values() for name in names}
        assert names == {"fact3", "lemma52-1", "lemma52-2", "lemma71", "coin-iter", "agreement",
                         "spectral", "constants"}

    def test_unknown_experiment(self):
        with pytest.raises(UsageError):
            self.router.route({"experiment": "lemma99"})
        with pytest.raises(UsageError):
            self.router.route({})

    def test_routes_constants(self):
        entries = self.router.route({"experiment": "constants", "n": 1000, "t": 5, "seed": 0})
        assert entries[0]["kind"] == EntryKind.CLAIMS
        assert entries[0]["verdict"] == "pass"

    def test_routes_spectral(self):
        entries = self.router.route({"experiment": "spectral", "n": 6, "m": 4, "t": 1, "epsilon": 0.1,
                                     "trials": 20, "seed": 2, "oracle_samples": 20})
        assert [e["claim_id"] for e in entries] == [
            "spectral-norm-bound", "spectral-triangle", "spectral-R-half-threshold",
            "spectral-Z-half-threshold", "power-iteration-2x2-oracle"]
        assert entries[-1]["verdict"] == "pass"

    def test_routes_agreement_without_faults(self):
        entries = self.router.route({"experiment": "agreement", "n": 4, "t": 0, "runs": 30,
                                     "max_iterations": 200, "seed": 3})
        assert entries[0]["claim_id"] == "agreement-rate"
        assert entries[1]["claim_id"] == "agreement-success-matches-good-event"
        assert entries[1]["data"]["paired_equal"]

    def test_routes_lemma52_part2(self):
        entries = self.router.route({"experiment": "lemma52-2", "n": 12, "t": 1, "trials": 2000, "seed": 4})
        assert [e["kind"] for e in entries] == ["exact", "estimate", "verdict"]
        assert entries[0]["verdict"] == "pass"
