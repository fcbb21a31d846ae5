"""
Report Builder - Result Entries and the Run Report
Defines the structure of every entry in a report and of the report itself
"""
import csv
import io
import json
from typing import Any, Dict, List, Optional

from reporting.digest import results_digest


class EntryKind:
    """Entry kind constants"""
    VERDICT = "verdict"
    CLAIMS = "claims"
    ESTIMATE = "estimate"
    EXACT = "exact"
    ERROR = "error"


VERDICTS = ("pass", "fail", "inconclusive")
CSV_COLUMNS = ["experiment", "kind", "claim_id", "verdict", "p_hat", "ci_low", "ci_high",
               "successes", "trials", "analytic_bound", "relation", "reason"]


class ReportBuilder:
    """Builds report entries and assembles the report"""

    @staticmethod
    def create_verdict(experiment: str, verdict) -> Dict[str, Any]:
        """
        Entry for a VerificationVerdict

        Args:
            experiment: subcommand that produced it
            verdict: VerificationVerdict

        Returns:
            dict: verdict entry
        """
        return {
            "experiment": experiment,
            "kind": EntryKind.VERDICT,
            "claim_id": verdict.claim_id,
            "verdict": verdict.verdict.value,
            "data": verdict.to_dict(),
        }

    @staticmethod
    def create_claims(experiment: str, report) -> Dict[str, Any]:
        """Entry for a ClaimReport"""
        return {
            "experiment": experiment,
            "kind": EntryKind.CLAIMS,
            "claim_id": "constants",
            "verdict": "pass" if report.passed else "fail",
            "data": report.to_dict(),
        }

    @staticmethod
    def create_estimate(experiment: str, claim_id: str, estimate, data: Optional[dict] = None) -> Dict[str, Any]:
        """
        Entry for a measurement reported without pass/fail

        Args:
            estimate: McEstimate
            data: extra fields to report beside it
        """
        return {
            "experiment": experiment,
            "kind": EntryKind.ESTIMATE,
            "claim_id": claim_id,
            "verdict": None,
            "data": {"estimate": estimate.to_dict(), **(data or {})},
        }

    @staticmethod
    def create_exact(experiment: str, claim_id: str, passed: bool, data: Dict[str, Any]) -> Dict[str, Any]:
        """Entry for an exact (non-random) check"""
        return {
            "experiment": experiment,
            "kind": EntryKind.EXACT,
            "claim_id": claim_id,
            "verdict": "pass" if passed else "fail",
            "data": data,
        }

    @staticmethod
    def create_error(experiment: str, error: Exception) -> Dict[str, Any]:
        """Entry for an experiment that raised; always a fail"""
        data = {"type": type(error).__name__, "message": str(error)}
        best = getattr(error, "best_estimate", None)
        if best is not None:
            data["best_estimate"] = best.to_dict()
        return {
            "experiment": experiment,
            "kind": EntryKind.ERROR,
            "claim_id": f"{experiment}-error",
            "verdict": "fail",
            "data": data,
        }

    @staticmethod
    def summarize(results: List[Dict[str, Any]]) -> Dict[str, int]:
        summary = {verdict: 0 for verdict in VERDICTS}
        for entry in results:
            if entry["verdict"] in summary:
                summary[entry["verdict"]] += 1
        return summary

    @staticmethod
    def create_report(tool_version: str, config: Dict[str, Any], results: List[Dict[str, Any]],
                      timing: Dict[str, float]) -> Dict[str, Any]:
        """
        Assemble the run report

        The digest covers `results` only; timing varies between runs.
        """
        return {
            "tool_version": tool_version,
            "config": config,
            "results": results,
            "summary": ReportBuilder.summarize(results),
            "digest": results_digest(results),
            "timing": timing,
        }

    @staticmethod
    def serialize(report: Dict[str, Any]) -> str:
        return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def to_csv(report: Dict[str, Any]) -> str:
        """One row per entry; estimate columns filled where the entry has one"""
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for entry in report["results"]:
            data = entry["data"]
            estimate = data.get("empirical") or data.get("estimate") or {}
            writer.writerow({
                "experiment": entry["experiment"],
                "kind": entry["kind"],
                "claim_id": entry["claim_id"],
                "verdict": entry["verdict"] or "",
                "p_hat": estimate.get("p_hat", ""),
                "ci_low": estimate.get("ci_low", ""),
                "ci_high": estimate.get("ci_high", ""),
                "successes": estimate.get("successes", ""),
                "trials": estimate.get("trials", ""),
                "analytic_bound": data.get("analytic_bound", ""),
                "relation": data.get("relation", ""),
                "reason": data.get("reason", data.get("message", "")),
            })
        return buffer.getvalue()
