"""
Spectral Experiment Registry
The |G| tail bound with its union-bound pieces and the 2×2 power-iteration oracle
"""
import logging

from bounds.bounds_calculator import Params
from reporting.report_builder import ReportBuilder
from spectral.spectral_norms import (
    DEFAULT_MAX_POWER_ITERS,
    DEFAULT_REL_TOL,
    check_power_iteration_2x2,
    verify_norm_bound,
)

logger = logging.getLogger(__name__)


def run_spectral(n, m, t, epsilon, trials, seed, workers=1, confidence=0.99, rule=None,
                 rel_tol=DEFAULT_REL_TOL, max_power_iters=DEFAULT_MAX_POWER_ITERS, oracle_samples=1000, **kwargs):
    params = Params(n=n, t=t, epsilon=epsilon, m=m)
    report = verify_norm_bound(params, trials, seed, workers=workers, rel_tol=rel_tol,
                               max_power_iters=max_power_iters, confidence=confidence, rule=rule)
    summary = report.to_dict()
    half = {"half_norm_threshold": report.thresholds["half_norm_threshold"]}

    oracle = check_power_iteration_2x2(oracle_samples, seed, rel_tol, max_power_iters)
    logger.info(f"📐 spectral: max |G| {summary['max_norm_G']:.3f} vs threshold "
                f"{report.thresholds['norm_threshold']:.3f}")
    return [
        ReportBuilder.create_verdict("spectral", report.verdict),
        ReportBuilder.create_exact("spectral", "spectral-triangle", True, {
            "trials": summary["triangle_checks"],
            "min_triangle_slack": summary["min_triangle_slack"],
            "max_norm_G": summary["max_norm_G"],
            "mean_norm_G": summary["mean_norm_G"],
            "max_norm_Z": summary["max_norm_Z"],
        }),
        ReportBuilder.create_estimate("spectral", "spectral-R-half-threshold", report.r_exceedance, half),
        ReportBuilder.create_estimate("spectral", "spectral-Z-half-threshold", report.z_exceedance, half),
        ReportBuilder.create_exact("spectral", "power-iteration-2x2-oracle", oracle["verdict"] == "pass", oracle),
    ]


EXPERIMENTS = {
    "spectral": run_spectral,
}
