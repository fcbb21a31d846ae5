"""
Constants Experiment Registry
Arithmetic of the corrected constant chains; no randomness
"""
import logging

from bounds.bounds_calculator import DEFAULT_C1, DEFAULT_EPSILON, Params, check_claims
from reporting.report_builder import ReportBuilder

logger = logging.getLogger(__name__)


def run_constants(n, t=0, epsilon=DEFAULT_EPSILON, c1=DEFAULT_C1, m=1, **kwargs):
    report = check_claims(Params(n=n, t=t, epsilon=epsilon, c1=c1, m=m))
    for claim in report.claims:
        logger.info(f"{'✅' if claim.passed else '❌'} {claim.claim_id}: {claim.lhs:.6g} {claim.relation} {claim.rhs}")
    for note in report.notes:
        logger.info(f"📌 {note}")
    return [ReportBuilder.create_claims("constants", report)]


EXPERIMENTS = {
    "constants": run_constants,
}
