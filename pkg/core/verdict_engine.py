"""
Verdict Engine - Judging Estimates Against Bounds
Decides pass / fail / inconclusive for an empirical probability compared with
an analytic bound, an exact oracle, or a second empirical probability
"""
from enum import Enum
from typing import Optional

from core.errors import ParameterError

RELATIONS = ("<=", ">=")


class Verdict(Enum):
    """Outcome of one verification"""
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class VerdictEngine:
    """
    Judges an estimate (anything with ci_low / ci_high) against a bound:
    - relation "<=": fail if the whole interval lies above the bound,
      pass if the whole interval lies at or below it
    - relation ">=": mirrored
    - with an exact oracle attached, pass needs both the oracle and the
      interval to respect the bound; either one violating it fails
    - anything else is inconclusive (interval straddles the bound)
    """

    def judge(self, estimate, bound: float, relation: str, oracle: Optional[float] = None) -> dict:
        """
        Args:
            estimate: McEstimate
            bound: analytic right-hand side
            relation: "<=" or ">="
            oracle: exact probability of the event, when known

        Returns:
            dict: {"verdict": Verdict, "reason": str}
        """
        if relation not in RELATIONS:
            raise ParameterError(f"relation must be one of {RELATIONS}, got {relation}")

        if relation == "<=":
            refuted = estimate.ci_low > bound
            confirmed = estimate.ci_high <= bound
            oracle_holds = oracle is not None and oracle <= bound
        else:
            refuted = estimate.ci_high < bound
            confirmed = estimate.ci_low >= bound
            oracle_holds = oracle is not None and oracle >= bound

        if oracle is not None:
            interval = f"interval [{estimate.ci_low:.6g}, {estimate.ci_high:.6g}]"
            if not oracle_holds:
                return {
                    "verdict": Verdict.FAIL,
                    "reason": f"exact oracle {oracle:.6g} violates {relation} {bound:.6g}; {interval}"
                }
            if refuted:
                return {
                    "verdict": Verdict.FAIL,
                    "reason": f"{interval} violates {relation} {bound:.6g} although the exact oracle "
                              f"{oracle:.6g} respects it"
                }
            return {
                "verdict": Verdict.PASS,
                "reason": f"exact oracle {oracle:.6g} {relation} {bound:.6g} holds; {interval} agrees"
            }
        if refuted:
            return {
                "verdict": Verdict.FAIL,
                "reason": f"interval [{estimate.ci_low:.6g}, {estimate.ci_high:.6g}] violates {relation} {bound:.6g}"
            }
        if confirmed:
            return {
                "verdict": Verdict.PASS,
                "reason": f"interval [{estimate.ci_low:.6g}, {estimate.ci_high:.6g}] respects {relation} {bound:.6g}"
            }
        return {
            "verdict": Verdict.INCONCLUSIVE,
            "reason": f"interval [{estimate.ci_low:.6g}, {estimate.ci_high:.6g}] straddles {bound:.6g}"
        }

    def judge_two_sample(self, left, right, factor: float = 2.0) -> dict:
        """
        Check p_left <= factor · p_right when both sides are empirical

        Passes unless the intervals separate: ci_low(left) > factor · ci_high(right).
        """
        slack_bound = factor * right.ci_high
        if left.ci_low > slack_bound:
            return {
                "verdict": Verdict.FAIL,
                "reason": f"ci_low {left.ci_low:.6g} exceeds {factor:g}·ci_high {slack_bound:.6g}"
            }
        return {
            "verdict": Verdict.PASS,
            "reason": f"p {left.p_hat:.6g} <= {factor:g}·{right.p_hat:.6g} within interval slack"
        }
