"""
Estimates - Event Probabilities with Exact Confidence Intervals
Clopper–Pearson intervals stay valid for the e^-11 scale probabilities the
lab measures, where normal approximations break down
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple

from scipy.stats import beta

from core.errors import ParameterError

DEFAULT_CONFIDENCE = 0.99


def clopper_pearson(successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> Tuple[float, float]:
    """
    Two-sided exact binomial interval

    Args:
        successes: observed event count
        trials: number of trials, >= 1
        confidence: e.g. 0.99

    Returns:
        tuple: (ci_low, ci_high)
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ParameterError(f"successes {successes} outside [0, {trials}]")
    if not 0 < confidence < 1:
        raise ParameterError(f"confidence must be in (0, 1), got {confidence}")

    tail = (1 - confidence) / 2
    low = 0.0 if successes == 0 else float(beta.ppf(tail, successes, trials - successes + 1))
    high = 1.0 if successes == trials else float(beta.ppf(1 - tail, successes + 1, trials - successes))
    return low, high


@dataclass(frozen=True)
class McEstimate:
    """Event-probability estimate with exact trial counts and its interval"""
    successes: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int
    confidence_level: float

    @classmethod
    def from_counts(cls, successes: int, trials: int, seed: int,
                    confidence_level: float = DEFAULT_CONFIDENCE) -> "McEstimate":
        successes, trials = int(successes), int(trials)
        low, high = clopper_pearson(successes, trials, confidence_level)
        p_hat = successes / trials
        return cls(
            successes=successes,
            trials=trials,
            p_hat=p_hat,
            ci_low=min(low, p_hat),
            ci_high=max(high, p_hat),
            seed=int(seed),
            confidence_level=confidence_level,
        )

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_dict(self) -> Dict[str, Any]:
        return {
            "successes": self.successes,
            "trials": self.trials,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "seed": self.seed,
            "confidence_level": self.confidence_level,
        }
