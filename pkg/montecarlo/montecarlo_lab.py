"""
Monte Carlo Lab - Empirical Checks of the Deviation Lemmas
Seeded, parallelizable estimation of the reflection bound, both parts of the
corrected Lemma 5.2 and the Lemma 7.1 correction
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from bounds.bounds_calculator import (
    FIRST_PART_PROBABILITY,
    GOOD_EVENT_BENCHMARK,
    Params,
    derive,
    lemma52_part1_bound,
    lemma52_part1_statement_form,
)
from core.errors import ParameterError
from core.verdict_engine import Verdict, VerdictEngine
from exact.exact_combinatorics import (
    fact3_relation,
    prob_max_ge_enumeration,
    prob_max_ge_reflection,
    prob_sum_ge,
)
from montecarlo.estimates import DEFAULT_CONFIDENCE, McEstimate
from montecarlo.trial_runner import PartitionRule, run_trials
from walks.walk_engine import MINUS, PLUS, StoppingStrategy, generate_walks, stop_batch

logger = logging.getLogger(__name__)

engine = VerdictEngine()

# brute-force oracle attached to Fact 3 rows up to this n
FACT3_ENUMERATION_LIMIT = 20


@dataclass
class VerificationVerdict:
    """An empirical estimate judged against an analytic bound"""
    claim_id: str
    empirical: McEstimate
    analytic_bound: float
    relation: str
    verdict: Verdict
    reason: str = ""
    oracle: Optional[float] = None
    oracle_consistent: Optional[bool] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "empirical": self.empirical.to_dict(),
            "analytic_bound": self.analytic_bound,
            "relation": self.relation,
            "verdict": self.verdict.value,
            "reason": self.reason,
            "oracle": self.oracle,
            "oracle_consistent": self.oracle_consistent,
            "details": self.details,
        }


def _verdict(claim_id: str, estimate: McEstimate, bound: float, relation: str,
             oracle: Optional[float] = None, details: Optional[dict] = None) -> VerificationVerdict:
    judged = engine.judge(estimate, bound, relation, oracle)
    return VerificationVerdict(
        claim_id=claim_id,
        empirical=estimate,
        analytic_bound=bound,
        relation=relation,
        verdict=judged["verdict"],
        reason=judged["reason"],
        oracle=oracle,
        oracle_consistent=estimate.contains(oracle) if oracle is not None else None,
        details=details or {},
    )


# ═══════════════════════════════════════════════════════════════════
#  FACT 3 - running maximum vs twice the endpoint tail
# ═══════════════════════════════════════════════════════════════════

def _fact3_kernel(rng, start, count, n):
    prefix = generate_walks(count, n, rng)
    maxima = prefix[:, 1:].max(axis=1)
    return np.bincount(maxima + n, minlength=2 * n + 1)


def fact3_max_histogram(n: int, trials: int, seed: int, workers: int = 1,
                        rule: PartitionRule = None) -> np.ndarray:
    """
    Empirical counts of the running max over prefixes 1..n

    Returns:
        np.ndarray: counts indexed by max + n
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return run_trials(_fact3_kernel, trials, seed, f"fact3:{n}", n + 1, workers, rule, n=n)


def fact3_verdict(n: int, r: int, histogram: np.ndarray, trials: int, seed: int,
                  confidence: float = DEFAULT_CONFIDENCE) -> VerificationVerdict:
    """Judge one threshold r from a shared max histogram"""
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    successes = int(histogram[r + n:].sum()) if r <= n else 0
    estimate = McEstimate.from_counts(successes, trials, seed, confidence)

    reflection = prob_max_ge_reflection(n, r)
    doubled = prob_sum_ge(n, r).twice()
    details = {
        "n": n,
        "r": r,
        "reflection_exact": str(reflection.as_fraction()),
        "twice_sum_tail_exact": str(doubled),
        "exact_relation": fact3_relation(n, r),
    }
    if n <= FACT3_ENUMERATION_LIMIT:
        details["enumeration_matches"] = prob_max_ge_enumeration(n, r) == reflection

    return _verdict(f"fact3:n={n}:r={r}", estimate, float(doubled), "<=",
                    oracle=float(reflection), details=details)


def verify_fact3_mc(n: int, r: int, trials: int, seed: int, workers: int = 1,
                    confidence: float = DEFAULT_CONFIDENCE, rule: PartitionRule = None) -> VerificationVerdict:
    """
    Empirical Pr(M_n >= r) against 2·Pr(S_n >= r)

    Args:
        n: walk length, >= 1
        r: threshold, >= 1
        trials: Monte Carlo trials
        seed: run seed
    """
    histogram = fact3_max_histogram(n, trials, seed, workers, rule)
    return fact3_verdict(n, r, histogram, trials, seed, confidence)


# ═══════════════════════════════════════════════════════════════════
#  LEMMA 5.2 (1) - stoppable stream of nt coins
# ═══════════════════════════════════════════════════════════════════

def _lemma52_part1_kernel(rng, start, count, length, threshold):
    prefix = generate_walks(count, length, rng)
    # even trial index targets +, odd targets -
    plus_rows = (start + np.arange(count)) % 2 == 0
    counts = []
    for direction, rows in ((PLUS, plus_rows), (MINUS, ~plus_rows)):
        strategy = StoppingStrategy.first_hit(threshold, direction)
        _, values = stop_batch(prefix[rows], strategy)
        counts.extend([int(np.count_nonzero(direction * values >= threshold)), int(rows.sum())])
    return np.array(counts)


def verify_lemma52_part1(params: Params, trials: int, seed: int, workers: int = 1,
                         confidence: float = DEFAULT_CONFIDENCE,
                         rule: PartitionRule = None) -> VerificationVerdict:
    """
    Empirical Pr(stoppable nt-coin stream deviates past β/4) against
    2e^{-(β/4)^2/(2tn)}

    The adversary plays FirstHit at the smallest integer above β/4; the
    direction alternates with the trial index so both signs are measured.
    """
    bound = lemma52_part1_bound(params)
    beta_quarter = derive(params).beta_quarter
    length = params.n * params.t

    if params.t == 0:
        estimate = McEstimate.from_counts(0, trials, seed, confidence)
        return VerificationVerdict(
            claim_id="lemma52-1", empirical=estimate, analytic_bound=0.0, relation="<=",
            verdict=Verdict.PASS, reason="t = 0: no adversarial stream, deviation source absent",
            details={"params": params.to_dict(), "walk_length": 0},
        )

    threshold = math.floor(beta_quarter) + 1
    counts = run_trials(_lemma52_part1_kernel, trials, seed, "lemma52-1", length + 1, workers, rule,
                        length=length, threshold=threshold)
    plus_hits, plus_trials, minus_hits, minus_trials = (int(c) for c in counts)
    estimate = McEstimate.from_counts(plus_hits + minus_hits, trials, seed, confidence)

    details = {
        "params": params.to_dict(),
        "walk_length": length,
        "beta_quarter": beta_quarter,
        "hit_threshold": threshold,
        "plus": {"successes": plus_hits, "trials": plus_trials},
        "minus": {"successes": minus_hits, "trials": minus_trials},
        "statement_form": lemma52_part1_statement_form(params),
    }
    return _verdict("lemma52-1", estimate, bound, "<=", details=details)


# ═══════════════════════════════════════════════════════════════════
#  LEMMA 5.2 (2) - stream stoppable between n(n-2t) and n(n-t)
# ═══════════════════════════════════════════════════════════════════

@dataclass
class DirectionOutcome:
    """Lemma 5.2(2) measurements in one specified direction"""
    direction: int
    p_first: McEstimate
    p_adversary_max: McEstimate
    p_full: McEstimate
    uncovered: int
    structural_check: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "direction": self.direction,
            "p_first": self.p_first.to_dict(),
            "p_adversary_max": self.p_adversary_max.to_dict(),
            "p_full": self.p_full.to_dict(),
            "uncovered": self.uncovered,
            "structural_check": self.structural_check,
        }


@dataclass
class Lemma52Part2Report:
    """Structured outcome of the Lemma 5.2(2) experiment"""
    params: Params
    direction: int
    p_first: McEstimate
    p_adversary_max: McEstimate
    p_full: McEstimate
    structural_check: bool
    by_direction: Dict[str, DirectionOutcome]
    benchmark_verdict: VerificationVerdict
    thresholds: Dict[str, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "direction": self.direction,
            "p_first": self.p_first.to_dict(),
            "p_adversary_max": self.p_adversary_max.to_dict(),
            "p_full": self.p_full.to_dict(),
            "structural_check": self.structural_check,
            "by_direction": {k: v.to_dict() for k, v in self.by_direction.items()},
            "first_part_reference": FIRST_PART_PROBABILITY,
            "benchmark_verdict": self.benchmark_verdict.to_dict(),
            "thresholds": self.thresholds,
        }


def _lemma52_part2_kernel(rng, start, count, first_length, full_length, alpha, alpha_prime, beta_quarter):
    prefix = generate_walks(count, full_length, rng)
    counts = []
    for direction in (PLUS, MINUS):
        at_split = direction * prefix[:, first_length].astype(np.int64)
        # the adversary stops where the walk is furthest against `direction`
        strategy = StoppingStrategy.omniscient_extreme(-direction, (first_length, full_length))
        _, values = stop_batch(prefix, strategy)
        stopped = direction * values
        first = at_split >= alpha
        adversary = at_split - stopped >= beta_quarter
        full = stopped >= alpha_prime
        counts.extend([
            int(first.sum()),
            int(adversary.sum()),
            int(full.sum()),
            int(np.count_nonzero(first & ~adversary & ~full)),
        ])
    return np.array(counts)


def verify_lemma52_part2(params: Params, trials: int, seed: int, direction: int = PLUS, workers: int = 1,
                         confidence: float = DEFAULT_CONFIDENCE,
                         rule: PartitionRule = None) -> Lemma52Part2Report:
    """
    Measure p_first, p_adversary_max and p_full for a stream whose length the
    adversary picks in [n(n-2t), n(n-t)]

    structural_check asserts p_full >= p_first - p_adversary_max within the
    interval widths; the underlying count identity (first and not adversary
    implies full) is also recorded as `uncovered` = 0.
    """
    if direction not in (PLUS, MINUS):
        raise ParameterError(f"direction must be +1 or -1, got {direction}")
    first_length = params.n * (params.n - 2 * params.t)
    full_length = params.n * (params.n - params.t)
    if first_length < 1:
        raise ParameterError(f"n(n-2t) must be >= 1, got {first_length}")

    thresholds = derive(params)
    counts = run_trials(
        _lemma52_part2_kernel, trials, seed, "lemma52-2", full_length + 1, workers, rule,
        first_length=first_length, full_length=full_length, alpha=thresholds.alpha,
        alpha_prime=thresholds.alpha_prime, beta_quarter=thresholds.beta_quarter,
    )

    outcomes = {}
    for offset, sign in ((0, PLUS), (4, MINUS)):
        first, adversary, full, uncovered = (int(c) for c in counts[offset:offset + 4])
        p_first = McEstimate.from_counts(first, trials, seed, confidence)
        p_adversary = McEstimate.from_counts(adversary, trials, seed, confidence)
        p_full = McEstimate.from_counts(full, trials, seed, confidence)
        slack = p_full.half_width + p_first.half_width + p_adversary.half_width
        holds = p_full.p_hat + slack >= p_first.p_hat - p_adversary.p_hat
        outcomes["+" if sign == PLUS else "-"] = DirectionOutcome(
            direction=sign, p_first=p_first, p_adversary_max=p_adversary, p_full=p_full,
            uncovered=uncovered, structural_check=holds and uncovered == 0,
        )
        if uncovered:
            logger.warning(f"⚠️ lemma52-2: {uncovered} trials with first event, no adversary event, no full event")

    chosen = outcomes["+" if direction == PLUS else "-"]
    benchmark = _verdict(
        "lemma52-2-good-event", chosen.p_full, GOOD_EVENT_BENCHMARK, ">=",
        details={"params": params.to_dict(), "direction": direction},
    )

    return Lemma52Part2Report(
        params=params,
        direction=direction,
        p_first=chosen.p_first,
        p_adversary_max=chosen.p_adversary_max,
        p_full=chosen.p_full,
        structural_check=all(o.structural_check for o in outcomes.values()),
        by_direction=outcomes,
        benchmark_verdict=benchmark,
        thresholds={
            "alpha": thresholds.alpha,
            "alpha_prime": thresholds.alpha_prime,
            "beta_quarter": thresholds.beta_quarter,
            "first_length": first_length,
            "full_length": full_length,
        },
    )


# ═══════════════════════════════════════════════════════════════════
#  LEMMA 7.1 - t possibly incomplete streams of c1·m·n·t coins in total
# ═══════════════════════════════════════════════════════════════════

def lemma71_walk_length(params: Params) -> int:
    length = int(round(params.c1 * params.m * params.n * params.t))
    if length < 1:
        raise ParameterError(f"c1·m·n·t must be >= 1, got {params.c1 * params.m * params.n * params.t}")
    return length


def lemma71_threshold(params: Params) -> float:
    """(β/6)·c1·m"""
    return derive(params).beta / 6 * params.c1 * params.m


def _lemma71_kernel(rng, start, count, length, streams, threshold):
    prefix = generate_walks(count, length, rng)
    # prefix 0 included: an adversary may stop before any coin
    maxima = prefix.max(axis=1)
    endpoints = prefix[:, length]

    bounds = np.linspace(0, length, streams + 1).astype(int)
    independent = np.zeros(count, dtype=np.int64)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        segment = prefix[:, lo:hi + 1] - prefix[:, lo:lo + 1]
        independent += segment.max(axis=1)

    return np.array([
        int(np.count_nonzero(maxima >= threshold)),
        int(np.count_nonzero(endpoints >= threshold)),
        int(np.count_nonzero(independent >= threshold)),
    ])


def verify_lemma71(params: Params, trials: int, seed: int, threshold: Optional[float] = None,
                   workers: int = 1, confidence: float = DEFAULT_CONFIDENCE,
                   rule: PartitionRule = None) -> VerificationVerdict:
    """
    Empirical Pr(X >= threshold) against 2·Pr(Y >= threshold)

    X is the running max of a walk of c1·m·n·t steps (the maximum an adversary
    can lock in by stopping), Y the endpoint of the same walk. The threshold
    defaults to (β/6)·c1·m. Streams stopped independently at their own maxima
    are measured too, for exploration only.
    """
    length = lemma71_walk_length(params)
    if threshold is None:
        threshold = lemma71_threshold(params)
    streams = max(1, min(params.t, length))

    counts = run_trials(_lemma71_kernel, trials, seed, f"lemma71:{threshold!r}", length + 1, workers, rule,
                        length=length, streams=streams, threshold=threshold)
    x_hits, y_hits, independent_hits = (int(c) for c in counts)
    p_x = McEstimate.from_counts(x_hits, trials, seed, confidence)
    p_y = McEstimate.from_counts(y_hits, trials, seed, confidence)
    p_independent = McEstimate.from_counts(independent_hits, trials, seed, confidence)

    judged = engine.judge_two_sample(p_x, p_y, factor=2.0)
    details = {
        "params": params.to_dict(),
        "walk_length": length,
        "threshold": threshold,
        "threshold_in_sigma": threshold / math.sqrt(length),
        "p_y": p_y.to_dict(),
        "independent_stops": {"streams": streams, "estimate": p_independent.to_dict()},
    }
    return VerificationVerdict(
        claim_id=f"lemma71:threshold={threshold:.6g}",
        empirical=p_x,
        analytic_bound=2 * p_y.p_hat,
        relation="<=",
        verdict=judged["verdict"],
        reason=judged["reason"],
        details=details,
    )


def lemma71_exact_case(length: int = 8, threshold: int = 2) -> Dict[str, Any]:
    """
    Exact small case: Pr(max >= threshold) by enumeration and by reflection,
    against 2·Pr(S >= threshold)
    """
    enumerated = prob_max_ge_enumeration(length, threshold)
    reflected = prob_max_ge_reflection(length, threshold)
    doubled = prob_sum_ge(length, threshold).twice()
    return {
        "walk_length": length,
        "threshold": threshold,
        "max_ge_enumeration": str(enumerated.as_fraction()),
        "max_ge_reflection": str(reflected.as_fraction()),
        "twice_sum_ge": str(doubled),
        "enumeration_matches_reflection": enumerated == reflected,
        "bound_holds": reflected.as_fraction() <= doubled,
        "verdict": "pass" if enumerated == reflected and reflected.as_fraction() <= doubled else "fail",
    }
