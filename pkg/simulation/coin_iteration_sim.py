"""
Coin Iteration Simulator - One Global-Coin Iteration and a Toy Agreement Loop
Sums the good processors' coinflip streams together with the three bad
deviation sources: wrongly excluded streams, ambiguous coins and streams the
adversary stopped early
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from bounds.bounds_calculator import GOOD_EVENT_BENCHMARK, Params, derive
from core.errors import ParameterError
from montecarlo.estimates import DEFAULT_CONFIDENCE, McEstimate
from montecarlo.trial_runner import PartitionRule, run_trials
from walks.substreams import experiment_tag, substream
from walks.walk_engine import MINUS, PLUS, StoppingStrategy, draw_steps, stop_batch

logger = logging.getLogger(__name__)

ITERATION_TAG = experiment_tag("coin-iter")


@dataclass(frozen=True)
class IterationConfig:
    """
    One execution of the global-coin model

    Rows of the step matrix are laid out core streams first, then the
    excluded streams, then the stopped ones. The good direction is fixed for
    the whole execution and opposes adversary_direction.
    """
    n: int
    t: int = 0
    t_excluded: int = 0
    t_stopped: int = 0
    adversary_direction: int = MINUS
    seed: int = 0
    bad_term: int = 0

    def __post_init__(self):
        Params(n=self.n, t=self.t)
        if not 0 <= self.t_excluded <= self.t:
            raise ParameterError(f"t_excluded must be in [0, t={self.t}], got {self.t_excluded}")
        if not 0 <= self.t_stopped <= self.t:
            raise ParameterError(f"t_stopped must be in [0, t={self.t}], got {self.t_stopped}")
        if self.core_streams < 1:
            raise ParameterError(
                f"n - t - t_excluded - t_stopped must be >= 1, got {self.core_streams}")
        if self.adversary_direction not in (PLUS, MINUS):
            raise ParameterError(f"adversary_direction must be +1 or -1, got {self.adversary_direction}")
        if abs(self.bad_term) > self.t * self.n:
            raise ParameterError(f"|bad_term| must be <= t·n = {self.t * self.n}, got {self.bad_term}")

    @property
    def params(self) -> Params:
        return Params(n=self.n, t=self.t)

    @property
    def good_direction(self) -> int:
        return -self.adversary_direction

    @property
    def ambiguous_allowance(self) -> int:
        return self.t

    @property
    def good_streams(self) -> int:
        return self.n - self.t

    @property
    def core_streams(self) -> int:
        return self.n - self.t - self.t_excluded - self.t_stopped

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "t": self.t,
            "t_excluded": self.t_excluded,
            "t_stopped": self.t_stopped,
            "ambiguous_allowance": self.ambiguous_allowance,
            "adversary_direction": self.adversary_direction,
            "seed": self.seed,
            "bad_term": self.bad_term,
        }


@dataclass(frozen=True)
class IterationRecord:
    """
    Outcome of one iteration

    total = core_sum + excluded_sum + stopped_sum + ambiguous_term + bad_term.
    excluded_sum is excluded_raw capped at ±floor(β/4); steps holds the raw
    (good_streams, n) ±1 matrix and is not serialized.
    """
    iteration: int
    core_sum: int
    excluded_sum: int
    stopped_sum: int
    ambiguous_term: int
    bad_term: int
    total: int
    coin: int
    good_event: bool
    excluded_raw: int
    cap_binding: bool
    stream_sums: Tuple[int, ...]
    stop_indices: Tuple[int, ...]
    stopped_values: Tuple[int, ...]
    steps: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "core_sum": self.core_sum,
            "excluded_sum": self.excluded_sum,
            "excluded_raw": self.excluded_raw,
            "cap_binding": self.cap_binding,
            "stopped_sum": self.stopped_sum,
            "ambiguous_term": self.ambiguous_term,
            "bad_term": self.bad_term,
            "total": self.total,
            "coin": self.coin,
            "good_event": self.good_event,
            "stream_sums": list(self.stream_sums),
            "stop_indices": list(self.stop_indices),
            "stopped_values": list(self.stopped_values),
        }


def excluded_cap(config: IterationConfig) -> int:
    return max(0, math.floor(derive(config.params).beta_quarter))


def run_iteration(config: IterationConfig, iteration: int = 0, run: int = 0) -> IterationRecord:
    """
    Simulate one iteration of the summed global coin

    Args:
        config: execution parameters
        iteration: iteration index, selects the random substream
        run: execution index for repeated agreement runs

    Returns:
        IterationRecord: components, coin and good event
    """
    if iteration < 0 or run < 0:
        raise ParameterError(f"iteration and run must be >= 0, got {iteration}, {run}")

    n = config.n
    core, excluded = config.core_streams, config.t_excluded
    rng = substream(config.seed, ITERATION_TAG, run, iteration)

    steps = draw_steps(rng, (config.good_streams, n))
    steps.setflags(write=False)
    prefix = np.zeros((config.good_streams, n + 1), dtype=np.int64)
    np.cumsum(steps, axis=1, dtype=np.int64, out=prefix[:, 1:])
    endpoints = prefix[:, n]

    core_sum = int(endpoints[:core].sum())
    excluded_raw = int(endpoints[core:core + excluded].sum())
    cap = excluded_cap(config)
    excluded_sum = int(np.clip(excluded_raw, -cap, cap))
    cap_binding = abs(excluded_raw) > cap
    if cap_binding:
        logger.debug(f"🧢 iteration {iteration}: excluded sum {excluded_raw} capped at ±{cap}")

    stopped_rows = prefix[core + excluded:]
    if config.t_stopped:
        strategy = StoppingStrategy.omniscient_extreme(config.adversary_direction, (1, n))
        stop_indices, stopped_values = stop_batch(stopped_rows, strategy)
    else:
        stop_indices = stopped_values = np.zeros(0, dtype=np.int64)
    stopped_sum = int(stopped_values.sum())

    ambiguous_term = config.adversary_direction * config.ambiguous_allowance
    total = core_sum + excluded_sum + stopped_sum + ambiguous_term + config.bad_term
    if total == 0:
        logger.debug(f"🪙 iteration {iteration}: coin tie resolved to +")
    coin = PLUS if total >= 0 else MINUS

    return IterationRecord(
        iteration=iteration,
        core_sum=core_sum,
        excluded_sum=excluded_sum,
        stopped_sum=stopped_sum,
        ambiguous_term=ambiguous_term,
        bad_term=config.bad_term,
        total=total,
        coin=coin,
        good_event=config.good_direction * core_sum >= derive(config.params).alpha_prime,
        excluded_raw=excluded_raw,
        cap_binding=cap_binding,
        stream_sums=tuple(int(v) for v in endpoints),
        stop_indices=tuple(int(i) for i in stop_indices),
        stopped_values=tuple(int(v) for v in stopped_values),
        steps=steps,
    )


def iteration_succeeds(config: IterationConfig, record: IterationRecord) -> bool:
    """The coin lands in the good direction with deviation at least α′"""
    return record.coin == config.good_direction and abs(record.total) >= derive(config.params).alpha_prime


# ═══════════════════════════════════════════════════════════════════
#  GOOD EVENT FREQUENCY
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class GoodEventReport:
    """Good-event frequency with the tallies gathered on the way"""
    config: IterationConfig
    estimate: McEstimate
    iteration_successes: int
    cap_bindings: int
    ties: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "good_event": self.estimate.to_dict(),
            "benchmark": GOOD_EVENT_BENCHMARK,
            "iteration_successes": self.iteration_successes,
            "cap_bindings": self.cap_bindings,
            "ties": self.ties,
        }


def _good_event_kernel(rng, start, count, config):
    # each iteration draws from its own substream, rng unused
    counts = np.zeros(4, dtype=np.int64)
    for iteration in range(start, start + count):
        record = run_iteration(config, iteration)
        counts += [record.good_event, iteration_succeeds(config, record), record.cap_binding, record.total == 0]
    return counts


def good_event_report(config: IterationConfig, iterations: int, workers: int = 1,
                      confidence: float = DEFAULT_CONFIDENCE, rule: PartitionRule = None) -> GoodEventReport:
    if iterations < 1:
        raise ParameterError(f"iterations must be >= 1, got {iterations}")
    counts = run_trials(_good_event_kernel, iterations, config.seed, "coin-iter", config.good_streams * config.n,
                        workers, rule, config=config)
    good, successes, bindings, ties = (int(c) for c in counts)
    return GoodEventReport(
        config=config,
        estimate=McEstimate.from_counts(good, iterations, config.seed, confidence),
        iteration_successes=successes,
        cap_bindings=bindings,
        ties=ties,
    )


def good_event_frequency(config: IterationConfig, iterations: int, workers: int = 1,
                         confidence: float = DEFAULT_CONFIDENCE, rule: PartitionRule = None) -> McEstimate:
    """
    Frequency of {good_direction · core_sum >= α′} over seeded iterations

    Iteration i uses the same substream as run_iteration(config, i).
    """
    return good_event_report(config, iterations, workers, confidence, rule).estimate


# ═══════════════════════════════════════════════════════════════════
#  AGREEMENT LOOP
# ═══════════════════════════════════════════════════════════════════

@dataclass
class AgreementResult:
    agreed: bool
    iterations_used: int
    records: List[IterationRecord]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "agreed": self.agreed,
            "iterations_used": self.iterations_used,
            "records": [r.to_dict() for r in self.records],
        }


def run_agreement(config: IterationConfig, max_iterations: int, run: int = 0) -> AgreementResult:
    """
    Repeat iterations until the coin lands in the good direction with
    deviation at least α′

    Desk-scale stand-in for the agreement protocol: no messages, no
    validation, only the good-event mechanism.

    Raises:
        ParameterError: max_iterations < 1
    """
    if max_iterations < 1:
        raise ParameterError(f"max_iterations must be >= 1, got {max_iterations}")

    records = []
    for iteration in range(max_iterations):
        record = run_iteration(config, iteration, run)
        records.append(record)
        if iteration_succeeds(config, record):
            return AgreementResult(agreed=True, iterations_used=iteration + 1, records=records)

    logger.debug(f"⏳ run {run}: no agreement within {max_iterations} iterations")
    return AgreementResult(agreed=False, iterations_used=max_iterations, records=records)


@dataclass(frozen=True)
class AgreementSummary:
    """Agreement rate over repeated seeded runs and its geometric prediction"""
    config: IterationConfig
    max_iterations: int
    agreement: McEstimate
    total_iterations: int
    per_iteration_success: float
    predicted_agreement: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "max_iterations": self.max_iterations,
            "agreement": self.agreement.to_dict(),
            "total_iterations": self.total_iterations,
            "mean_iterations": self.total_iterations / self.agreement.trials,
            "per_iteration_success": self.per_iteration_success,
            "predicted_agreement": self.predicted_agreement,
        }


def _agreement_kernel(rng, start, count, config, max_iterations):
    agreed = used = 0
    for run in range(start, start + count):
        result = run_agreement(config, max_iterations, run)
        agreed += result.agreed
        used += result.iterations_used
    return np.array([agreed, used])


def agreement_rate(config: IterationConfig, runs: int, max_iterations: int, workers: int = 1,
                   confidence: float = DEFAULT_CONFIDENCE, rule: Optional[PartitionRule] = None) -> AgreementSummary:
    """
    Run `runs` independent executions of run_agreement

    The per-iteration success rate is agreements over iterations spent; the
    prediction is 1 - (1 - rate)^max_iterations.
    """
    if runs < 1:
        raise ParameterError(f"runs must be >= 1, got {runs}")
    if max_iterations < 1:
        raise ParameterError(f"max_iterations must be >= 1, got {max_iterations}")

    agreed, used = (int(c) for c in run_trials(
        _agreement_kernel, runs, config.seed, "agreement", config.good_streams * config.n, workers, rule,
        config=config, max_iterations=max_iterations,
    ))
    rate = agreed / used
    return AgreementSummary(
        config=config,
        max_iterations=max_iterations,
        agreement=McEstimate.from_counts(agreed, runs, config.seed, confidence),
        total_iterations=used,
        per_iteration_success=rate,
        predicted_agreement=1 - (1 - rate) ** max_iterations,
    )


def verify_additivity(config: IterationConfig, record: IterationRecord) -> bool:
    """
    Recompute every component of a record from its raw step matrix

    Stopped values are recomputed as the running extreme in the adversary's
    direction over prefixes 1..n.
    """
    core, excluded = config.core_streams, config.t_excluded
    sums = record.steps.astype(np.int64).sum(axis=1)
    prefix = np.cumsum(record.steps[core + excluded:].astype(np.int64), axis=1)
    direction = config.adversary_direction
    stopped = [direction * int(row.max()) for row in direction * prefix]

    cap = excluded_cap(config)
    excluded_raw = int(sums[core:core + excluded].sum())
    expected_total = (int(sums[:core].sum()) + max(-cap, min(cap, excluded_raw)) + sum(stopped)
                      + direction * config.t + config.bad_term)
    return (
        list(record.stopped_values) == stopped
        and record.excluded_raw == excluded_raw
        and record.core_sum + record.excluded_sum + record.stopped_sum + record.ambiguous_term
        + record.bad_term == record.total
        and record.total == expected_total
    )
