"""
Coin Experiment Registry
Global-coin iterations, the good-event frequency and the agreement loop
"""
import dataclasses
import logging

from core.verdict_engine import Verdict
from memory.run_journal import RunJournal
from montecarlo.estimates import McEstimate
from montecarlo.montecarlo_lab import VerificationVerdict, engine
from reporting.report_builder import ReportBuilder
from simulation.coin_iteration_sim import (
    IterationConfig,
    agreement_rate,
    good_event_frequency,
    good_event_report,
    iteration_succeeds,
    run_agreement,
    run_iteration,
    verify_additivity,
)

logger = logging.getLogger(__name__)

AGREEMENT_TARGET = 0.99
DEFAULT_RECORD_LIMIT = 1000


def _config(n, t=0, t_excluded=0, t_stopped=0, adversary_direction=-1, bad_term=0, seed=0, **kwargs):
    return IterationConfig(n=n, t=t, t_excluded=t_excluded, t_stopped=t_stopped,
                           adversary_direction=adversary_direction, seed=seed, bad_term=bad_term)


def knob_variant(config: IterationConfig) -> IterationConfig:
    """
    Same core rows, other adversary knobs: one stream moves between the
    excluded and stopped groups when there is room, and bad_term jumps to
    the opposite extreme of ±t·n. Equal to config only when t = 0.
    """
    excluded, stopped = config.t_excluded, config.t_stopped
    if excluded > 0 and stopped < config.t:
        excluded, stopped = excluded - 1, stopped + 1
    elif stopped > 0 and excluded < config.t:
        excluded, stopped = excluded + 1, stopped - 1
    bad_term = -config.t * config.n if config.bad_term >= 0 else config.t * config.n
    return dataclasses.replace(config, t_excluded=excluded, t_stopped=stopped, bad_term=bad_term)


def run_coin_iteration(iterations, seed, workers=1, confidence=0.99, rule=None, records_out=None,
                       record_limit=DEFAULT_RECORD_LIMIT, **kwargs):
    """
    Good-event frequency over `iterations`, plus additivity and knob-invariance
    checks on the first `record_limit` iterations
    """
    config = _config(seed=seed, **kwargs)
    report = good_event_report(config, iterations, workers, confidence, rule)

    sample = [run_iteration(config, i) for i in range(min(iterations, record_limit))]
    additive = [verify_additivity(config, record) for record in sample]

    variant = knob_variant(config)
    invariant = [record.good_event == run_iteration(variant, record.iteration).good_event for record in sample]

    if records_out:
        RunJournal(records_out).write(sample)

    logger.info(f"🪙 coin-iter: good event {report.estimate.p_hat:.4f} over {iterations} iterations")
    return [
        ReportBuilder.create_estimate("coin-iter", "coin-good-event", report.estimate, report.to_dict()),
        ReportBuilder.create_exact("coin-iter", "coin-additivity", all(additive), {
            "iterations": len(sample),
            "violations": [r.iteration for r, ok in zip(sample, additive) if not ok],
        }),
        ReportBuilder.create_exact("coin-iter", "coin-good-event-invariance", all(invariant), {
            "iterations": len(sample),
            "variant": variant.to_dict(),
            "variant_differs": variant != config,
            "violations": [r.iteration for r, ok in zip(sample, invariant) if not ok],
        }),
    ]


def run_agreement_experiment(runs, max_iterations, seed, workers=1, confidence=0.99, rule=None, **kwargs):
    """
    Agreement rate over seeded runs against the 99% target; with t = 0 also
    checks that agreement success matches the good event
    """
    config = _config(seed=seed, **kwargs)
    summary = agreement_rate(config, runs, max_iterations, workers, confidence, rule)

    judged = engine.judge(summary.agreement, AGREEMENT_TARGET, ">=")
    verdict = VerificationVerdict(
        claim_id="agreement-rate",
        empirical=summary.agreement,
        analytic_bound=AGREEMENT_TARGET,
        relation=">=",
        verdict=judged["verdict"],
        reason=judged["reason"],
        details=summary.to_dict(),
    )
    entries = [ReportBuilder.create_verdict("agreement", verdict)]

    if config.t == 0:
        agreed = summary.agreement.successes
        per_iteration = McEstimate.from_counts(agreed, summary.total_iterations, seed, confidence)
        frequency = good_event_frequency(config, summary.total_iterations, workers, confidence, rule)
        overlap = per_iteration.ci_low <= frequency.ci_high and frequency.ci_low <= per_iteration.ci_high

        first_run = run_agreement(config, max_iterations, run=0)
        paired = all(iteration_succeeds(config, r) == r.good_event for r in first_run.records)
        entries.append(ReportBuilder.create_exact("agreement", "agreement-success-matches-good-event",
                                                  overlap and paired, {
            "per_iteration_success": per_iteration.to_dict(),
            "good_event": frequency.to_dict(),
            "paired_records": len(first_run.records),
            "paired_equal": paired,
        }))

    logger.info(f"🤝 agreement: {summary.agreement.p_hat:.4f} of {runs} runs agreed "
                f"(predicted {summary.predicted_agreement:.4f})")
    if verdict.verdict is Verdict.FAIL:
        logger.warning(f"⚠️ agreement below {AGREEMENT_TARGET}: {verdict.reason}")
    return entries


EXPERIMENTS = {
    "coin-iter": run_coin_iteration,
    "agreement": run_agreement_experiment,
}
