"""
Spectral Norms - Stopped Coin Matrices and Their Largest Singular Values
Builds H = H' + W (columns are coinflip streams, stopped ones zero-filled
after the stop point) and G = R + Z (one row of column sums per iteration),
then checks |G| <= |R| + |Z| and the tail bound on |G|
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from bounds.bounds_calculator import Params, derive
from core.errors import ConvergenceError, ParameterError, TriangleInequalityError
from montecarlo.estimates import DEFAULT_CONFIDENCE, McEstimate
from montecarlo.montecarlo_lab import VerificationVerdict, engine
from montecarlo.trial_runner import PartitionRule, map_blocks
from walks.substreams import experiment_tag, substream
from walks.walk_engine import MINUS, StoppingStrategy, draw_steps, stop_batch

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-6
DEFAULT_MAX_POWER_ITERS = 10_000
# subadditivity slack, in units of rel_tol·(|R| + |Z|)
TRIANGLE_SLACK = 10
# Rayleigh updates below NOISE_ULPS·dim·eps of the estimate count as converged
NOISE_ULPS = 32

H_TAG = experiment_tag("build-H")
G_TAG = experiment_tag("build-G")
POWER_TAG = experiment_tag("power-iteration")


# ═══════════════════════════════════════════════════════════════════
#  H = H' + W
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class StoppedCoinMatrix:
    """
    n×n coin matrix whose columns are coinflip streams

    Column j of a stopped stream with stop point k keeps its first k entries
    and is zero below; W holds -H' on that suffix and zero elsewhere.
    """
    H: np.ndarray
    H_prime: np.ndarray
    W: np.ndarray
    stopped_columns: Sequence[int]
    stop_points: Dict[int, int]

    @property
    def n(self) -> int:
        return int(self.H.shape[0])


def default_adversary() -> StoppingStrategy:
    return StoppingStrategy.omniscient_extreme(MINUS)


def build_H(n: int, t_stopped: int, adversary: StoppingStrategy = None, seed: int = 0,
            columns: Optional[Sequence[int]] = None, rng: np.random.Generator = None,
            t: Optional[int] = None) -> StoppedCoinMatrix:
    """
    Fill H' with fair ±1 entries and let the adversary stop t_stopped columns

    Args:
        n: matrix size
        t_stopped: number of stopped columns
        adversary: stopping rule applied to each stopped column's partial sums
            (default OmniscientExtreme(-1))
        seed: used when no rng is given
        columns: stopped column indices (default the first t_stopped)
        rng: random source, overrides seed
        t: bad-processor bound, t_stopped <= t <= n (default t_stopped)

    Returns:
        StoppedCoinMatrix
    """
    t = t_stopped if t is None else t
    if not 0 <= t_stopped <= t <= n:
        raise ParameterError(f"need 0 <= t_stopped <= t <= n, got {t_stopped}, {t}, {n}")
    columns = list(range(t_stopped)) if columns is None else [int(c) for c in columns]
    if len(columns) != t_stopped or len(set(columns)) != t_stopped or any(not 0 <= c < n for c in columns):
        raise ParameterError(f"stopped columns {columns} must be {t_stopped} distinct indices in [0, {n})")

    adversary = adversary or default_adversary()
    rng = rng or substream(seed, H_TAG)

    H_prime = draw_steps(rng, (n, n)).astype(np.int64)
    H = H_prime.copy()
    W = np.zeros_like(H_prime)
    stop_points = {}

    if columns:
        walks = np.zeros((len(columns), n + 1), dtype=np.int64)
        np.cumsum(H_prime[:, columns].T, axis=1, out=walks[:, 1:])
        indices, _ = stop_batch(walks, adversary)
        for column, k in zip(columns, indices):
            k = int(k)
            stop_points[column] = k
            H[k:, column] = 0
            W[k:, column] = -H_prime[k:, column]

    for array in (H, H_prime, W):
        array.setflags(write=False)
    return StoppedCoinMatrix(H=H, H_prime=H_prime, W=W, stopped_columns=tuple(columns), stop_points=stop_points)


# ═══════════════════════════════════════════════════════════════════
#  G = R + Z
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class IterationSumMatrices:
    """
    m×n iteration-sum matrices

    Row i holds the column sums of iteration i's coin matrix: G from H,
    R from H', Z from W. Bad columns are zero in all three.
    """
    G: np.ndarray
    R: np.ndarray
    Z: np.ndarray
    bad_columns: Sequence[int]
    stopped_columns: Sequence[int]
    stop_points: np.ndarray = field(repr=False)


def build_G(params: Params, adversary: StoppingStrategy = None, seed: int = 0, trial: int = 0,
            t_stopped: Optional[int] = None) -> IterationSumMatrices:
    """
    Stack m independent iterations into G = R + Z

    Stopped columns are the first t_stopped (default t), bad columns the last t.
    """
    n, t, m = params.n, params.t, params.m
    t_stopped = t if t_stopped is None else t_stopped
    if not 0 <= t_stopped <= t:
        raise ParameterError(f"t_stopped must be in [0, t={t}], got {t_stopped}")

    bad = list(range(n - t, n))
    good = np.ones(n, dtype=bool)
    good[bad] = False

    G = np.zeros((m, n), dtype=np.int64)
    R = np.zeros((m, n), dtype=np.int64)
    Z = np.zeros((m, n), dtype=np.int64)
    stop_points = np.zeros((m, t_stopped), dtype=np.int64)

    for i in range(m):
        coins = build_H(n, t_stopped, adversary, rng=substream(seed, G_TAG, trial, i), t=t)
        G[i] = np.where(good, coins.H.sum(axis=0), 0)
        R[i] = np.where(good, coins.H_prime.sum(axis=0), 0)
        Z[i] = np.where(good, coins.W.sum(axis=0), 0)
        stop_points[i] = [coins.stop_points[c] for c in coins.stopped_columns]

    for array in (G, R, Z, stop_points):
        array.setflags(write=False)
    return IterationSumMatrices(G=G, R=R, Z=Z, bad_columns=tuple(bad),
                                stopped_columns=tuple(range(t_stopped)), stop_points=stop_points)


# ═══════════════════════════════════════════════════════════════════
#  POWER ITERATION
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class NormEstimate:
    """Largest singular value with its estimated relative error"""
    value: float
    relative_error_bound: float
    iterations_used: int
    restarts: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "relative_error_bound": self.relative_error_bound,
            "iterations_used": self.iterations_used,
            "restarts": self.restarts,
        }


def _power_iterate(gram: np.ndarray, start: np.ndarray, rel_tol: float, max_iters: int):
    """
    Power iteration on a symmetric PSD matrix

    Returns:
        tuple: (eigenvalue estimate, relative error estimate, iterations, converged)
    """
    v = start / np.linalg.norm(start)
    estimate, step, error = 0.0, None, math.inf
    rounding = NOISE_ULPS * gram.shape[0] * np.finfo(float).eps

    for iteration in range(1, max_iters + 1):
        w = gram @ v
        rayleigh = float(v @ w)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return rayleigh, math.inf, iteration, False

        if iteration > 1:
            difference = abs(rayleigh - estimate)
            scale = max(rayleigh, np.finfo(float).tiny)
            # updates at rounding level: repeated top singular value or already converged
            if difference <= rounding * scale:
                return rayleigh, difference / scale, iteration, True
            # geometric tail of the remaining updates, ratio from successive differences
            if step:
                ratio = difference / step
                tail = difference * ratio / (1 - ratio) if ratio < 1 else math.inf
            else:
                tail = math.inf
            error = max(difference, tail) / scale
            if difference / scale < rel_tol and tail / scale < rel_tol:
                return rayleigh, error, iteration, True
            step = difference

        estimate = rayleigh
        v = w / norm_w

    return estimate, error, max_iters, False


def spectral_norm(M, rel_tol: float = DEFAULT_REL_TOL, max_power_iters: int = DEFAULT_MAX_POWER_ITERS,
                  seed: int = 0) -> NormEstimate:
    """
    Largest singular value by power iteration on the Gram matrix

    The start vector is a seeded random unit vector depending only on the
    matrix shape and `seed`. A run that exhausts max_power_iters is restarted
    once from a fresh substream.

    Args:
        M: nonzero real matrix
        rel_tol: relative tolerance in (0, 1)
        max_power_iters: iteration cap per attempt

    Raises:
        ParameterError: M is empty or all zero, or rel_tol out of range
        ConvergenceError: both attempts exhausted max_power_iters
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.size == 0:
        raise ParameterError(f"expected a non-empty 2-D matrix, got shape {M.shape}")
    if not M.any():
        raise ParameterError("spectral_norm needs a nonzero matrix")
    if not 0 < rel_tol < 1:
        raise ParameterError(f"rel_tol must be in (0, 1), got {rel_tol}")
    if max_power_iters < 1:
        raise ParameterError(f"max_power_iters must be >= 1, got {max_power_iters}")

    rows, cols = M.shape
    gram = M.T @ M if rows >= cols else M @ M.T
    total = 0
    best = None

    for attempt in range(2):
        start = substream(seed, POWER_TAG, rows, cols, attempt).standard_normal(gram.shape[0])
        eigenvalue, error, used, converged = _power_iterate(gram, start, rel_tol, max_power_iters)
        total += used
        best = NormEstimate(math.sqrt(max(eigenvalue, 0.0)), error, total, attempt)
        if converged:
            return best
        logger.warning(f"🔁 power iteration on {rows}x{cols} stalled after {used} iterations, restarting")

    logger.error(f"❌ power iteration on {rows}x{cols} did not converge, best {best.value:.6g}")
    raise ConvergenceError(f"power iteration did not converge within {max_power_iters} iterations", best)


def norm_or_zero(M, rel_tol: float = DEFAULT_REL_TOL, max_power_iters: int = DEFAULT_MAX_POWER_ITERS,
                 seed: int = 0) -> NormEstimate:
    """spectral_norm, with the all-zero matrix mapped to an exact 0"""
    if not np.asarray(M).any():
        return NormEstimate(0.0, 0.0, 0)
    return spectral_norm(M, rel_tol, max_power_iters, seed)


def closed_form_2x2_norm(M) -> float:
    """σ₁ of a 2×2 matrix: σ₁² = (T + √(T² - 4D²)) / 2, T = Σ entries², D = det"""
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (2, 2):
        raise ParameterError(f"expected a 2x2 matrix, got shape {M.shape}")
    (a, b), (c, d) = M
    trace = a * a + b * b + c * c + d * d
    det = a * d - b * c
    return math.sqrt((trace + math.sqrt(max(trace * trace - 4 * det * det, 0.0))) / 2)


def export_matrix_csv(M, path) -> None:
    M = np.asarray(M)
    fmt = "%d" if np.issubdtype(M.dtype, np.integer) else "%.17g"
    np.savetxt(path, M, delimiter=",", fmt=fmt)


# ═══════════════════════════════════════════════════════════════════
#  NORM BOUND CHECK
# ═══════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class TriangleCheck:
    """Norms of one trial's G, R and Z"""
    trial: int
    norm_G: float
    norm_R: float
    norm_Z: float

    @property
    def slack(self) -> float:
        return self.norm_R + self.norm_Z - self.norm_G


@dataclass
class NormBoundReport:
    """The |G| tail verdict plus the union-bound pieces and per-trial checks"""
    params: Params
    verdict: VerificationVerdict
    r_exceedance: McEstimate
    z_exceedance: McEstimate
    thresholds: Dict[str, float]
    checks: List[TriangleCheck] = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        norms_G = [c.norm_G for c in self.checks]
        return {
            "params": self.params.to_dict(),
            "verdict": self.verdict.to_dict(),
            "r_exceedance": self.r_exceedance.to_dict(),
            "z_exceedance": self.z_exceedance.to_dict(),
            "thresholds": self.thresholds,
            "triangle_checks": len(self.checks),
            "min_triangle_slack": min(c.slack for c in self.checks),
            "max_norm_G": max(norms_G),
            "mean_norm_G": float(np.mean(norms_G)),
            "max_norm_Z": max(c.norm_Z for c in self.checks),
        }


def _norm_kernel(rng, start, count, params, adversary, norm_seed, rel_tol, max_power_iters):
    norms = np.zeros((count, 3))
    for offset in range(count):
        trial = start + offset
        matrices = build_G(params, adversary, norm_seed, trial)
        for column, M in enumerate((matrices.G, matrices.R, matrices.Z)):
            norms[offset, column] = norm_or_zero(M, rel_tol, max_power_iters, norm_seed).value
    return norms


def verify_norm_bound(params: Params, trials: int, seed: int, adversary: StoppingStrategy = None,
                      workers: int = 1, rel_tol: float = DEFAULT_REL_TOL,
                      max_power_iters: int = DEFAULT_MAX_POWER_ITERS,
                      confidence: float = DEFAULT_CONFIDENCE, rule: PartitionRule = None) -> NormBoundReport:
    """
    Empirical Pr(|G| > (6+2ε)√(n(m+n))) against 2/(m+n)

    Every trial also checks |G| <= |R| + |Z| within
    10·rel_tol·(|R| + |Z|), and the exceedance rates of |R| and |Z| over
    half the threshold are reported.

    Raises:
        TriangleInequalityError: subadditivity violated in some trial
    """
    thresholds = derive(params)
    blocks = map_blocks(_norm_kernel, trials, seed, "spectral", params.m * params.n * params.n, workers, rule,
                        params=params, adversary=adversary, norm_seed=seed, rel_tol=rel_tol,
                        max_power_iters=max_power_iters)
    norms = np.concatenate(blocks, axis=0)

    checks = []
    for trial, (norm_G, norm_R, norm_Z) in enumerate(norms):
        check = TriangleCheck(trial, float(norm_G), float(norm_R), float(norm_Z))
        if check.slack < -TRIANGLE_SLACK * rel_tol * (norm_R + norm_Z):
            raise TriangleInequalityError(
                f"trial {trial}: |G| = {norm_G:.12g} > |R| + |Z| = {norm_R + norm_Z:.12g}")
        checks.append(check)

    threshold, half = thresholds.norm_threshold, thresholds.half_norm_threshold
    g_hits = int(np.count_nonzero(norms[:, 0] > threshold))
    estimate = McEstimate.from_counts(g_hits, trials, seed, confidence)
    judged = engine.judge(estimate, thresholds.union_bound, "<=")
    verdict = VerificationVerdict(
        claim_id="spectral-norm-bound",
        empirical=estimate,
        analytic_bound=thresholds.union_bound,
        relation="<=",
        verdict=judged["verdict"],
        reason=judged["reason"],
        details={"norm_threshold": threshold, "params": params.to_dict()},
    )

    return NormBoundReport(
        params=params,
        verdict=verdict,
        r_exceedance=McEstimate.from_counts(int(np.count_nonzero(norms[:, 1] > half)), trials, seed, confidence),
        z_exceedance=McEstimate.from_counts(int(np.count_nonzero(norms[:, 2] > half)), trials, seed, confidence),
        thresholds={"norm_threshold": threshold, "half_norm_threshold": half,
                    "union_bound": thresholds.union_bound},
        checks=checks,
    )


def check_power_iteration_2x2(samples: int, seed: int, rel_tol: float = DEFAULT_REL_TOL,
                              max_power_iters: int = DEFAULT_MAX_POWER_ITERS,
                              entry_range: int = 9) -> Dict[str, Any]:
    """
    Compare spectral_norm with the closed form on random 2×2 integer matrices

    Entries are uniform in [-entry_range, entry_range]; zero matrices are
    redrawn. A matrix whose power iteration gives up counts against the
    verdict with its best estimate.

    Returns:
        dict: samples, worst relative error, unconverged matrices, verdict
    """
    rng = substream(seed, experiment_tag("2x2-oracle"))
    worst = 0.0
    unconverged = []
    for index in range(samples):
        M = np.zeros((2, 2))
        while not M.any():
            M = rng.integers(-entry_range, entry_range + 1, size=(2, 2))
        exact = closed_form_2x2_norm(M)
        try:
            estimate = spectral_norm(M, rel_tol, max_power_iters, seed + index)
        except ConvergenceError as e:
            unconverged.append(M.tolist())
            estimate = e.best_estimate
        worst = max(worst, abs(estimate.value - exact) / exact)
    return {
        "samples": samples,
        "entry_range": entry_range,
        "max_relative_error": worst,
        "rel_tol": rel_tol,
        "unconverged": unconverged,
        "verdict": "pass" if worst <= rel_tol and not unconverged else "fail",
    }
