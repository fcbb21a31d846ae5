"""
Bounds Calculator - Parameters, Thresholds and Constant Chains
Houses the protocol parameters (n, t, ε, c1, m), the deviation thresholds
derived from them, and the arithmetic claims of the corrected analysis
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List

from core.errors import ParameterError

DEFAULT_EPSILON = 0.1
DEFAULT_C1 = 0.001

# Lemma 5.2(1) small-t regime and its target
SMALL_T_FRACTION = 0.005
SMALL_T_TARGET = math.exp(-11)
# Lemma 5.1 constant carried over from the uncorrected analysis
FIRST_PART_PROBABILITY = 0.211
GOOD_EVENT_BENCHMARK = 1 / 20
# paragraph before Lemma 6.4
BETA_HALF_T_FRACTION = 1e-6
BETA_HALF_SQUARED_FLOOR = 0.49999
# Variant-1 product chain
CHAIN_COEFFICIENT = 0.0183
CHAIN_COEFFICIENT_DISPLAYED = 0.183
CHAIN_RANGE = (1.13e-9, 1.15e-9)
CHAIN_STATED = 1.14e-9
# resilience bounds
VARIANT1_OLD_RESILIENCE = 4.25e-7
VARIANT1_RESILIENCE = 3.3e-8
LEMMA55_OLD_DIVISOR = 36
LEMMA55_DIVISOR = 72

CONSTANT_SUBSTITUTIONS = [
    {"where": "Lemmas 5.3, 5.4", "old": "alpha", "new": "alpha' = alpha - beta/4"},
    {"where": "Lemmas 5.3, 5.4, sources (1) and (3)", "old": "beta/2", "new": "beta/4"},
    {"where": "Lemma 5.5", "old": "t < n/36", "new": "t < n/72"},
    {"where": "Lemmas 6.3-6.7", "old": "3+eps", "new": "6+2eps"},
    {"where": "Lemmas 6.3-6.7", "old": "4+eps", "new": "7+2eps"},
    {"where": "proof of Lemma 6.7", "old": "1/(m+n)", "new": "2/(m+n)"},
    {"where": "Lemma 6.7, Theorem 1.1", "old": "t < 4.25e-7 n", "new": "t < 3.3e-8 n"},
    {"where": "before Lemma 6.4", "old": "t < n/36 gives beta/2 > 23n/36",
     "new": "t < 1e-6 n gives (beta/2)^2 > .49999 n^2"},
]


@dataclass(frozen=True)
class Params:
    """
    Protocol parameters

    n: processors, t: bad processors (2t < n), epsilon: norm-bound slack,
    c1: Variant-2 stream-length constant, m: iterations / matrix rows
    """
    n: int
    t: int = 0
    epsilon: float = DEFAULT_EPSILON
    c1: float = DEFAULT_C1
    m: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if self.t < 0:
            raise ParameterError(f"t must be >= 0, got {self.t}")
        if 2 * self.t >= self.n:
            raise ParameterError(f"need 2t < n, got n={self.n}, t={self.t}")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if self.c1 <= 0:
            raise ParameterError(f"c1 must be > 0, got {self.c1}")
        if self.m < 1:
            raise ParameterError(f"m must be >= 1, got {self.m}")

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "t": self.t, "epsilon": self.epsilon, "c1": self.c1, "m": self.m}


@dataclass(frozen=True)
class DerivedThresholds:
    """Deviation thresholds and the spectral-norm threshold for one Params"""
    alpha: float
    beta: float
    beta_quarter: float
    beta_half: float
    alpha_prime: float
    norm_threshold: float
    half_norm_threshold: float
    union_bound: float

    def to_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


def _beta(n: float, t: float) -> float:
    return math.sqrt(2 * n * (n - t)) - 2 * t


def derive(params: Params) -> DerivedThresholds:
    """
    Evaluate every threshold for the given parameters

    beta = sqrt(2n(n-t)) - 2t, so beta/4 = sqrt(2n(n-t))/4 - t/2 and
    alpha' = sqrt(2n(n-2t)) - beta/4.
    """
    n, t, m = params.n, params.t, params.m
    alpha = math.sqrt(2 * n * (n - 2 * t))
    beta = _beta(n, t)
    beta_quarter = math.sqrt(2 * n * (n - t)) / 4 - t / 2
    norm_threshold = (6 + 2 * params.epsilon) * math.sqrt(n * (m + n))
    return DerivedThresholds(
        alpha=alpha,
        beta=beta,
        beta_quarter=beta_quarter,
        beta_half=math.sqrt(2 * n * (n - t)) / 2 - t,
        alpha_prime=alpha - beta_quarter,
        norm_threshold=norm_threshold,
        half_norm_threshold=norm_threshold / 2,
        union_bound=2 / (m + n),
    )


def _part1_bound(n: float, t: float) -> float:
    if t == 0:
        return 0.0
    beta_quarter = math.sqrt(2 * n * (n - t)) / 4 - t / 2
    return 2 * math.exp(-beta_quarter ** 2 / (2 * t * n))


def lemma52_part1_bound(params: Params) -> float:
    """
    Bound 2·e^{-(β/4)^2 / (2tn)} on a stoppable stream of nt coins deviating
    past β/4

    Returns 0 when t = 0 (no such stream).
    """
    return _part1_bound(params.n, params.t)


def lemma52_part1_statement_form(params: Params) -> float:
    """Typographical variant (1/2)·e^{-(β/4)^2} / (2nt), reported only"""
    if params.t == 0:
        return 0.0
    beta_quarter = derive(params).beta_quarter
    return 0.5 * math.exp(-beta_quarter ** 2) / (2 * params.n * params.t)


def variant1_chain(epsilon: float, coefficient: float = CHAIN_COEFFICIENT) -> float:
    """(2/3)(.001)(coefficient)^2(.49999)^2(7+2ε)^-2"""
    return (2 / 3) * 0.001 * coefficient ** 2 * BETA_HALF_SQUARED_FLOOR ** 2 * (7 + 2 * epsilon) ** -2


def lemma52_small_t(params: Params) -> bool:
    return params.t < SMALL_T_FRACTION * params.n


def lemma55_admissible(params: Params) -> bool:
    return params.t < params.n / LEMMA55_DIVISOR


def variant1_admissible(params: Params) -> bool:
    return params.t < VARIANT1_RESILIENCE * params.n


def min_n_for_variant1(t: int) -> int:
    """Smallest n with t < 3.3e-8 n"""
    return math.floor(t / VARIANT1_RESILIENCE) + 1


@dataclass
class Claim:
    """One arithmetic claim with both sides as computed"""
    claim_id: str
    description: str
    lhs: float
    relation: str
    rhs: Any
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "description": self.description,
            "lhs": self.lhs,
            "relation": self.relation,
            "rhs": self.rhs,
            "verdict": "pass" if self.passed else "fail",
            "details": self.details,
        }


@dataclass
class ClaimReport:
    """Outcome of every constant-chain claim for one parameter set"""
    params: Params
    claims: List[Claim]
    notes: List[str]
    substitutions: List[Dict[str, Any]]
    ranges: Dict[str, Any]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "claims": [c.to_dict() for c in self.claims],
            "notes": list(self.notes),
            "substitutions": self.substitutions,
            "ranges": self.ranges,
            "verdict": "pass" if self.passed else "fail",
        }


def evaluate_substitutions(epsilon: float) -> List[Dict[str, Any]]:
    """The replacement table with its ε-dependent entries evaluated"""
    numeric = {
        "3+eps": (3 + epsilon, 6 + 2 * epsilon),
        "4+eps": (4 + epsilon, 7 + 2 * epsilon),
    }
    table = []
    for row in CONSTANT_SUBSTITUTIONS:
        entry = dict(row)
        if row["old"] in numeric:
            entry["old_value"], entry["new_value"] = numeric[row["old"]]
        table.append(entry)
    return table


def check_claims(params: Params) -> ClaimReport:
    """
    Evaluate the correction's arithmetic claims at n = params.n

    (a) 2e^{-(β/4)^2/(2tn)} <= e^{-11} at t = .005n
    (b) .211 - e^{-11} > 1/20
    (c) (β/2)^2 > .49999 n^2 at t = 1e-6 n
    (d) the Variant-1 product chain at ε -> 0 lies in [1.13e-9, 1.15e-9]
    """
    n = params.n
    claims = []

    t_a = SMALL_T_FRACTION * n
    bound_a = _part1_bound(n, t_a)
    claims.append(Claim(
        claim_id="lemma52-1-small-t",
        description="stoppable nt-coin stream exceeds beta/4 with probability <= e^-11 when t = .005n",
        lhs=bound_a, relation="<=", rhs=SMALL_T_TARGET,
        passed=bound_a <= SMALL_T_TARGET,
        details={"t": t_a, "exponent": math.log(bound_a / 2) if bound_a else None},
    ))

    lhs_b = FIRST_PART_PROBABILITY - SMALL_T_TARGET
    claims.append(Claim(
        claim_id="lemma52-2-margin",
        description=".211 - e^-11 > 1/20",
        lhs=lhs_b, relation=">", rhs=GOOD_EVENT_BENCHMARK,
        passed=lhs_b > GOOD_EVENT_BENCHMARK,
    ))

    t_c = BETA_HALF_T_FRACTION * n
    beta_half_c = math.sqrt(2 * n * (n - t_c)) / 2 - t_c
    lhs_c = beta_half_c ** 2
    rhs_c = BETA_HALF_SQUARED_FLOOR * n * n
    claims.append(Claim(
        claim_id="beta-half-squared",
        description="(beta/2)^2 > .49999 n^2 when t = 1e-6 n",
        lhs=lhs_c, relation=">", rhs=rhs_c,
        passed=lhs_c > rhs_c,
        details={"t": t_c, "beta_half_over_n": beta_half_c / n, "ratio": lhs_c / (n * n)},
    ))

    chain = variant1_chain(0.0)
    low, high = CHAIN_RANGE
    claims.append(Claim(
        claim_id="variant1-chain",
        description="(2/3)(.001)(.0183)^2(.49999)^2(7+2eps)^-2 at eps -> 0 is about 1.14e-9",
        lhs=chain, relation="in", rhs=[low, high],
        passed=low <= chain <= high,
        details={
            "stated": CHAIN_STATED,
            "at_configured_epsilon": variant1_chain(params.epsilon),
            "displayed_coefficient_value": variant1_chain(0.0, CHAIN_COEFFICIENT_DISPLAYED),
        },
    ))

    notes = [
        "Variant-1 chain: the displayed formula uses .183^2, the numeric line uses (.0183)^2; "
        f"only .0183 reproduces 1.14e-9 (.183 gives {variant1_chain(0.0, CHAIN_COEFFICIENT_DISPLAYED):.4g}).",
        "Lemma 5.2(1): statement form (1/2)e^{-(beta/4)^2}/2nt is typographical; "
        "the proof form 2e^{-(beta/4)^2/2tn} is the implemented bound.",
        "Lemma 5.5: 't < 1/72' read as t < n/72.",
        "The role of c1 in the Variant-1 chain is not reconstructible; the numeric chain is reproduced verbatim.",
        f"Defaults recorded: epsilon={params.epsilon}, c1={params.c1}.",
    ]

    ranges = {
        "t": params.t,
        "lemma52_small_t": lemma52_small_t(params),
        "lemma55_admissible": lemma55_admissible(params),
        "variant1_admissible": variant1_admissible(params),
        "min_n_for_variant1_one_fault": min_n_for_variant1(max(params.t, 1)),
        "lemma52_part1_bound": lemma52_part1_bound(params),
        "lemma52_part1_statement_form": lemma52_part1_statement_form(params),
        "thresholds": derive(params).to_dict(),
    }

    return ClaimReport(
        params=params,
        claims=claims,
        notes=notes,
        substitutions=evaluate_substitutions(params.epsilon),
        ranges=ranges,
    )
