"""
Exact Combinatorics - Big-Integer Walk Distributions
Endpoint and running-maximum probabilities of the symmetric ±1 walk,
the reflection identity, and a brute-force enumeration oracle

Convention: every ExactProb keeps its denominator exactly 2^n for an n-step
walk; equality and ordering compare the reduced fractions.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Dict

import numpy as np

from core.errors import BudgetError, ParameterError

ENUMERATION_BUDGET = 24
_ENUMERATION_CHUNK = 1 << 16


@total_ordering
@dataclass(frozen=True, eq=False)
class ExactProb:
    """A probability numerator / 2^n held as arbitrary-precision integers"""
    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0 or self.denominator & (self.denominator - 1):
            raise ParameterError(f"denominator must be a power of 2, got {self.denominator}")
        if not 0 <= self.numerator <= self.denominator:
            raise ParameterError(f"numerator {self.numerator} outside [0, {self.denominator}]")

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def twice(self) -> Fraction:
        """2·p, which may exceed 1"""
        return 2 * self.as_fraction()

    def __float__(self) -> float:
        return float(self.as_fraction())

    def __eq__(self, other) -> bool:
        other = _as_fraction(other)
        if other is NotImplemented:
            return NotImplemented
        return self.as_fraction() == other

    def __lt__(self, other) -> bool:
        other = _as_fraction(other)
        if other is NotImplemented:
            return NotImplemented
        return self.as_fraction() < other

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def _as_fraction(value):
    if isinstance(value, ExactProb):
        return value.as_fraction()
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return NotImplemented


def _check_n(n: int):
    if n < 1:
        raise ParameterError(f"walk length n must be >= 1, got {n}")


def _count_sum_eq(n: int, r: int) -> int:
    if abs(r) > n or (n + r) % 2:
        return 0
    return math.comb(n, (n + r) // 2)


def _count_sum_ge(n: int, r: int) -> int:
    start = max(r, -n)
    # endpoints share the parity of n
    if (n + start) % 2:
        start += 1
    return sum(math.comb(n, (n + s) // 2) for s in range(start, n + 1, 2))


def prob_sum_eq(n: int, r: int) -> ExactProb:
    """
    Pr(S_n = r) = C(n, (n+r)/2) / 2^n when n+r is even and |r| <= n, else 0

    Args:
        n: number of steps, n >= 1
        r: endpoint value
    """
    _check_n(n)
    return ExactProb(_count_sum_eq(n, r), 1 << n)


def prob_sum_ge(n: int, r: int) -> ExactProb:
    """Pr(S_n >= r)"""
    _check_n(n)
    return ExactProb(_count_sum_ge(n, r), 1 << n)


def prob_sum_gt(n: int, r: int) -> ExactProb:
    """Pr(S_n > r)"""
    _check_n(n)
    return ExactProb(_count_sum_ge(n, r + 1), 1 << n)


def prob_max_ge_reflection(n: int, r: int) -> ExactProb:
    """
    Reflection identity Pr(M_n >= r) = Pr(S_n = r) + 2·Pr(S_n > r)

    Only stated for r >= 1.

    Raises:
        ParameterError: n < 1 or r < 1
    """
    _check_n(n)
    if r < 1:
        raise ParameterError(f"reflection identity needs r >= 1, got {r}")
    return ExactProb(_count_sum_eq(n, r) + 2 * _count_sum_ge(n, r + 1), 1 << n)


@lru_cache(maxsize=None)
def max_histogram(n: int) -> Dict[int, int]:
    """
    Enumerate all 2^n paths and count them by running maximum

    The maximum is taken over prefixes 1..n (prefix 0 excluded).

    Returns:
        dict: running max value -> number of paths
    """
    _check_n(n)
    if n > ENUMERATION_BUDGET:
        raise BudgetError(f"enumeration of 2^{n} paths exceeds budget 2^{ENUMERATION_BUDGET}")

    shifts = np.arange(n, dtype=np.uint32)
    counts = np.zeros(2 * n + 1, dtype=np.int64)
    total = 1 << n
    for start in range(0, total, _ENUMERATION_CHUNK):
        ids = np.arange(start, min(start + _ENUMERATION_CHUNK, total), dtype=np.uint32)
        bits = ((ids[:, np.newaxis] >> shifts) & 1).astype(np.int8)
        prefix = np.cumsum(2 * bits - 1, axis=1, dtype=np.int32)
        maxima = prefix.max(axis=1)
        counts += np.bincount(maxima + n, minlength=2 * n + 1)

    return {value - n: int(c) for value, c in enumerate(counts) if c}


def prob_max_ge_enumeration(n: int, r: int) -> ExactProb:
    """
    Brute-force Pr(M_n >= r) by enumerating every path

    Args:
        n: 1 <= n <= 24
        r: threshold (any integer)

    Raises:
        BudgetError: n > 24
    """
    histogram = max_histogram(n)
    hits = sum(c for value, c in histogram.items() if value >= r)
    return ExactProb(hits, 1 << n)


def chernoff_tail(n: int, r: float) -> float:
    """
    Tail form e^{-r^2 / (2n)}

    Double precision; compare with relative tolerance 1e-12.
    """
    _check_n(n)
    if r < 0:
        raise ParameterError(f"r must be >= 0, got {r}")
    return math.exp(-(r * r) / (2 * n))


def fact3_relation(n: int, r: int) -> str:
    """
    How Pr(M_n >= r) compares to 2·Pr(S_n >= r) exactly

    Returns:
        str: "<" when Pr(S_n = r) > 0, "=" when it is 0
    """
    maximum = prob_max_ge_reflection(n, r).as_fraction()
    doubled = prob_sum_ge(n, r).twice()
    if maximum < doubled:
        return "<"
    if maximum == doubled:
        return "="
    return ">"


def fact3_exact_table(max_n: int) -> Dict[str, object]:
    """
    Check enumeration == reflection and the exact Fact 3 relation for every
    1 <= r <= n <= max_n

    The relation is "<" when n + r is even and "=" when it is odd.

    Returns:
        dict: rows checked, mismatching (n, r) pairs, verdict
    """
    if max_n > ENUMERATION_BUDGET:
        raise BudgetError(f"exact table up to n={max_n} exceeds budget {ENUMERATION_BUDGET}")
    rows, mismatches = 0, []
    for n in range(1, max_n + 1):
        for r in range(1, n + 1):
            rows += 1
            expected = "<" if (n + r) % 2 == 0 else "="
            if prob_max_ge_enumeration(n, r) != prob_max_ge_reflection(n, r) or fact3_relation(n, r) != expected:
                mismatches.append([n, r])
    return {
        "max_n": max_n,
        "rows": rows,
        "mismatches": mismatches,
        "verdict": "fail" if mismatches else "pass",
    }
