"""Parameters, derived thresholds and the constant-chain claims"""
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bounds.bounds_calculator import (
    CONSTANT_SUBSTITUTIONS,
    SMALL_T_TARGET,
    Params,
    check_claims,
    derive,
    evaluate_substitutions,
    lemma52_part1_bound,
    lemma52_small_t,
    lemma55_admissible,
    min_n_for_variant1,
    variant1_admissible,
    variant1_chain,
)
from core.errors import ParameterError


def test_thresholds_without_faults():
    d = derive(Params(n=100))
    assert d.alpha == pytest.approx(math.sqrt(20000))
    assert d.beta == pytest.approx(math.sqrt(20000))
    assert d.beta_quarter == pytest.approx(math.sqrt(20000) / 4)
    assert d.alpha_prime == pytest.approx(0.75 * math.sqrt(20000))


def test_thresholds_at_1000_5():
    d = derive(Params(n=1000, t=5))
    assert d.alpha == pytest.approx(math.sqrt(2 * 1000 * 990))
    assert d.beta == pytest.approx(math.sqrt(2 * 1000 * 995) - 10)
    assert d.beta_quarter == pytest.approx(d.beta / 4)
    assert d.beta_half == pytest.approx(d.beta / 2)
    assert d.alpha_prime == pytest.approx(d.alpha - d.beta / 4)


def test_norm_threshold_and_union_bound():
    d = derive(Params(n=32, m=32, epsilon=0.1))
    assert d.norm_threshold == pytest.approx(6.2 * math.sqrt(32 * 64))
    assert d.half_norm_threshold == pytest.approx(d.norm_threshold / 2)
    assert d.union_bound == pytest.approx(2 / 64)


@pytest.mark.parametrize("kwargs", [
    {"n": 10, "t": 5},
    {"n": 0},
    {"n": 10, "t": -1},
    {"n": 10, "epsilon": 0},
    {"n": 10, "c1": -0.1},
    {"n": 10, "m": 0},
])
def test_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        Params(**kwargs)


@given(st.integers(3, 10 ** 6), st.data())
def test_threshold_ordering(n, data):
    t = data.draw(st.integers(0, (n - 1) // 2))
    d = derive(Params(n=n, t=t))
    assert d.alpha_prime < d.alpha
    assert d.beta_quarter < d.beta_half < d.beta


def test_part1_bound_at_1000_5_meets_target():
    bound = lemma52_part1_bound(Params(n=1000, t=5))
    assert bound <= SMALL_T_TARGET
    assert math.log(bound / 2) == pytest.approx(-12.26, abs=0.01)


def test_part1_bound_at_200_1():
    assert lemma52_part1_bound(Params(n=200, t=1)) == pytest.approx(2 * math.exp(-12.26), rel=1e-2)


def test_part1_bound_without_faults():
    assert lemma52_part1_bound(Params(n=50)) == 0.0


def test_variant1_chain():
    assert 1.13e-9 <= variant1_chain(0.0) <= 1.15e-9
    assert variant1_chain(0.1) < variant1_chain(0.0)
    assert variant1_chain(0.0, 0.183) == pytest.approx(100 * variant1_chain(0.0))


def test_range_checks():
    params = Params(n=1000, t=5)
    assert not lemma52_small_t(params)
    assert lemma52_small_t(Params(n=1000, t=4))
    assert lemma55_admissible(Params(n=1000, t=13))
    assert not lemma55_admissible(Params(n=1000, t=14))
    assert not variant1_admissible(params)
    assert min_n_for_variant1(1) > 10 ** 7
    assert variant1_admissible(Params(n=min_n_for_variant1(1), t=1))


class TestCheckClaims:
    """All four constant claims and the discrepancy note"""

    def test_all_pass_at_1000_5(self):
        report = check_claims(Params(n=1000, t=5))
        assert [c.claim_id for c in report.claims] == [
            "lemma52-1-small-t", "lemma52-2-margin", "beta-half-squared", "variant1-chain"]
        assert report.passed
        assert report.to_dict()["verdict"] == "pass"

    def test_discrepancy_note(self):
        notes = " ".join(check_claims(Params(n=1000, t=5)).notes)
        assert ".183" in notes and ".0183" in notes

    def test_chain_details(self):
        chain = next(c for c in check_claims(Params(n=1000)).claims if c.claim_id == "variant1-chain")
        assert chain.details["displayed_coefficient_value"] > 1e-8
        assert chain.rhs == [1.13e-9, 1.15e-9]

    def test_substitutions_echoed(self):
        report = check_claims(Params(n=1000, epsilon=0.1))
        assert len(report.substitutions) == len(CONSTANT_SUBSTITUTIONS)
        row = next(r for r in report.substitutions if r["old"] == "3+eps")
        assert row["new_value"] == pytest.approx(6.2)


def test_evaluate_substitutions_leaves_symbolic_rows():
    table = evaluate_substitutions(0.5)
    n72 = next(r for r in table if r["new"] == "t < n/72")
    assert "new_value" not in n72
    assert next(r for r in table if r["old"] == "4+eps")["new_value"] == pytest.approx(8.0)


@given(st.integers(3, 10 ** 5), st.data())
def test_part1_bound_shrinks_with_fewer_faults(n, data):
    t = data.draw(st.integers(1, (n - 1) // 2))
    assert lemma52_part1_bound(Params(n=n, t=t - 1)) <= lemma52_part1_bound(Params(n=n, t=t))
