"""Stopped coin matrices, power iteration and the |G| tail check"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bounds.bounds_calculator import Params
from core.errors import ConvergenceError, ParameterError
from core.verdict_engine import Verdict
from montecarlo.trial_runner import PartitionRule
from spectral.spectral_norms import (
    build_G,
    build_H,
    check_power_iteration_2x2,
    closed_form_2x2_norm,
    export_matrix_csv,
    norm_or_zero,
    spectral_norm,
    verify_norm_bound,
)
from walks.walk_engine import PLUS, StoppingStrategy


class TestBuildH:

    def test_no_stopped_columns(self):
        coins = build_H(6, 0, seed=1)
        assert not coins.W.any()
        assert np.array_equal(coins.H, coins.H_prime)
        assert set(np.unique(coins.H_prime)) <= {-1, 1}

    def test_fixed_stop_point(self):
        coins = build_H(4, 1, StoppingStrategy.fixed_length(2), seed=3)
        assert coins.stop_points == {0: 2}
        assert np.count_nonzero(coins.W) == 2
        assert np.array_equal(coins.W[2:, 0], -coins.H_prime[2:, 0])
        assert not coins.H[2:, 0].any()
        assert np.array_equal(coins.H[:, 1:], coins.H_prime[:, 1:])

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 12), st.data())
    def test_decomposition(self, n, data):
        t_stopped = data.draw(st.integers(0, n))
        coins = build_H(n, t_stopped, seed=data.draw(st.integers(0, 2 ** 32 - 1)))
        assert np.array_equal(coins.H, coins.H_prime + coins.W)
        assert coins.stopped_columns == tuple(range(t_stopped))

    def test_custom_columns(self):
        coins = build_H(5, 2, StoppingStrategy.omniscient_extreme(PLUS), seed=0, columns=[1, 4])
        assert set(coins.stop_points) == {1, 4}
        assert not coins.W[:, [0, 2, 3]].any()

    def test_read_only(self):
        coins = build_H(3, 1, seed=0)
        with pytest.raises(ValueError):
            coins.H[0, 0] = 0

    @pytest.mark.parametrize("args", [(4, 5), (4, -1), (4, 2, None, 0, [0, 0]), (4, 1, None, 0, [4])])
    def test_rejected(self, args):
        with pytest.raises(ParameterError):
            build_H(*args)


class TestBuildG:

    def test_single_iteration_without_faults(self):
        sums = build_G(Params(n=6, m=1), seed=2)
        assert sums.G.shape == (1, 6)
        assert not sums.Z.any()
        assert np.array_equal(sums.G, sums.R)

    def test_decomposition_with_faults(self):
        sums = build_G(Params(n=8, m=8, t=1), seed=5)
        assert np.array_equal(sums.G, sums.R + sums.Z)
        assert sums.bad_columns == (7,)
        assert not sums.G[:, 7].any() and not sums.R[:, 7].any()
        assert np.all(np.abs(sums.Z) <= 8)
        assert sums.stop_points.shape == (8, 1)

    def test_deterministic_per_trial(self):
        params = Params(n=6, m=3, t=1)
        assert np.array_equal(build_G(params, seed=1, trial=4).G, build_G(params, seed=1, trial=4).G)
        assert not np.array_equal(build_G(params, seed=1, trial=4).R, build_G(params, seed=1, trial=5).R)


class TestSpectralNorm:

    def test_diagonal(self):
        assert spectral_norm(np.diag([3.0, 4.0])).value == pytest.approx(4.0, rel=1e-5)

    def test_identity(self):
        estimate = spectral_norm(np.eye(5))
        assert estimate.value == pytest.approx(1.0)
        assert estimate.iterations_used == 2

    def test_known_2x2(self):
        assert spectral_norm([[1, 2], [3, 4]]).value == pytest.approx(5.4649857, rel=1e-5)
        assert closed_form_2x2_norm([[1, 2], [3, 4]]) == pytest.approx(5.4649857, rel=1e-7)

    def test_rectangular(self):
        M = np.arange(12, dtype=float).reshape(3, 4)
        assert spectral_norm(M).value == pytest.approx(np.linalg.norm(M, 2), rel=1e-5)
        assert spectral_norm(M.T).value == pytest.approx(np.linalg.norm(M, 2), rel=1e-5)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 20), st.integers(2, 20))
    def test_matches_svd_on_sign_matrices(self, seed, rows, cols):
        M = np.random.default_rng(seed).choice([-1.0, 1.0], size=(rows, cols))
        assert spectral_norm(M, seed=seed).value == pytest.approx(np.linalg.norm(M, 2), rel=1e-4)

    @pytest.mark.parametrize("M", [[[-4, -3], [3, -4]], [[-9, -5], [5, -9]], [[2, 0], [0, -2]], [[1, 1], [-1, 1]]])
    def test_repeated_singular_value(self, M):
        estimate = spectral_norm(M)
        assert estimate.value == pytest.approx(closed_form_2x2_norm(M), rel=1e-9)
        assert estimate.restarts == 0

    def test_scaled_orthogonal_matrix(self):
        Q, _ = np.linalg.qr(np.random.default_rng(4).standard_normal((6, 6)))
        assert spectral_norm(3.0 * Q).value == pytest.approx(3.0, rel=1e-9)

    def test_zero_matrix(self):
        with pytest.raises(ParameterError):
            spectral_norm(np.zeros((3, 3)))
        assert norm_or_zero(np.zeros((3, 3))).value == 0.0

    def test_bad_arguments(self):
        with pytest.raises(ParameterError):
            spectral_norm(np.ones(3))
        with pytest.raises(ParameterError):
            spectral_norm(np.ones((2, 2)), rel_tol=0)

    def test_gives_up_with_best_estimate(self):
        with pytest.raises(ConvergenceError) as raised:
            spectral_norm([[2.0, 1.0], [1.0, 3.0]], max_power_iters=1)
        assert raised.value.best_estimate.value > 0
        assert raised.value.best_estimate.restarts == 1

    def test_same_seed_same_estimate(self):
        M = np.random.default_rng(0).standard_normal((6, 6))
        assert spectral_norm(M, seed=3) == spectral_norm(M, seed=3)


def test_power_iteration_against_closed_form():
    result = check_power_iteration_2x2(200, seed=1)
    assert result["samples"] == 200
    assert result["verdict"] == "pass"
    assert result["max_relative_error"] <= 1e-6
    assert result["unconverged"] == []


@pytest.mark.parametrize("seed", [8, 12, 13, 23])
def test_closed_form_check_survives_equal_singular_values(seed):
    result = check_power_iteration_2x2(1000, seed=seed)
    assert result["unconverged"] == []
    assert result["verdict"] == "pass"


def test_norm_bound_small_run():
    report = verify_norm_bound(Params(n=8, m=8, t=1), trials=100, seed=3)
    assert len(report.checks) == 100
    assert all(check.slack >= -1e-4 for check in report.checks)
    assert report.verdict.empirical.successes == 0
    assert report.verdict.verdict is Verdict.PASS
    summary = report.to_dict()
    assert summary["triangle_checks"] == 100
    assert summary["max_norm_G"] < summary["thresholds"]["norm_threshold"]


def test_norm_bound_is_worker_independent():
    rule = PartitionRule(block_trials=3)
    params = Params(n=6, m=4, t=1)
    one = verify_norm_bound(params, trials=10, seed=9, workers=1, rule=rule)
    two = verify_norm_bound(params, trials=10, seed=9, workers=2, rule=rule)
    assert [c.norm_G for c in one.checks] == [c.norm_G for c in two.checks]


def test_export_matrix_csv(tmp_path):
    sums = build_G(Params(n=4, m=2, t=1), seed=0)
    path = tmp_path / "G.csv"
    export_matrix_csv(sums.G, path)
    assert np.array_equal(np.loadtxt(path, delimiter=",", ndmin=2), sums.G)
