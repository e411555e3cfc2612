import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aadcca.errors import DegenerateFitWarning
from aadcca.labeler import (
    VAR_FLOOR,
    CorrelationModel,
    SoftLabels,
    fit_correlation_model,
    log_odds,
    posterior,
    soft_labels,
)
from aadcca.scoring import ScorePair

mpmath.mp.dps = 50


def mp_log_odds(m, r1, r2):
    """Log density ratio of the two pair hypotheses, in 50-digit arithmetic."""

    def logn(x, mu, var):
        x, mu, var = mpmath.mpf(x), mpmath.mpf(mu), mpmath.mpf(var)
        return -((x - mu) ** 2) / (2 * var) - mpmath.log(2 * mpmath.pi * var) / 2

    a = logn(r1, m.mu_a, m.var_a) + logn(r2, m.mu_u, m.var_u)
    b = logn(r1, m.mu_u, m.var_u) + logn(r2, m.mu_a, m.var_a)
    return a - b


def planted_pairs(rng, n=200, mu_a=0.30, mu_u=0.05, sd=0.08):
    att = rng.normal(mu_a, sd, n)
    un = rng.normal(mu_u, sd, n)
    flip = rng.integers(0, 2, n).astype(bool)
    r1 = np.where(flip, un, att)
    r2 = np.where(flip, att, un)
    return [ScorePair(a, b) for a, b in zip(r1, r2)], ~flip


class TestFit:
    def test_constant_pairs(self):
        m = fit_correlation_model([ScorePair(0.4, 0.1)] * 10)
        assert m.mu_a == pytest.approx(0.4) and m.mu_u == pytest.approx(0.1)
        assert m.var_a == pytest.approx(VAR_FLOOR) and m.var_u == pytest.approx(VAR_FLOOR)

    def test_order_within_pairs_irrelevant(self):
        m = fit_correlation_model([ScorePair(0.4, 0.1), ScorePair(0.1, 0.4)] * 5)
        assert m.mu_a == pytest.approx(0.4) and m.mu_u == pytest.approx(0.1)

    def test_symmetric_components(self, rng):
        pairs = [ScorePair(*rng.normal(0.2, 0.05, 2)) for _ in range(400)]
        m = fit_correlation_model(pairs)
        assert abs(m.mu_a - m.mu_u) < 0.03
        p = soft_labels(m, pairs)
        assert np.mean(np.abs(p.p1 - 0.5)) < 0.2
        assert p.p1.mean() == pytest.approx(0.5, abs=0.03)

    def test_recovers_planted(self, rng):
        pairs, _ = planted_pairs(rng)
        m = fit_correlation_model(pairs)
        assert m.mu_a == pytest.approx(0.30, abs=0.03)
        assert m.mu_u == pytest.approx(0.05, abs=0.03)
        assert m.mu_a >= m.mu_u

    def test_attended_fraction_consistent(self, rng):
        pairs, one_attended = planted_pairs(rng, n=400)
        m = fit_correlation_model(pairs)
        p = soft_labels(m, pairs)
        assert 0 <= p.p1.mean() <= 1
        assert p.p1.mean() == pytest.approx(one_attended.mean(), abs=0.05)

    def test_needs_four(self):
        with pytest.raises(ValueError):
            fit_correlation_model([ScorePair(0.2, 0.1)] * 3)

    def test_degenerate_warns_and_succeeds(self):
        with pytest.warns(DegenerateFitWarning):
            m = fit_correlation_model([ScorePair(0.2, 0.2)] * 6)
        assert m.mu_a == pytest.approx(m.mu_u)
        assert posterior(m, (0.3, 0.1)) == (0.5, 0.5)

    def test_no_warning_normally(self, rng):
        pairs, _ = planted_pairs(rng, n=20)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            fit_correlation_model(pairs)


class TestPosterior:
    def test_equal_components(self):
        m = CorrelationModel(0.1, 0.01, 0.1, 0.01)
        assert posterior(m, (0.9, -0.3)) == (0.5, 0.5)

    def test_exchangeable_pair(self):
        m = CorrelationModel(0.3, 0.01, 0.0, 0.04)
        assert posterior(m, (0.17, 0.17)) == (0.5, 0.5)

    def test_log_odds_sixteen(self):
        m = CorrelationModel(0.2, 0.05**2, 0.0, 0.05**2)
        assert log_odds(m, (0.2, 0.0)) == pytest.approx(16.0, rel=1e-12)
        p1, p2 = posterior(m, (0.2, 0.0))
        assert p1 == pytest.approx(1 / (1 + np.exp(-16.0)), rel=1e-14)
        assert p2 == pytest.approx(np.exp(-16.0) / (1 + np.exp(-16.0)), rel=1e-12)

    def test_extreme_no_underflow(self):
        m = CorrelationModel(0.5, 1e-8, -0.5, 1e-8)
        p1, p2 = posterior(m, (0.5, -0.5))
        assert p1 == 1.0 and p2 >= 0.0 and np.isfinite(log_odds(m, (0.5, -0.5)))

    def test_mpmath_oracle(self, rng):
        for _ in range(200):
            mu = np.sort(rng.uniform(-0.5, 0.8, 2))[::-1]
            m = CorrelationModel(mu[0], rng.uniform(1e-4, 0.05), mu[1], rng.uniform(1e-4, 0.05))
            r = rng.uniform(-1, 1, 2)
            ref = mp_log_odds(m, *r)
            got = log_odds(m, r)
            assert abs(got - float(ref)) <= 1e-12 * max(1.0, abs(float(ref)))

    @settings(max_examples=200, deadline=None)
    @given(
        r1=st.floats(-2, 2),
        r2=st.floats(-2, 2),
        mu_u=st.floats(-1, 1),
        gap=st.floats(0, 1),
        va=st.floats(1e-6, 1),
        vu=st.floats(1e-6, 1),
    )
    def test_swap_symmetry_exact(self, r1, r2, mu_u, gap, va, vu):
        m = CorrelationModel(mu_u + gap, va, mu_u, vu)
        p1, p2 = posterior(m, (r1, r2))
        q1, q2 = posterior(m, (r2, r1))
        assert p1 == q2 and p2 == q1
        assert 0.0 <= p1 <= 1.0 and abs(p1 + p2 - 1.0) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(r2=st.floats(-1, 1), a=st.floats(-1, 1), b=st.floats(-1, 1), gap=st.floats(0, 1), var=st.floats(1e-4, 1))
    def test_monotone_equal_variance(self, r2, a, b, gap, var):
        m = CorrelationModel(gap, var, 0.0, var)
        lo, hi = min(a, b), max(a, b)
        assert posterior(m, (lo, r2))[0] <= posterior(m, (hi, r2))[0]


class TestSoftLabels:
    def test_loop_oracle(self, rng):
        m = CorrelationModel(0.3, 0.01, 0.05, 0.02)
        pairs = [ScorePair(*rng.uniform(-0.2, 0.6, 2)) for _ in range(10)]
        sl = soft_labels(m, pairs)
        for k, pr in enumerate(pairs):
            assert (sl.p1[k], sl.p2[k]) == posterior(m, pr)
        assert sl.model is m

    def test_single_and_permutation(self, rng):
        m = CorrelationModel(0.3, 0.01, 0.05, 0.02)
        pairs = [ScorePair(*rng.uniform(-0.2, 0.6, 2)) for _ in range(6)]
        assert soft_labels(m, pairs[:1]).p1[0] == posterior(m, pairs[0])[0]
        perm = [5, 2, 0, 1, 4, 3]
        np.testing.assert_array_equal(soft_labels(m, [pairs[i] for i in perm]).p1, soft_labels(m, pairs).p1[perm])

    def test_hard_labels_and_constructors(self):
        sl = SoftLabels(np.array([0.7, 0.5, 0.2]), np.array([0.3, 0.5, 0.8]))
        np.testing.assert_array_equal(sl.hard_labels(), [1, 1, 2])
        np.testing.assert_array_equal(SoftLabels.from_labels([2, 1]).p1, [0.0, 1.0])
        assert np.all(SoftLabels.uniform(3).p2 == 0.5)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            CorrelationModel(0.1, 0.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            CorrelationModel(0.1, 1.0, 0.0, 1.0, prior=0.3)
