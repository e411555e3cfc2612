import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aadcca.errors import DimensionMismatch
from aadcca.scoring import CcaModel, ScorePair, classify_all, classify_segment, score_segment, scores_array
from aadcca.signals import SegmentSet, TimeSeries
from aadcca.trainers import TrainConfig, predict, train_supervised


def corr_oracle(model, x, s):
    return sum(np.corrcoef(x @ model.wx[:, q], s @ model.wa[:, q])[0, 1] for q in range(model.q))


def random_model(rng, dx=5, ds=3, q=2):
    return CcaModel(rng.standard_normal((dx, q)), rng.standard_normal((ds, q)), np.ones(q))


def random_set(rng, k=5, t=200, dx=5, ds=3):
    return SegmentSet(
        [TimeSeries(rng.standard_normal((t, dx))) for _ in range(k)],
        [TimeSeries(rng.standard_normal((t, ds))) for _ in range(k)],
        [TimeSeries(rng.standard_normal((t, ds))) for _ in range(k)],
    )


class TestScoreSegment:
    def test_perfect_correlation(self, rng):
        x = rng.standard_normal((100, 1))
        m = CcaModel(np.ones((1, 1)), np.ones((1, 1)), [1.0])
        assert score_segment(m, x, 2 * x + 3) == pytest.approx(1.0, abs=1e-12)
        assert score_segment(m, x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_corrcoef(self, rng):
        m = random_model(rng)
        x, s = rng.standard_normal((200, 5)), rng.standard_normal((200, 3))
        assert score_segment(m, x, s) == pytest.approx(corr_oracle(m, x, s), rel=1e-12, abs=1e-14)

    def test_zero_variance_component_contributes_zero(self, rng):
        x = rng.standard_normal((50, 2))
        m = CcaModel(np.eye(2), np.eye(2), [1.0, 1.0])
        s = np.column_stack([x[:, 0], np.full(50, 3.0)])
        assert score_segment(m, x, s) == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self, rng):
        m = random_model(rng)
        with pytest.raises(DimensionMismatch):
            score_segment(m, rng.standard_normal((20, 4)), rng.standard_normal((20, 3)))
        with pytest.raises(DimensionMismatch):
            score_segment(m, rng.standard_normal((20, 5)), rng.standard_normal((21, 3)))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**31), q=st.integers(1, 4))
    def test_bounded_by_q(self, seed, q):
        rng = np.random.default_rng(seed)
        m = random_model(rng, q=q)
        rho = score_segment(m, rng.standard_normal((30, 5)), rng.standard_normal((30, 3)))
        assert abs(rho) <= q + 1e-12


class TestClassify:
    def _pair_model(self):
        return CcaModel(np.ones((1, 1)), np.ones((1, 1)), [1.0])

    def test_higher_score_wins(self, rng):
        x = rng.standard_normal((200, 1))
        s1 = x + 0.5 * rng.standard_normal((200, 1))
        s2 = rng.standard_normal((200, 1))
        label, pair = classify_segment(self._pair_model(), x, s1, s2)
        assert label == 1 and pair.rho1 > pair.rho2

    def test_tie_goes_to_one(self, rng):
        x, s = rng.standard_normal((40, 1)), rng.standard_normal((40, 1))
        label, pair = classify_segment(self._pair_model(), x, s, s.copy())
        assert label == 1 and pair.rho1 == pair.rho2

    def test_antisymmetry(self, rng):
        m = random_model(rng)
        x, a, b = rng.standard_normal((80, 5)), rng.standard_normal((80, 3)), rng.standard_normal((80, 3))
        l1, p1 = classify_segment(m, x, a, b)
        l2, p2 = classify_segment(m, x, b, a)
        assert (p1.rho1, p1.rho2) == (p2.rho2, p2.rho1)
        assert l1 != l2

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31), c1=st.floats(1e-3, 1e3), c2=st.floats(1e-3, 1e3))
    def test_positive_scale_invariance(self, seed, c1, c2):
        rng = np.random.default_rng(seed)
        m = random_model(rng)
        x, a, b = rng.standard_normal((60, 5)), rng.standard_normal((60, 3)), rng.standard_normal((60, 3))
        base, _ = classify_segment(m, x, a, b)
        scaled, _ = classify_segment(m, x, c1 * a, c2 * b)
        assert base == scaled

    def test_ignores_unattended_encoder(self, rng):
        m = random_model(rng)
        m2 = CcaModel(m.wx, m.wa, m.eigenvalues, wu=rng.standard_normal(m.wa.shape))
        x, a, b = rng.standard_normal((60, 5)), rng.standard_normal((60, 3)), rng.standard_normal((60, 3))
        assert classify_segment(m, x, a, b) == classify_segment(m2, x, a, b)

    def test_classify_all_matches_loop(self, rng):
        m, segs = random_model(rng), random_set(rng)
        labels, pairs = classify_all(m, segs)
        for k in range(len(segs)):
            lab, pair = classify_segment(m, segs.eeg[k], segs.spk1[k], segs.spk2[k])
            assert labels[k] == lab and pairs[k] == pair
        r1, r2 = scores_array(pairs)
        assert r1.shape == (5,) and r2[0] == pairs[0].rho2

    def test_classify_all_permutation(self, rng):
        m, segs = random_model(rng), random_set(rng)
        perm = np.array([3, 1, 4, 0, 2])
        labels, pairs = classify_all(m, segs)
        plabels, ppairs = classify_all(m, segs.subset(perm))
        np.testing.assert_array_equal(plabels, labels[perm])
        assert ppairs == [pairs[i] for i in perm]

    def test_planted_speaker_two(self, high_snr_dataset):
        ds = high_snr_dataset
        cfg = TrainConfig(method="supervised")
        tr = np.arange(40)
        model = train_supervised(ds.segments.subset(tr), ds.truth[tr], cfg).model
        twos = [k for k in range(40, len(ds.truth)) if ds.truth[k] == 2]
        pred = predict(model, ds.segments.subset(twos), cfg)
        assert np.mean(pred == 2) >= 0.8


def test_model_validation(rng):
    with pytest.raises(DimensionMismatch):
        CcaModel(np.ones((3, 2)), np.ones((2, 1)), [1, 1])
    with pytest.raises(ValueError):
        CcaModel(np.array([[np.nan]]), np.ones((1, 1)), [1])
    assert ScorePair(0.3, 0.1).rho1 == 0.3
