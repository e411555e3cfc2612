"""Block covariance statistics for the single-encoder, two-encoder and soft regimes.

Inputs are lag-embedded ``SegmentSet`` objects (see ``SegmentSet.embed``).
Every block is an unnormalized Gram matrix summed segment by segment, after
removing per-column means taken over the whole training set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidProbability
from .pencil import PencilPair, apply_ridge
from .signals import SegmentSet, check_labels


@dataclass(frozen=True)
class StatsBlocks:
    rxx: np.ndarray
    raa: np.ndarray
    rxa: np.ndarray
    rxu: np.ndarray | None = None
    rau: np.ndarray | None = None
    ruu: np.ndarray | None = None

    @property
    def two_encoder(self):
        return self.rxu is not None


def _global_mean(arrays):
    total = np.zeros(arrays[0].shape[1])
    n = 0
    for a in arrays:
        total += a.sum(axis=0)
        n += a.shape[0]
    return total / n


def _accumulate(xs, attended, unattended=None):
    mx = _global_mean(xs)
    ma = _global_mean(attended)
    dx = xs[0].shape[1]
    da = attended[0].shape[1]
    rxx = np.zeros((dx, dx))
    rxa = np.zeros((dx, da))
    raa = np.zeros((da, da))
    if unattended is None:
        for x, a in zip(xs, attended):
            xc = x - mx
            ac = a - ma
            rxx += xc.T @ xc
            rxa += xc.T @ ac
            raa += ac.T @ ac
        return StatsBlocks(rxx=rxx, raa=raa, rxa=rxa)

    mu = _global_mean(unattended)
    rxu = np.zeros((dx, da))
    rau = np.zeros((da, da))
    ruu = np.zeros((da, da))
    for x, a, u in zip(xs, attended, unattended):
        xc = x - mx
        ac = a - ma
        uc = u - mu
        rxx += xc.T @ xc
        rxa += xc.T @ ac
        raa += ac.T @ ac
        rxu += xc.T @ uc
        rau += ac.T @ uc
        ruu += uc.T @ uc
    return StatsBlocks(rxx=rxx, raa=raa, rxa=rxa, rxu=rxu, rau=rau, ruu=ruu)


def _split(segments: SegmentSet, labels):
    lab = check_labels(labels, len(segments))
    att, un = [], []
    for k, j in enumerate(lab):
        s1 = segments.spk1[k].samples
        s2 = segments.spk2[k].samples
        att.append(s1 if j == 1 else s2)
        un.append(s2 if j == 1 else s1)
    return [x.samples for x in segments.eeg], att, un


def build_single(segments: SegmentSet, labels) -> StatsBlocks:
    """R_xx, R_xa, R_aa with the attended stream chosen per segment by ``labels``."""
    xs, att, _ = _split(segments, labels)
    return _accumulate(xs, att)


def build_two(segments: SegmentSet, labels) -> StatsBlocks:
    """All six blocks, attended and unattended streams chosen by ``labels``."""
    xs, att, un = _split(segments, labels)
    return _accumulate(xs, att, un)


def check_probs(p1, p2, k=None):
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.ndim != 1 or p1.shape != p2.shape:
        raise DimensionMismatch("p1 and p2 must be 1-D arrays of equal length")
    if k is not None and p1.shape[0] != k:
        raise DimensionMismatch(f"expected {k} probabilities, got {p1.shape[0]}")
    if not (np.all((p1 >= 0) & (p1 <= 1)) and np.all((p2 >= 0) & (p2 <= 1))):
        raise InvalidProbability("probabilities must lie in [0, 1]")
    if np.any(np.abs(p1 + p2 - 1.0) > 1e-9):
        raise InvalidProbability("p1 + p2 must equal 1 for every segment")
    return p1, p2


def build_soft(segments: SegmentSet, probs) -> StatsBlocks:
    """Single-encoder blocks with the attended stream replaced by ``p1*S1 + p2*S2``.

    ``probs`` is a ``SoftLabels`` or a ``(p1, p2)`` pair of arrays. The mixture
    is used as is, without rescaling.
    """
    if hasattr(probs, "p1"):
        p1, p2 = probs.p1, probs.p2
    else:
        p1, p2 = probs
    p1, p2 = check_probs(p1, p2, len(segments))
    xs = [x.samples for x in segments.eeg]
    mixed = [
        p1[k] * segments.spk1[k].samples + p2[k] * segments.spk2[k].samples for k in range(len(segments))
    ]
    return _accumulate(xs, mixed)


# ---------------------------------------------------------------------------
# pencil assembly


def single_pencil(stats: StatsBlocks, ridge: float) -> PencilPair:
    """R = [[Rxx, Rxa], [Rxa^T, Raa]], D = blockdiag(Rxx, Raa), diagonal blocks ridge-loaded."""
    rxx = apply_ridge(stats.rxx, ridge)
    raa = apply_ridge(stats.raa, ridge)
    dx, da = rxx.shape[0], raa.shape[0]
    d = np.zeros((dx + da, dx + da))
    d[:dx, :dx] = rxx
    d[dx:, dx:] = raa
    r = d.copy()
    r[:dx, dx:] = stats.rxa
    r[dx:, :dx] = stats.rxa.T
    return PencilPair(r, d, ridge)


def two_pencil(stats: StatsBlocks, ridge: float) -> PencilPair:
    """Three-block pencil; D couples the two audio blocks and is block diagonal w.r.t. EEG."""
    if not stats.two_encoder:
        raise ValueError("two_pencil needs statistics from build_two")
    rxx = apply_ridge(stats.rxx, ridge)
    da = stats.raa.shape[0]
    audio = np.block([[stats.raa, stats.rau], [stats.rau.T, stats.ruu]])
    audio = apply_ridge(audio, ridge)
    dx = rxx.shape[0]
    n = dx + 2 * da
    d = np.zeros((n, n))
    d[:dx, :dx] = rxx
    d[dx:, dx:] = audio
    r = d.copy()
    cross = np.hstack([stats.rxa, stats.rxu])
    r[:dx, dx:] = cross
    r[dx:, :dx] = cross.T
    return PencilPair(r, d, ridge)
