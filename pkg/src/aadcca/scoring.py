"""Summed canonical correlations per segment and the attended-speaker decision."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DimensionMismatch
from .signals import SegmentSet, TimeSeries


@dataclass(frozen=True)
class CcaModel:
    """Decoder ``wx`` (EEG side), attended encoder ``wa`` and, for the
    two-encoder variant, unattended encoder ``wu``. All have ``q`` columns."""

    wx: np.ndarray
    wa: np.ndarray
    eigenvalues: np.ndarray
    wu: np.ndarray | None = None

    def __post_init__(self):
        for name in ("wx", "wa", "wu"):
            w = getattr(self, name)
            if w is None:
                continue
            w = np.asarray(w, dtype=np.float64)
            if w.ndim != 2 or not np.all(np.isfinite(w)):
                raise ValueError(f"{name} must be a finite 2-D array")
            object.__setattr__(self, name, w)
        if self.wx.shape[1] < 1 or self.wa.shape[1] != self.wx.shape[1]:
            raise DimensionMismatch("wx and wa must have the same number (>= 1) of columns")
        if self.wu is not None and self.wu.shape != self.wa.shape:
            raise DimensionMismatch("wu must have the shape of wa")
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=np.float64))

    @property
    def q(self):
        return self.wx.shape[1]

    @classmethod
    def from_solution(cls, solution, d_eeg, d_audio, two_encoder=False):
        """Split the stacked GEVD eigenvectors into decoder/encoder blocks."""
        v = solution.vectors
        expected = d_eeg + (2 if two_encoder else 1) * d_audio
        if v.shape[0] != expected:
            raise DimensionMismatch(f"solution has {v.shape[0]} rows, expected {expected}")
        wx = v[:d_eeg]
        wa = v[d_eeg : d_eeg + d_audio]
        wu = v[d_eeg + d_audio :] if two_encoder else None
        return cls(wx=wx.copy(), wa=wa.copy(), eigenvalues=solution.eigenvalues, wu=None if wu is None else wu.copy())


class ScorePair(NamedTuple):
    rho1: float
    rho2: float


def _samples(x):
    return x.samples if isinstance(x, TimeSeries) else np.asarray(x, dtype=np.float64)


def score_segment(model: CcaModel, x, s) -> float:
    """Sum over components of corr(X w_x, S w_a).

    ``x`` and ``s`` are lag-embedded segments (TimeSeries or arrays). A
    component whose projection has zero variance contributes 0.
    """
    xs, ss = _samples(x), _samples(s)
    if xs.shape[1] != model.wx.shape[0] or ss.shape[1] != model.wa.shape[0]:
        raise DimensionMismatch(
            f"segment dims ({xs.shape[1]}, {ss.shape[1]}) do not match model "
            f"({model.wx.shape[0]}, {model.wa.shape[0]})"
        )
    if xs.shape[0] != ss.shape[0]:
        raise DimensionMismatch("x and s differ in length")
    return float(_kernels.pearson_sum(xs @ model.wx, ss @ model.wa))


def classify_segment(model: CcaModel, x, s1, s2):
    """Return ``(label, ScorePair)``; label 1 wins ties. Only ``wx`` and ``wa`` are used."""
    xs = _samples(x)
    if xs.shape[1] != model.wx.shape[0]:
        raise DimensionMismatch("EEG dim does not match the decoder")
    px = xs @ model.wx
    rho = []
    for s in (s1, s2):
        ss = _samples(s)
        if ss.shape[1] != model.wa.shape[0] or ss.shape[0] != xs.shape[0]:
            raise DimensionMismatch("speaker segment does not match EEG segment or encoder")
        rho.append(float(_kernels.pearson_sum(px, ss @ model.wa)))
    pair = ScorePair(rho[0], rho[1])
    return (1 if pair.rho1 >= pair.rho2 else 2), pair


def classify_all(model: CcaModel, segments: SegmentSet):
    """Classify every segment; returns ``(labels, list of ScorePair)``."""
    labels = np.empty(len(segments), dtype=np.int64)
    pairs = []
    for k in range(len(segments)):
        labels[k], pair = classify_segment(model, segments.eeg[k], segments.spk1[k], segments.spk2[k])
        pairs.append(pair)
    return labels, pairs


def scores_array(pairs):
    """Stack ScorePairs into two float arrays ``(rho1, rho2)``."""
    arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    return arr[:, 0].copy(), arr[:, 1].copy()
