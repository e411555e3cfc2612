"""Unsupervised attended/unattended correlation model and per-segment posteriors.

Each segment yields one score for each speaker, and exactly one of the two
belongs to the attended speaker. The two Gaussians are fitted by an EM whose
latent variable is which element of the pair is attended; its E-step is the
posterior computed by :func:`posterior`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateFitWarning
from .scoring import ScorePair, scores_array

VAR_FLOOR = 1e-8
EM_TOL = 1e-6
EM_MAX_ITER = 100


@dataclass(frozen=True)
class CorrelationModel:
    mu_a: float
    var_a: float
    mu_u: float
    var_u: float
    prior: float = 0.5

    def __post_init__(self):
        if not (self.var_a > 0 and self.var_u > 0):
            raise ValueError("variances must be positive")
        if self.prior != 0.5:
            raise ValueError("only the uninformative prior 0.5 is supported")


@dataclass(frozen=True)
class SoftLabels:
    p1: np.ndarray
    p2: np.ndarray
    model: CorrelationModel | None = None

    def __post_init__(self):
        p1 = np.asarray(self.p1, dtype=np.float64)
        p2 = np.asarray(self.p2, dtype=np.float64)
        if p1.shape != p2.shape or p1.ndim != 1:
            raise ValueError("p1 and p2 must be 1-D arrays of equal length")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)

    @classmethod
    def uniform(cls, k):
        half = np.full(k, 0.5)
        return cls(half, half.copy())

    @classmethod
    def from_labels(cls, labels):
        lab = np.asarray(labels)
        p1 = (lab == 1).astype(np.float64)
        return cls(p1, 1.0 - p1)

    def hard_labels(self):
        """Argmax of the probabilities; ties go to speaker 1."""
        return np.where(self.p1 >= self.p2, 1, 2).astype(np.int64)


def fit_correlation_model(scores) -> CorrelationModel:
    """Fit ``N(mu_a, var_a)`` / ``N(mu_u, var_u)`` to unlabeled score pairs.

    Initialized from the per-pair maxima (attended) and minima (unattended);
    stops when no parameter moves by more than ``EM_TOL`` or after
    ``EM_MAX_ITER`` rounds. Components are relabeled so that ``mu_a >= mu_u``.
    """
    r1, r2 = scores_array(scores)
    if r1.shape[0] < 4:
        raise ValueError("need at least 4 score pairs to fit the correlation model")
    hi = np.maximum(r1, r2)
    lo = np.minimum(r1, r2)
    if np.all(r1 == r1[0]) and np.all(r2 == r1[0]):
        warnings.warn("all scores identical; variances clamped to the floor", DegenerateFitWarning, stacklevel=2)
    mu_a, var_a = hi.mean(), max(hi.var(), VAR_FLOOR)
    mu_u, var_u = lo.mean(), max(lo.var(), VAR_FLOOR)
    mu_a, var_a, mu_u, var_u, _ = _kernels.pair_em(
        r1, r2, float(mu_a), float(var_a), float(mu_u), float(var_u), EM_MAX_ITER, EM_TOL, VAR_FLOOR
    )
    if mu_a < mu_u:
        mu_a, var_a, mu_u, var_u = mu_u, var_u, mu_a, var_a
    return CorrelationModel(float(mu_a), float(var_a), float(mu_u), float(var_u))


def log_odds(model: CorrelationModel, pair) -> float:
    """log p(pair | speaker 1 attended) - log p(pair | speaker 2 attended)."""
    lo, _, _ = _kernels.pair_posteriors(
        np.array([float(pair[0])]), np.array([float(pair[1])]), model.mu_a, model.var_a, model.mu_u, model.var_u
    )
    return float(lo[0])


def posterior(model: CorrelationModel, pair):
    """``(p1, p2)``: probability that speaker 1 (resp. 2) is attended."""
    _, p1, p2 = _kernels.pair_posteriors(
        np.array([float(pair[0])]), np.array([float(pair[1])]), model.mu_a, model.var_a, model.mu_u, model.var_u
    )
    return float(p1[0]), float(p2[0])


def soft_labels(model: CorrelationModel, scores) -> SoftLabels:
    r1, r2 = scores_array(scores)
    _, p1, p2 = _kernels.pair_posteriors(r1, r2, model.mu_a, model.var_a, model.mu_u, model.var_u)
    return SoftLabels(p1, p2, model)


__all__ = [
    "CorrelationModel",
    "ScorePair",
    "SoftLabels",
    "fit_correlation_model",
    "log_odds",
    "posterior",
    "soft_labels",
]
