"""Self-adaptive CCA trainers and their supervised / cross-validated references.

All trainers take raw (not yet lag-embedded) segments. Embedding happens
inside the timed region, so ``wall_time_seconds`` covers the complete fit
apart from data loading.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from .covariance import build_single, build_soft, build_two, single_pencil, two_pencil
from .labeler import SoftLabels, fit_correlation_model, soft_labels
from .pencil import DEFAULT_RIDGE, solve_pencil
from .scoring import CcaModel, classify_all
from .signals import AUDIO_LAGS, EEG_LAGS, LagSpec, SegmentSet, check_labels

METHODS = ("single", "two", "soft", "sum_init", "cv_single", "supervised")
SOFT_TOL = 1e-3


@dataclass(frozen=True)
class TrainConfig:
    method: str = "single"
    q: int = 2
    ridge: float = DEFAULT_RIDGE
    max_iters: int = 20
    seed: int = 0
    eeg_lags: LagSpec = EEG_LAGS
    audio_lags: LagSpec = AUDIO_LAGS

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.q < 1 or self.max_iters < 1:
            raise ValueError("q and max_iters must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


@dataclass
class TrainResult:
    model: CcaModel
    final_labels: np.ndarray
    iterations_run: int
    converged: bool
    wall_time_seconds: float = 0.0
    final_probs: SoftLabels | None = None
    solver_calls: int = 0
    # label vector after every iteration; entry 0 is the initialization
    label_history: list = field(default_factory=list)


def _fit_hard(emb: SegmentSet, labels, cfg: TrainConfig) -> CcaModel:
    sol = solve_pencil(single_pencil(build_single(emb, labels), cfg.ridge), cfg.q)
    return CcaModel.from_solution(sol, emb.d_eeg, emb.d_audio)


def _fit_two(emb: SegmentSet, labels, cfg: TrainConfig) -> CcaModel:
    sol = solve_pencil(two_pencil(build_two(emb, labels), cfg.ridge), cfg.q)
    return CcaModel.from_solution(sol, emb.d_eeg, emb.d_audio, two_encoder=True)


def _fit_soft(emb: SegmentSet, probs, cfg: TrainConfig) -> CcaModel:
    sol = solve_pencil(single_pencil(build_soft(emb, probs), cfg.ridge), cfg.q)
    return CcaModel.from_solution(sol, emb.d_eeg, emb.d_audio)


# trainer randomness uses its own stream keys so it never replays the generator's draws
_LABEL_STREAM = 1
_MODEL_STREAM = 2


def _random_labels(k, seed):
    return np.random.default_rng([seed, _LABEL_STREAM]).integers(1, 3, size=k).astype(np.int64)


def _self_train(emb, labels, cfg, fit, labels_from_fit=False):
    """Alternate fit -> classify until two consecutive fits predict the same labels.

    Initial labels that were not produced by a fit (random or user supplied)
    never count towards convergence, so at least two fits always run. The
    update is deterministic, so a label vector seen before (other than the
    previous one) means a cycle: iteration stops, unconverged.
    """
    history = [labels.copy()]
    previous = labels if labels_from_fit else None
    seen = {labels.tobytes()} if labels_from_fit else set()
    model = None
    converged = False
    calls = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        model = fit(emb, labels, cfg)
        calls += 1
        labels, _ = classify_all(model, emb)
        history.append(labels)
        if previous is not None and np.array_equal(labels, previous):
            converged = True
            break
        if labels.tobytes() in seen:
            break
        seen.add(labels.tobytes())
        previous = labels
    return model, labels, it, converged, calls, history


def _check_k(segments, minimum, name):
    if len(segments) < minimum:
        raise ValueError(f"{name} needs at least {minimum} segments, got {len(segments)}")


def train_single(segments: SegmentSet, cfg: TrainConfig, init_labels=None) -> TrainResult:
    """Self-adaptive single-encoder CCA from seeded uniform random labels."""
    _check_k(segments, 2, "train_single")
    t0 = time.process_time()
    emb = segments.embed(cfg.eeg_lags, cfg.audio_lags)
    if init_labels is None:
        labels = _random_labels(len(segments), cfg.seed)
    else:
        labels = check_labels(init_labels, len(segments))
    model, labels, it, conv, calls, hist = _self_train(emb, labels, cfg, _fit_hard)
    return TrainResult(model, labels, it, conv, time.process_time() - t0, solver_calls=calls, label_history=hist)


def train_two(segments: SegmentSet, cfg: TrainConfig, init_labels=None) -> TrainResult:
    """Two-encoder variant: shared decoder, separate attended/unattended encoders."""
    _check_k(segments, 2, "train_two")
    t0 = time.process_time()
    emb = segments.embed(cfg.eeg_lags, cfg.audio_lags)
    if init_labels is None:
        labels = _random_labels(len(segments), cfg.seed)
    else:
        labels = check_labels(init_labels, len(segments))
    model, labels, it, conv, calls, hist = _self_train(emb, labels, cfg, _fit_two)
    return TrainResult(model, labels, it, conv, time.process_time() - t0, solver_calls=calls, label_history=hist)


def train_sum_init(segments: SegmentSet, cfg: TrainConfig) -> TrainResult:
    """Single-encoder self-training whose first model is fit against ``0.5 * (S1 + S2)``.

    Involves no random step, so ``cfg.seed`` is ignored.
    """
    _check_k(segments, 2, "train_sum_init")
    t0 = time.process_time()
    emb = segments.embed(cfg.eeg_lags, cfg.audio_lags)
    first = _fit_soft(emb, SoftLabels.uniform(len(segments)), cfg)
    labels, _ = classify_all(first, emb)
    hist0 = [labels.copy()]
    if cfg.max_iters == 1:
        return TrainResult(first, labels, 1, False, time.process_time() - t0, solver_calls=1, label_history=hist0)
    sub = dataclasses.replace(cfg, max_iters=cfg.max_iters - 1)
    model, labels, it, conv, calls, hist = _self_train(emb, labels, sub, _fit_hard, labels_from_fit=True)
    return TrainResult(
        model, labels, it + 1, conv, time.process_time() - t0, solver_calls=calls + 1, label_history=hist0 + hist[1:]
    )


def _random_model(emb: SegmentSet, cfg: TrainConfig) -> CcaModel:
    rng = np.random.default_rng([cfg.seed, _MODEL_STREAM])
    wx = rng.standard_normal((emb.d_eeg, cfg.q))
    wa = rng.standard_normal((emb.d_audio, cfg.q))
    # scale columns to unit energy of the centered training projections (w^T R w = 1)
    x = np.concatenate([e.samples for e in emb.eeg])
    s = 0.5 * (np.concatenate([e.samples for e in emb.spk1]) + np.concatenate([e.samples for e in emb.spk2]))
    for w, m in ((wx, x), (wa, s)):
        p = m @ w
        p -= p.mean(axis=0)
        norm = np.sqrt(np.einsum("tq,tq->q", p, p))
        norm[norm == 0] = 1.0
        w /= norm
    return CcaModel(wx=wx, wa=wa, eigenvalues=np.zeros(cfg.q))


def _estimate_probs(model, emb):
    _, pairs = classify_all(model, emb)
    return soft_labels(fit_correlation_model(pairs), pairs)


def train_soft(segments: SegmentSet, cfg: TrainConfig, init_probs=None) -> TrainResult:
    """Soft-label variant.

    Starting from a random model (or from ``init_probs`` when given), each
    iteration fits the statistics to the current probabilities, re-solves,
    rescores the segments and refits the two-Gaussian correlation model.
    Stops once no probability moves by ``SOFT_TOL`` or more.
    """
    _check_k(segments, 4, "train_soft")
    t0 = time.process_time()
    emb = segments.embed(cfg.eeg_lags, cfg.audio_lags)
    if init_probs is None:
        probs = _estimate_probs(_random_model(emb, cfg), emb)
    elif isinstance(init_probs, SoftLabels):
        probs = init_probs
    else:
        p1 = np.asarray(init_probs, dtype=np.float64)
        probs = SoftLabels(p1, 1.0 - p1)
    history = [probs.hard_labels()]
    converged = False
    model = None
    it = 0
    for it in range(1, cfg.max_iters + 1):
        model = _fit_soft(emb, probs, cfg)
        new = _estimate_probs(model, emb)
        history.append(new.hard_labels())
        delta = np.max(np.abs(new.p1 - probs.p1))
        probs = new
        # the starting probabilities were not produced by a fit
        if it > 1 and delta < SOFT_TOL:
            converged = True
            break
    return TrainResult(
        model,
        probs.hard_labels(),
        it,
        converged,
        time.process_time() - t0,
        final_probs=probs,
        solver_calls=it,
        label_history=history,
    )


def train_cv_single(segments: SegmentSet, cfg: TrainConfig, init_labels=None) -> TrainResult:
    """Leave-one-out cross-validated self-training.

    Each iteration fits K models, each on K-1 segments with the previous
    iteration's labels, and predicts the held-out segment. All K predictions
    replace the labels at once. A final fit on all segments gives the model.
    """
    k = len(segments)
    _check_k(segments, 3, "train_cv_single")
    t0 = time.process_time()
    emb = segments.embed(cfg.eeg_lags, cfg.audio_lags)
    if init_labels is None:
        labels = _random_labels(k, cfg.seed)
    else:
        labels = check_labels(init_labels, k)
    history = [labels.copy()]
    seen = set()
    calls = 0
    converged = False
    it = 0
    everyone = np.arange(k)
    for it in range(1, cfg.max_iters + 1):
        new_labels = np.empty(k, dtype=np.int64)
        for held in range(k):
            keep = everyone[everyone != held]
            model_k = _fit_hard(emb.subset(keep), labels[keep], cfg)
            calls += 1
            lab, _ = classify_all(model_k, emb.subset([held]))
            new_labels[held] = lab[0]
        history.append(new_labels)
        done = it > 1 and np.array_equal(new_labels, labels)
        cycled = new_labels.tobytes() in seen
        seen.add(new_labels.tobytes())
        labels = new_labels
        if done:
            converged = True
            break
        if cycled:
            break
    model = _fit_hard(emb, labels, cfg)
    calls += 1
    return TrainResult(
        model, labels, it, converged, time.process_time() - t0, solver_calls=calls, label_history=history
    )


def train_supervised(segments: SegmentSet, truth, cfg: TrainConfig) -> TrainResult:
    """One CCA fit with the true labels."""
    t0 = time.process_time()
    emb = segments.embed(cfg.eeg_lags, cfg.audio_lags)
    truth = check_labels(truth, len(segments))
    model = _fit_hard(emb, truth, cfg)
    labels, _ = classify_all(model, emb)
    return TrainResult(model, labels, 1, True, time.process_time() - t0, solver_calls=1, label_history=[truth.copy()])


def train(segments: SegmentSet, cfg: TrainConfig, truth=None) -> TrainResult:
    """Dispatch on ``cfg.method``; ``truth`` is needed only for ``supervised``."""
    if cfg.method == "supervised":
        if truth is None:
            raise ValueError("supervised training needs truth labels")
        return train_supervised(segments, truth, cfg)
    return {
        "single": train_single,
        "two": train_two,
        "soft": train_soft,
        "sum_init": train_sum_init,
        "cv_single": train_cv_single,
    }[cfg.method](segments, cfg)


def predict(model: CcaModel, segments: SegmentSet, cfg: TrainConfig):
    """Classify raw (un-embedded) segments with a trained model."""
    labels, _ = classify_all(model, segments.embed(cfg.eeg_lags, cfg.audio_lags))
    return labels
