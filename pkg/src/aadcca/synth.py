"""Synthetic two-speaker recordings with planted attention labels.

Each speaker stream is band-limited Gaussian noise (1-8 Hz at 20 Hz). The
EEG is a random spatio-temporal FIR response to each stream plus white noise;
the attended stream's response is scaled to ``snr_attended`` and the other
one to ``snr_unattended`` (per-channel power ratios against unit-variance
noise). Both streams go through the same FIR kernel, so equal SNRs make the
two speakers statistically indistinguishable.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import InvalidConfig
from .signals import (
    SegmentSet,
    TimeSeries,
    check_labels,
    concat,
    cut_segments,
    read_matrix,
    read_truth,
    write_matrix,
    write_truth,
)


@dataclass(frozen=True)
class SynthConfig:
    n_segments: int = 30
    segment_len_samples: int = 1200  # 60 s at 20 Hz
    d_eeg: int = 16
    d_audio: int = 1
    snr_attended: float = 0.0012
    snr_unattended: float = 0.0003
    forward_lags: int = 4
    seed: int = 0
    sample_rate_hz: float = 20.0

    def __post_init__(self):
        ints = ("n_segments", "segment_len_samples", "d_eeg", "d_audio", "forward_lags")
        for name in ints:
            if int(getattr(self, name)) < 1:
                raise InvalidConfig(f"{name} must be >= 1")
        if self.seed < 0:
            raise InvalidConfig("seed must be nonnegative")
        if not self.sample_rate_hz > 0:
            raise InvalidConfig("sample_rate_hz must be positive")
        if self.snr_unattended < 0 or self.snr_attended < self.snr_unattended:
            raise InvalidConfig("need snr_attended >= snr_unattended >= 0")
        if self.segment_len_samples <= self.forward_lags:
            raise InvalidConfig("segments must be longer than the forward model")

    def replace(self, **changes):
        vals = asdict(self)
        vals.update(changes)
        return SynthConfig(**vals)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class SynthDataset:
    segments: SegmentSet
    truth: np.ndarray
    config: SynthConfig | None = None


def _band_limited(rng, n, d, fs):
    sos = sps.butter(2, [1.0, min(8.0, 0.45 * fs)], btype="bandpass", fs=fs, output="sos")
    burn = int(5 * fs)
    raw = rng.standard_normal((n + burn, d))
    out = sps.sosfilt(sos, raw, axis=0)[burn:]
    return (out - out.mean(axis=0)) / out.std(axis=0)


def _fir_response(s, h):
    # s: N x Ds, h: L x Ds x Dx  ->  N x Dx, causal
    n = s.shape[0]
    out = np.zeros((n, h.shape[2]))
    for tau in range(h.shape[0]):
        out[tau:] += s[: n - tau] @ h[tau]
    return out


def generate(cfg: SynthConfig) -> SynthDataset:
    """Deterministic given ``cfg.seed``."""
    rng = np.random.default_rng([cfg.seed, 0])
    k, t = cfg.n_segments, cfg.segment_len_samples
    n = k * t
    fs = cfg.sample_rate_hz
    truth = rng.integers(1, 3, size=k)
    s1 = _band_limited(rng, n, cfg.d_audio, fs)
    s2 = _band_limited(rng, n, cfg.d_audio, fs)
    h = rng.standard_normal((cfg.forward_lags, cfg.d_audio, cfg.d_eeg))
    resp1 = _fir_response(s1, h)
    resp2 = _fir_response(s2, h)
    unit = 1.0 / np.sqrt(np.mean(np.concatenate([resp1, resp2]).var(axis=0)))
    g_a = unit * np.sqrt(cfg.snr_attended)
    g_u = unit * np.sqrt(cfg.snr_unattended)
    att1 = np.repeat(truth == 1, t)[:, None]
    eeg = np.where(att1, g_a * resp1 + g_u * resp2, g_u * resp1 + g_a * resp2)
    eeg = eeg + rng.standard_normal((n, cfg.d_eeg))
    segs = cut_segments(TimeSeries(eeg, fs), TimeSeries(s1, fs), TimeSeries(s2, fs), t)
    return SynthDataset(segs, truth.astype(np.int64), cfg)


# ---------------------------------------------------------------------------
# on-disk datasets: eeg.aadm, spk1.aadm, spk2.aadm (continuous) + truth.txt

DATASET_FILES = ("eeg.aadm", "spk1.aadm", "spk2.aadm")
TRUTH_FILE = "truth.txt"


def save_dataset(ds: SynthDataset, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, parts in zip(DATASET_FILES, (ds.segments.eeg, ds.segments.spk1, ds.segments.spk2)):
        write_matrix(concat(parts), directory / name)
    write_truth(ds.truth, directory / TRUTH_FILE)
    return directory


def load_dataset(directory, segment_len_samples=None) -> SynthDataset:
    """Load matrix files plus truth sidecar and cut them into segments.

    Without ``segment_len_samples`` the length is inferred as ``T // K`` from
    the number of truth lines.
    """
    directory = Path(directory)
    eeg, s1, s2 = (read_matrix(directory / name) for name in DATASET_FILES)
    truth = read_truth(directory / TRUTH_FILE)
    if len(truth) == 0:
        raise InvalidConfig(f"{directory / TRUTH_FILE}: no segments listed")
    if segment_len_samples is None:
        segment_len_samples = eeg.n_samples // len(truth)
    segs = cut_segments(eeg, s1, s2, segment_len_samples)
    if len(segs) != len(truth):
        raise InvalidConfig(f"{len(segs)} segments but {len(truth)} truth labels")
    return SynthDataset(segs, check_labels(truth), None)
