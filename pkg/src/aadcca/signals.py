"""Segmented multichannel time series: lag embedding, centering, file I/O."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, MalformedFile, SegmentTooShort

MAGIC = b"AADM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIId")


@dataclass(frozen=True)
class TimeSeries:
    """``samples`` is T x D (time along rows)."""

    samples: np.ndarray
    sample_rate_hz: float = 20.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise DimensionMismatch(f"samples must be T x D with T, D >= 1, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples contain non-finite values")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def n_channels(self):
        return self.samples.shape[1]


@dataclass(frozen=True)
class LagSpec:
    """Inclusive range of sample delays.

    A delay ``l`` places ``x[t - l]`` at row ``t``: positive delays look back in
    time, negative delays look ahead.
    """

    min_lag_samples: int
    max_lag_samples: int

    def __post_init__(self):
        if self.min_lag_samples > self.max_lag_samples:
            raise ValueError("min_lag_samples must not exceed max_lag_samples")

    @property
    def delays(self):
        return np.arange(self.min_lag_samples, self.max_lag_samples + 1, dtype=np.int64)

    @property
    def n_lags(self):
        return self.max_lag_samples - self.min_lag_samples + 1

    @classmethod
    def from_window_ms(cls, start_ms, stop_ms, sample_rate_hz):
        """Lags covering a response window given as offsets relative to the stimulus.

        An offset of +150 ms means the signal sample 150 ms *after* the reference
        instant, i.e. a delay of -3 samples at 20 Hz. So the EEG window
        ``(0, 150)`` gives delays -3..0 and the audio window ``(-250, 0)`` gives
        delays 0..5.
        """
        lo = math.ceil(round(start_ms * sample_rate_hz / 1000.0, 9))
        hi = math.floor(round(stop_ms * sample_rate_hz / 1000.0, 9))
        if lo > hi:
            raise ValueError("window contains no sample offsets")
        return cls(-hi, -lo)


# defaults at 20 Hz: EEG 0..150 ms after the stimulus, audio 250 ms of history
EEG_LAGS = LagSpec.from_window_ms(0, 150, 20.0)
AUDIO_LAGS = LagSpec.from_window_ms(-250, 0, 20.0)


def lag_embed(ts: TimeSeries, spec: LagSpec) -> TimeSeries:
    """Stack delayed copies of every channel; output is T x (D * n_lags).

    Column block ``i`` holds the input delayed by ``spec.min_lag_samples + i``,
    zero padded where the shifted index leaves the series.
    """
    span = spec.max_lag_samples - spec.min_lag_samples
    if ts.n_samples <= span:
        raise SegmentTooShort(f"T={ts.n_samples} too short for a lag span of {span}")
    if abs(spec.min_lag_samples) >= ts.n_samples or abs(spec.max_lag_samples) >= ts.n_samples:
        raise SegmentTooShort("lag exceeds segment length")
    out = _kernels.lag_embed(np.ascontiguousarray(ts.samples), spec.delays)
    return TimeSeries(out, ts.sample_rate_hz)


def center(ts: TimeSeries) -> TimeSeries:
    x = ts.samples
    return TimeSeries(x - x.mean(axis=0), ts.sample_rate_hz)


@dataclass(frozen=True)
class SegmentSet:
    """K aligned triples (EEG, speaker 1, speaker 2)."""

    eeg: tuple
    spk1: tuple
    spk2: tuple

    def __post_init__(self):
        eeg, s1, s2 = tuple(self.eeg), tuple(self.spk1), tuple(self.spk2)
        object.__setattr__(self, "eeg", eeg)
        object.__setattr__(self, "spk1", s1)
        object.__setattr__(self, "spk2", s2)
        if not (len(eeg) == len(s1) == len(s2)) or len(eeg) < 1:
            raise DimensionMismatch("eeg, spk1 and spk2 must hold the same number (>= 1) of segments")
        dx = eeg[0].n_channels
        ds = s1[0].n_channels
        for k, (x, a, b) in enumerate(zip(eeg, s1, s2)):
            if not (x.n_samples == a.n_samples == b.n_samples):
                raise DimensionMismatch(f"segment {k}: lengths differ")
            if x.n_channels != dx or a.n_channels != ds or b.n_channels != ds:
                raise DimensionMismatch(f"segment {k}: channel count differs from segment 0")

    def __len__(self):
        return len(self.eeg)

    @property
    def segment_len_samples(self):
        return self.eeg[0].n_samples

    @property
    def d_eeg(self):
        return self.eeg[0].n_channels

    @property
    def d_audio(self):
        return self.spk1[0].n_channels

    def subset(self, indices):
        idx = [int(i) for i in indices]
        return SegmentSet(
            [self.eeg[i] for i in idx], [self.spk1[i] for i in idx], [self.spk2[i] for i in idx]
        )

    def swapped(self):
        """Same set with the two speakers exchanged in every segment."""
        return SegmentSet(self.eeg, self.spk2, self.spk1)

    def embed(self, eeg_lags: LagSpec, audio_lags: LagSpec) -> "SegmentSet":
        """Lag-embed every segment independently (no centering)."""
        return SegmentSet(
            [lag_embed(x, eeg_lags) for x in self.eeg],
            [lag_embed(s, audio_lags) for s in self.spk1],
            [lag_embed(s, audio_lags) for s in self.spk2],
        )


def check_labels(labels, k=None):
    """Validate an attention assignment and return it as an int64 array of 1s and 2s."""
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise DimensionMismatch("labels must be one-dimensional")
    if k is not None and lab.shape[0] != k:
        raise DimensionMismatch(f"expected {k} labels, got {lab.shape[0]}")
    if not np.all((lab == 1) | (lab == 2)):
        raise ValueError("labels must be 1 or 2")
    return lab.astype(np.int64)


def cut_segments(eeg: TimeSeries, spk1: TimeSeries, spk2: TimeSeries, segment_len_samples: int) -> SegmentSet:
    """Non-overlapping consecutive segments; the trailing remainder is dropped."""
    t = eeg.n_samples
    if spk1.n_samples != t or spk2.n_samples != t:
        raise DimensionMismatch("eeg and speaker series must share T")
    if segment_len_samples < 1:
        raise ValueError("segment_len_samples must be positive")
    if t < segment_len_samples:
        raise SegmentTooShort(f"T={t} shorter than one segment ({segment_len_samples})")
    k = t // segment_len_samples
    parts = []
    for ts in (eeg, spk1, spk2):
        parts.append(
            [
                TimeSeries(ts.samples[i * segment_len_samples : (i + 1) * segment_len_samples], ts.sample_rate_hz)
                for i in range(k)
            ]
        )
    return SegmentSet(*parts)


def concat(segments):
    """Concatenate TimeSeries along time."""
    segments = list(segments)
    return TimeSeries(np.concatenate([s.samples for s in segments], axis=0), segments[0].sample_rate_hz)


# ---------------------------------------------------------------------------
# file formats


def write_matrix(ts: TimeSeries, path) -> None:
    """Write ``ts`` as little-endian AADM: header then row-major float64 payload."""
    rows, cols = ts.samples.shape
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, rows, cols, float(ts.sample_rate_hz))
    payload = np.ascontiguousarray(ts.samples, dtype="<f8").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_matrix(path) -> TimeSeries:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise MalformedFile(f"{path}: too short for a header")
    magic, version, rows, cols, rate = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedFile(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise MalformedFile(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise MalformedFile(f"{path}: expected {expected} bytes, found {len(data)}")
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(rows, cols).astype(np.float64)
    try:
        return TimeSeries(arr, rate)
    except ValueError as exc:
        raise MalformedFile(f"{path}: {exc}") from exc


def write_truth(labels, path) -> None:
    """Sidecar text file, one ``k,label`` line per segment (k from 0)."""
    lab = check_labels(labels)
    with open(path, "w") as fh:
        for k, j in enumerate(lab):
            fh.write(f"{k},{j}\n")


def read_truth(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for n, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                k, j = (int(v) for v in line.split(","))
            except ValueError as exc:
                raise MalformedFile(f"{path}:{n + 1}: expected 'k,label'") from exc
            rows.append((k, j))
    rows.sort()
    if [k for k, _ in rows] != list(range(len(rows))):
        raise MalformedFile(f"{path}: segment indices must be 0..K-1 without gaps")
    try:
        return check_labels([j for _, j in rows])
    except ValueError as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
