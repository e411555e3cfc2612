"""Cross-validated benchmark of the trainers: accuracy and normalized CPU time.

A *cell* is one (seed, fold, training size) combination. Within a cell every
method sees the same training and test segments, and its CPU time is divided
by the single-encoder time measured in that cell. Each seed generates its
own synthetic recording (the stand-in for a subject) unless external data is
given.
"""

from __future__ import annotations

import csv
import functools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import PlanInfeasible
from .signals import AUDIO_LAGS, EEG_LAGS, LagSpec
from .synth import SynthConfig, SynthDataset, generate, load_dataset
from .trainers import METHODS, TrainConfig, predict, train

CSV_HEADER = (
    "method",
    "training_size",
    "fold",
    "seed",
    "transductive_accuracy",
    "inductive_accuracy",
    "wall_time_seconds",
    "normalized_cpu_time",
    "iterations_run",
    "converged",
)
TIMING_COLUMNS = ("wall_time_seconds", "normalized_cpu_time")
BASELINE = "single"


@dataclass(frozen=True)
class ExperimentPlan:
    methods: tuple = METHODS
    training_sizes: tuple = (5, 10, 15)
    n_folds: int = 3
    seeds: tuple = (0,)
    synth: SynthConfig = field(default_factory=lambda: SynthConfig(n_segments=30))
    data_dir: str | None = None
    segment_len_samples: int | None = None
    q: int = 2
    ridge: float = 1e-6
    max_iters: int = 20
    eeg_lags: LagSpec = EEG_LAGS
    audio_lags: LagSpec = AUDIO_LAGS
    parallel: bool = True
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "training_sizes", tuple(int(n) for n in self.training_sizes))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if not self.methods or not self.training_sizes or not self.seeds:
            raise ValueError("methods, training_sizes and seeds must be non-empty")
        if self.n_folds < 2:
            raise ValueError("n_folds must be >= 2")

    def train_config(self, method, seed):
        return TrainConfig(
            method=method,
            q=self.q,
            ridge=self.ridge,
            max_iters=self.max_iters,
            seed=seed,
            eeg_lags=self.eeg_lags,
            audio_lags=self.audio_lags,
        )


@dataclass(frozen=True)
class ReportRow:
    method: str
    training_size: int
    fold: int
    seed: int
    transductive_accuracy: float  # nan for the supervised reference
    inductive_accuracy: float
    wall_time_seconds: float
    normalized_cpu_time: float
    iterations_run: int
    converged: bool
    train_indices: tuple = ()

    def sort_key(self):
        rank = METHODS.index(self.method) if self.method in METHODS else len(METHODS)
        return (rank, self.method, self.training_size, self.fold, self.seed)


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)

    def sorted_rows(self):
        return sorted(self.rows, key=ReportRow.sort_key)


# ---------------------------------------------------------------------------
# splitting


def fold_splits(n_segments, n_folds, seed):
    """Random partition of segment indices into ``n_folds`` test folds (sorted)."""
    perm = np.random.default_rng([seed, 101]).permutation(n_segments)
    return [np.sort(f) for f in np.array_split(perm, n_folds)]


def subsample_block(pool, size, seed, fold):
    """Contiguous run of ``size`` indices from the sorted ``pool``, at a seeded offset."""
    pool = np.sort(np.asarray(pool))
    if size > len(pool):
        raise PlanInfeasible(f"training size {size} exceeds the {len(pool)} segments available")
    start = np.random.default_rng([seed, 202, fold, size]).integers(0, len(pool) - size + 1)
    return pool[start : start + size]


def _dataset(plan: ExperimentPlan, seed) -> SynthDataset:
    if plan.data_dir is not None:
        return _load_cached(plan.data_dir, plan.segment_len_samples)
    return _generate_cached(plan.synth.replace(seed=seed))


@functools.lru_cache(maxsize=4)
def _generate_cached(cfg):
    return generate(cfg)


@functools.lru_cache(maxsize=2)
def _load_cached(path, seg_len):
    return load_dataset(path, seg_len)


def check_feasible(plan: ExperimentPlan, n_segments: int):
    smallest_pool = n_segments - math.ceil(n_segments / plan.n_folds)
    too_big = [n for n in plan.training_sizes if n > smallest_pool]
    if too_big:
        raise PlanInfeasible(
            f"training sizes {too_big} exceed the {smallest_pool} segments available per fold"
        )


# ---------------------------------------------------------------------------
# running


def _accuracy(pred, truth):
    return float(np.mean(np.asarray(pred) == np.asarray(truth)))


def run_cell(plan: ExperimentPlan, seed: int, fold: int, size: int):
    """Run every method (plus the baseline, for normalization) on one cell."""
    _kernels.warmup()
    ds = _dataset(plan, seed)
    folds = fold_splits(len(ds.segments), plan.n_folds, seed)
    test_idx = folds[fold]
    pool = np.setdiff1d(np.arange(len(ds.segments)), test_idx)
    train_idx = subsample_block(pool, size, seed, fold)
    train_set = ds.segments.subset(train_idx)
    test_set = ds.segments.subset(test_idx)
    truth_train = ds.truth[train_idx]
    truth_test = ds.truth[test_idx]

    methods = list(plan.methods)
    if BASELINE not in methods:
        methods.insert(0, BASELINE)
    results = {}
    for method in methods:
        cfg = plan.train_config(method, seed)
        res = train(train_set, cfg, truth=truth_train)
        ind = _accuracy(predict(res.model, test_set, cfg), truth_test)
        trans = float("nan") if method == "supervised" else _accuracy(res.final_labels, truth_train)
        results[method] = (res, trans, ind)

    base_time = max(results[BASELINE][0].wall_time_seconds, 1e-9)
    rows = []
    for method in plan.methods:
        res, trans, ind = results[method]
        norm = 1.0 if method == BASELINE else max(res.wall_time_seconds, 1e-9) / base_time
        rows.append(
            ReportRow(
                method=method,
                training_size=size,
                fold=fold,
                seed=seed,
                transductive_accuracy=trans,
                inductive_accuracy=ind,
                wall_time_seconds=res.wall_time_seconds,
                normalized_cpu_time=norm,
                iterations_run=res.iterations_run,
                converged=bool(res.converged),
                train_indices=tuple(int(i) for i in train_idx),
            )
        )
    return rows


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    """Run all cells; with ``plan.parallel`` cells are spread over worker processes."""
    for seed in plan.seeds:
        check_feasible(plan, len(_dataset(plan, seed).segments))
        if plan.data_dir is not None:
            break
    cells = [(plan, seed, fold, size) for seed in plan.seeds for fold in range(plan.n_folds) for size in plan.training_sizes]
    workers = plan.workers or os.cpu_count() or 1
    rows = []
    if plan.parallel and workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_cell_args, cells):
                rows.extend(part)
    else:
        for cell in cells:
            rows.extend(run_cell(*cell))
    return ExperimentReport(rows)


# ---------------------------------------------------------------------------
# CSV


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{float(v):.6g}"


def emit_csv(report: ExperimentReport, path) -> None:
    """Header plus one row per cell and method, sorted by (method, size, fold, seed)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in report.sorted_rows():
            w.writerow([_fmt(getattr(row, name)) for name in CSV_HEADER])


def read_csv(path) -> ExperimentReport:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for rec in reader:
            rows.append(
                ReportRow(
                    method=rec["method"],
                    training_size=int(rec["training_size"]),
                    fold=int(rec["fold"]),
                    seed=int(rec["seed"]),
                    transductive_accuracy=float(rec["transductive_accuracy"] or "nan"),
                    inductive_accuracy=float(rec["inductive_accuracy"] or "nan"),
                    wall_time_seconds=float(rec["wall_time_seconds"]),
                    normalized_cpu_time=float(rec["normalized_cpu_time"]),
                    iterations_run=int(rec["iterations_run"]),
                    converged=rec["converged"] == "true",
                )
            )
    return ExperimentReport(rows)


SUMMARY_HEADER = (
    "method",
    "training_size",
    "n",
    "transductive_mean",
    "transductive_std",
    "inductive_mean",
    "inductive_std",
    "normalized_cpu_time_mean",
    "normalized_cpu_time_std",
)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    training_size: int
    n: int
    transductive_mean: float
    transductive_std: float
    inductive_mean: float
    inductive_std: float
    normalized_cpu_time_mean: float
    normalized_cpu_time_std: float


def _mean_std(values):
    v = np.asarray([x for x in values if not math.isnan(x)], dtype=np.float64)
    if v.size == 0:
        return float("nan"), float("nan")
    return float(v.mean()), float(v.std())


def summarize(report: ExperimentReport):
    """Mean and population std per (method, training size) over folds x seeds."""
    groups = {}
    for row in report.sorted_rows():
        groups.setdefault((row.method, row.training_size), []).append(row)
    out = []
    for (method, size), rows in groups.items():
        tm, ts = _mean_std([r.transductive_accuracy for r in rows])
        im, is_ = _mean_std([r.inductive_accuracy for r in rows])
        nm, ns = _mean_std([r.normalized_cpu_time for r in rows])
        out.append(SummaryRow(method, size, len(rows), tm, ts, im, is_, nm, ns))
    return out


def write_summary(summary, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for row in summary:
        w.writerow([_fmt(getattr(row, name)) for name in SUMMARY_HEADER])


def emit_summary_csv(summary, path) -> None:
    with open(path, "w", newline="") as fh:
        write_summary(summary, fh)
