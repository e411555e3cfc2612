"""Command-line entry point: ``aadcca {synth,train,experiment,summarize}``.

Configuration files are flat ``key = value`` text with ``#`` comments. Any
key may also be given as ``--key value`` (dashes or underscores), which wins
over the file. Exit status: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import AadError, InvalidConfig
from .experiment import (
    ExperimentPlan,
    emit_csv,
    emit_summary_csv,
    read_csv,
    run_experiment,
    summarize,
    write_summary,
)
from .signals import AUDIO_LAGS, EEG_LAGS, LagSpec
from .synth import SynthConfig, generate, load_dataset, save_dataset
from .trainers import METHODS, TrainConfig, predict, train

log = logging.getLogger("aadcca")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines; returns a dict of raw strings."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{n}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise UsageError(f"{source}:{n}: empty key")
        out[key.replace("-", "_")] = value
    return out


def _parse_bool(v):
    s = str(v).strip().lower()
    if s in {"1", "true", "yes", "on"}:
        return True
    if s in {"0", "false", "no", "off"}:
        return False
    raise UsageError(f"not a boolean: {v!r}")


def _parse_list(v, conv):
    return tuple(conv(p) for p in str(v).replace(",", " ").split())


def _parse_lags(v):
    try:
        lo, hi = (int(p) for p in str(v).split(":"))
    except ValueError as exc:
        raise UsageError(f"lags must be 'min:max' in samples, got {v!r}") from exc
    return LagSpec(lo, hi)


_SYNTH_KEYS = {
    "n_segments": int,
    "segment_len_samples": int,
    "d_eeg": int,
    "d_audio": int,
    "snr_attended": float,
    "snr_unattended": float,
    "forward_lags": int,
    "sample_rate_hz": float,
}
_TRAIN_KEYS = {
    "q": int,
    "ridge": float,
    "max_iters": int,
    "eeg_lags": _parse_lags,
    "audio_lags": _parse_lags,
}
_PLAN_KEYS = {
    "methods": lambda v: _parse_list(v, str),
    "training_sizes": lambda v: _parse_list(v, int),
    "n_folds": int,
    "seeds": lambda v: _parse_list(v, int),
    "data_dir": str,
    "workers": int,
    "parallel": _parse_bool,
}
_ALL_KEYS = {**_SYNTH_KEYS, **_TRAIN_KEYS, **_PLAN_KEYS, "seed": int, "method": str, "output": str}


def _collect(args, extra):
    """Merge the config file (if any) with ``--key value`` overrides."""
    values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            values.update(parse_config_text(path.read_text(), str(path)))
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            try:
                val = next(it)
            except StopIteration:
                raise UsageError(f"option --{key} needs a value") from None
        values[key] = val
    unknown = set(values) - set(_ALL_KEYS)
    if unknown:
        raise UsageError(f"unknown keys: {', '.join(sorted(unknown))}")
    parsed = {}
    for key, raw in values.items():
        try:
            parsed[key] = _ALL_KEYS[key](raw)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad value for {key}: {raw!r}") from exc
    return parsed


def _pick(values, keys):
    return {k: values[k] for k in keys if k in values}


def _synth_config(values, **defaults):
    kw = {**defaults, **_pick(values, _SYNTH_KEYS)}
    if "seed" in values:
        kw["seed"] = values["seed"]
    return SynthConfig(**kw)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args, values):
    out = values.get("output") or args.out
    if not out:
        raise UsageError("synth needs --out DIR")
    ds = generate(_synth_config(values))
    save_dataset(ds, out)
    print(f"wrote {len(ds.segments)} segments to {out}")
    return EXIT_OK


def cmd_train(args, values):
    ds = load_dataset(args.data, values.get("segment_len_samples"))
    method = values.get("method", args.method)
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}")
    cfg = TrainConfig(method=method, seed=values.get("seed", 0), **_pick(values, _TRAIN_KEYS))
    k = len(ds.segments)
    n_train = args.n_train if args.n_train is not None else k
    if not 1 <= n_train <= k:
        raise UsageError(f"--n-train must lie in [1, {k}]")
    tr, te = np.arange(n_train), np.arange(n_train, k)
    res = train(ds.segments.subset(tr), cfg, truth=ds.truth[tr])
    trans = float(np.mean(res.final_labels == ds.truth[tr]))
    print(f"method={method} segments={n_train} iterations={res.iterations_run} converged={str(res.converged).lower()}")
    print(f"transductive_accuracy={trans:.6g}")
    if len(te):
        ind = float(np.mean(predict(res.model, ds.segments.subset(te), cfg) == ds.truth[te]))
        print(f"inductive_accuracy={ind:.6g}")
    print(f"cpu_time_seconds={res.wall_time_seconds:.6g}")
    return EXIT_OK


def cmd_experiment(args, values):
    output = values.get("output") or args.output
    if not output:
        raise UsageError("experiment needs --output FILE")
    plan_kw = _pick(values, _PLAN_KEYS)
    plan_kw.update(_pick(values, _TRAIN_KEYS))
    if args.no_parallel:
        plan_kw["parallel"] = False
    if "segment_len_samples" in values and "data_dir" in values:
        plan_kw["segment_len_samples"] = values["segment_len_samples"]
    plan_kw["synth"] = _synth_config(values, n_segments=68)
    try:
        plan = ExperimentPlan(**plan_kw)
    except ValueError as exc:
        if isinstance(exc, AadError):
            raise
        raise UsageError(str(exc)) from exc
    report = run_experiment(plan)
    emit_csv(report, output)
    print(f"wrote {len(report.rows)} rows to {output}")
    return EXIT_OK


def cmd_summarize(args, values):
    try:
        report = read_csv(args.input)
    except ValueError as exc:
        raise InvalidConfig(str(exc)) from exc
    summary = summarize(report)
    out = values.get("output") or args.output
    if out:
        emit_summary_csv(summary, out)
    else:
        write_summary(summary, sys.stdout)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="aadcca", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a synthetic dataset")
    s.add_argument("--out")
    s.add_argument("--config")

    t = sub.add_parser("train", help="train one method on a dataset directory")
    t.add_argument("--data", required=True)
    t.add_argument("--method", default="single")
    t.add_argument("--n-train", type=int, dest="n_train")
    t.add_argument("--config")

    e = sub.add_parser("experiment", help="run a benchmark plan and write CSV")
    e.add_argument("--config")
    e.add_argument("--output")
    e.add_argument("--no-parallel", action="store_true", dest="no_parallel")

    m = sub.add_parser("summarize", help="mean/std per method and training size")
    m.add_argument("input")
    m.add_argument("--output")
    return p


_COMMANDS = {"synth": cmd_synth, "train": cmd_train, "experiment": cmd_experiment, "summarize": cmd_summarize}


def main(argv=None):
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        values = _collect(args, extra)
        return _COMMANDS[args.command](args, values)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AadError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
