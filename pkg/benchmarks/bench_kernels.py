"""Compare the numba and numpy kernel backends.

Each backend runs in its own interpreter (the backend is fixed at import
time), timing the individual kernels and one full training per method.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, timeit
import numpy as np
from aadcca import _kernels as K
from aadcca.synth import SynthConfig, generate
from aadcca.trainers import TrainConfig, train

repeat = int(sys.argv[1])
K.warmup()
rng = np.random.default_rng(0)
x = rng.standard_normal((1200, 16))
delays = np.arange(-3, 1, dtype=np.int64)
px, ps = rng.standard_normal((1200, 2)), rng.standard_normal((1200, 2))
r1, r2 = rng.normal(0.3, 0.08, 200), rng.normal(0.05, 0.08, 200)

def best(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number

out = {"backend": K.BACKEND}
out["lag_embed"] = best(lambda: K.lag_embed(x, delays), 200)
out["pearson_sum"] = best(lambda: K.pearson_sum(px, ps), 2000)
out["pair_posteriors"] = best(lambda: K.pair_posteriors(r1, r2, 0.3, 0.0064, 0.05, 0.0064), 2000)
out["pair_em"] = best(lambda: K.pair_em(r1, r2, 0.3, 0.0064, 0.05, 0.0064, 100, 1e-6, 1e-8), 50)
ds = generate(SynthConfig(n_segments=15, seed=0))
for m in ("single", "soft", "cv_single"):
    cfg = TrainConfig(method=m)
    out["train_" + m] = best(lambda: train(ds.segments, cfg, truth=ds.truth), 1)
print(json.dumps(out))
"""


def run(disable, repeat):
    env = dict(os.environ, AADCCA_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'kernel':<18}{fast['backend'] + ' (s)':>14}{slow['backend'] + ' (s)':>14}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<18}{fast[key]:>14.3e}{slow[key]:>14.3e}{slow[key] / fast[key]:>10.2f}")


if __name__ == "__main__":
    main()
