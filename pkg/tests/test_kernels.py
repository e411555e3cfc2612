import os
import subprocess
import sys

import numpy as np
import pytest

from aadcca import _kernels as K

pytestmark = pytest.mark.skipif(not K.HAS_NUMBA, reason="numba backend unavailable")


def test_lag_embed_parity(rng):
    x = rng.standard_normal((37, 3))
    delays = np.array([-3, -1, 0, 2, 5], dtype=np.int64)
    np.testing.assert_array_equal(K.lag_embed_numba(x, delays), K.lag_embed_numpy(x, delays))


def test_pearson_sum_parity(rng):
    px, ps = rng.standard_normal((200, 3)), rng.standard_normal((200, 3))
    ps[:, 2] = 1.0
    assert K.pearson_sum_numba(px, ps) == pytest.approx(K.pearson_sum_numpy(px, ps), rel=1e-12, abs=1e-14)


def test_posterior_parity(rng):
    r1, r2 = rng.uniform(-1, 1, 50), rng.uniform(-1, 1, 50)
    for a, b in zip(K.pair_posteriors_numba(r1, r2, 0.3, 0.01, 0.05, 0.02), K.pair_posteriors_numpy(r1, r2, 0.3, 0.01, 0.05, 0.02)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


def test_em_parity(rng):
    r1, r2 = rng.normal(0.3, 0.08, 200), rng.normal(0.05, 0.08, 200)
    args = (0.3, 0.01, 0.05, 0.01, 100, 1e-6, 1e-8)
    a = K.pair_em_numba(r1, r2, *args)
    b = K.pair_em_numpy(r1, r2, *args)
    np.testing.assert_allclose(a[:4], b[:4], rtol=1e-9)
    assert a[4] == b[4]


def test_env_flag_selects_numpy():
    env = dict(os.environ, AADCCA_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from aadcca import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
    assert K.BACKEND == "numba"
