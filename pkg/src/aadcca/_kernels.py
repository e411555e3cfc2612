"""Inner loops with two interchangeable backends.

Every kernel exists as a numba ``@njit`` function and as a plain numpy
function with the same signature. The backend is chosen once at import time:
set ``AADCCA_DISABLE_NUMBA=1`` (or run without numba installed) to get the
numpy versions. ``BACKEND`` records which one is active.

Dense Gram products and eigensolves are left to BLAS/LAPACK in both cases;
only the loops numpy cannot express without temporaries live here.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLE = os.environ.get("AADCCA_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference versions


def lag_embed_numpy(x, delays):
    """Stack delayed copies of ``x`` column-block-wise, zero padded.

    Block ``i`` holds ``x[t - delays[i]]`` (negative delays look ahead).
    """
    t, d = x.shape
    out = np.zeros((t, d * delays.shape[0]), dtype=np.float64)
    for i in range(delays.shape[0]):
        s = int(delays[i])
        blk = out[:, i * d : (i + 1) * d]
        if s >= 0:
            blk[s:] = x[: t - s]
        else:
            blk[: t + s] = x[-s:]
    return out


def pearson_sum_numpy(px, ps):
    """Sum over columns of the Pearson correlation between ``px[:, q]`` and ``ps[:, q]``.

    Columns with zero variance contribute 0.
    """
    xc = px - px.mean(axis=0)
    sc = ps - ps.mean(axis=0)
    num = np.einsum("tq,tq->q", xc, sc)
    vx = np.einsum("tq,tq->q", xc, xc)
    vs = np.einsum("tq,tq->q", sc, sc)
    den = np.sqrt(vx) * np.sqrt(vs)
    ok = den > 0.0
    return float(np.sum(num[ok] / den[ok]))


def _log_odds_numpy(r1, r2, mu_a, var_a, mu_u, var_u):
    s = r1 + r2
    return (r1 - r2) * ((s - 2.0 * mu_u) / (2.0 * var_u) - (s - 2.0 * mu_a) / (2.0 * var_a))


def _split_probs_numpy(lo):
    # the smaller probability is evaluated directly, its complement by subtraction;
    # this makes swapping the pair map p1 -> p2 bit-exactly
    small = np.exp(-np.abs(lo)) / (1.0 + np.exp(-np.abs(lo)))
    p1 = np.where(lo >= 0.0, 1.0 - small, small)
    p2 = np.where(lo >= 0.0, small, 1.0 - small)
    return p1, p2


def pair_posteriors_numpy(r1, r2, mu_a, var_a, mu_u, var_u):
    lo = _log_odds_numpy(r1, r2, mu_a, var_a, mu_u, var_u)
    p1, p2 = _split_probs_numpy(lo)
    return lo, p1, p2


def pair_em_numpy(r1, r2, mu_a, var_a, mu_u, var_u, max_iter, tol, var_floor):
    n = r1.shape[0]
    it = 0
    for it in range(1, max_iter + 1):
        _, g, h = pair_posteriors_numpy(r1, r2, mu_a, var_a, mu_u, var_u)
        new_mu_a = np.sum(g * r1 + h * r2) / n
        new_mu_u = np.sum(g * r2 + h * r1) / n
        new_var_a = max(np.sum(g * (r1 - new_mu_a) ** 2 + h * (r2 - new_mu_a) ** 2) / n, var_floor)
        new_var_u = max(np.sum(g * (r2 - new_mu_u) ** 2 + h * (r1 - new_mu_u) ** 2) / n, var_floor)
        delta = max(
            abs(new_mu_a - mu_a), abs(new_mu_u - mu_u), abs(new_var_a - var_a), abs(new_var_u - var_u)
        )
        mu_a, var_a, mu_u, var_u = new_mu_a, new_var_a, new_mu_u, new_var_u
        if delta < tol:
            break
    return mu_a, var_a, mu_u, var_u, it


# ---------------------------------------------------------------------------
# numba versions

if HAS_NUMBA:

    @njit(cache=True)
    def lag_embed_numba(x, delays):
        t, d = x.shape
        nl = delays.shape[0]
        out = np.zeros((t, d * nl), dtype=np.float64)
        for i in range(nl):
            s = delays[i]
            for r in range(t):
                src = r - s
                if 0 <= src < t:
                    for c in range(d):
                        out[r, i * d + c] = x[src, c]
        return out

    @njit(cache=True)
    def pearson_sum_numba(px, ps):
        t, q = px.shape
        total = 0.0
        for j in range(q):
            mx = 0.0
            ms = 0.0
            for r in range(t):
                mx += px[r, j]
                ms += ps[r, j]
            mx /= t
            ms /= t
            sxy = 0.0
            sxx = 0.0
            syy = 0.0
            for r in range(t):
                a = px[r, j] - mx
                b = ps[r, j] - ms
                sxy += a * b
                sxx += a * a
                syy += b * b
            den = math.sqrt(sxx) * math.sqrt(syy)
            if den > 0.0:
                total += sxy / den
        return total

    @njit(cache=True)
    def pair_posteriors_numba(r1, r2, mu_a, var_a, mu_u, var_u):
        n = r1.shape[0]
        lo = np.empty(n)
        p1 = np.empty(n)
        p2 = np.empty(n)
        for k in range(n):
            s = r1[k] + r2[k]
            v = (r1[k] - r2[k]) * ((s - 2.0 * mu_u) / (2.0 * var_u) - (s - 2.0 * mu_a) / (2.0 * var_a))
            e = math.exp(-abs(v))
            small = e / (1.0 + e)
            lo[k] = v
            if v >= 0.0:
                p1[k] = 1.0 - small
                p2[k] = small
            else:
                p1[k] = small
                p2[k] = 1.0 - small
        return lo, p1, p2

    @njit(cache=True)
    def pair_em_numba(r1, r2, mu_a, var_a, mu_u, var_u, max_iter, tol, var_floor):
        n = r1.shape[0]
        it = 0
        for it in range(1, max_iter + 1):
            _, g, h = pair_posteriors_numba(r1, r2, mu_a, var_a, mu_u, var_u)
            sa = 0.0
            su = 0.0
            for k in range(n):
                sa += g[k] * r1[k] + h[k] * r2[k]
                su += g[k] * r2[k] + h[k] * r1[k]
            new_mu_a = sa / n
            new_mu_u = su / n
            va = 0.0
            vu = 0.0
            for k in range(n):
                va += g[k] * (r1[k] - new_mu_a) ** 2 + h[k] * (r2[k] - new_mu_a) ** 2
                vu += g[k] * (r2[k] - new_mu_u) ** 2 + h[k] * (r1[k] - new_mu_u) ** 2
            new_var_a = max(va / n, var_floor)
            new_var_u = max(vu / n, var_floor)
            delta = max(
                abs(new_mu_a - mu_a),
                abs(new_mu_u - mu_u),
                abs(new_var_a - var_a),
                abs(new_var_u - var_u),
            )
            mu_a = new_mu_a
            var_a = new_var_a
            mu_u = new_mu_u
            var_u = new_var_u
            if delta < tol:
                break
        return mu_a, var_a, mu_u, var_u, it

    BACKEND = "numba"
    lag_embed = lag_embed_numba
    pearson_sum = pearson_sum_numba
    pair_posteriors = pair_posteriors_numba
    pair_em = pair_em_numba
else:
    BACKEND = "numpy"
    lag_embed = lag_embed_numpy
    pearson_sum = pearson_sum_numpy
    pair_posteriors = pair_posteriors_numpy
    pair_em = pair_em_numpy


def warmup():
    """Trigger JIT compilation so later timings exclude it. No-op for numpy."""
    if BACKEND != "numba":
        return
    x = np.zeros((4, 1))
    lag_embed(x, np.array([0, 1], dtype=np.int64))
    pearson_sum(np.ones((4, 1)), np.ones((4, 1)))
    r = np.array([0.1, 0.2, 0.3, 0.4])
    pair_posteriors(r, r[::-1].copy(), 0.2, 0.01, 0.1, 0.01)
    pair_em(r, r[::-1].copy(), 0.2, 0.01, 0.1, 0.01, 2, 1e-6, 1e-8)
