"""Symmetric-definite generalized eigenproblems ``R W = D W Lambda``.

All CCA variants in this package reduce to such a pencil. It is solved by
Cholesky whitening of ``D`` followed by a symmetric eigendecomposition, which
keeps the spectrum real and the eigenvectors D-orthonormal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import DimensionMismatch, NotPositiveDefinite

DEFAULT_RIDGE = 1e-6


def as_symmetric(m, name="matrix"):
    """Return a float64 copy of ``m`` symmetrized as ``(m + m.T) / 2``.

    Raises if ``m`` is not square, not finite, or asymmetric beyond 1e-12 relative.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
    if np.max(np.abs(m - m.T)) > 1e-12 * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (m + m.T)


def apply_ridge(m, epsilon):
    """Trace-scaled diagonal loading: ``m + epsilon * trace(m) / dim * I``."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    m = np.array(m, dtype=np.float64)
    if epsilon == 0:
        return m
    n = m.shape[0]
    m[np.diag_indices(n)] += epsilon * np.trace(m) / n
    return m


@dataclass(frozen=True)
class PencilPair:
    """Matrices ``r`` and ``d`` of one GEVD problem.

    ``ridge`` only records the loading already applied to the diagonal blocks
    of ``d``; it is not applied again here.
    """

    r: np.ndarray
    d: np.ndarray
    ridge: float = 0.0

    def __post_init__(self):
        r = as_symmetric(self.r, "r")
        d = as_symmetric(self.d, "d")
        if r.shape != d.shape:
            raise DimensionMismatch(f"r is {r.shape} but d is {d.shape}")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "d", d)

    @property
    def dim(self):
        return self.r.shape[0]


@dataclass(frozen=True)
class PencilSolution:
    eigenvalues: np.ndarray  # descending, length q
    vectors: np.ndarray  # dim x q, D-orthonormal columns
    q: int


def _fix_signs(v):
    # largest-magnitude entry of each column made positive; argmax picks the first on ties
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def solve_pencil(pencil: PencilPair, q: int) -> PencilSolution:
    """Top-``q`` generalized eigenpairs of ``pencil``, eigenvalues descending.

    Raises
    ------
    DimensionMismatch
        If ``q`` is not in ``[1, dim]``.
    NotPositiveDefinite
        If the Cholesky factorization of ``d`` fails.
    """
    n = pencil.dim
    if not 1 <= q <= n:
        raise DimensionMismatch(f"q={q} must lie in [1, {n}]")
    try:
        chol = la.cholesky(pencil.d, lower=True, check_finite=False)
    except la.LinAlgError as exc:
        raise NotPositiveDefinite("d is not positive definite; increase the ridge") from exc
    # C = L^-1 R L^-T
    tmp = la.solve_triangular(chol, pencil.r, lower=True, check_finite=False)
    c = la.solve_triangular(chol, tmp.T, lower=True, check_finite=False)
    c = 0.5 * (c + c.T)
    evals, evecs = la.eigh(c, check_finite=False)
    order = np.argsort(-evals, kind="stable")[:q]
    vecs = la.solve_triangular(chol.T, evecs[:, order], lower=False, check_finite=False)
    return PencilSolution(eigenvalues=evals[order].copy(), vectors=_fix_signs(vecs), q=q)
