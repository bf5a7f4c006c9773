"""Dense symmetric linear algebra for matrices up to 6x6.

Eigenvalues are computed by a cyclic Jacobi sweep (numba-jitted): the
dimensions here are tiny and Jacobi is unconditionally stable, which
matters because LMI certificates routinely mix multipliers spanning ten
orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NonFinite, SingularPivot

# Off-diagonal norm target relative to ||M||_F.
_JACOBI_TOL = 1e-14
# NSD threshold relative to the caller-supplied data scale.
NSD_TOL = 1e-9


@njit(cache=True)
def _jacobi_kernel(a, v, tol):
    n = a.shape[0]
    for sweep in range(64):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        if off <= tol * tol:
            return
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq


def eig_sym(a: np.ndarray):
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi.

    Returns (ascending eigenvalues, orthogonal eigenvector columns).
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has non-finite entries")
    n = a.shape[0]
    work = 0.5 * (a + a.T)
    normf = np.linalg.norm(work)
    v = np.eye(n)
    _jacobi_kernel(work, v, _JACOBI_TOL * max(normf, 1e-300))
    vals = np.diag(work).copy()
    order = np.argsort(vals)
    return vals[order], v[:, order]


def max_eig(a: np.ndarray) -> float:
    """Largest eigenvalue; fast path used by the oracle's feasibility tests."""
    return eig_sym(a)[0][-1]


@dataclass(frozen=True)
class SymMat:
    """A symmetric matrix of dimension 1..6, symmetrized on construction."""

    entries: np.ndarray

    def __init__(self, entries):
        a = np.asarray(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or not 1 <= a.shape[0] <= 6:
            raise ValueError(f"expected square matrix of dim 1..6, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFinite("matrix has non-finite entries")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None):
        return np.asarray(self.entries, dtype=dtype)


def _as_array(M) -> np.ndarray:
    return M.entries if isinstance(M, SymMat) else np.asarray(M, dtype=float)


def eigvals(M) -> np.ndarray:
    """Sorted real spectrum (ascending)."""
    return eig_sym(_as_array(M))[0]


def is_nsd(M, scale: float = 1.0) -> bool:
    """Negative-semidefiniteness within a tolerance relative to ``scale``.

    ``scale`` should be the magnitude (Frobenius norm) of the underlying
    LMI data so that certificates with huge multipliers are judged fairly.
    """
    if scale <= 0:
        raise ValueError("scale must be > 0")
    return max_eig(_as_array(M)) <= NSD_TOL * max(1.0, scale)


def schur_reduce(M, block):
    """Schur complement of the pivot block ``block`` in a symmetric matrix.

    Returns ``(A - B D^{-1} B^T, pivot_negdef)`` for the partition
    ``[[A, B], [B^T, D]]`` with D indexed by ``block``.  The flag states
    whether D is negative definite, which is what makes the reduction
    NSD-equivalent.
    """
    a = _as_array(M)
    n = a.shape[0]
    block = sorted(set(int(i) for i in block))
    keep = [i for i in range(n) if i not in block]
    if not block or not keep:
        raise ValueError("pivot block must be a proper nonempty index subset")
    D = a[np.ix_(block, block)]
    A = a[np.ix_(keep, keep)]
    B = a[np.ix_(keep, block)]
    det = np.linalg.det(D)
    if abs(det) <= 1e-14 * max(1.0, np.linalg.norm(D)) ** len(block):
        raise SingularPivot("pivot block is numerically singular")
    reduced = SymMat(A - B @ np.linalg.solve(D, B.T))
    negdef = bool(eigvals(D)[-1] < 0.0)
    return reduced, negdef
