"""Dense real matrix kernel.

Symmetric eigendecomposition (cyclic Jacobi), skew-symmetric matrix
exponential (scaling and squaring), half-vectorization and the trace inner
product.  Everything here is deterministic: identical inputs produce
bit-identical outputs, which downstream Monte Carlo code relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


def _as_array(m) -> np.ndarray:
    a = np.asarray(getattr(m, "a", m), dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Symmetric matrix; the constructor symmetrizes via (A + A^T)/2."""

    a: np.ndarray

    def __init__(self, entries):
        a = _as_array(entries)
        if not np.all(np.isfinite(a)):
            raise InvalidInput("matrix entries must be finite")
        object.__setattr__(self, "a", _frozen((a + a.T) / 2.0))

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class SkewMatrix:
    """Skew-symmetric matrix; antisymmetrized exactly, zero diagonal."""

    a: np.ndarray

    def __init__(self, entries):
        a = _as_array(entries)
        if not np.all(np.isfinite(a)):
            raise InvalidInput("matrix entries must be finite")
        s = (a - a.T) / 2.0
        np.fill_diagonal(s, 0.0)
        object.__setattr__(self, "a", _frozen(s))

    @property
    def dim(self) -> int:
        return self.a.shape[0]


ORTH_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OrthMatrix:
    """Orthogonal matrix, checked at construction: max |U^T U - I| <= 1e-10."""

    a: np.ndarray

    def __init__(self, entries):
        a = _as_array(entries)
        defect = np.max(np.abs(a.T @ a - np.eye(a.shape[0])))
        if not defect <= ORTH_TOL:
            raise InvalidInput(f"matrix is not orthogonal (defect {defect:.3e})")
        object.__setattr__(self, "a", _frozen(a))

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class EigDecomp:
    """Eigenvalues in non-increasing order with orthonormal eigenvectors."""

    values: np.ndarray
    vectors: OrthMatrix

    def __init__(self, values, vectors):
        values = _frozen(np.asarray(values, dtype=np.float64))
        if np.any(np.diff(values) > 0):
            raise InvalidInput("eigenvalues must be sorted non-increasing")
        if not isinstance(vectors, OrthMatrix):
            vectors = OrthMatrix(vectors)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "vectors", vectors)

    def reconstruct(self) -> np.ndarray:
        v = self.vectors.a
        return (v * self.values) @ v.T


@njit(cache=True)
def _jacobi_kernel(a: np.ndarray, v: np.ndarray) -> int:
    """Cyclic Jacobi sweeps on a (in place); accumulates rotations into v.

    Fixed sweep order (row-major over the upper triangle) so results are
    reproducible bit for bit.  No fastmath: the numba-compiled path performs
    the same IEEE operations as the interpreted fallback.
    """
    n = a.shape[0]
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j] * a[i, j]
    fro = np.sqrt(fro)
    if fro == 0.0:
        return 0
    tol = 1e-15 * fro
    max_sweeps = 60
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        if np.sqrt(2.0 * off) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = aip * c - aiq * s
                        a[p, i] = a[i, p]
                        a[i, q] = aiq * c + aip * s
                        a[q, i] = a[i, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = vip * c - viq * s
                    v[i, q] = viq * c + vip * s
    return max_sweeps


def sym_eig(a) -> EigDecomp:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Deterministic for fixed input: fixed sweep order, eigenvalues sorted
    non-increasing (stable sort), and each eigenvector's first coordinate
    with magnitude above 1e-12 is made positive.
    """
    if not isinstance(a, SymMatrix):
        a = SymMatrix(a)
    n = a.dim
    work = np.array(a.a, dtype=np.float64)
    vecs = np.eye(n, dtype=np.float64)
    _jacobi_kernel(work, vecs)
    vals = np.diag(work).copy()
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(n):
        col = vecs[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        lead = nz[0] if nz.size else 0
        if col[lead] < 0:
            vecs[:, k] = -col
    return EigDecomp(vals, OrthMatrix(vecs))


SQUARING_THRESHOLD = 0.5
EXP_TOL = 1e-14


def skew_exp(xi, t: float = 1.0) -> OrthMatrix:
    """exp(t*xi) for skew-symmetric xi, by scaling-and-squaring Taylor.

    Scaling halves the argument until its 1-norm is at most 0.5; the Taylor
    series is summed until the next term falls below 1e-14 relative to the
    partial sum.  The result is orthogonal with determinant +1.
    """
    if not isinstance(xi, SkewMatrix):
        xi = SkewMatrix(xi)
    a = t * xi.a
    n = a.shape[0]
    norm1 = float(np.max(np.abs(a).sum(axis=0))) if n else 0.0
    squarings = 0
    while norm1 > SQUARING_THRESHOLD:
        a = a / 2.0
        norm1 /= 2.0
        squarings += 1
    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, 60):
        term = term @ a / k
        result = result + term
        if np.max(np.abs(term)) <= EXP_TOL * max(1.0, np.max(np.abs(result))):
            break
    for _ in range(squarings):
        result = result @ result
    return OrthMatrix(result)


def vech(a) -> np.ndarray:
    """Half-vectorization: stacks the lower triangle column by column.

    Ordering: (a11, a21, ..., ap1, a22, a32, ..., ap2, ..., app).
    """
    m = _as_array(a)
    p = m.shape[0]
    return np.concatenate([m[j:, j] for j in range(p)])


def unvech(v) -> SymMatrix:
    v = np.asarray(v, dtype=np.float64)
    # p(p+1)/2 = len(v)
    p = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if p * (p + 1) // 2 != v.size:
        raise InvalidInput(f"length {v.size} is not a triangular number")
    out = np.zeros((p, p))
    pos = 0
    for j in range(p):
        out[j:, j] = v[pos : pos + p - j]
        out[j, j:] = v[pos : pos + p - j]
        pos += p - j
    return SymMatrix(out)


def vech_diag_mask(p: int) -> np.ndarray:
    """Boolean mask over vech positions that come from the matrix diagonal."""
    mask = np.zeros(p * (p + 1) // 2, dtype=bool)
    pos = 0
    for j in range(p):
        mask[pos] = True
        pos += p - j
    return mask


def hs_inner(a, b) -> float:
    """Trace inner product <a, b> = tr(a^T b)."""
    ma = _as_array(a)
    mb = _as_array(b)
    if ma.shape != mb.shape:
        raise InvalidInput(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return float(np.trace(ma.T @ mb))
