"""Small-dimension symmetric linear algebra.

Everything here targets the d-by-d matrices of the estimator (d is the
predictor count, typically 5-10), not large systems.  Symmetric matrices are
stored as the packed upper triangle so that symmetry of results is exact by
construction, never a rounding accident: ``SymMatrix.full()`` mirrors the
stored triangle.

The eigensolver is a cyclic Jacobi sweep.  It runs on plain Python floats:
for these tiny matrices that is several times faster than going through
numpy scalar indexing, and the eigensolve sits on the hot path of the
streaming estimator (once per absorbed observation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InsufficientDataError, SingularCovarianceError

_TRIU = {}


def triu_indices(d):
    """Cached row-major upper-triangle index pair for dimension d."""
    if d not in _TRIU:
        _TRIU[d] = np.triu_indices(d)
    return _TRIU[d]


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Symmetric d-by-d matrix stored as its packed upper triangle.

    ``packed`` holds the row-major upper triangle (length d*(d+1)//2).
    Construction from a full array keeps the upper triangle as given; it
    does not average the two triangles.
    """

    d: int
    packed: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.packed, dtype=float)
        if p.shape != (self.d * (self.d + 1) // 2,):
            raise ValueError(f"packed length {p.shape} does not match d={self.d}")
        p.flags.writeable = False
        object.__setattr__(self, "packed", p)

    @classmethod
    def from_full(cls, a):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"need a square matrix, got shape {a.shape}")
        d = a.shape[0]
        return cls(d, a[triu_indices(d)])

    @classmethod
    def identity(cls, d):
        return cls.from_full(np.eye(d))

    def full(self):
        out = np.zeros((self.d, self.d))
        iu = triu_indices(self.d)
        out[iu] = self.packed
        out.T[iu] = self.packed
        return out


def _as_full(m):
    if isinstance(m, SymMatrix):
        return m.full()
    return SymMatrix.from_full(m).full()


def sym_eigen(m, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (values, vectors): values sorted descending (stable order),
    vectors orthonormal with vectors[:, i] belonging to values[i].
    Converged when the off-diagonal Frobenius norm falls below
    1e-12 times the Frobenius norm of the input; raises ConvergenceError
    after ``max_sweeps`` full sweeps.
    """
    a0 = _as_full(m)
    d = a0.shape[0]
    if d < 1:
        raise ValueError("empty matrix")
    if not np.isfinite(a0).all():
        raise ValueError("matrix has non-finite entries")
    norm = math.sqrt(float((a0 * a0).sum()))
    if norm == 0.0 or d == 1:
        return np.diag(a0).copy(), np.eye(d)

    thresh = 1e-12 * norm
    a = [[float(a0[i, j]) for j in range(d)] for i in range(d)]
    v = [[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)]
    for _ in range(max_sweeps):
        off2 = 0.0
        for p in range(d - 1):
            row = a[p]
            for q in range(p + 1, d):
                off2 += row[q] * row[q]
        if math.sqrt(2.0 * off2) <= thresh:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.hypot(theta, 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                a[p][p] -= t * apq
                a[q][q] += t * apq
                a[p][q] = a[q][p] = 0.0
                for r in range(d):
                    if r != p and r != q:
                        arp = a[r][p]
                        arq = a[r][q]
                        a[r][p] = a[p][r] = c * arp - s * arq
                        a[r][q] = a[q][r] = s * arp + c * arq
                for r in range(d):
                    vrp = v[r][p]
                    vrq = v[r][q]
                    v[r][p] = c * vrp - s * vrq
                    v[r][q] = s * vrp + c * vrq
    else:
        raise ConvergenceError(f"Jacobi sweep did not converge in {max_sweeps} sweeps")

    vals = np.array([a[i][i] for i in range(d)])
    vecs = np.array(v)
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def inv_sqrt(m, floor_ratio=1e-10):
    """Inverse symmetric square root, via the Jacobi eigendecomposition.

    Raises SingularCovarianceError if any eigenvalue is at or below
    ``floor_ratio`` times the largest one (or the largest is nonpositive).
    """
    vals, vecs = sym_eigen(m)
    floor = floor_ratio * max(vals[0], 0.0)
    bad = np.nonzero(vals <= floor)[0]
    if vals[0] <= 0.0 or bad.size:
        idx = 0 if vals[0] <= 0.0 else int(bad[0])
        raise SingularCovarianceError(
            f"eigenvalue {vals[idx]:.3e} at position {idx} below floor "
            f"{floor:.3e}; matrix too close to singular",
            index=idx,
            value=float(vals[idx]),
        )
    return SymMatrix.from_full((vecs * vals**-0.5) @ vecs.T)


def sample_covariance(rows):
    """Two-pass sample mean and covariance (1/(n-1) normalization).

    Returns (mean, SymMatrix).  Needs at least d + 1 rows.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError(f"need a 2-D array of rows, got shape {rows.shape}")
    if not np.isfinite(rows).all():
        raise ValueError("rows contain non-finite entries")
    n, d = rows.shape
    if n < d + 1:
        raise InsufficientDataError(f"need at least d+1={d + 1} rows, got {n}")
    mean = rows.mean(axis=0)
    centered = rows - mean
    cov = centered.T @ centered / (n - 1)
    return mean, SymMatrix.from_full(cov)
