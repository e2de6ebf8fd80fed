"""Projective chordal metric on lines and subspaces.

The distance between two lines is the sine of the angle between them
(the chordal metric on projective space).  Between subspaces, the
point-to-set infimum is the sine of the smallest principal angle and
the Hausdorff distance of equal-dimensional subspaces is the sine of
the largest one.  Both reduce to singular values of products of
orthonormal bases.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ZeroSubspaceError

MAX_AMBIENT = 16
INDEPENDENCE_FLOOR = 1e-10


class UnequalDimensionWarning(UserWarning):
    """Hausdorff distance requested for subspaces of different dimension."""


def _as_matrix(basis, ambient=None):
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    if not np.all(np.isfinite(b)):
        raise ValueError("basis contains non-finite entries")
    return b


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of R^n, stored as a matrix with basis columns.

    The basis need only be linearly independent; an orthonormal basis is
    cached on demand.  Zero-dimensional subspaces are representable (shape
    (n, 0)) so splittings with an empty side stay well typed, but metric
    operations reject them.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-d array of column vectors")
        n, k = b.shape
        if not 1 <= n <= MAX_AMBIENT:
            raise ValueError(f"ambient dimension {n} outside 1..{MAX_AMBIENT}")
        if k > n:
            raise ValueError(f"{k} basis vectors cannot be independent in R^{n}")
        if not np.all(np.isfinite(b)):
            raise ValueError("basis contains non-finite entries")
        if k > 0:
            smin = np.linalg.svd(b, compute_uv=False)[-1]
            if smin <= INDEPENDENCE_FLOOR * max(1.0, np.abs(b).max()):
                raise ValueError("basis vectors are linearly dependent within tolerance")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_vectors(cls, vectors, ambient=None):
        """Build from an iterable of n-vectors (rows become basis columns)."""
        vecs = [np.asarray(v, dtype=float) for v in vectors]
        if not vecs:
            if ambient is None:
                raise ValueError("ambient dimension required for the zero subspace")
            return cls(np.zeros((ambient, 0)))
        return cls(np.column_stack(vecs))

    @classmethod
    def span(cls, *vectors):
        return cls.from_vectors(vectors)

    @classmethod
    def zero(cls, ambient):
        return cls(np.zeros((ambient, 0)))

    @classmethod
    def full(cls, ambient):
        return cls(np.eye(ambient))

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def orthonormal(self) -> np.ndarray:
        """Orthonormal basis (columns), via reduced QR."""
        if self.dim == 0:
            return self.basis
        q, _ = np.linalg.qr(self.basis)
        q = np.ascontiguousarray(q[:, : self.dim])
        q.setflags(write=False)
        return q

    @cached_property
    def projector(self) -> np.ndarray:
        q = self.orthonormal
        p = q @ q.T
        p.setflags(write=False)
        return p

    def contains(self, vector, tol=1e-9) -> bool:
        v = np.asarray(vector, dtype=float)
        scale = max(1.0, float(np.linalg.norm(v)))
        return float(np.linalg.norm(v - self.projector @ v)) <= tol * scale

    def map(self, matrix) -> "Subspace":
        """Image under an invertible linear map."""
        return Subspace(np.asarray(matrix, dtype=float) @ self.basis)


def _require_nonzero(*subspaces):
    for w in subspaces:
        if w.dim == 0:
            raise ZeroSubspaceError("metric undefined for a zero subspace")


def _check_same_ambient(w1: Subspace, w2: Subspace):
    if w1.ambient != w2.ambient:
        raise ValueError(f"ambient mismatch: {w1.ambient} vs {w2.ambient}")


def proj_point_distance(u, v) -> float:
    """Chordal distance between the lines spanned by u and v: sin of their angle."""
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroSubspaceError("zero vector spans no line")
    c = abs(float(u @ v)) / (nu * nv)
    c = min(c, 1.0)
    return float(np.sqrt(max(0.0, 1.0 - c * c)))


def principal_cosines(w1: Subspace, w2: Subspace) -> np.ndarray:
    """Cosines of the principal angles, descending, clipped to [0, 1]."""
    _check_same_ambient(w1, w2)
    _require_nonzero(w1, w2)
    s = np.linalg.svd(w1.orthonormal.T @ w2.orthonormal, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def proj_distance(w1: Subspace, w2: Subspace) -> float:
    """d-hat: infimum of chordal distances, the sine of the smallest principal angle.

    Zero exactly when the subspaces intersect nontrivially.
    """
    c = principal_cosines(w1, w2)
    cmax = float(c[0])
    return float(np.sqrt(max(0.0, 1.0 - cmax * cmax)))


def hausdorff_rho(w1: Subspace, w2: Subspace) -> float:
    """rho-hat: Hausdorff distance between projectivized subspaces.

    For equal dimensions this is the sine of the largest principal angle.
    Unequal dimensions are computed as max of the two one-sided suprema and
    flagged with UnequalDimensionWarning (the value is then typically 1).
    """
    _check_same_ambient(w1, w2)
    _require_nonzero(w1, w2)
    if w1.dim != w2.dim:
        warnings.warn(
            f"Hausdorff distance of subspaces of dims {w1.dim} != {w2.dim}",
            UnequalDimensionWarning,
            stacklevel=2,
        )
    q1, q2 = w1.orthonormal, w2.orthonormal
    # sup over unit u in w1 of ||(I - P2) u|| and symmetrically
    def _one_sided(qa, qb):
        m = qa - qb @ (qb.T @ qa)
        return float(np.linalg.svd(m, compute_uv=False)[0])

    return min(1.0, max(_one_sided(q1, q2), _one_sided(q2, q1)))


def subspace_sum(*subspaces: Subspace) -> Subspace:
    """Span of the union; basis re-orthonormalized, rank decided by SVD."""
    if not subspaces:
        raise ValueError("need at least one subspace")
    ambient = subspaces[0].ambient
    for w in subspaces:
        if w.ambient != ambient:
            raise ValueError("ambient mismatch in subspace_sum")
    cols = np.column_stack([w.basis for w in subspaces if w.dim > 0] or
                           [np.zeros((ambient, 0))])
    if cols.shape[1] == 0:
        return Subspace.zero(ambient)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return Subspace(u[:, :rank])


def subspace_intersection(w1: Subspace, w2: Subspace, tol=1e-10) -> Subspace:
    """Intersection, computed through orthogonal complements."""
    _check_same_ambient(w1, w2)
    n = w1.ambient
    stacked = np.column_stack([orthogonal_complement(w1).basis if w1.dim < n else np.zeros((n, 0)),
                               orthogonal_complement(w2).basis if w2.dim < n else np.zeros((n, 0))])
    if stacked.shape[1] == 0:
        return Subspace.full(n)
    u, s, _ = np.linalg.svd(stacked, full_matrices=True)
    rank = int(np.sum(s > tol * (s[0] if s.size else 1.0)))
    if rank >= n:
        return Subspace.zero(n)
    return Subspace(u[:, rank:])


def orthogonal_complement(w: Subspace) -> Subspace:
    n = w.ambient
    if w.dim == 0:
        return Subspace.full(n)
    if w.dim == n:
        return Subspace.zero(n)
    u, _, _ = np.linalg.svd(w.orthonormal, full_matrices=True)
    return Subspace(u[:, w.dim:])
