"""Affine maps x -> Lx + t and their fixed-point / invariant-line geometry.

A map whose linear part has no eigenvalue one fixes the unique solution of
(I - L)p = t.  When one is an eigenvalue and L acts as the identity on its
neutral space, the map translates along an invariant line L_g directed by
the neutral component t_g of the translation; the stored point is the point
of the union of invariant lines closest to the origin (minimum-norm least
squares).  E+(g) and E-(g) are the affine subspaces through L_g spanned by
D+(l(g)) and D-(l(g))."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    NoAxisError,
    NoFixedPointError,
    SingularMatrixError,
    ZeroAxisTranslationError,
)
from .projective import Subspace
from .spectral import MODULI_RTOL, as_square_matrix, three_splitting

EIGENVALUE_ONE_TOL = 1e-8
FIXED_POINT_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class AffineMap:
    """Invertible-by-use affine map of R^n with linear part and translation."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        lin = as_square_matrix(self.linear)
        tr = np.asarray(self.translation, dtype=float).reshape(-1)
        if tr.shape[0] != lin.shape[0]:
            raise ValueError(
                f"translation length {tr.shape[0]} != dimension {lin.shape[0]}"
            )
        if not np.all(np.isfinite(tr)):
            raise ValueError("translation contains non-finite entries")
        lin = lin.copy()
        tr = tr.copy()
        lin.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", tr)

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(np.eye(n), np.zeros(n))

    @classmethod
    def from_translation(cls, t) -> "AffineMap":
        t = np.asarray(t, dtype=float)
        return cls(np.eye(t.shape[0]), t)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def __call__(self, x) -> np.ndarray:
        return self.linear @ np.asarray(x, dtype=float) + self.translation

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: (self @ other)(x) = self(other(x))."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in composition")
        return AffineMap(
            self.linear @ other.linear,
            self.linear @ other.translation + self.translation,
        )

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        return self.compose(other)

    def inverse(self) -> "AffineMap":
        try:
            inv = np.linalg.inv(self.linear)
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError("linear part is singular") from e
        return AffineMap(inv, -inv @ self.translation)

    def power(self, k: int) -> "AffineMap":
        if k == 0:
            return AffineMap.identity(self.dim)
        base = self if k > 0 else self.inverse()
        out = base
        for _ in range(abs(k) - 1):
            out = out @ base
        return out

    def approx_equal(self, other: "AffineMap", tol: float = 1e-9) -> bool:
        if self.dim != other.dim:
            return False
        scale = max(1.0, float(np.abs(self.linear).max()), float(np.abs(self.translation).max()))
        return (
            float(np.abs(self.linear - other.linear).max()) <= tol * scale
            and float(np.abs(self.translation - other.translation).max()) <= tol * scale
        )


@dataclass(frozen=True)
class InvariantLine:
    """g-invariant line: the map translates points of it by t_g."""

    point: np.ndarray     # point of the line closest to the origin
    direction: np.ndarray  # unit vector spanning the neutral translation
    t_g: np.ndarray       # translation along the line; g(p) = p + t_g on it


@dataclass(frozen=True)
class AffineSubspace:
    point: np.ndarray
    span: Subspace

    def contains(self, x, tol=1e-8) -> bool:
        d = np.asarray(x, dtype=float) - self.point
        scale = max(1.0, float(np.linalg.norm(d)))
        return float(np.linalg.norm(d - self.span.projector @ d)) <= tol * scale


def has_eigenvalue_one(linear, tol: float = EIGENVALUE_ONE_TOL) -> bool:
    """True when some eigenvalue of the matrix lies within tol of 1."""
    linear = as_square_matrix(linear)
    w = np.linalg.eigvals(linear)
    return bool(np.any(np.abs(w - 1.0) <= tol))


def fixed_point(g: AffineMap, tol: float = EIGENVALUE_ONE_TOL) -> np.ndarray:
    """Unique fixed point of g when l(g) has no eigenvalue one."""
    if has_eigenvalue_one(g.linear, tol):
        raise NoFixedPointError("linear part has eigenvalue one within tolerance")
    a = np.eye(g.dim) - g.linear
    p = np.linalg.solve(a, g.translation)
    residual = float(np.linalg.norm(g(p) - p))
    scale = 1.0 + float(np.linalg.norm(p))
    if residual > FIXED_POINT_RTOL * scale:
        cond = np.linalg.cond(a)
        raise NoFixedPointError(
            f"fixed-point residual {residual:.3e} exceeds tolerance "
            f"(cond(I - L) = {cond:.3e})"
        )
    return p


def _neutral_decomposition(g: AffineMap, tol: float):
    """Split the translation into its A0 component and the rest.

    Requires l(g) semisimple with eigenvalue one, acting as the identity on
    A0, and with a nontrivial hyperbolic part.  Returns (split, t_g, t_rest).
    """
    split = three_splitting(g.linear, tol)
    azero = split.azero
    if azero.dim == 0:
        raise NoAxisError("linear part has no neutral eigenvalue")
    q0 = azero.orthonormal
    act = g.linear @ q0 - q0
    if float(np.abs(act).max()) > 1e-8 * max(1.0, float(np.abs(g.linear).max())):
        raise NoAxisError("linear part does not act as the identity on its neutral space")
    if azero.dim == g.dim:
        raise NoAxisError("linear part is neutral on all of R^n (not regular)")
    # coordinates of the translation in the invariant splitting
    basis = np.column_stack([
        split.aplus.basis if split.aplus.dim else np.zeros((g.dim, 0)),
        split.aminus.basis if split.aminus.dim else np.zeros((g.dim, 0)),
        q0,
    ])
    coeff = np.linalg.solve(basis, g.translation)
    hyp_dim = split.aplus.dim + split.aminus.dim
    t_g = basis[:, hyp_dim:] @ coeff[hyp_dim:]
    return split, t_g, g.translation - t_g


def invariant_line(g: AffineMap, tol: float = MODULI_RTOL) -> InvariantLine:
    """Invariant line of a regular affine map with neutral eigenvalue one."""
    _, t_g, t_rest = _neutral_decomposition(g, tol)
    nt = float(np.linalg.norm(t_g))
    if nt <= 1e-12 * max(1.0, float(np.linalg.norm(g.translation))):
        raise ZeroAxisTranslationError("translation along the invariant line vanishes")
    point = axis_point(g, tol)
    residual = float(np.linalg.norm(g(point) - point - t_g))
    if residual > 1e-8 * (1.0 + float(np.linalg.norm(point)) + nt):
        raise NoAxisError(f"invariant-line residual {residual:.3e} too large")
    return InvariantLine(point=point, direction=t_g / nt, t_g=t_g)


def axis_point(g: AffineMap, tol: float = MODULI_RTOL) -> np.ndarray:
    """Point of the union of invariant lines closest to the origin.

    Minimum-norm least-squares solution of (l(g) - I) p = -t_rest, where
    t_rest is the translation component off the neutral space.
    """
    _, _, t_rest = _neutral_decomposition(g, tol)
    a = g.linear - np.eye(g.dim)
    p, *_ = np.linalg.lstsq(a, -t_rest, rcond=None)
    return p


def affine_subspaces(g: AffineMap, tol: float = MODULI_RTOL) -> tuple[AffineSubspace, AffineSubspace]:
    """E+(g) and E-(g): affine subspaces through L_g spanned by D+ and D-."""
    line = invariant_line(g, tol)
    split = three_splitting(g.linear, tol)
    eplus = AffineSubspace(point=line.point, span=split.dplus())
    eminus = AffineSubspace(point=line.point, span=split.dminus())
    return eplus, eminus
