"""Quadratic forms of signature (p, q), orientations of isotropic subspaces,
and the Margulis sign of affine isometries.

Conventions.  A form B of signature (p, q) is carried by a normalized frame
(v_1..v_p, w_1..w_q) in which B is x_1^2 + ... + x_p^2 - y_1^2 - ... - y_q^2.
X is the span of the v's, Y of the w's, and C_B = {v : B(v, v) < 0} is the
open timelike cone.  A maximal isotropic subspace W (dimension q) projects
isomorphically to Y along X, which transports the fixed orientation of Y to
W; for signature (q+1, q) the B-orthogonal complement W-perp is oriented
through its projection to X, and together these orient the neutral line
W1-perp intersect W2-perp of a transversal isotropic pair.

For signature (k+1, k) and a regular hyperbolic l(g) in SO(B), the expanding
and contracting spaces A+(g), A-(g) are maximal isotropic, D+(g) is the
B-orthogonal complement of A+(g), and the sign

    alpha(g) = B(g q - q, v_plus) / B(v_plus, v_plus)^(1/2)

with v_plus the oriented neutral vector of D+(g) is independent of the point
q and invariant under conjugation by affine maps with linear part in SO(B).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .affine import AffineMap
from .errors import (
    DegenerateFormError,
    NoOrderingError,
    NotInGroupError,
    NotIsotropicError,
    SignComputationError,
    SplittingError,
)
from .projective import Subspace, proj_point_distance
from .spectral import (
    MODULI_RTOL,
    as_square_matrix,
    is_hyperbolic,
    three_splitting,
)

EIGENVALUE_FLOOR = 1e-10   # degeneracy floor for form eigenvalues
ISOTROPY_TOL = 1e-8
GROUP_TOL = 1e-8
SIGN_FLOOR = 1e-12


@dataclass(frozen=True)
class QuadraticForm:
    """Nondegenerate symmetric form with a normalized frame.

    frame columns are (v_1..v_p, w_1..w_q); in frame coordinates the Gram
    matrix is diag(1,...,1,-1,...,-1).
    """

    gram: np.ndarray
    p: int
    q: int
    frame: np.ndarray

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    @property
    def signature(self) -> tuple[int, int]:
        return (self.p, self.q)

    @cached_property
    def frame_inv(self) -> np.ndarray:
        inv = np.linalg.inv(self.frame)
        inv.setflags(write=False)
        return inv

    def evaluate(self, u, v) -> float:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return float(u @ self.gram @ v)

    def quad(self, v) -> float:
        return self.evaluate(v, v)

    def in_cone(self, v) -> bool:
        """Strict timelike test B(v, v) < 0."""
        return self.quad(v) < 0.0

    def coords(self, v) -> np.ndarray:
        return self.frame_inv @ np.asarray(v, dtype=float)

    def x_part(self) -> Subspace:
        return Subspace(self.frame[:, : self.p])

    def y_part(self) -> Subspace:
        return Subspace(self.frame[:, self.p:])

    def preserved_by(self, linear, tol: float = GROUP_TOL) -> bool:
        """Membership test for O(B) within tolerance."""
        m = as_square_matrix(linear)
        scale = max(1.0, float(np.abs(self.gram).max())) * max(
            1.0, float(np.abs(m).max()) ** 2
        )
        return float(np.abs(m.T @ self.gram @ m - self.gram).max()) <= tol * scale

    def require_special(self, linear, tol: float = GROUP_TOL):
        """Raise unless the matrix lies in SO(B) (preserves B, det +1)."""
        m = as_square_matrix(linear)
        if not self.preserved_by(m, tol):
            raise NotInGroupError("linear part does not preserve the form")
        if np.linalg.det(m) < 0.0:
            raise NotInGroupError("linear part has determinant -1 (not in SO(B))")


@dataclass(frozen=True)
class OrientedFrame:
    """Ordered basis together with its orientation sign (+1 after adjustment)."""

    basis: np.ndarray  # columns
    sign: int

    @property
    def subspace(self) -> Subspace:
        return Subspace(self.basis)


@dataclass(frozen=True)
class SignedElement:
    """Affine map with its oriented neutral vector and Margulis sign."""

    element: AffineMap
    v_plus: np.ndarray
    alpha: float


@dataclass(frozen=True)
class CaseTwoStructure:
    """Splitting R^6 = V1 + V2 with a signature-(2,1) form on V1.

    b1 is expressed in the coordinates of v1's basis columns.  Linear parts
    of group elements must preserve both summands; theta1/theta2 denote the
    induced blocks.
    """

    v1: Subspace
    v2: Subspace
    b1: QuadraticForm

    def __post_init__(self):
        if self.v1.ambient != 6 or self.v2.ambient != 6:
            raise ValueError("CaseTwoStructure lives in R^6")
        if self.v1.dim != 3 or self.v2.dim != 3:
            raise ValueError("V1 and V2 must both be 3-dimensional")
        combined = np.column_stack([self.v1.basis, self.v2.basis])
        if np.linalg.cond(combined) > 1e8:
            raise ValueError("V1 and V2 do not span R^6 transversally")
        if self.b1.signature != (2, 1):
            raise ValueError("B1 must have signature (2, 1)")

    @cached_property
    def change_of_basis(self) -> np.ndarray:
        t = np.column_stack([self.v1.basis, self.v2.basis])
        t.setflags(write=False)
        return t

    @cached_property
    def change_of_basis_inv(self) -> np.ndarray:
        inv = np.linalg.inv(self.change_of_basis)
        inv.setflags(write=False)
        return inv

    def blocks(self, linear, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
        """theta1 and theta2 blocks of a splitting-preserving matrix."""
        m = self.change_of_basis_inv @ as_square_matrix(linear) @ self.change_of_basis
        scale = max(1.0, float(np.abs(m).max()))
        off = max(float(np.abs(m[:3, 3:]).max()), float(np.abs(m[3:, :3]).max()))
        if off > tol * scale:
            raise SplittingError(
                f"linear part mixes V1 and V2 (off-block magnitude {off:.3e})"
            )
        return m[:3, :3].copy(), m[3:, 3:].copy()

    def project_v1(self, vector) -> np.ndarray:
        """Coordinates in V1 of the projection onto V1 along V2."""
        return (self.change_of_basis_inv @ np.asarray(vector, dtype=float))[:3]


def _first_nonzero_sign(v: np.ndarray) -> float:
    threshold = 1e-12 * max(1.0, float(np.abs(v).max()))
    for x in v:
        if abs(x) > threshold:
            return 1.0 if x > 0 else -1.0
    return 1.0


def normalize_form(gram) -> QuadraticForm:
    """Diagonalize a symmetric matrix into a normalized (p, q) frame.

    Eigenvalues are sorted descending; each eigenvector's sign is fixed by
    making its first nonzero coordinate positive, and the vectors are scaled
    by |eigenvalue|^(-1/2) so the frame carries B to the standard form.
    """
    g = as_square_matrix(gram)
    if float(np.abs(g - g.T).max()) > 1e-10 * max(1.0, float(np.abs(g).max())):
        raise ValueError("gram matrix must be symmetric")
    diag = np.diagonal(g)
    if (np.array_equal(g, np.diag(diag))
            and np.all(np.isin(diag, (1.0, -1.0)))
            and np.all(np.diff(diag) <= 0)):
        # already the standard gram; keep the identity frame so files and
        # in-memory constructions agree exactly
        frame = np.eye(g.shape[0])
        g = g.copy()
        g.setflags(write=False)
        frame.setflags(write=False)
        return QuadraticForm(gram=g, p=int(np.sum(diag > 0)),
                             q=int(np.sum(diag < 0)), frame=frame)
    vals, vecs = np.linalg.eigh(g)
    order = np.argsort(-vals)
    vals, vecs = vals[order], vecs[:, order]
    scale = max(1.0, float(np.abs(vals).max()))
    if np.any(np.abs(vals) <= EIGENVALUE_FLOOR * scale):
        raise DegenerateFormError(
            f"form eigenvalue below degeneracy floor: {vals}"
        )
    p = int(np.sum(vals > 0))
    q = g.shape[0] - p
    cols = []
    for j in range(g.shape[0]):
        vec = vecs[:, j] * _first_nonzero_sign(vecs[:, j])
        cols.append(vec / np.sqrt(abs(vals[j])))
    frame = np.column_stack(cols)
    g = g.copy()
    g.setflags(write=False)
    frame.setflags(write=False)
    return QuadraticForm(gram=g, p=p, q=q, frame=frame)


def standard_form(p: int, q: int) -> QuadraticForm:
    return normalize_form(np.diag([1.0] * p + [-1.0] * q))


def require_isotropic(w: Subspace, form: QuadraticForm, tol: float = ISOTROPY_TOL,
                      maximal: bool = True):
    if maximal and w.dim != form.q:
        raise NotIsotropicError(
            f"maximal isotropic subspace must have dimension {form.q}, got {w.dim}"
        )
    b = w.orthonormal
    residual = float(np.abs(b.T @ form.gram @ b).max())
    if residual > tol * max(1.0, float(np.abs(form.gram).max())):
        raise NotIsotropicError(f"subspace is not isotropic (residual {residual:.3e})")


def isotropic_orientation_sign(basis: np.ndarray, form: QuadraticForm) -> int:
    """Orientation of an ordered isotropic basis via its projection to Y."""
    coords = form.frame_inv @ basis
    det = float(np.linalg.det(coords[form.p:, :]))
    if abs(det) <= SIGN_FLOOR:
        raise NotIsotropicError("projection to Y is singular; basis not isotropic-transversal")
    return 1 if det > 0 else -1


def orient_isotropic(w: Subspace, form: QuadraticForm, tol: float = ISOTROPY_TOL) -> OrientedFrame:
    """Order a maximal isotropic basis positively with respect to Y.

    The projection to Y along X is an isomorphism on any isotropic subspace;
    the returned basis has positively oriented image (sign +1).  When the
    input ordering is negative the first vector's sign is flipped.
    """
    require_isotropic(w, form, tol)
    basis = np.array(w.basis, dtype=float, copy=True)
    if isotropic_orientation_sign(basis, form) < 0:
        basis[:, 0] = -basis[:, 0]
    basis.setflags(write=False)
    return OrientedFrame(basis=basis, sign=1)


def _oriented_normal(oriented_basis: np.ndarray, candidate: np.ndarray,
                     form: QuadraticForm) -> np.ndarray:
    """Sign the candidate neutral vector so the extended basis is positive.

    The B-orthogonal complement of an isotropic W carries the orientation of
    X through projection; (oriented basis of W, v0) must be positive in it.
    """
    ext = np.column_stack([oriented_basis, candidate])
    coords_x = (form.frame_inv @ ext)[: form.p, :]
    det = float(np.linalg.det(coords_x))
    if abs(det) <= SIGN_FLOOR:
        raise SignComputationError("extended frame projects degenerately to X")
    return candidate if det > 0 else -candidate


def neutral_vector(w1: Subspace, w2: Subspace, form: QuadraticForm,
                   tol: float = ISOTROPY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Oriented spanning vectors of the neutral line of a transversal pair.

    Requires signature (q+1, q), where the line W1-perp intersect W2-perp is
    one-dimensional.  Output i is v0(Wi-perp): the unit vector on that line
    making (oriented basis of Wi, v0) a positive basis of Wi-perp.
    """
    if form.p != form.q + 1:
        raise ValueError(
            f"neutral vector needs signature (q+1, q), got {form.signature}"
        )
    require_isotropic(w1, form, tol)
    require_isotropic(w2, form, tol)
    stacked = np.vstack([w1.orthonormal.T @ form.gram, w2.orthonormal.T @ form.gram])
    u, s, vt = np.linalg.svd(stacked)
    rank = int(np.sum(s > 1e-10 * s[0]))
    if stacked.shape[1] - rank != 1:
        raise NotIsotropicError(
            "isotropic pair is not transversal: neutral intersection is not a line"
        )
    candidate = vt[-1, :]
    candidate = candidate / np.linalg.norm(candidate)
    out = []
    for w in (w1, w2):
        oriented = orient_isotropic(w, form, tol)
        out.append(_oriented_normal(oriented.basis, candidate, form))
    return out[0], out[1]


def _hyperbolic_so_split(linear, form: QuadraticForm, tol: float):
    """Three-splitting of a regular hyperbolic SO(B) element, validated."""
    k = form.q
    form.require_special(linear, GROUP_TOL)
    if not is_hyperbolic(linear, tol):
        raise SignComputationError("element is not hyperbolic")
    split = three_splitting(linear, tol)
    if split.aplus.dim != k or split.aminus.dim != k or split.azero.dim != 1:
        raise SignComputationError(
            f"not regular for signature {form.signature}: splitting dims "
            f"({split.aplus.dim}, {split.aminus.dim}, {split.azero.dim})"
        )
    require_isotropic(split.aplus, form, max(tol, ISOTROPY_TOL))
    require_isotropic(split.aminus, form, max(tol, ISOTROPY_TOL))
    # the neutral line must be B-orthogonal to A+ (then D+ = A+ perp)
    cross = split.azero.orthonormal.T @ form.gram @ split.aplus.orthonormal
    if float(np.abs(cross).max()) > 1e-6 * max(1.0, float(np.abs(form.gram).max())):
        raise SignComputationError("neutral space is not B-orthogonal to A+")
    return split


def oriented_neutral_vector(linear, form: QuadraticForm, tol: float = MODULI_RTOL) -> np.ndarray:
    """B-unit v_plus = v0(D+(g)) of a regular hyperbolic SO(B) matrix."""
    split = _hyperbolic_so_split(linear, form, tol)
    u = split.azero.orthonormal[:, 0]
    oriented = orient_isotropic(split.aplus, form)
    v = _oriented_normal(oriented.basis, u, form)
    bv = form.quad(v)
    if bv <= 0:
        raise SignComputationError("neutral vector is not spacelike")
    return v / np.sqrt(bv)


def margulis_alpha(g: AffineMap, form: QuadraticForm, tol: float = MODULI_RTOL) -> SignedElement:
    """Margulis sign of an affine map with regular hyperbolic l(g) in SO(B).

    alpha(g) = B(g q - q, v_plus) / B(v_plus, v_plus)^(1/2) for any point q;
    the stored v_plus is B-normalized so alpha = B(translation, v_plus).
    """
    if g.dim != form.n:
        raise ValueError("dimension mismatch between map and form")
    if form.p != form.q + 1:
        raise ValueError(f"Margulis sign needs signature (k+1, k), got {form.signature}")
    v_plus = oriented_neutral_vector(g.linear, form, tol)
    alpha = form.evaluate(g.translation, v_plus)
    return SignedElement(element=g, v_plus=v_plus, alpha=float(alpha))


def alpha_case23(g: AffineMap, structure: CaseTwoStructure,
                 tol: float = MODULI_RTOL) -> SignedElement:
    """Margulis sign for the SO(2,1) x SL3 structure on R^6.

    The sign is alpha with tau_g(p) - p = alpha v_g, where tau_g projects
    onto the invariant line along A+(g) + A-(g) and v_g is the vector of
    A0(l(g)) projecting to the oriented B1-unit neutral vector of theta1(g).
    Equals the signature-(2,1) sign of the V1 block by construction.
    """
    if g.dim != 6:
        raise ValueError("alpha_case23 lives in R^6")
    theta1, _theta2 = structure.blocks(g.linear, max(tol, 1e-8))
    v_hat = oriented_neutral_vector(theta1, structure.b1, tol)

    split = three_splitting(g.linear, tol)
    if split.azero.dim != 1:
        raise SignComputationError(
            f"neutral space of l(g) must be a line, got dim {split.azero.dim}"
        )
    a0 = split.azero.orthonormal[:, 0]
    act = g.linear @ a0 - a0
    if float(np.abs(act).max()) > 1e-8 * max(1.0, float(np.abs(g.linear).max())):
        raise SignComputationError("l(g) does not act trivially on its neutral line")

    proj = structure.project_v1(a0)
    denom = float(v_hat @ v_hat)
    beta = float(proj @ v_hat) / denom
    if abs(beta) <= 1e-10:
        raise SignComputationError("neutral line projects to zero in V1")
    if float(np.linalg.norm(proj - beta * v_hat)) > 1e-7 * max(1.0, abs(beta)):
        raise SignComputationError("neutral line does not project onto the V1 neutral vector")
    v_g = a0 / beta

    # component of the displacement along A0 in the invariant splitting
    basis = np.column_stack([
        split.aplus.basis if split.aplus.dim else np.zeros((6, 0)),
        split.aminus.basis if split.aminus.dim else np.zeros((6, 0)),
        a0.reshape(-1, 1),
    ])
    if basis.shape[1] != 6:
        raise SignComputationError("splitting of l(g) does not span R^6")
    coeff = np.linalg.solve(basis, g.translation)
    gamma = float(coeff[-1])
    alpha = gamma * beta
    return SignedElement(element=g, v_plus=v_g, alpha=alpha)


@dataclass(frozen=True)
class PhiClassification:
    """Side of W relative to the isotropic line U, per the w0 construction."""

    alpha: float
    w0: np.ndarray
    v0: np.ndarray
    side: str  # '+', '-', or '0' on the boundary


def phi_classify(u_line: Subspace, w_line: Subspace, form: QuadraticForm,
                 tol: float = ISOTROPY_TOL) -> PhiClassification:
    """Classify the isotropic line W into Phi+_U or Phi-_U.

    With U spanned by v normalized so its Y-part is w_1, and v0 the unit
    spacelike vector of U-perp within X oriented so (pi_X(v), v0) is positive,
    the line U-perp intersect W-perp is spanned by w0(W) = v0 + alpha(W) v;
    the sign of alpha(W) is the side.
    """
    if form.signature != (2, 1):
        raise ValueError("phi_classify needs signature (2, 1)")
    for line in (u_line, w_line):
        if line.dim != 1 or line.ambient != 3:
            raise ValueError("U and W must be lines in R^3")
        require_isotropic(line, form, tol, maximal=True)
    cu = form.coords(u_line.basis[:, 0])
    cw = form.coords(w_line.basis[:, 0])
    if abs(cu[2]) <= SIGN_FLOOR or abs(cw[2]) <= SIGN_FLOOR:
        raise NotIsotropicError("isotropic line has vanishing Y-part")
    cu = cu / cu[2]
    cw = cw / cw[2]
    u = form.frame @ cu
    w = form.frame @ cw
    v0 = form.frame @ np.array([-cu[1], cu[0], 0.0])
    denom = form.evaluate(u, w)
    if abs(denom) <= 1e-12:
        raise ValueError("U and W coincide projectively")
    alpha = -form.evaluate(v0, w) / denom
    w0 = v0 + alpha * u
    if alpha > SIGN_FLOOR:
        side = "+"
    elif alpha < -SIGN_FLOOR:
        side = "-"
    else:
        side = "0"
    return PhiClassification(alpha=float(alpha), w0=w0, v0=v0, side=side)


def attracting_line(linear, form: QuadraticForm, tol: float = MODULI_RTOL) -> Subspace:
    """A+ of a hyperbolic SO(2,1) matrix, as a line."""
    split = _hyperbolic_so_split(linear, form, tol)
    return split.aplus


def order_four(elements, form: QuadraticForm, tol: float = MODULI_RTOL,
               cone_margin: float = 1e-8):
    """Order four transversal hyperbolic SO(2,1) maps for the cone condition.

    Returns the first permutation (g1, g2, g3, g4), in lexicographic index
    order, whose plane intersection (A+(g1) + A+(g2)) intersect
    (A+(g3) + A+(g4)) is a timelike line: B(v, v) < -cone_margin for the
    Euclidean-unit direction v.  Exhaustive over the 24 orderings.
    """
    if form.signature != (2, 1):
        raise ValueError("order_four needs signature (2, 1)")
    mats = [as_square_matrix(m) for m in elements]
    if len(mats) != 4:
        raise ValueError("exactly four elements required")
    lines = [attracting_line(m, form, tol).orthonormal[:, 0] for m in mats]
    for i, j in itertools.combinations(range(4), 2):
        if proj_point_distance(lines[i], lines[j]) <= 1e-8:
            raise ValueError(f"attracting lines {i} and {j} coincide; pair not transversal")
    for perm in itertools.permutations(range(4)):
        n12 = np.cross(lines[perm[0]], lines[perm[1]])
        n34 = np.cross(lines[perm[2]], lines[perm[3]])
        direction = np.cross(n12, n34)
        norm = float(np.linalg.norm(direction))
        if norm <= 1e-12:
            continue
        direction = direction / norm
        if form.quad(direction) < -cone_margin:
            return tuple(int(i) for i in perm)
    raise NoOrderingError("no ordering of the four elements yields a timelike intersection")
