"""Spectral splittings and contraction statistics of invertible linear maps.

For a semisimple invertible g the eigenvalue moduli sort the spectrum into
the expanding part (modulus > 1), the contracting part (modulus < 1) and the
neutral part (modulus 1 within tolerance).  The corresponding real invariant
subspaces A+(g), A-(g), A0(g) span R^n, and D+(g) = A+(g) + A0(g),
D-(g) = A-(g) + A0(g).

The top-modulus split V(g), W(g) factors the characteristic polynomial at the
maximal modulus instead: V(g) carries every eigenvalue of largest modulus and
W(g) the rest.

Contraction is measured by operator norms of restrictions: norm_plus is the
norm of g restricted to A-(g), norm_minus the norm of g^-1 restricted to
A+(g), and s(g) their maximum; g is hyperbolic when both sides are nontrivial
and s(g) < 1.  lambda_minus is the largest contracting modulus, lambda_plus
the smallest expanding one, and lambda = max(1/lambda_plus, lambda_minus)
satisfies lambda(g) = lambda(g^-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.linalg import schur

from .errors import ModulusTieError, NonSemisimpleError, NotHyperbolicError, SingularMatrixError
from .projective import MAX_AMBIENT, Subspace, proj_distance, subspace_sum

MODULI_RTOL = 1e-8          # relative tolerance grouping eigenvalue moduli
EIGVEC_COND_MAX = 1e8       # semisimplicity bound on the eigenvector matrix
DET_FLOOR = 1e-12


def as_square_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if not 1 <= n <= MAX_AMBIENT:
        raise ValueError(f"dimension {n} outside 1..{MAX_AMBIENT}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def _checked_eig(g: np.ndarray, cond_max=EIGVEC_COND_MAX):
    """Eigendecomposition with an invertibility and semisimplicity check."""
    sign, logdet = np.linalg.slogdet(g)
    if sign == 0 or logdet < np.log(DET_FLOOR):
        raise SingularMatrixError("matrix is singular within tolerance")
    w, v = np.linalg.eig(g)
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > cond_max:
        raise NonSemisimpleError(
            f"eigenvector condition number {cond:.3e} exceeds {cond_max:.1e}"
        )
    return w, v


def _real_invariant_basis(eigvals: np.ndarray, eigvecs: np.ndarray,
                          indices: Iterable[int], ambient: int) -> Subspace:
    """Real basis of the invariant subspace spanned by the selected eigenvectors.

    Complex eigenvalues come in conjugate pairs for real input; each pair
    contributes the real and imaginary parts of one eigenvector.
    """
    cols = []
    used_conjugate = set()
    for i in indices:
        lam = eigvals[i]
        if abs(lam.imag) <= 1e-12 * (1.0 + abs(lam)):
            cols.append(eigvecs[:, i].real)
        elif lam.imag > 0:
            cols.append(eigvecs[:, i].real)
            cols.append(eigvecs[:, i].imag)
        else:
            used_conjugate.add(i)  # partner of a positive-imag eigenvalue
    if not cols:
        return Subspace.zero(ambient)
    m = np.column_stack(cols)
    q, _ = np.linalg.qr(m)
    return Subspace(q[:, : m.shape[1]])


def _schur_class_basis(g: np.ndarray, side: str, expected_dim: int,
                       tol: float) -> Subspace:
    """Invariant subspace of one modulus class via a sorted real Schur form.

    Used when the eigenvector route degrades: for a repeated eigenvalue
    LAPACK may return nearly parallel eigenvectors, and the QR completion
    then leaves the selected span.  Schur reordering is backward stable for
    the invariant subspace itself.
    """
    if side == "plus":
        pred = lambda re, im: np.hypot(re, im) > 1.0 + tol
    elif side == "minus":
        pred = lambda re, im: np.hypot(re, im) < 1.0 - tol
    else:
        pred = lambda re, im: abs(np.hypot(re, im) - 1.0) <= tol
    _, z, sdim = schur(g, output="real", sort=pred)
    if sdim != expected_dim:
        raise NonSemisimpleError(
            f"modulus class {side!r} has inconsistent dimension "
            f"({sdim} by Schur sorting, {expected_dim} by eigenvalues)"
        )
    if sdim == 0:
        return Subspace.zero(g.shape[0])
    return Subspace(z[:, :sdim])


def _invariant_class(g: np.ndarray, eigvals: np.ndarray, eigvecs: np.ndarray,
                     indices, side: str, tol: float) -> Subspace:
    """Real invariant subspace for one modulus class, with a stability net."""
    sub = _real_invariant_basis(eigvals, eigvecs, indices, g.shape[0])
    if sub.dim == 0:
        return sub
    p = sub.orthonormal
    scale = max(1.0, float(np.abs(g).max()))
    residual = float(np.linalg.norm(g @ p - p @ (p.T @ g @ p)))
    if residual <= 1e-8 * scale:
        return sub
    return _schur_class_basis(g, side, sub.dim, tol)


def _classify_indices(eigvals: np.ndarray, tol: float):
    moduli = np.abs(eigvals)
    plus, minus, zero = [], [], []
    for i, m in enumerate(moduli):
        if m > 1.0 + tol:
            plus.append(i)
        elif m < 1.0 - tol:
            minus.append(i)
        else:
            zero.append(i)
    # consistency: moduli clustered within twice the tolerance must land in
    # a single class, else the split depends on the tolerance itself
    order = np.argsort(moduli)
    for a, b in zip(order[:-1], order[1:]):
        ma, mb = moduli[a], moduli[b]
        if mb - ma <= 2.0 * tol * max(1.0, mb):
            ca = (a in plus, a in minus)
            cb = (b in plus, b in minus)
            if ca != cb:
                raise ModulusTieError(
                    f"eigenvalue moduli {ma:.12g} and {mb:.12g} tie across the "
                    f"unit-modulus boundary at tolerance {tol:g}"
                )
    return plus, minus, zero, moduli


@dataclass(frozen=True)
class SpectralSplit:
    """Invariant three-splitting R^n = A+ + A- + A0 of a semisimple map."""

    aplus: Subspace
    aminus: Subspace
    azero: Subspace
    moduli_tolerance: float

    @property
    def ambient(self) -> int:
        return self.aplus.ambient

    def dplus(self) -> Subspace:
        return subspace_sum(self.aplus, self.azero)

    def dminus(self) -> Subspace:
        return subspace_sum(self.aminus, self.azero)


@dataclass(frozen=True)
class SpectralStats:
    """Moduli statistics of an invertible semisimple map.

    norm_plus is the operator norm of g restricted to A-(g); norm_minus is
    the operator norm of g^-1 restricted to A+(g) (the paper's ||g||_+ and
    ||g||_- respectively: each norm measures the contraction on the side its
    sign names).  Fields are None when the corresponding moduli set is empty.
    """

    omega_plus: tuple[float, ...]
    omega_minus: tuple[float, ...]
    lambda_plus: Optional[float]
    lambda_minus: Optional[float]
    lam: float
    norm_plus: Optional[float]
    norm_minus: Optional[float]
    s: float


def characteristic_split(g, tol: float = MODULI_RTOL) -> tuple[Subspace, Subspace]:
    """Split R^n = V(g) + W(g): top-modulus eigenvalues versus the rest.

    V(g) is the invariant subspace of all eigenvalues of maximal modulus,
    W(g) of the remaining ones (zero when the moduli are all tied).  Raises
    ModulusTieError when an excluded modulus sits within 10*tol of the top
    group, since the split would then be an artifact of the tolerance.
    """
    g = as_square_matrix(g)
    w, v = _checked_eig(g)
    moduli = np.abs(w)
    mmax = float(moduli.max())
    # chain-cluster downward from the maximum
    order = np.argsort(-moduli)
    top = [order[0]]
    for i in order[1:]:
        if moduli[top[-1]] - moduli[i] <= tol * mmax:
            top.append(i)
        else:
            break
    top_set = set(int(i) for i in top)
    rest = [i for i in range(len(w)) if i not in top_set]
    if rest:
        gap_hi = min(moduli[i] for i in top)
        gap_lo = max(moduli[i] for i in rest)
        if gap_hi - gap_lo <= 10.0 * tol * mmax:
            raise ModulusTieError(
                f"modulus {gap_lo:.12g} lies within 10*tol of the top group "
                f"({gap_hi:.12g}); the characteristic split is ambiguous"
            )
    vg = _real_invariant_basis(w, v, sorted(top_set), g.shape[0])
    wg = _real_invariant_basis(w, v, rest, g.shape[0])
    return vg, wg


def three_splitting(g, tol: float = MODULI_RTOL) -> SpectralSplit:
    """Invariant splitting by eigenvalue modulus: >1, <1, and =1 within tol."""
    g = as_square_matrix(g)
    w, v = _checked_eig(g)
    plus, minus, zero, _ = _classify_indices(w, tol)
    return SpectralSplit(
        aplus=_invariant_class(g, w, v, plus, "plus", tol),
        aminus=_invariant_class(g, w, v, minus, "minus", tol),
        azero=_invariant_class(g, w, v, zero, "zero", tol),
        moduli_tolerance=tol,
    )


def restriction_norm(g, subspace: Subspace) -> float:
    """Operator norm of g restricted to an invariant subspace."""
    g = as_square_matrix(g)
    if subspace.dim == 0:
        raise ValueError("restriction to the zero subspace has no norm")
    return float(np.linalg.svd(g @ subspace.orthonormal, compute_uv=False)[0])


def spectral_stats(g, tol: float = MODULI_RTOL) -> SpectralStats:
    """Moduli statistics; raises NotHyperbolicError when no modulus leaves 1."""
    g = as_square_matrix(g)
    w, v = _checked_eig(g)
    plus, minus, zero, moduli = _classify_indices(w, tol)
    if not plus and not minus:
        raise NotHyperbolicError("every eigenvalue modulus is 1 within tolerance")
    omega_plus = tuple(sorted(float(moduli[i]) for i in plus))
    omega_minus = tuple(sorted(float(moduli[i]) for i in minus))
    lambda_plus = min(omega_plus) if omega_plus else None
    lambda_minus = max(omega_minus) if omega_minus else None
    candidates = []
    if lambda_plus is not None:
        candidates.append(1.0 / lambda_plus)
    if lambda_minus is not None:
        candidates.append(lambda_minus)
    lam = max(candidates)

    norm_plus = norm_minus = None
    if minus:
        aminus = _invariant_class(g, w, v, minus, "minus", tol)
        norm_plus = restriction_norm(g, aminus)
    if plus:
        aplus = _invariant_class(g, w, v, plus, "plus", tol)
        norm_minus = restriction_norm(np.linalg.inv(g), aplus)
    s = max(x for x in (norm_plus, norm_minus) if x is not None)
    return SpectralStats(
        omega_plus=omega_plus,
        omega_minus=omega_minus,
        lambda_plus=lambda_plus,
        lambda_minus=lambda_minus,
        lam=lam,
        norm_plus=norm_plus,
        norm_minus=norm_minus,
        s=s,
    )


def is_hyperbolic(g, tol: float = MODULI_RTOL) -> bool:
    """True when A+(g) and A-(g) are both nontrivial and s(g) < 1."""
    try:
        stats = spectral_stats(g, tol)
    except NotHyperbolicError:
        return False
    if not stats.omega_plus or not stats.omega_minus:
        return False
    return stats.s < 1.0


def is_regular(g, sample, tol: float = MODULI_RTOL) -> bool:
    """Minimal neutral dimension relative to a finite sample of group elements.

    dim A0(g) equals the minimum of dim A0 over the sample (g should be
    included in the sample by the caller when that is the intended baseline).
    """
    dim_zero = three_splitting(g, tol).azero.dim
    dims = [three_splitting(as_square_matrix(t), tol).azero.dim for t in sample]
    if not dims:
        raise ValueError("regularity needs a nonempty comparison sample")
    return dim_zero == min(dims + [dim_zero])


def hyperbolicity_margin(g, tol: float = MODULI_RTOL) -> float:
    """min(d-hat(A+, D-), d-hat(A-, D+)); raises if g is not hyperbolic."""
    g = as_square_matrix(g)
    if not is_hyperbolic(g, tol):
        raise NotHyperbolicError("element is not hyperbolic")
    split = three_splitting(g, tol)
    return min(
        proj_distance(split.aplus, split.dminus()),
        proj_distance(split.aminus, split.dplus()),
    )


def is_eps_hyperbolic(g, eps: float, tol: float = MODULI_RTOL) -> bool:
    """True when g is hyperbolic with both d-hat margins at least eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return hyperbolicity_margin(g, tol) >= eps
