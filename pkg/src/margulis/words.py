"""Reduced words over a generator set and word-level dynamical searches.

Words are tuples of (generator index, sign) letters with no cancelling
adjacent pair.  Enumeration is in shortlex order: by length, then
lexicographically with a < a^-1 < b < b^-1.  Word maps compose left to
right: the word "ab" evaluates to map(a) after map(b).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .affine import AffineMap, fixed_point, has_eigenvalue_one
from .errors import (
    NoFixedPointError,
    NotHyperbolicError,
    SearchBudgetError,
    SingularMatrixError,
)
from .projective import Subspace, hausdorff_rho, proj_distance
from .spectral import (
    MODULI_RTOL,
    hyperbolicity_margin,
    is_hyperbolic,
    spectral_stats,
    three_splitting,
)

DET_FLOOR = 1e-12


@dataclass(frozen=True)
class Word:
    """Reduced word: letters are (generator index, +1 or -1)."""

    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for idx, sign in self.letters:
            if sign not in (1, -1):
                raise ValueError(f"letter sign must be +-1, got {sign}")
            if idx < 0:
                raise ValueError("generator index must be nonnegative")
        for (i1, s1), (i2, s2) in zip(self.letters, self.letters[1:]):
            if i1 == i2 and s1 == -s2:
                raise ValueError("word is not reduced")

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple((i, -s) for i, s in reversed(self.letters)))

    def concat(self, other: "Word") -> "Word":
        """Concatenate and reduce."""
        left = list(self.letters)
        for letter in other.letters:
            if left and left[-1][0] == letter[0] and left[-1][1] == -letter[1]:
                left.pop()
            else:
                left.append(letter)
        return Word(tuple(left))

    def __mul__(self, other: "Word") -> "Word":
        return self.concat(other)

    def power(self, k: int) -> "Word":
        if k == 0:
            return Word()
        base = self if k > 0 else self.inverse()
        out = base
        for _ in range(abs(k) - 1):
            out = out.concat(base)
        return out

    def conjugate_by(self, t: "Word") -> "Word":
        """t * self * t^-1."""
        return t.concat(self).concat(t.inverse())


@dataclass(frozen=True)
class GeneratorSet:
    """Labelled affine generators; inverses derived and cached."""

    labels: tuple[str, ...]
    maps: tuple[AffineMap, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.maps):
            raise ValueError("labels and maps must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("generator labels must be unique")
        if not self.maps:
            raise ValueError("at least one generator required")
        dims = {m.dim for m in self.maps}
        if len(dims) != 1:
            raise ValueError("generators must share one ambient dimension")
        for label, m in zip(self.labels, self.maps):
            if abs(np.linalg.det(m.linear)) <= DET_FLOOR:
                raise SingularMatrixError(f"generator {label!r} is singular")
        object.__setattr__(
            self, "_inverses", tuple(m.inverse() for m in self.maps)
        )

    @classmethod
    def build(cls, items) -> "GeneratorSet":
        labels, maps = zip(*items)
        return cls(tuple(labels), tuple(maps))

    @property
    def ambient(self) -> int:
        return self.maps[0].dim

    def __len__(self) -> int:
        return len(self.maps)

    def letter_map(self, idx: int, sign: int) -> AffineMap:
        return self.maps[idx] if sign > 0 else self._inverses[idx]

    def evaluate(self, word: Word) -> AffineMap:
        out = AffineMap.identity(self.ambient)
        for idx, sign in word.letters:
            out = out @ self.letter_map(idx, sign)
        return out

    def word_str(self, word: Word) -> str:
        if not word.letters:
            return "1"
        parts = []
        for idx, sign in word.letters:
            parts.append(self.labels[idx] if sign > 0 else self.labels[idx] + "^-1")
        return " ".join(parts)


def iter_words(gens: GeneratorSet, max_len: int) -> Iterator[tuple[Word, AffineMap]]:
    """Stream reduced words of length 1..max_len in shortlex order with maps.

    Letters order generator before inverse: a < a^-1 < b < b^-1.
    """
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    letters = [(i, s) for i in range(len(gens)) for s in (1, -1)]
    level: list[tuple[Word, AffineMap]] = []
    for idx, sign in letters:
        w = Word(((idx, sign),))
        level.append((w, gens.letter_map(idx, sign)))
    length = 1
    while length <= max_len:
        yield from level
        nxt = []
        if length < max_len:
            for word, m in level:
                last_idx, last_sign = word.letters[-1]
                for idx, sign in letters:
                    if idx == last_idx and sign == -last_sign:
                        continue
                    nxt.append((Word(word.letters + ((idx, sign),)),
                                m @ gens.letter_map(idx, sign)))
        level = nxt
        length += 1


def word_ball(gens: GeneratorSet, max_len: int,
              budget: Optional[int] = None) -> tuple[list[tuple[Word, AffineMap]], bool]:
    """Materialized word ball; truncated flag set when budget cuts it short."""
    out = []
    for item in iter_words(gens, max_len):
        if budget is not None and len(out) >= budget:
            return out, True
        out.append(item)
    return out, False


def transversality_margins(g1, g2, tol: float = MODULI_RTOL) -> dict[str, float]:
    """The four d-hat margins between A+-(g1), A+-(g2) and the opposite D-+."""
    l1 = g1.linear if isinstance(g1, AffineMap) else g1
    l2 = g2.linear if isinstance(g2, AffineMap) else g2
    s1 = three_splitting(l1, tol)
    s2 = three_splitting(l2, tol)
    return {
        "aplus1_dminus2": proj_distance(s1.aplus, s2.dminus()),
        "aminus1_dplus2": proj_distance(s1.aminus, s2.dplus()),
        "aplus2_dminus1": proj_distance(s2.aplus, s1.dminus()),
        "aminus2_dplus1": proj_distance(s2.aminus, s1.dplus()),
    }


def transversality_check(g1, g2, eps: float, tol: float = MODULI_RTOL) -> bool:
    """True when all four transversality margins are at least eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return min(transversality_margins(g1, g2, tol).values()) >= eps


def _expanding_blocks(linear, tol: float):
    """Invariant real blocks of the expanding space, one per eigenvalue class."""
    w, v = np.linalg.eig(linear)
    blocks = []
    for i, lam in enumerate(w):
        if abs(lam) <= 1.0 + tol:
            continue
        if abs(lam.imag) <= 1e-12 * (1.0 + abs(lam)):
            blocks.append(np.column_stack([v[:, i].real]))
        elif lam.imag > 0:
            blocks.append(np.column_stack([v[:, i].real, v[:, i].imag]))
    return blocks


@dataclass(frozen=True)
class TransversalConjugator:
    """Witness that l(t)W + D+(g) = R^n for an l(g)-invariant W inside A+(g)."""

    word: Word
    conjugator: AffineMap
    w: Subspace
    margin: float


def find_transversal_conjugator(g: AffineMap, gens: GeneratorSet,
                                budget: int = 2000, eps: float = 1e-6,
                                tol: float = MODULI_RTOL) -> TransversalConjugator:
    """Search the word ball for t with l(t)W directly complementing D+(g).

    W runs over l(g)-invariant subspaces of A+(g) of dimension dim A-(g);
    the margin is the smallest singular value of the stacked orthonormal
    bases.  Words are tried in shortlex order starting with the identity;
    raises SearchBudgetError with the nearest miss when the budget runs out.
    """
    split = three_splitting(g.linear, tol)
    if split.aplus.dim < split.aminus.dim:
        raise ValueError("needs dim A+(g) >= dim A-(g)")
    target = split.aminus.dim
    if target == 0:
        raise ValueError("A-(g) is trivial; nothing to transversalize")
    blocks = _expanding_blocks(g.linear, tol)
    import itertools as _it

    candidates = []
    for r in range(1, len(blocks) + 1):
        for combo in _it.combinations(range(len(blocks)), r):
            cols = np.column_stack([blocks[i] for i in combo])
            if cols.shape[1] == target:
                q, _ = np.linalg.qr(cols)
                candidates.append(Subspace(q[:, : cols.shape[1]]))
    if not candidates:
        raise ValueError("no l(g)-invariant subspace of A+(g) has the right dimension")

    dplus_q = split.dplus().orthonormal
    best = (-1.0, None, None)
    tried = 0

    def words():
        yield Word(()), AffineMap.identity(gens.ambient)
        yield from iter_words(gens, max_len=64)  # budget cuts this off

    for word, tmap in words():
        for wsub in candidates:
            if tried >= budget:
                raise SearchBudgetError(
                    f"no transversal conjugator within budget {budget}; "
                    f"best margin {best[0]:.3e} at word "
                    f"{gens.word_str(best[1]) if best[1] is not None else '?'}"
                )
            tried += 1
            image = wsub.map(tmap.linear)
            stacked = np.column_stack([image.orthonormal, dplus_q])
            smin = float(np.linalg.svd(stacked, compute_uv=False)[-1])
            if smin > best[0]:
                best = (smin, word, wsub)
            if smin >= eps:
                return TransversalConjugator(word=word, conjugator=tmap,
                                             w=wsub, margin=smin)
    raise SearchBudgetError("word stream exhausted before budget")


@dataclass(frozen=True)
class ContractionReport:
    """Measured Lemma-2.7-style quantities for a transversal hyperbolic pair."""

    s_g: float
    s_h: float
    s_gh: float
    rho_plus: float            # rho-hat(A+(gh), A+(g))
    rho_minus: float           # rho-hat(A-(gh), A-(h))
    margin_gh: float           # hyperbolicity margin of gh
    gh_half_eps_hyperbolic: bool
    gh_half_eps_transversal_g: bool
    gh_half_eps_transversal_h: bool
    ratio_s: float             # s(gh) / (s(g) s(h))
    ratio_rho_plus: float      # rho_plus / s(g)
    ratio_rho_minus: float     # rho_minus / s(h)


def product_contraction_report(g: AffineMap, h: AffineMap, eps: float,
                               tol: float = MODULI_RTOL) -> ContractionReport:
    """Measure contraction and subspace drift of the product of a pair.

    Preconditions (validated): g and h are eps-hyperbolic and eps-transversal
    with s < 1.  No constants are asserted; everything is reported.
    """
    lg, lh = g.linear, h.linear
    for name, lin in (("g", lg), ("h", lh)):
        if not is_hyperbolic(lin, tol):
            raise NotHyperbolicError(f"{name} is not hyperbolic")
        if hyperbolicity_margin(lin, tol) < eps:
            raise NotHyperbolicError(f"{name} is not {eps}-hyperbolic")
    if not transversality_check(lg, lh, eps, tol):
        raise ValueError("pair is not eps-transversal")

    gh = g @ h
    s_g = spectral_stats(lg, tol).s
    s_h = spectral_stats(lh, tol).s
    s_gh = spectral_stats(gh.linear, tol).s
    split_g = three_splitting(lg, tol)
    split_h = three_splitting(lh, tol)
    split_gh = three_splitting(gh.linear, tol)
    rho_plus = hausdorff_rho(split_gh.aplus, split_g.aplus)
    rho_minus = hausdorff_rho(split_gh.aminus, split_h.aminus)
    margin_gh = hyperbolicity_margin(gh.linear, tol) if is_hyperbolic(gh.linear, tol) else 0.0
    half = eps / 2.0
    return ContractionReport(
        s_g=s_g,
        s_h=s_h,
        s_gh=s_gh,
        rho_plus=rho_plus,
        rho_minus=rho_minus,
        margin_gh=margin_gh,
        gh_half_eps_hyperbolic=margin_gh >= half,
        gh_half_eps_transversal_g=transversality_check(gh.linear, lg, half, tol),
        gh_half_eps_transversal_h=transversality_check(gh.linear, lh, half, tol),
        ratio_s=s_gh / (s_g * s_h),
        ratio_rho_plus=rho_plus / s_g,
        ratio_rho_minus=rho_minus / s_h,
    )


@dataclass(frozen=True)
class EigenvalueOneFailure:
    """Word whose linear part misses eigenvalue one, with its fixed point."""

    word: Word
    label: str
    moduli: tuple[float, ...]
    fixed_point: Optional[np.ndarray]
    residual: Optional[float]
    infinite_order: Optional[bool]  # None when undecidable from moduli


@dataclass(frozen=True)
class EigenvalueOneCertificate:
    all_pass: bool
    words_checked: int
    max_len: int
    tolerance: float
    failures: tuple[EigenvalueOneFailure, ...] = field(default_factory=tuple)


def eigenvalue_one_certificate(gens: GeneratorSet, max_len: int,
                               tol: float = 1e-8) -> EigenvalueOneCertificate:
    """Check every reduced word up to max_len for eigenvalue one.

    Proper discontinuity forces eigenvalue one on the connected component:
    a word without it fixes a point, and when it moreover has a modulus away
    from 1 it generates an infinite cyclic group through that fixed point,
    an obstruction witness.
    """
    failures = []
    checked = 0
    for word, m in iter_words(gens, max_len):
        checked += 1
        if has_eigenvalue_one(m.linear, tol):
            continue
        eigvals = np.linalg.eigvals(m.linear)
        moduli = tuple(sorted(float(x) for x in np.abs(eigvals)))
        infinite = True if any(abs(x - 1.0) > tol for x in moduli) else None
        try:
            p = fixed_point(m, tol)
            residual = float(np.linalg.norm(m(p) - p))
        except NoFixedPointError:
            p, residual = None, None
        failures.append(EigenvalueOneFailure(
            word=word,
            label=gens.word_str(word),
            moduli=moduli,
            fixed_point=p,
            residual=residual,
            infinite_order=infinite,
        ))
    return EigenvalueOneCertificate(
        all_pass=not failures,
        words_checked=checked,
        max_len=max_len,
        tolerance=tol,
        failures=tuple(failures),
    )
