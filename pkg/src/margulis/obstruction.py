"""Properness-obstruction engine.

Three certifiable obstructions are searched for within explicit budgets:
a word whose linear part misses eigenvalue 1 (fixed-point obstruction),
a transversal pair of hyperbolic words with opposite Margulis signs, and
a ball-intersection witness for a pair of affine maps.  Absence of all
three within budget is evidence only; every report says so.
"""

from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .affine import AffineMap, axis_point, fixed_point, invariant_line
from .errors import (
    MargulisError,
    NoAxisError,
    NoFixedPointError,
    NotInGroupError,
    SearchBudgetError,
    ZeroAxisTranslationError,
)
from .projective import Subspace, orthogonal_complement, proj_distance
from .signform import CaseTwoStructure, QuadraticForm, alpha_case23, margulis_alpha, standard_form
from .spectral import hyperbolicity_margin, is_hyperbolic, spectral_stats, three_splitting
from .words import (
    GeneratorSet,
    Word,
    eigenvalue_one_certificate,
    iter_words,
    transversality_check,
    transversality_margins,
)

Structure = Union[QuadraticForm, CaseTwoStructure]

BALL_SLACK = 1e-6
SIGN_MARGIN = 1e-6
TRANSVERSALITY_EPS = 1e-6
PAIR_CAP = 60              # opposite-sign pairs examined per side
CONJUGATION_CAP = 24       # carrier powers tried per anchor
POWER_CAP = 12             # contraction powers tried per escort candidate
RANK_FLOOR = 1e-6          # sigma_min certifying conditions 5 and 6
SEED_TRANSVERSALITY = 1e-6

VERDICTS = (
    "opposite-sign-pair-found",
    "eigenvalue-one-violation",
    "ball-witness-found",
    "no-obstruction-within-budget",
)

BOUNDED_SEARCH_NOTE = (
    "bounded search: a found obstruction is certified, but absence within "
    "the recorded budget is not a properness proof"
)


def worker_count(requested: Optional[int] = None) -> int:
    """Worker cap: explicit argument, else MARGULIS_THREADS, else 1."""
    if requested is not None:
        count = int(requested)
        if count < 1:
            raise ValueError("worker count must be at least 1")
        return count
    env = os.environ.get("MARGULIS_THREADS")
    if env is None or not env.strip():
        return 1
    try:
        count = int(env)
    except ValueError as exc:
        raise ValueError(f"MARGULIS_THREADS must be an integer, got {env!r}") from exc
    return max(1, count)


@dataclass(frozen=True)
class ObstructionReport:
    """Outcome of an obstruction search, JSON-serializable and replayable."""

    verdict: str
    witnesses: dict
    margins: dict
    budget: dict
    note: str = BOUNDED_SEARCH_NOTE

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witnesses": self.witnesses,
            "margins": self.margins,
            "budget": self.budget,
            "note": self.note,
        }

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, payload: dict) -> "ObstructionReport":
        missing = {"verdict", "witnesses", "margins", "budget"} - set(payload)
        if missing:
            raise ValueError(f"report payload missing fields {sorted(missing)}")
        return cls(
            verdict=payload["verdict"],
            witnesses=payload["witnesses"],
            margins=payload["margins"],
            budget=payload["budget"],
            note=payload.get("note", BOUNDED_SEARCH_NOTE),
        )

    @classmethod
    def from_json(cls, text: str) -> "ObstructionReport":
        return cls.from_dict(json.loads(text))


def _word_payload(word: Word, gens: GeneratorSet) -> dict:
    return {
        "letters": [[idx, sign] for idx, sign in word.letters],
        "display": gens.word_str(word),
    }


def _word_from_payload(payload: dict) -> Word:
    return Word(tuple((int(i), int(s)) for i, s in payload["letters"]))


def _alpha_of(amap: AffineMap, structure: Structure, tol: float) -> float:
    if isinstance(structure, CaseTwoStructure):
        return alpha_case23(amap, structure, tol).alpha
    return margulis_alpha(amap, structure, tol).alpha


def _require_structure(gens: GeneratorSet, structure: Structure) -> None:
    for label, amap in zip(gens.labels, gens.maps):
        if isinstance(structure, CaseTwoStructure):
            structure.blocks(amap.linear)  # raises SplittingError on mixing
        else:
            if amap.dim != structure.n:
                raise NotInGroupError(
                    f"generator {label!r} has dimension {amap.dim}, form has {structure.n}"
                )
            if not structure.preserved_by(amap.linear):
                raise NotInGroupError(
                    f"generator {label!r} does not preserve the form"
                )


def _pair_margins(split_g, split_h) -> dict[str, float]:
    return {
        "aplus1_dminus2": proj_distance(split_g.aplus, split_h.dminus()),
        "aminus1_dplus2": proj_distance(split_g.aminus, split_h.dplus()),
        "aplus2_dminus1": proj_distance(split_h.aplus, split_g.dminus()),
        "aminus2_dplus1": proj_distance(split_h.aminus, split_g.dplus()),
    }


def opposite_sign_search(gens: GeneratorSet, structure: Structure, max_len: int,
                         *, margin: float = SIGN_MARGIN,
                         trans_eps: float = TRANSVERSALITY_EPS,
                         tol: float = 1e-8) -> ObstructionReport:
    """Scan the word ball for a transversal pair with opposite Margulis signs.

    Words are enumerated in shortlex order; every word with a defined sign
    is kept, and pairs with alpha of opposite sign (each exceeding the
    margin in magnitude) are tried in order of combined length.  A pair
    that is not transversal as-is triggers a conjugator search so the
    returned pair always passes the transversality check.
    """
    _require_structure(gens, structure)
    signed = []
    scanned = 0
    for word, amap in iter_words(gens, max_len):
        scanned += 1
        try:
            alpha = _alpha_of(amap, structure, tol)
        except MargulisError:
            continue
        if abs(alpha) <= margin:
            continue
        try:
            split = three_splitting(amap.linear, tol)
        except MargulisError:
            continue
        signed.append((word, amap, alpha, split))
    positives = [rec for rec in signed if rec[2] > 0][:PAIR_CAP]
    negatives = [rec for rec in signed if rec[2] < 0][:PAIR_CAP]
    budget = {
        "max_len": max_len,
        "words_scanned": scanned,
        "signed_words": len(signed),
        "positive_words": sum(1 for rec in signed if rec[2] > 0),
        "negative_words": sum(1 for rec in signed if rec[2] < 0),
        "pair_cap": PAIR_CAP,
    }
    base_margins = {"sign_margin": margin, "transversality_eps": trans_eps}
    if not positives or not negatives:
        return ObstructionReport("no-obstruction-within-budget", {},
                                 base_margins, budget)

    def finish(pos, neg, conj_word, conj_alpha, margins4):
        witnesses = {
            "first": {**_word_payload(pos[0], gens), "alpha": pos[2]},
            "second": {**_word_payload(neg[0], gens), "alpha": neg[2]},
            "conjugator": _word_payload(conj_word, gens),
            "conjugated_second": {
                **_word_payload(neg[0].conjugate_by(conj_word), gens),
                "alpha": conj_alpha,
            },
        }
        margins = dict(base_margins)
        margins["pair_margins"] = margins4
        margins["min_pair_margin"] = min(margins4.values())
        return ObstructionReport("opposite-sign-pair-found", witnesses,
                                 margins, budget)

    pairs = sorted(
        itertools.product(range(len(positives)), range(len(negatives))),
        key=lambda ij: (len(positives[ij[0]][0]) + len(negatives[ij[1]][0]), ij),
    )
    identity = Word(())
    for i, j in pairs:
        pos, neg = positives[i], negatives[j]
        margins4 = _pair_margins(pos[3], neg[3])
        if min(margins4.values()) >= trans_eps:
            return finish(pos, neg, identity, neg[2], margins4)
    # no pair is transversal directly; conjugate the second element of the
    # first opposite pair (sign is conjugation-invariant)
    pos, neg = positives[0], negatives[0]
    for t_word, t_map in iter_words(gens, max_len):
        conj_word = neg[0].conjugate_by(t_word)
        if not conj_word.letters:
            continue
        conj_map = gens.evaluate(conj_word)
        try:
            conj_alpha = _alpha_of(conj_map, structure, tol)
            split = three_splitting(conj_map.linear, tol)
        except MargulisError:
            continue
        if conj_alpha >= 0:
            continue
        margins4 = _pair_margins(pos[3], split)
        if min(margins4.values()) >= trans_eps:
            return finish(pos, neg, t_word, conj_alpha, margins4)
    budget["conjugator_search_exhausted"] = True
    return ObstructionReport("no-obstruction-within-budget", {},
                             base_margins, budget)


# ---------------------------------------------------------------------------
# ball-intersection witnesses


@dataclass(frozen=True)
class BallWitness:
    m: int
    n: int
    point: np.ndarray
    slack_source: float
    slack_target: float
    source_anchor: np.ndarray
    target_anchor: np.ndarray

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "point": self.point.tolist(),
            "slack_source": self.slack_source,
            "slack_target": self.slack_target,
            "source_anchor": self.source_anchor.tolist(),
            "target_anchor": self.target_anchor.tolist(),
        }


def _ball_anchor(g: AffineMap) -> np.ndarray:
    """A point on the invariant line, or the fixed point when no line exists."""
    try:
        return invariant_line(g).point
    except ZeroAxisTranslationError:
        return axis_point(g)
    except (NoAxisError, MargulisError):
        pass
    try:
        return fixed_point(g)
    except NoFixedPointError as exc:
        raise ValueError(
            "map has neither an invariant line nor a fixed point"
        ) from exc


def _power_relation(g: AffineMap, h: AffineMap, max_exp: int,
                    rtol: float = 1e-9) -> Optional[tuple[int, int]]:
    """Smallest (m, n) with h^m = g^n exactly, if any; moduli prefilter."""
    mod_g = np.sort(np.abs(np.linalg.eigvals(g.linear)))
    mod_h = np.sort(np.abs(np.linalg.eigvals(h.linear)))
    log_g = np.log(np.maximum(mod_g, 1e-300))
    log_h = np.log(np.maximum(mod_h, 1e-300))
    for total in range(2, 2 * max_exp + 1):
        for m in range(max(1, total - max_exp), min(max_exp, total - 1) + 1):
            n = total - m
            if not np.allclose(m * log_h, n * log_g, rtol=0, atol=1e-9 * total):
                continue
            hp, gp = h.power(m), g.power(n)
            if hp.approx_equal(gp, rtol):
                return m, n
    return None


def _trs_point(linear: np.ndarray, c: np.ndarray, radius: float) -> np.ndarray:
    """argmin_{||y|| <= radius} ||linear @ y + c|| for invertible linear."""
    u, sigma, vt = np.linalg.svd(linear)
    chat = u.T @ c
    y_free = -vt.T @ (chat / sigma)
    norm_free = float(np.linalg.norm(y_free))
    if norm_free <= radius:
        return y_free

    def radius_gap(mu):
        y = sigma * chat / (sigma * sigma + mu)
        return float(y @ y) - radius * radius

    mu_hi = float(sigma.max() * np.linalg.norm(chat) / radius) + 1.0
    mu_star = brentq(radius_gap, 0.0, mu_hi, rtol=1e-14, maxiter=300)
    return -vt.T @ (sigma * chat / (sigma * sigma + mu_star))


def _certify_exponents(g: AffineMap, h: AffineMap, m: int, n: int,
                       radius: float, slack: float,
                       p_source: np.ndarray, p_target: np.ndarray
                       ) -> Optional[BallWitness]:
    composite = h.power(m) @ g.power(n)
    c = composite(p_source) - p_target
    y = _trs_point(composite.linear, c, radius - 2.0 * slack)
    x = p_source + y
    slack_source = radius - float(np.linalg.norm(x - p_source))
    slack_target = radius - float(np.linalg.norm(composite(x) - p_target))
    if slack_source < slack or slack_target < slack:
        return None
    return BallWitness(m=m, n=n, point=x, slack_source=slack_source,
                       slack_target=slack_target, source_anchor=p_source,
                       target_anchor=p_target)


def ball_intersection_witness(g: AffineMap, h: AffineMap, radius: float,
                              max_exp: int, *, slack: float = BALL_SLACK,
                              threads: int = 1) -> Optional[BallWitness]:
    """First (m, n) in lexicographic (m+n, m) order with a certified point
    in the radius-ball at g's axis that h^m g^n carries into the ball at
    h's axis.

    The inner feasibility problem is a norm-constrained least squares
    solved through the SVD; the returned point is re-certified by direct
    evaluation with slack at least `slack` on both inequalities.  None
    means no witness within budget, which is evidence and not a proof.
    """
    if radius <= 4.0 * slack:
        raise ValueError("radius too small for the certification slack")
    if max_exp < 1:
        raise ValueError("max_exp must be at least 1")
    relation = _power_relation(g, h, max_exp)
    if relation is not None:
        m, n = relation
        raise ValueError(
            f"h^{m} equals g^{n}; the pair shares dynamics and the ball "
            "search is vacuous"
        )
    p_source = _ball_anchor(g)
    p_target = _ball_anchor(h)

    def diagonal(total):
        return [(m, total - m)
                for m in range(max(1, total - max_exp), min(max_exp, total - 1) + 1)]

    if threads <= 1:
        for total in range(2, 2 * max_exp + 1):
            for m, n in diagonal(total):
                witness = _certify_exponents(g, h, m, n, radius, slack,
                                             p_source, p_target)
                if witness is not None:
                    return witness
        return None
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for total in range(2, 2 * max_exp + 1):
            cells = diagonal(total)
            results = list(pool.map(
                lambda mn: _certify_exponents(g, h, mn[0], mn[1], radius,
                                              slack, p_source, p_target),
                cells,
            ))
            # merge preserves lexicographic order regardless of completion order
            for witness in results:
                if witness is not None:
                    return witness
    return None


# ---------------------------------------------------------------------------
# transversality margin estimation


@dataclass(frozen=True)
class MarginEstimate:
    value: float          # infimum estimate divided by 100
    raw: float            # infimum estimate itself
    minimizer: Subspace
    samples: int


def _summed_distance(u: Subspace, family: list[Subspace]) -> float:
    return sum(proj_distance(u, member) for member in family)


def transversality_margin(subspace_family, dim_u: int, samples: int = 2000,
                          seed: int = 0) -> MarginEstimate:
    """Estimate of inf over dim_u subspaces U of the summed d-hat distance
    to the family, divided by 100.

    Seeded random sampling plus a local shrinking-step refinement around
    the best sample; family members of matching dimension are included as
    candidates so achieved minima are found exactly.
    """
    family = list(subspace_family)
    if not family:
        raise ValueError("family must be nonempty")
    ambient = family[0].ambient
    for member in family:
        if member.ambient != ambient:
            raise ValueError("family members must share one ambient dimension")
    if not 1 <= dim_u < ambient:
        raise ValueError(f"dim_u must lie in [1, {ambient - 1}]")
    rng = np.random.default_rng(seed)
    candidates = [m for m in family if m.dim == dim_u]
    best_u, best_val = None, np.inf
    for cand in candidates:
        val = _summed_distance(cand, family)
        if val < best_val:
            best_u, best_val = cand, val
    for _ in range(samples):
        frame = rng.standard_normal((ambient, dim_u))
        q, _ = np.linalg.qr(frame)
        cand = Subspace(q)
        val = _summed_distance(cand, family)
        if val < best_val:
            best_u, best_val = cand, val
    # local refinement: shrink the perturbation scale on rejection
    step = 0.5
    basis = best_u.orthonormal.copy()
    for _ in range(400):
        trial = basis + step * rng.standard_normal(basis.shape)
        q, _ = np.linalg.qr(trial)
        cand = Subspace(q)
        val = _summed_distance(cand, family)
        if val < best_val:
            best_u, best_val = cand, val
            basis = q
        else:
            step *= 0.95
        if step < 1e-12:
            break
    return MarginEstimate(value=best_val / 100.0, raw=best_val,
                          minimizer=best_u, samples=samples)


# ---------------------------------------------------------------------------
# escort sets


@dataclass(frozen=True)
class EscortSets:
    """Per-anchor escorts: three contracting-plane words and three
    contracting-line words, with the shared hyperbolicity and contraction
    constants they certify."""

    anchors: tuple[Subspace, ...]
    s_words: tuple[tuple[Word, Word, Word], ...]
    t_words: tuple[tuple[Word, Word, Word], ...]
    eps: float
    q: float
    delta: float

    def to_dict(self, gens: GeneratorSet) -> dict:
        return {
            "anchors": [a.basis[:, 0].tolist() for a in self.anchors],
            "s_words": [[_word_payload(w, gens) for w in triple]
                        for triple in self.s_words],
            "t_words": [[_word_payload(w, gens) for w in triple]
                        for triple in self.t_words],
            "eps": self.eps,
            "q": self.q,
            "delta": self.delta,
        }


@dataclass(frozen=True)
class EscortCheck:
    all_pass: bool
    proximity_max: float
    eps_measured: float
    s_max: float
    dims_ok: bool
    s_triple_sigma_min: float
    t_triple_sigma_min: float
    failures: tuple[str, ...]


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, what: str):
        self.used += 1
        if self.used > self.limit:
            raise SearchBudgetError(
                f"escort search budget {self.limit} exhausted while {what}"
            )


def _validate_anchors(anchors, structure: CaseTwoStructure):
    anchors = tuple(anchors)
    if len(anchors) != 4:
        raise ValueError(f"need exactly 4 anchors, got {len(anchors)}")
    for k, line in enumerate(anchors):
        if line.ambient != 3 or line.dim != 1:
            raise ValueError(f"anchor {k} must be a line in V1 coordinates")
        v = line.orthonormal[:, 0]
        if abs(structure.b1.quad(v)) > 1e-8:
            raise ValueError(f"anchor {k} is not isotropic for B1")
    for a, b in itertools.combinations(range(4), 2):
        if proj_distance(anchors[a], anchors[b]) < 1e-6:
            raise ValueError(f"anchors {a} and {b} are not d-hat separated")
    return anchors


def _theta_blocks(amap: AffineMap, structure: CaseTwoStructure):
    return structure.blocks(amap.linear)


def _find_carrier(gens, structure, anchor, target, budget, max_len, tol):
    """Shortest word whose theta1 attracting line is within `target` of the anchor."""
    best = None
    for word, amap in iter_words(gens, max_len):
        budget.spend("searching for an anchor carrier")
        try:
            theta1, _ = _theta_blocks(amap, structure)
            if not is_hyperbolic(theta1, tol):
                continue
            aplus = three_splitting(theta1, tol).aplus
        except MargulisError:
            continue
        gap = proj_distance(aplus, anchor)
        if best is None or gap < best[0]:
            best = (gap, word)
        if gap <= target:
            return word
    raise SearchBudgetError(
        f"no carrier word found within distance {target:.3e} of the anchor "
        f"(best miss {best[0]:.3e})" if best else
        f"no hyperbolic carrier word found up to length {max_len}"
    )


def _theta2_minus_dim(theta2: np.ndarray, tol: float) -> Optional[int]:
    moduli = np.sort(np.abs(np.linalg.eigvals(theta2)))
    scale = moduli[-1]
    # distinct moduli, none on the unit circle
    if np.min(np.diff(moduli)) <= 1e-6 * scale:
        return None
    if np.min(np.abs(moduli - 1.0)) <= 1e-6:
        return None
    return int(np.sum(moduli < 1.0))


def _iter_seeds(gens, structure, carrier_theta1, target_dim, budget, max_len, tol):
    """Words with contracting theta2 dimension target_dim whose theta1 side
    (and its inverse) is transversal to the carrier, shortest first."""
    for word, amap in iter_words(gens, max_len):
        budget.spend("searching for an escort seed")
        try:
            theta1, theta2 = _theta_blocks(amap, structure)
        except MargulisError:
            continue
        if _theta2_minus_dim(theta2, tol) != target_dim:
            continue
        try:
            if not is_hyperbolic(theta1, tol):
                continue
            if not transversality_check(theta1, carrier_theta1,
                                        SEED_TRANSVERSALITY, tol):
                continue
            if not transversality_check(np.linalg.inv(theta1), carrier_theta1,
                                        SEED_TRANSVERSALITY, tol):
                continue
        except MargulisError:
            continue
        yield word


def _escort_candidates(gens, structure, anchor, carrier, seed, target_dim,
                       delta, budget, tol, q_target):
    """Conjugate the seed by growing carrier powers; power each conjugate
    until it is hyperbolic with s below q_target.  Yields acceptable words
    with their contracting theta2 spaces and margins."""
    for n in range(1, CONJUGATION_CAP + 1):
        base = seed.conjugate_by(carrier.power(n))
        budget.spend("forming escort conjugates")
        try:
            base_map = gens.evaluate(base)
            theta1, theta2 = _theta_blocks(base_map, structure)
            a_minus_1 = three_splitting(theta1, tol).aminus
            far = proj_distance(a_minus_1, anchor) >= delta
        except MargulisError:
            continue
        if far:
            continue  # not yet pulled close; grow n
        if _theta2_minus_dim(theta2, tol) != target_dim:
            continue
        for p in range(1, POWER_CAP + 1):
            word = base.power(p)
            budget.spend("powering an escort candidate")
            try:
                amap = gens.evaluate(word)
                linear = amap.linear
                stats = spectral_stats(linear, tol)
                if not is_hyperbolic(linear, tol) or stats.s > q_target:
                    continue
                margin = hyperbolicity_margin(linear, tol)
                if margin <= 0:
                    continue
                theta1_p, theta2_p = _theta_blocks(amap, structure)
                contracting = three_splitting(theta2_p, tol).aminus
                proximity = proj_distance(
                    three_splitting(theta1_p, tol).aminus, anchor)
            except MargulisError:
                continue
            if contracting.dim != target_dim:
                continue  # long products can lose the small moduli to noise
            if proximity >= delta:
                continue
            yield {
                "word": word,
                "contracting": contracting,
                "margin": margin,
                "s": stats.s,
                "proximity": proximity,
            }
            break  # smallest sufficient power for this n


def _triple_sigma(candidates, target_dim: int) -> float:
    """Degeneracy margin of a candidate triple: sigma_min of the stacked
    plane normals (target 2) or line directions (target 1)."""
    columns = []
    for cand in candidates:
        if target_dim == 2:
            columns.append(orthogonal_complement(cand["contracting"]).orthonormal)
        else:
            columns.append(cand["contracting"].orthonormal)
    stacked = np.column_stack(columns)
    return float(np.linalg.svd(stacked, compute_uv=False)[-1])


def _select_triple(gens, structure, anchor, carrier, carrier_theta1,
                   target_dim, delta, budget, tol, q_target, max_len):
    # Conjugates of one seed share a limiting contracting space, so the
    # rank condition needs candidates grown from distinct seeds.
    accepted = []
    any_seed = False
    for seed in _iter_seeds(gens, structure, carrier_theta1, target_dim,
                            budget, max_len, tol):
        any_seed = True
        before = len(accepted)
        for cand in _escort_candidates(gens, structure, anchor, carrier, seed,
                                       target_dim, delta, budget, tol,
                                       q_target):
            accepted.append(cand)
            break  # one candidate per seed is enough for diversity
        if len(accepted) == before or len(accepted) < 3:
            continue
        new = len(accepted) - 1
        for i, j in itertools.combinations(range(new), 2):
            triple = [accepted[i], accepted[j], accepted[new]]
            if _triple_sigma(triple, target_dim) >= RANK_FLOOR:
                return triple
    if not any_seed:
        raise SearchBudgetError(
            f"no seed word with contracting theta2 dimension {target_dim} "
            f"up to length {max_len}"
        )
    raise SearchBudgetError(
        f"could not assemble a nondegenerate escort triple with contracting "
        f"dimension {target_dim} ({len(accepted)} candidates from distinct "
        f"seeds)"
    )


def build_escort_sets(gens: GeneratorSet, structure: CaseTwoStructure,
                      anchors, delta: float, budget: int = 20000,
                      *, tol: float = 1e-8,
                      q_target: float = 0.9) -> EscortSets:
    """For each anchor line, three words contracting a theta2 plane and
    three contracting a theta2 line, all with contracting theta1 line
    delta-close to the anchor, epsilon-hyperbolic, and s below q.

    Built by conjugating seed words with growing powers of a carrier word
    whose attracting line sits at the anchor, then raising each conjugate
    to the smallest power that is hyperbolic with s below q_target;
    powering changes neither the splitting nor the contracting spaces, so
    the proximity and dimension conditions survive it.  Each triple takes
    one candidate per distinct seed, since conjugates of a single seed
    share a limiting contracting space and fail the rank condition.
    Raises SearchBudgetError when the budget runs out.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    _require_structure(gens, structure)
    anchors = _validate_anchors(anchors, structure)
    tracker = _Budget(budget)
    s_sets, t_sets = [], []
    margins, contractions = [], []
    for anchor in anchors:
        carrier = _find_carrier(gens, structure, anchor, delta / 2.0,
                                tracker, max_len=4, tol=tol)
        carrier_theta1, _ = _theta_blocks(gens.evaluate(carrier), structure)
        triples = {}
        for target_dim in (2, 1):
            triple = _select_triple(gens, structure, anchor, carrier,
                                    carrier_theta1, target_dim, delta,
                                    tracker, tol, q_target, max_len=4)
            triples[target_dim] = triple
            margins.extend(c["margin"] for c in triple)
            contractions.extend(c["s"] for c in triple)
        s_sets.append(tuple(c["word"] for c in triples[2]))
        t_sets.append(tuple(c["word"] for c in triples[1]))
    s_max = max(contractions)
    return EscortSets(
        anchors=anchors,
        s_words=tuple(s_sets),
        t_words=tuple(t_sets),
        eps=min(margins),
        q=s_max + (1.0 - s_max) * 0.01,
        delta=delta,
    )


def check_escort_conditions(gens: GeneratorSet, structure: CaseTwoStructure,
                            escorts: EscortSets,
                            tol: float = 1e-8) -> EscortCheck:
    """Independent re-verification of all six escort conditions from the
    recorded words alone."""
    failures = []
    proximities, margins, contractions = [], [], []
    dims_ok = True
    s_sigmas, t_sigmas = [], []
    for i, anchor in enumerate(escorts.anchors):
        for target_dim, triple in ((2, escorts.s_words[i]), (1, escorts.t_words[i])):
            spaces = []
            for word in triple:
                amap = gens.evaluate(word)
                theta1, theta2 = _theta_blocks(amap, structure)
                proximities.append(
                    proj_distance(three_splitting(theta1, tol).aminus, anchor))
                linear = amap.linear
                if not is_hyperbolic(linear, tol):
                    failures.append(f"anchor {i}: word {gens.word_str(word)} not hyperbolic")
                margins.append(hyperbolicity_margin(linear, tol))
                contractions.append(spectral_stats(linear, tol).s)
                contracting = three_splitting(theta2, tol).aminus
                if contracting.dim != target_dim:
                    dims_ok = False
                    failures.append(
                        f"anchor {i}: contracting theta2 dimension "
                        f"{contracting.dim} != {target_dim}")
                spaces.append({"contracting": contracting})
            sigma = _triple_sigma(spaces, target_dim)
            (s_sigmas if target_dim == 2 else t_sigmas).append(sigma)
            if sigma < RANK_FLOOR:
                label = "intersection" if target_dim == 2 else "sum"
                failures.append(f"anchor {i}: degenerate triple {label} "
                                f"(sigma_min {sigma:.3e})")
    proximity_max = max(proximities)
    if proximity_max >= escorts.delta:
        failures.append(f"proximity {proximity_max:.3e} exceeds delta")
    eps_measured = min(margins)
    if eps_measured < escorts.eps - 1e-12:
        failures.append("measured hyperbolicity margin below recorded eps")
    s_max = max(contractions)
    if not s_max < escorts.q < 1.0:
        failures.append(f"contraction bound violated: s_max {s_max:.6f}, q {escorts.q:.6f}")
    return EscortCheck(
        all_pass=not failures,
        proximity_max=proximity_max,
        eps_measured=eps_measured,
        s_max=s_max,
        dims_ok=dims_ok,
        s_triple_sigma_min=min(s_sigmas),
        t_triple_sigma_min=min(t_sigmas),
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class ScanConfig:
    max_len: int = 6
    max_exp: int = 12
    radius: float = 1.0
    margin: float = SIGN_MARGIN
    trans_eps: float = TRANSVERSALITY_EPS
    tol: float = 1e-8
    seed: int = 0
    threads: Optional[int] = None
    structure: Optional[Structure] = None


def infer_structure(gens: GeneratorSet, tol: float = 1e-8) -> Optional[Structure]:
    """Standard form in odd dimensions, or the coordinate block splitting
    in dimension 6, when the generators actually preserve it."""
    n = gens.ambient
    if n % 2 == 1 and n >= 3:
        form = standard_form((n + 1) // 2, n // 2)
        if all(form.preserved_by(m.linear, tol) for m in gens.maps):
            return form
    if n == 6:
        eye = np.eye(6)
        try:
            structure = CaseTwoStructure(v1=Subspace(eye[:, :3]),
                                         v2=Subspace(eye[:, 3:]),
                                         b1=standard_form(2, 1))
            b1 = structure.b1
            for amap in gens.maps:
                theta1, _ = structure.blocks(amap.linear, tol)
                if not b1.preserved_by(theta1, 1e-6):
                    return None
            return structure
        except MargulisError:
            return None
    return None


def _eigenvalue_failure_payload(fail, gens: GeneratorSet) -> dict:
    payload = {
        **_word_payload(fail.word, gens),
        "moduli": [float(x) for x in fail.moduli],
        "residual": fail.residual,
        "infinite_order": fail.infinite_order,
    }
    if fail.fixed_point is not None:
        payload["fixed_point"] = [float(x) for x in fail.fixed_point]
    return payload


def properness_scan(gens: GeneratorSet,
                    config: Optional[ScanConfig] = None) -> ObstructionReport:
    """Full obstruction pipeline: eigenvalue-one certificate, sign scan
    with transversal pairing, and a ball-intersection probe on any
    opposite-sign pair found."""
    cfg = config or ScanConfig()
    threads = worker_count(cfg.threads)
    cert = eigenvalue_one_certificate(gens, cfg.max_len, cfg.tol)
    base_budget = {
        "max_len": cfg.max_len,
        "max_exp": cfg.max_exp,
        "radius": cfg.radius,
        "seed": cfg.seed,
        "threads": threads,
        "eigenvalue_words_checked": cert.words_checked,
    }
    if not cert.all_pass:
        ranked = sorted(cert.failures,
                        key=lambda f: (f.infinite_order is not True,))
        fail = ranked[0]
        return ObstructionReport(
            "eigenvalue-one-violation",
            {"eigenvalue_one": _eigenvalue_failure_payload(fail, gens)},
            {"tolerance": cfg.tol},
            {**base_budget, "failures": len(cert.failures)},
        )
    structure = cfg.structure if cfg.structure is not None else infer_structure(gens, cfg.tol)
    if structure is not None:
        report = opposite_sign_search(gens, structure, cfg.max_len,
                                      margin=cfg.margin,
                                      trans_eps=cfg.trans_eps, tol=cfg.tol)
        budget = {**base_budget, **report.budget}
        if report.verdict != "opposite-sign-pair-found":
            return replace(report, budget=budget)
        witnesses = dict(report.witnesses)
        g_map = gens.evaluate(_word_from_payload(witnesses["first"]))
        h_map = gens.evaluate(_word_from_payload(witnesses["conjugated_second"]))
        try:
            ball = ball_intersection_witness(g_map, h_map, cfg.radius,
                                             cfg.max_exp, threads=threads)
        except ValueError:
            ball = None
        if ball is not None:
            witnesses["ball"] = {**ball.to_dict(), "radius": cfg.radius}
        return ObstructionReport(report.verdict, witnesses, report.margins,
                                 budget, report.note)
    # no sign structure available: probe generator pairs for ball witnesses
    for i, j in itertools.permutations(range(len(gens)), 2):
        g_map, h_map = gens.maps[i], gens.maps[j]
        try:
            ball = ball_intersection_witness(g_map, h_map, cfg.radius,
                                             cfg.max_exp, threads=threads)
        except (ValueError, MargulisError):
            continue
        if ball is not None:
            witnesses = {
                "ball": {**ball.to_dict(), "radius": cfg.radius},
                "first": {"letters": [[i, 1]], "display": gens.labels[i]},
                "second": {"letters": [[j, 1]], "display": gens.labels[j]},
            }
            return ObstructionReport("ball-witness-found", witnesses,
                                     {"tolerance": cfg.tol}, base_budget)
    return ObstructionReport("no-obstruction-within-budget", {},
                             {"tolerance": cfg.tol}, base_budget)


def verify_report(report: ObstructionReport, gens: GeneratorSet,
                  structure: Optional[Structure] = None,
                  tol: float = 1e-8) -> bool:
    """Replay every witness in a report from its recorded words.

    Returns True when the recomputed quantities support the verdict;
    raises MargulisError subclasses or ValueError when a recorded witness
    does not check out.
    """
    if report.verdict == "no-obstruction-within-budget":
        return True
    if report.verdict == "eigenvalue-one-violation":
        payload = report.witnesses["eigenvalue_one"]
        amap = gens.evaluate(_word_from_payload(payload))
        eigvals = np.linalg.eigvals(amap.linear)
        if np.min(np.abs(eigvals - 1.0)) <= report.margins["tolerance"]:
            raise ValueError("replayed word has eigenvalue one after all")
        if "fixed_point" in payload:
            point = fixed_point(amap)
            recorded = np.asarray(payload["fixed_point"])
            if not np.allclose(point, recorded, rtol=1e-8, atol=1e-8):
                raise ValueError("replayed fixed point does not match the record")
        return True
    if report.verdict == "ball-witness-found":
        ball = report.witnesses["ball"]
        g_map = gens.evaluate(_word_from_payload(report.witnesses["first"]))
        h_map = gens.evaluate(_word_from_payload(report.witnesses["second"]))
        return _replay_ball(ball, g_map, h_map)
    # opposite-sign-pair-found
    if structure is None:
        structure = infer_structure(gens, tol)
        if structure is None:
            raise ValueError("sign replay needs the structure the scan used")
    first = report.witnesses["first"]
    conjugated = report.witnesses["conjugated_second"]
    g_map = gens.evaluate(_word_from_payload(first))
    h_map = gens.evaluate(_word_from_payload(conjugated))
    alpha_g = _alpha_of(g_map, structure, tol)
    alpha_h = _alpha_of(h_map, structure, tol)
    margin = report.margins["sign_margin"]
    if not (alpha_g > margin and alpha_h < -margin):
        raise ValueError("replayed signs do not form an opposite pair")
    if not np.isclose(alpha_g, first["alpha"], rtol=1e-9, atol=1e-12):
        raise ValueError("replayed alpha differs from the recorded value")
    if not np.isclose(alpha_h, conjugated["alpha"], rtol=1e-9, atol=1e-12):
        raise ValueError("replayed alpha differs from the recorded value")
    margins4 = transversality_margins(g_map, h_map, tol)
    if min(margins4.values()) < report.margins["transversality_eps"]:
        raise ValueError("replayed pair is not transversal at the recorded eps")
    if "ball" in report.witnesses:
        if not _replay_ball(report.witnesses["ball"], g_map, h_map):
            return False
    return True


def _replay_ball(ball: dict, g_map: AffineMap, h_map: AffineMap) -> bool:
    radius = ball["radius"]
    x = np.asarray(ball["point"], dtype=float)
    p_source = np.asarray(ball["source_anchor"], dtype=float)
    p_target = np.asarray(ball["target_anchor"], dtype=float)
    composite = h_map.power(ball["m"]) @ g_map.power(ball["n"])
    slack_source = radius - float(np.linalg.norm(x - p_source))
    slack_target = radius - float(np.linalg.norm(composite(x) - p_target))
    if slack_source < BALL_SLACK or slack_target < BALL_SLACK:
        raise ValueError("replayed ball witness loses its certification slack")
    anchor_source = _ball_anchor(g_map)
    anchor_target = _ball_anchor(h_map)
    if not (np.allclose(anchor_source, p_source, rtol=1e-8, atol=1e-10)
            and np.allclose(anchor_target, p_target, rtol=1e-8, atol=1e-10)):
        raise ValueError("replayed anchors differ from the recorded ones")
    return True
