"""Catalog of admissible semisimple linear parts in ambient dimension at most 6.

The tables are encoded as data; the checkable content is the eigenvalue-1
dichotomy, which verify_eigenvalue_one_generic re-tests by sampling random
group elements through Lie-algebra exponentials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import block_diag, expm

from .affine import has_eigenvalue_one
from .errors import NoSamplerError

EIGENVALUE_ONE_TOL = 1e-8
DET_RESAMPLE_FLOOR = 1e-3


@dataclass(frozen=True)
class RepEntry:
    """One catalog row: a group family in a fixed representation.

    `admissible` lists the family parameters allowed in a table row, or the
    ambient dimensions n where a case-list entry occurs.  `factors` encodes
    the standard-representation block structure used by the sampler; rows
    without a concrete real form carry None there.  A None
    eigenvalue_one_generic means the answer differs across the admissible
    parameters of the row.
    """

    family: str
    name: str
    parameter: Optional[int]
    admissible: tuple[int, ...]
    rep_dim: Optional[int]
    real_form: Optional[str]
    real_rank: int
    eigenvalue_one_generic: Optional[bool]
    v1_dim: Optional[int] = None
    factors: Optional[tuple[tuple[str, tuple[int, ...]], ...]] = None
    # set on a row standing for several group parameters at once; the
    # sampler then checks every member
    family_parameters: Optional[tuple[int, ...]] = None


def rep_dim_for(family: str, k: int) -> int:
    """Dimension of the family's representation at parameter k."""
    formulas = {
        "SL": lambda m: m,
        "SO": lambda m: m,
        "Sp": lambda m: 2 * m,
        "AdSL": lambda m: m * m - 1,
        "Sym2SL": lambda m: m * (m + 1) // 2,
        "Ext2SL": lambda m: m * (m - 1) // 2,
        "Ext2SO": lambda m: m * (m - 1) // 2,
        "Ext2_0Sp": lambda m: (m - 1) * (2 * m + 1),
    }
    if family not in formulas:
        raise ValueError(f"unknown family {family!r}")
    return formulas[family](k)


# complex families with representation dimension <= 6; the flag records
# whether every regular element keeps 1 as an eigenvalue, None when the
# admissible parameters disagree (SO_n: yes for odd n only; S^2 SL_n:
# yes for n = 2 only)
_TABLE1 = (
    RepEntry("SL", "SL_n", None, (3, 4, 5), None, None, 2, False),
    RepEntry("SO", "SO_n", None, (3, 5, 6), None, None, 1, None),
    RepEntry("Sp", "Sp_2n", None, (2, 3), None, None, 2, False),
    RepEntry("AdSL", "Ad SL_2", 2, (2,), 3, None, 1, True),
    RepEntry("Sym2SL", "S^2 SL_n", None, (2, 3), None, None, 1, None),
    RepEntry("Ext2SL", "L^2 SL_4", 4, (4,), 6, None, 3, False),
    RepEntry("Ext2SO", "L^2 SO_3", 3, (3,), 3, None, 1, True),
    RepEntry("Ext2_0Sp", "L^2_0 Sp_4", 2, (2,), 5, None, 2, True),
)

_TABLE2 = (
    RepEntry("SL", "SL_n(R)", None, (3, 4, 5), None, "split", 2, False),
    RepEntry("SO", "SO(3,2)", 5, (5,), 5, "SO(3,2)", 2, True,
             factors=(("SO", (3, 2)),)),
    RepEntry("Sp", "Sp4(R)", 2, (2,), 4, "Sp(4,R)", 2, False,
             factors=(("Sp", (4,)),)),
)

# the rank-1 catalog note: SO_3 over the realified complex field acts
# irreducibly on R^5 with eigenvalue 1 generic, but its real rank is 1,
# so assumption (A) excludes it from the admissible lists
RANK_ONE_NOTE = RepEntry("SO", "SO3(sigma(C))", 3, (5,), 5,
                         "SO3 over realified C", 1, True)
RANK_ONE_REASON = "real rank 1; excluded by the rank assumption (max rank >= 2)"


def table1() -> list[RepEntry]:
    """The eight complex families admitting a representation of dim <= 6."""
    return list(_TABLE1)


def table2() -> list[RepEntry]:
    """Real forms surviving the rank and dimension constraints."""
    return list(_TABLE2)


def _sl_case1(ls: tuple[int, ...], n: int) -> RepEntry:
    # one catalog entry for the whole SL_l family; a single surviving l
    # collapses to a concrete row
    if len(ls) == 1:
        l = ls[0]
        return RepEntry("SL", f"SL{l}(R)", l, (n,), l, "split", l - 1, False,
                        v1_dim=l, factors=(("SL", (l,)),))
    return RepEntry("SL", f"SL_l(R), {min(ls)}<=l<={max(ls)}", None, (n,),
                    None, "split", min(ls) - 1, False, v1_dim=None,
                    family_parameters=ls)


_SP4_CASE1 = RepEntry("Sp", "Sp4(R)", 2, (6,), 4, "Sp(4,R)", 2, False,
                      v1_dim=4, factors=(("Sp", (4,)),))
_SL2XSL3_CASE1 = RepEntry("Product", "SL2(R)xSL3(R)", None, (6,), 5, "split x split",
                          3, False, v1_dim=5, factors=(("SL", (2,)), ("SL", (3,))))
_SO32_CASE2 = RepEntry("SO", "SO(3,2)", 5, (5, 6), 5, "SO(3,2)", 2, True,
                       v1_dim=5, factors=(("SO", (3, 2)),))
_SO3XSL3_CASE2 = RepEntry("Product", "SO(3)xSL3(R)", None, (6,), 6, "SO(3) x split",
                          2, True, v1_dim=6, factors=(("SO", (3, 0)), ("SL", (3,))))
_SO21XSL3_CASE2 = RepEntry("Product", "SO(2,1)xSL3(R)", None, (6,), 6, "SO(2,1) x split",
                           3, True, v1_dim=6, factors=(("SO", (2, 1)), ("SL", (3,))))


def admissible_semisimple(n: int) -> tuple[list[RepEntry], list[RepEntry]]:
    """Admissible semisimple parts in ambient dimension n, split by the
    eigenvalue-1 dichotomy on V1.

    The first list holds the groups whose regular elements restricted to V1
    avoid eigenvalue 1 (forcing a nontrivial fixed subspace V0); the second
    holds those where 1 is always present.  For n = 4 the first list is
    exactly SL3(R) and the second is empty.
    """
    if not 2 <= n <= 6:
        raise ValueError(f"ambient dimension must be between 2 and 6, got {n}")
    sl_params = tuple(l for l in (3, 4, 5) if l < n)
    case1 = [_sl_case1(sl_params, n)] if sl_params else []
    if n == 6:
        case1.append(_SP4_CASE1)
        case1.append(_SL2XSL3_CASE1)
    case2 = []
    if n in (5, 6):
        so32 = _SO32_CASE2
        case2.append(RepEntry(so32.family, so32.name, so32.parameter, (n,),
                              so32.rep_dim, so32.real_form, so32.real_rank,
                              so32.eigenvalue_one_generic, v1_dim=so32.v1_dim,
                              factors=so32.factors))
    if n == 6:
        case2.append(_SO3XSL3_CASE2)
        case2.append(_SO21XSL3_CASE2)
    return case1, case2


def _sample_sl(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        m = rng.standard_normal((n, n))
        d = np.linalg.det(m)
        if abs(d) > DET_RESAMPLE_FLOOR:
            break
    if d < 0:
        m[0] = -m[0]
        d = -d
    return m / d ** (1.0 / n)


def _sample_so(rng: np.random.Generator, p: int, q: int) -> np.ndarray:
    # Lie algebra of SO(p,q) for gram diag(+1_p, -1_q): skew diagonal
    # blocks, free off-diagonal block mirrored by transpose
    a = rng.standard_normal((p, p))
    d = rng.standard_normal((q, q))
    b = rng.standard_normal((p, q))
    x = np.zeros((p + q, p + q))
    x[:p, :p] = 0.5 * (a - a.T)
    x[p:, p:] = 0.5 * (d - d.T)
    x[:p, p:] = b
    x[p:, :p] = b.T
    return expm(x)


def _sample_sp4(rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2))
    c = rng.standard_normal((2, 2))
    b = 0.5 * (b + b.T)
    c = 0.5 * (c + c.T)
    x = np.block([[a, b], [c, -a.T]])
    return expm(x)


def _sample_factor(rng: np.random.Generator, factor: tuple[str, tuple[int, ...]]) -> np.ndarray:
    tag, params = factor
    if tag == "SL":
        return _sample_sl(rng, params[0])
    if tag == "SO":
        return _sample_so(rng, params[0], params[1])
    if tag == "Sp":
        return _sample_sp4(rng)
    raise NoSamplerError(f"no sampler for factor tag {tag!r}")


def verify_eigenvalue_one_generic(entry: RepEntry, samples: int = 200,
                                  seed: int = 0) -> bool:
    """Whether random elements of the entry's group all keep eigenvalue 1.

    Samples elements of the standard-representation block form recorded in
    entry.factors and returns True only when every sample has 1 in its
    spectrum within tolerance.  The result should match the entry's
    recorded flag; a mismatch means either the catalog or the sampler is
    wrong.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    if entry.family_parameters is not None:
        for param in entry.family_parameters:
            for _ in range(samples):
                m = _sample_factor(rng, (entry.family, (param,)))
                if not has_eigenvalue_one(m, EIGENVALUE_ONE_TOL):
                    return False
        return True
    if entry.factors is None:
        raise NoSamplerError(f"entry {entry.name!r} has no sampler description")
    for _ in range(samples):
        m = block_diag(*[_sample_factor(rng, f) for f in entry.factors])
        if not has_eigenvalue_one(m, EIGENVALUE_ONE_TOL):
            return False
    return True
