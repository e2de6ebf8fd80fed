"""Deterministic fixture groups: lattices, Lorentz pairs, block embeddings.

Every builder is a pure function of its parameters.  The Lorentz pair
fixture does not claim proper discontinuity; its contract is about the
signs alpha takes on the two generators.
"""

from __future__ import annotations

import numpy as np

from .affine import AffineMap
from .signform import CaseTwoStructure, QuadraticForm, oriented_neutral_vector, standard_form
from .projective import Subspace
from .words import GeneratorSet, transversality_margins

TRANSVERSALITY_FLOOR = 1e-6


def translation_lattice(n: int) -> GeneratorSet:
    """Z^n as n standard-basis translations."""
    if not 1 <= n <= 8:
        raise ValueError(f"lattice rank must be between 1 and 8, got {n}")
    items = []
    for i in range(n):
        t = np.zeros(n)
        t[i] = 1.0
        items.append((f"t{i + 1}", AffineMap.from_translation(t)))
    return GeneratorSet.build(items)


def lorentz_boost(strength: float) -> np.ndarray:
    """SO(2,1) boost in the (e1, e3) plane with top eigenvalue `strength`."""
    if strength <= 1.0:
        raise ValueError("boost strength must exceed 1")
    c = 0.5 * (strength + 1.0 / strength)
    s = 0.5 * (strength - 1.0 / strength)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def _spacelike_rotation(angle: float) -> np.ndarray:
    # rotation in the (e1, e2) plane; preserves diag(1, 1, -1)
    ca, sa = np.cos(angle), np.sin(angle)
    return np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])


def margulis_pair(boost_strength: float = 4.0, angle: float = np.pi / 2,
                  translation_scale: float = 2.0,
                  sign_flip: bool = False) -> GeneratorSet:
    """Two Lorentz hyperbolics translated along their neutral vectors.

    The linear parts are a boost and its conjugate by a spacelike rotation
    through `angle`; each translation is translation_scale times the
    oriented neutral vector, so alpha equals translation_scale on both
    generators.  With sign_flip the second translation is reversed and its
    alpha negates, producing an opposite-sign pair.

    The default strength keeps the unflipped pair's whole length-6 word
    ball uniformly positive in alpha (weaker boosts leak negative signs
    into long mixed words: at strength 2 the first ones appear at length
    6, e.g. a b a b a^-1 b^-1).
    """
    form = standard_form(2, 1)
    l1 = lorentz_boost(boost_strength)
    r = _spacelike_rotation(angle)
    l2 = r @ l1 @ r.T
    margins = transversality_margins(l1, l2)
    worst = min(margins.values())
    if worst < TRANSVERSALITY_FLOOR:
        raise ValueError(
            f"angle {angle} leaves the axes non-transversal (margin {worst:.3e})"
        )
    if translation_scale <= 0:
        raise ValueError("translation scale must be positive")
    t1 = translation_scale * oriented_neutral_vector(l1, form)
    t2 = translation_scale * oriented_neutral_vector(l2, form)
    if sign_flip:
        t2 = -t2
    return GeneratorSet.build([
        ("a", AffineMap(l1, t1)),
        ("b", AffineMap(l2, t2)),
    ])


# fixed rotation (z 0.9, y 0.7, x 0.5 composed) conjugating the second
# SL3 block off every coordinate subspace; all entries and all 2x2
# minors exceed 0.14.  A triangular conjugator would leave the two
# blocks sharing an invariant flag, and then every word's contracting
# plane is the same flag plane: escort triples need these separated.
_SL3_MIX = np.array([
    [0.47543352776997644, -0.4954470551024761, 0.7269767370848115],
    [0.5991214669182833, 0.787448040279461, 0.14484147105618878],
    [-0.644217687237691, 0.3666848775860826, 0.6712121661589577],
])


def case23_fixture(boost_strength: float = 2.0, angle: float = np.pi / 3,
                   translation_scale: float = 1.0,
                   sl3_moduli: tuple[float, float] = (2.0, 3.0),
                   ) -> tuple[GeneratorSet, CaseTwoStructure]:
    """Block generators on R^6 = V1 + V2 for the SO(2,1) x SL3 case.

    V1 carries the signature-(2,1) form and two transversal boosts with
    neutral-direction translations; V2 carries SL3 elements whose word
    ball realizes both one- and two-dimensional contracting spaces
    (the first generator contracts one direction, the second two).
    """
    mu, nu = sl3_moduli
    if mu <= 1.0 or nu <= 1.0 or abs(mu - nu) < 1e-9:
        raise ValueError("sl3 moduli must be distinct and exceed 1")
    b1 = standard_form(2, 1)
    theta1_a = lorentz_boost(boost_strength)
    r = _spacelike_rotation(angle)
    theta1_b = r @ theta1_a @ r.T
    worst = min(transversality_margins(theta1_a, theta1_b).values())
    if worst < TRANSVERSALITY_FLOOR:
        raise ValueError(
            f"angle {angle} leaves the V1 axes non-transversal (margin {worst:.3e})"
        )
    # det 1 with distinct moduli mu, nu, 1/(mu nu)
    theta2_a = np.diag([mu, nu, 1.0 / (mu * nu)])
    theta2_b = _SL3_MIX @ np.diag([1.0 / mu, 1.0 / nu, mu * nu]) @ _SL3_MIX.T

    def assemble(theta1, theta2, tau1):
        linear = np.zeros((6, 6))
        linear[:3, :3] = theta1
        linear[3:, 3:] = theta2
        translation = np.concatenate([tau1, np.zeros(3)])
        return AffineMap(linear, translation)

    tau_a = translation_scale * oriented_neutral_vector(theta1_a, b1)
    tau_b = translation_scale * oriented_neutral_vector(theta1_b, b1)
    gens = GeneratorSet.build([
        ("a", assemble(theta1_a, theta2_a, tau_a)),
        ("b", assemble(theta1_b, theta2_b, tau_b)),
    ])
    eye6 = np.eye(6)
    structure = CaseTwoStructure(
        v1=Subspace(eye6[:, :3]),
        v2=Subspace(eye6[:, 3:]),
        b1=b1,
    )
    return gens, structure
