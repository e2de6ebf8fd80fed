import numpy as np
import pytest

from margulis.affine import (
    AffineMap,
    affine_subspaces,
    axis_point,
    fixed_point,
    has_eigenvalue_one,
    invariant_line,
)
from margulis.corpus import lorentz_boost
from margulis.errors import (
    NoAxisError,
    NoFixedPointError,
    SingularMatrixError,
    ZeroAxisTranslationError,
)


def boost_with_neutral_translation(strength=2.0, shift=1.5):
    # translation along e2, the neutral axis of the boost
    return AffineMap(lorentz_boost(strength), np.array([0.0, shift, 0.0]))


class TestAffineMapAlgebra:
    def test_call(self):
        g = AffineMap(np.diag([2.0, 3.0]), np.array([1.0, -1.0]))
        assert np.allclose(g(np.array([1.0, 1.0])), [3.0, 2.0])

    def test_identity_and_translation(self):
        t = AffineMap.from_translation(np.array([1.0, 2.0]))
        assert np.allclose(t(np.zeros(2)), [1.0, 2.0])
        assert AffineMap.identity(2).approx_equal(t @ t.inverse())

    def test_compose_order(self):
        # compose(self, other) applies other first
        g = AffineMap(np.diag([2.0, 2.0]), np.zeros(2))
        h = AffineMap.from_translation(np.array([1.0, 0.0]))
        x = np.zeros(2)
        assert np.allclose((g @ h)(x), g(h(x)))
        assert np.allclose((g @ h)(x), [2.0, 0.0])
        assert np.allclose((h @ g)(x), [1.0, 0.0])

    def test_inverse(self):
        rng = np.random.default_rng(21)
        g = AffineMap(rng.standard_normal((3, 3)) + 3.0 * np.eye(3),
                      rng.standard_normal(3))
        gi = g.inverse()
        assert (g @ gi).approx_equal(AffineMap.identity(3))
        assert np.allclose(gi(g(np.ones(3))), np.ones(3))

    def test_singular_inverse_rejected(self):
        with pytest.raises(SingularMatrixError):
            AffineMap(np.zeros((2, 2)), np.zeros(2)).inverse()

    def test_power(self):
        g = boost_with_neutral_translation()
        x = np.array([0.3, -0.2, 0.9])
        assert np.allclose(g.power(3)(x), g(g(g(x))))
        assert np.allclose(g.power(-2)(x), g.inverse()(g.inverse()(x)))
        assert g.power(0).approx_equal(AffineMap.identity(3))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            AffineMap(np.eye(2), np.zeros(3))
        with pytest.raises(ValueError):
            AffineMap.identity(2) @ AffineMap.identity(3)


class TestFixedPoint:
    def test_explicit_fixed_point(self):
        g = AffineMap(np.diag([2.0, 0.5]), np.array([1.0, 1.0]))
        p = fixed_point(g)
        assert np.allclose(g(p), p, atol=1e-12)
        assert np.allclose(p, [-1.0, 2.0])

    def test_translation_has_no_fixed_point(self):
        with pytest.raises(NoFixedPointError):
            fixed_point(AffineMap.from_translation(np.array([1.0, 0.0])))

    def test_neutral_boost_has_no_fixed_point(self):
        with pytest.raises(NoFixedPointError):
            fixed_point(boost_with_neutral_translation())

    def test_has_eigenvalue_one(self):
        assert has_eigenvalue_one(lorentz_boost(2.0))
        assert not has_eigenvalue_one(np.diag([2.0, 0.5]))


class TestInvariantLine:
    def test_boost_axis(self):
        g = boost_with_neutral_translation(shift=1.5)
        line = invariant_line(g)
        assert np.allclose(np.abs(line.direction), [0.0, 1.0, 0.0], atol=1e-12)
        assert np.allclose(line.t_g, [0.0, 1.5, 0.0], atol=1e-12)
        assert np.allclose(g(line.point), line.point + line.t_g, atol=1e-10)

    def test_axis_translation_independent_of_generic_offset(self):
        # adding a component off the neutral axis shifts the line,
        # not the translation along it
        g = AffineMap(lorentz_boost(2.0), np.array([0.7, 1.5, -0.4]))
        line = invariant_line(g)
        assert np.allclose(line.t_g, [0.0, 1.5, 0.0], atol=1e-10)
        assert np.allclose(g(line.point), line.point + line.t_g, atol=1e-9)

    def test_conjugation_moves_the_line(self):
        g = boost_with_neutral_translation()
        rng = np.random.default_rng(22)
        q = AffineMap(np.linalg.qr(rng.standard_normal((3, 3)))[0],
                      rng.standard_normal(3))
        conj = q @ g @ q.inverse()
        line = invariant_line(conj)
        base = invariant_line(g)
        assert np.allclose(np.abs(line.direction),
                           np.abs(q.linear @ base.direction), atol=1e-9)
        assert np.allclose(conj(line.point), line.point + line.t_g, atol=1e-8)

    def test_zero_axis_translation(self):
        with pytest.raises(ZeroAxisTranslationError):
            invariant_line(AffineMap(lorentz_boost(2.0), np.zeros(3)))
        # translation entirely off the neutral axis also has zero component
        with pytest.raises(ZeroAxisTranslationError):
            invariant_line(AffineMap(lorentz_boost(2.0),
                                     np.array([1.0, 0.0, 0.0])))

    def test_no_neutral_eigenvalue(self):
        with pytest.raises(NoAxisError):
            invariant_line(AffineMap(np.diag([2.0, 0.5]), np.ones(2)))

    def test_all_neutral_rejected(self):
        with pytest.raises(NoAxisError):
            invariant_line(AffineMap.from_translation(np.ones(2)))

    def test_axis_point_solves_offaxis_equation(self):
        g = AffineMap(lorentz_boost(2.0), np.array([0.7, 1.5, -0.4]))
        p = axis_point(g)
        # residual of (L - I) p = -t_rest, t_rest = off-neutral component
        t_rest = np.array([0.7, 0.0, -0.4])
        assert np.allclose((g.linear - np.eye(3)) @ p, -t_rest, atol=1e-10)


class TestAffineSubspaces:
    def test_spans_and_invariance(self):
        g = boost_with_neutral_translation()
        eplus, eminus = affine_subspaces(g)
        assert eplus.span.dim == 2 and eminus.span.dim == 2
        assert eplus.span.contains(np.array([1.0, 0.0, 1.0]))
        assert eminus.span.contains(np.array([1.0, 0.0, -1.0]))
        # both contain the invariant line and are preserved by g
        line = invariant_line(g)
        for sub in (eplus, eminus):
            assert sub.contains(line.point)
            assert sub.contains(line.point + 2.0 * line.direction)
            assert sub.contains(g(sub.point))
            for v in sub.span.basis.T:
                assert sub.contains(g(sub.point + v))

    def test_contains_rejects_off_plane(self):
        g = boost_with_neutral_translation()
        eplus, _ = affine_subspaces(g)
        off = eplus.point + np.array([1.0, 0.0, -1.0])
        assert not eplus.contains(off)
