import numpy as np
import pytest

from margulis.affine import AffineMap
from margulis.corpus import lorentz_boost, margulis_pair, translation_lattice
from margulis.errors import (
    NotHyperbolicError,
    SearchBudgetError,
    SingularMatrixError,
)
from margulis.words import (
    GeneratorSet,
    Word,
    eigenvalue_one_certificate,
    find_transversal_conjugator,
    iter_words,
    product_contraction_report,
    transversality_check,
    transversality_margins,
    word_ball,
)


A = Word(((0, 1),))
B = Word(((1, 1),))


class TestWord:
    def test_reduction_enforced(self):
        with pytest.raises(ValueError, match="reduced"):
            Word(((0, 1), (0, -1)))

    def test_letter_validation(self):
        with pytest.raises(ValueError):
            Word(((0, 2),))
        with pytest.raises(ValueError):
            Word(((-1, 1),))

    def test_concat_reduces_across_join(self):
        left = A * B
        right = B.inverse() * A
        assert (left * right).letters == ((0, 1), (0, 1))

    def test_full_cancellation(self):
        w = A * B
        assert (w * w.inverse()).letters == ()

    def test_inverse(self):
        assert (A * B).inverse().letters == ((1, -1), (0, -1))

    def test_power(self):
        ab = A * B
        assert ab.power(2).letters == ((0, 1), (1, 1), (0, 1), (1, 1))
        assert ab.power(-1) == ab.inverse()
        assert ab.power(0) == Word(())

    def test_power_telescopes_conjugates(self):
        w = B.conjugate_by(A)  # a b a^-1
        assert w.power(3).letters == ((0, 1), (1, 1), (1, 1), (1, 1), (0, -1))

    def test_conjugate_by(self):
        assert B.conjugate_by(A).letters == ((0, 1), (1, 1), (0, -1))


class TestGeneratorSet:
    def test_build_and_word_str(self):
        gens = margulis_pair()
        assert gens.labels == ("a", "b")
        assert gens.word_str(A * B.inverse()) == "a b^-1"
        assert gens.word_str(Word(())) == "1"

    def test_duplicate_labels_rejected(self):
        m = AffineMap.identity(2)
        with pytest.raises(ValueError):
            GeneratorSet(("a", "a"), (m, m))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GeneratorSet.build([("a", AffineMap.identity(2)),
                                ("b", AffineMap.identity(3))])

    def test_singular_generator_rejected(self):
        with pytest.raises(SingularMatrixError):
            GeneratorSet.build([("a", AffineMap(np.zeros((2, 2)), np.zeros(2)))])

    def test_evaluate_is_homomorphism(self):
        gens = margulis_pair()
        w1 = A * B * A.inverse()
        w2 = B * A
        lhs = gens.evaluate(w1 * w2)
        rhs = gens.evaluate(w1) @ gens.evaluate(w2)
        assert lhs.approx_equal(rhs, tol=1e-12)
        assert gens.evaluate(w1.inverse()).approx_equal(gens.evaluate(w1).inverse())

    def test_evaluate_applies_rightmost_letter_first(self):
        scale = AffineMap(2.0 * np.eye(2), np.zeros(2))
        shift = AffineMap.from_translation(np.array([1.0, 0.0]))
        gens = GeneratorSet.build([("a", scale), ("b", shift)])
        assert np.allclose(gens.evaluate(A * B)(np.zeros(2)), [2.0, 0.0])
        assert np.allclose(gens.evaluate(B * A)(np.zeros(2)), [1.0, 0.0])


class TestWordEnumeration:
    def test_counts_two_generators(self):
        gens = margulis_pair()
        words = [w for w, _ in iter_words(gens, 4)]
        assert len(words) == 160
        by_len = {}
        for w in words:
            by_len[len(w)] = by_len.get(len(w), 0) + 1
        assert by_len == {1: 4, 2: 12, 3: 36, 4: 108}
        assert len(set(words)) == 160

    def test_shortlex_prefix(self):
        gens = margulis_pair()
        names = [gens.word_str(w) for w, _ in iter_words(gens, 2)][:7]
        assert names == ["a", "a^-1", "b", "b^-1", "a a", "a b", "a b^-1"]

    def test_all_reduced(self):
        gens = translation_lattice(1)
        words = [w for w, _ in iter_words(gens, 5)]
        assert [len(w) for w in words] == [1, 1, 2, 2, 3, 3, 4, 4, 5, 5]

    def test_maps_match_evaluate(self):
        gens = margulis_pair()
        for word, m in iter_words(gens, 3):
            assert m.approx_equal(gens.evaluate(word), tol=1e-10)

    def test_empty_and_invalid(self):
        gens = margulis_pair()
        assert list(iter_words(gens, 0)) == []
        with pytest.raises(ValueError):
            list(iter_words(gens, -1))

    def test_word_ball_budget(self):
        gens = margulis_pair()
        items, truncated = word_ball(gens, 4, budget=5)
        assert len(items) == 5 and truncated
        items, truncated = word_ball(gens, 4)
        assert len(items) == 160 and not truncated


class TestTransversality:
    def test_margulis_pair_margins(self):
        gens = margulis_pair()
        m = transversality_margins(*gens.maps)
        assert set(m) == {"aplus1_dminus2", "aminus1_dplus2",
                          "aplus2_dminus1", "aminus2_dplus1"}
        assert all(np.isclose(v, 0.5) for v in m.values())
        m3 = transversality_margins(*margulis_pair(angle=np.pi / 3).maps)
        assert all(np.isclose(v, 0.75) for v in m3.values())

    def test_check_symmetry_and_eps(self):
        g, h = margulis_pair().maps
        assert transversality_check(g, h, 0.49)
        assert not transversality_check(g, h, 0.51)
        assert transversality_check(h, g, 0.49)
        with pytest.raises(ValueError):
            transversality_check(g, h, 0.0)

    def test_same_axes_not_transversal(self):
        g, _ = margulis_pair().maps
        assert not transversality_check(g, g.inverse(), 1e-6)


class TestTransversalConjugator:
    def diag_map(self):
        return AffineMap(np.diag([2.0, 3.0, 1.0 / 6.0]), np.zeros(3))

    def rotation_gens(self):
        c, s = np.cos(0.5), np.sin(0.5)
        rot = np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
        return GeneratorSet.build([("r", AffineMap(rot, np.zeros(3)))])

    def test_finds_rotating_word(self):
        g = self.diag_map()
        found = find_transversal_conjugator(g, self.rotation_gens())
        assert found.margin >= 1e-6
        assert len(found.word) >= 1  # identity cannot work here
        from margulis.spectral import three_splitting
        from margulis.projective import subspace_sum

        image = found.w.map(found.conjugator.linear)
        total = subspace_sum(image, three_splitting(g.linear).dplus())
        assert total.dim == 3

    def test_budget_exhaustion_reports_best(self):
        g = self.diag_map()
        with pytest.raises(SearchBudgetError, match="best margin"):
            find_transversal_conjugator(g, self.rotation_gens(), budget=1)

    def test_trivial_contracting_space_rejected(self):
        g = AffineMap(np.diag([2.0, 3.0]), np.zeros(2))
        with pytest.raises(ValueError):
            find_transversal_conjugator(g, GeneratorSet.build(
                [("r", AffineMap.identity(2))]))

    def test_requires_enough_expansion(self):
        g = AffineMap(np.diag([0.5, 1.0 / 3.0, 6.0]), np.zeros(3))
        with pytest.raises(ValueError):
            find_transversal_conjugator(g, self.rotation_gens())


class TestContractionReport:
    def test_margulis_pair_report(self):
        g, h = margulis_pair(boost_strength=2.0).maps
        rep = product_contraction_report(g, h, eps=0.49)
        assert np.isclose(rep.s_g, 0.5)
        assert np.isclose(rep.s_h, 0.5)
        assert rep.s_gh < rep.s_g  # the product contracts harder
        assert np.isclose(rep.ratio_s, rep.s_gh / (rep.s_g * rep.s_h))
        assert np.isclose(rep.ratio_rho_plus, rep.rho_plus / rep.s_g)
        assert rep.gh_half_eps_hyperbolic
        assert rep.gh_half_eps_transversal_g
        assert rep.gh_half_eps_transversal_h
        assert np.isclose(rep.margin_gh, 0.944444444, atol=1e-8)

    def test_rejects_weak_hyperbolicity(self):
        g, h = margulis_pair().maps
        with pytest.raises(NotHyperbolicError):
            product_contraction_report(g, h, eps=1.5)  # margins are 1.0

    def test_rejects_non_hyperbolic(self):
        g, _ = margulis_pair().maps
        flat = AffineMap.identity(3)
        with pytest.raises(NotHyperbolicError):
            product_contraction_report(flat, g, eps=0.1)

    def test_rejects_non_transversal(self):
        g, _ = margulis_pair().maps
        with pytest.raises(ValueError, match="transversal"):
            product_contraction_report(g, g.inverse(), eps=0.1)


class TestEigenvalueOneCertificate:
    def test_expanding_generator_fails_with_witness(self):
        gens = GeneratorSet.build([
            ("a", AffineMap(np.diag([2.0, 3.0, 1.0 / 6.0]),
                            np.array([1.0, 0.0, 0.0]))),
        ])
        cert = eigenvalue_one_certificate(gens, max_len=2)
        assert not cert.all_pass
        assert cert.words_checked == 4
        first = cert.failures[0]
        assert first.label == "a"
        assert first.infinite_order is True
        assert first.residual is not None and first.residual < 1e-10
        m = gens.evaluate(first.word)
        assert np.allclose(m(first.fixed_point), first.fixed_point, atol=1e-10)

    def test_lorentz_pair_passes(self):
        cert = eigenvalue_one_certificate(margulis_pair(), max_len=3)
        assert cert.all_pass
        assert cert.words_checked == 52
        assert cert.failures == ()

    def test_translations_pass(self):
        cert = eigenvalue_one_certificate(translation_lattice(2), max_len=3)
        assert cert.all_pass

    def test_elliptic_failure_is_order_undecided(self):
        c, s = np.cos(1.0), np.sin(1.0)
        rot = np.array([[c, -s], [s, c]])
        gens = GeneratorSet.build([("r", AffineMap(rot, np.array([1.0, 0.0])))])
        cert = eigenvalue_one_certificate(gens, max_len=1)
        assert not cert.all_pass
        assert cert.failures[0].infinite_order is None
        assert cert.failures[0].moduli == pytest.approx((1.0, 1.0))
