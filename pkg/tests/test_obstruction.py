import json

import numpy as np
import pytest

from margulis.affine import AffineMap
from margulis.corpus import case23_fixture, margulis_pair, translation_lattice
from margulis.errors import NotInGroupError
from margulis.obstruction import (
    BALL_SLACK,
    ObstructionReport,
    ScanConfig,
    VERDICTS,
    _word_from_payload,
    ball_intersection_witness,
    build_escort_sets,
    check_escort_conditions,
    infer_structure,
    opposite_sign_search,
    properness_scan,
    transversality_margin,
    verify_report,
    worker_count,
)
from margulis.projective import Subspace
from margulis.signform import CaseTwoStructure, QuadraticForm, standard_form
from margulis.spectral import three_splitting
from margulis.words import GeneratorSet, Word
from oracles import ball_min_distance, grid_line_infimum


def sl3_violating_gens():
    return GeneratorSet.build([
        ("a", AffineMap(np.diag([2.0, 3.0, 1.0 / 6.0]),
                        np.array([1.0, 0.0, 0.0]))),
    ])


class TestWorkerCount:
    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv("MARGULIS_THREADS", raising=False)
        assert worker_count() == 1

    def test_env_overrides_default(self, monkeypatch):
        monkeypatch.setenv("MARGULIS_THREADS", "7")
        assert worker_count() == 7

    def test_argument_overrides_env(self, monkeypatch):
        monkeypatch.setenv("MARGULIS_THREADS", "7")
        assert worker_count(3) == 3

    def test_bad_env_rejected(self, monkeypatch):
        monkeypatch.setenv("MARGULIS_THREADS", "many")
        with pytest.raises(ValueError):
            worker_count()


class TestInferStructure:
    def test_lorentz_pair(self):
        st = infer_structure(margulis_pair())
        assert isinstance(st, QuadraticForm)
        assert st.signature == (2, 1)

    def test_case23(self):
        gens, _ = case23_fixture()
        st = infer_structure(gens)
        assert isinstance(st, CaseTwoStructure)

    def test_plain_lattice_has_none(self):
        assert infer_structure(translation_lattice(2)) is None


class TestOppositeSignSearch:
    def test_flip_pair_found(self):
        gens = margulis_pair(sign_flip=True)
        rep = opposite_sign_search(gens, infer_structure(gens), 2)
        assert rep.verdict == "opposite-sign-pair-found"
        first, conj2 = rep.witnesses["first"], rep.witnesses["conjugated_second"]
        assert first["display"] == "a" and np.isclose(first["alpha"], 2.0)
        assert conj2["display"] == "b" and np.isclose(conj2["alpha"], -2.0)
        assert rep.witnesses["conjugator"]["display"] == "1"
        assert rep.margins["min_pair_margin"] >= rep.margins["transversality_eps"]
        assert np.isclose(rep.margins["min_pair_margin"], 0.5)
        assert rep.budget == {"max_len": 2, "words_scanned": 16,
                              "signed_words": 8, "positive_words": 4,
                              "negative_words": 4, "pair_cap": 60}

    def test_clean_pair_finds_nothing(self):
        gens = margulis_pair()
        rep = opposite_sign_search(gens, infer_structure(gens), 3)
        assert rep.verdict == "no-obstruction-within-budget"
        assert rep.witnesses == {}
        assert rep.budget["negative_words"] == 0
        assert rep.budget["signed_words"] == rep.budget["positive_words"]

    def test_structure_mismatch_rejected(self):
        with pytest.raises(NotInGroupError, match="dimension"):
            opposite_sign_search(translation_lattice(2), standard_form(2, 1), 1)
        with pytest.raises(NotInGroupError, match="preserve"):
            opposite_sign_search(sl3_violating_gens(), standard_form(2, 1), 1)


class TestBallWitness:
    def flip_maps(self):
        # strength 2: weak enough contraction that the witness needs
        # exponents past 1, exercising the grid walk
        gens = margulis_pair(boost_strength=2.0, sign_flip=True)
        return gens.maps[0], gens.maps[1]

    def test_flip_pair_witness(self):
        g, h = self.flip_maps()
        w = ball_intersection_witness(g, h, 1.0, 12)
        assert (w.m, w.n) == (4, 4)
        assert w.slack_source >= BALL_SLACK
        assert w.slack_target >= BALL_SLACK
        composite = h.power(w.m) @ g.power(w.n)
        assert np.linalg.norm(w.point - w.source_anchor) <= 1.0
        assert np.linalg.norm(composite(w.point) - w.target_anchor) <= 1.0

    def test_witness_against_slsqp_oracle(self):
        g, h = self.flip_maps()
        w = ball_intersection_witness(g, h, 1.0, 12)
        composite = h.power(w.m) @ g.power(w.n)
        rng = np.random.default_rng(41)
        inner = 1.0 - 2.0 * BALL_SLACK
        best = ball_min_distance(composite.linear, composite.translation,
                                 w.source_anchor, w.target_anchor, inner, rng)
        achieved = float(np.linalg.norm(composite(w.point) - w.target_anchor))
        # the witness point solves the same trust-region subproblem
        assert achieved <= best + 1e-6
        assert best <= 1.0 - BALL_SLACK

    def test_clean_pair_has_no_witness(self):
        gens = margulis_pair()
        assert ball_intersection_witness(gens.maps[0], gens.maps[1], 1.0, 6) is None

    def test_threads_agree(self):
        g, h = self.flip_maps()
        w1 = ball_intersection_witness(g, h, 1.0, 12, threads=1)
        w2 = ball_intersection_witness(g, h, 1.0, 12, threads=2)
        assert (w1.m, w1.n) == (w2.m, w2.n)
        assert np.allclose(w1.point, w2.point)

    def test_power_relation_rejected(self):
        g, _ = self.flip_maps()
        with pytest.raises(ValueError, match="shares dynamics"):
            ball_intersection_witness(g, g.power(2), 1.0, 4)

    def test_parameter_validation(self):
        g, h = self.flip_maps()
        with pytest.raises(ValueError, match="radius"):
            ball_intersection_witness(g, h, 3e-6, 4)
        with pytest.raises(ValueError, match="max_exp"):
            ball_intersection_witness(g, h, 1.0, 0)


class TestTransversalityMargin:
    def test_axis_lines_frozen_value(self):
        e = np.eye(3)
        family = [Subspace.span(e[i]) for i in range(3)]
        est = transversality_margin(family, 1)
        assert np.isclose(est.raw, 2.0, atol=1e-9)
        assert np.isclose(est.value, 0.02, atol=1e-11)
        assert est.minimizer.dim == 1
        assert est.samples == 2000

    def test_against_grid_oracle(self):
        e = np.eye(3)
        est = transversality_margin([Subspace.span(e[i]) for i in range(3)], 1)
        oracle = grid_line_infimum([e[0], e[1], e[2]])
        assert abs(est.value - oracle) <= 0.05 * oracle

    def test_common_line_reaches_zero(self):
        e = np.eye(3)
        family = [Subspace.span(e[0], e[1]), Subspace.span(e[0], e[2])]
        est = transversality_margin(family, 1)
        assert est.raw < 1e-6

    def test_validation(self):
        with pytest.raises(ValueError):
            transversality_margin([], 1)
        e3, e4 = np.eye(3), np.eye(4)
        with pytest.raises(ValueError):
            transversality_margin([Subspace.span(e3[0]),
                                   Subspace.span(e4[0])], 1)
        with pytest.raises(ValueError):
            transversality_margin([Subspace.span(e3[0])], 3)


class TestReportSerialization:
    def flip_report(self):
        gens = margulis_pair(sign_flip=True)
        return gens, opposite_sign_search(gens, infer_structure(gens), 2)

    def test_json_round_trip(self):
        _, rep = self.flip_report()
        back = ObstructionReport.from_json(rep.to_json())
        assert back.to_dict() == rep.to_dict()
        assert back.to_json(indent=2) == rep.to_json(indent=2)

    def test_unknown_verdict_rejected(self):
        _, rep = self.flip_report()
        doc = rep.to_dict()
        doc["verdict"] = "all-clear"
        with pytest.raises(ValueError, match="verdict"):
            ObstructionReport.from_dict(doc)

    def test_missing_fields_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            ObstructionReport.from_dict({"verdict": VERDICTS[0]})

    def test_verify_round_trip(self):
        gens, rep = self.flip_report()
        assert verify_report(rep, gens)
        assert verify_report(ObstructionReport.from_json(rep.to_json()), gens)

    def test_verify_detects_tampered_alpha(self):
        gens, rep = self.flip_report()
        doc = json.loads(rep.to_json())
        doc["witnesses"]["first"]["alpha"] = 3.5
        with pytest.raises(ValueError, match="alpha"):
            verify_report(ObstructionReport.from_dict(doc), gens)

    def test_verify_detects_swapped_word(self):
        gens, rep = self.flip_report()
        doc = json.loads(rep.to_json())
        # point "first" at the negative-sign word; replay must notice
        doc["witnesses"]["first"]["letters"] = doc["witnesses"]["conjugated_second"]["letters"]
        with pytest.raises(ValueError):
            verify_report(ObstructionReport.from_dict(doc), gens)


class TestPropernessScan:
    def test_eigenvalue_violation_ranked_first(self):
        rep = properness_scan(sl3_violating_gens(), ScanConfig(max_len=2))
        assert rep.verdict == "eigenvalue-one-violation"
        payload = rep.witnesses["eigenvalue_one"]
        assert payload["display"] == "a"
        assert payload["infinite_order"] is True
        assert payload["residual"] < 1e-10
        assert rep.budget["failures"] > 0
        assert verify_report(rep, sl3_violating_gens())

    def test_flip_pair_full_pipeline(self):
        gens = margulis_pair(sign_flip=True)
        rep = properness_scan(gens, ScanConfig(max_len=2))
        assert rep.verdict == "opposite-sign-pair-found"
        ball = rep.witnesses["ball"]
        assert (ball["m"], ball["n"]) == (4, 4)
        assert ball["radius"] == 1.0
        assert min(ball["slack_source"], ball["slack_target"]) >= BALL_SLACK
        assert verify_report(rep, gens)

    def test_clean_pair_within_budget(self):
        rep = properness_scan(margulis_pair(), ScanConfig(max_len=3, max_exp=6))
        assert rep.verdict == "no-obstruction-within-budget"
        assert "bounded search" in rep.note
        assert verify_report(rep, margulis_pair())

    def test_lattice_scan_finds_nothing(self):
        rep = properness_scan(translation_lattice(2), ScanConfig(max_len=2))
        assert rep.verdict == "no-obstruction-within-budget"

    def test_deterministic_output(self):
        gens = margulis_pair(sign_flip=True)
        a = properness_scan(gens, ScanConfig(max_len=2)).to_json(indent=2)
        b = properness_scan(gens, ScanConfig(max_len=2)).to_json(indent=2)
        assert a == b


@pytest.fixture(scope="module")
def escort_setup():
    gens, structure = case23_fixture()
    anchors = []
    for idx in (0, 1):
        amap = gens.evaluate(Word(((idx, 1),)))
        theta1, _ = structure.blocks(amap.linear)
        sp = three_splitting(theta1)
        anchors.append(sp.aplus)
        anchors.append(sp.aminus)
    escorts = build_escort_sets(gens, structure, anchors, delta=0.2)
    return gens, structure, anchors, escorts


class TestEscortSets:
    def test_build_shapes(self, escort_setup):
        _, _, anchors, escorts = escort_setup
        assert len(escorts.anchors) == 4
        assert len(escorts.s_words) == 4
        assert len(escorts.t_words) == 4
        assert all(len(t) == 3 for t in escorts.s_words)
        assert all(len(t) == 3 for t in escorts.t_words)
        assert 0.0 < escorts.eps
        assert 0.0 < escorts.q < 1.0
        assert escorts.delta == 0.2

    def test_conditions_hold(self, escort_setup):
        gens, structure, _, escorts = escort_setup
        chk = check_escort_conditions(gens, structure, escorts)
        assert chk.all_pass, chk.failures
        assert chk.proximity_max < escorts.delta
        assert chk.s_max < 1.0
        assert chk.dims_ok
        assert chk.s_triple_sigma_min >= 1e-6
        assert chk.t_triple_sigma_min >= 1e-6

    def test_to_dict_serializable(self, escort_setup):
        gens, _, _, escorts = escort_setup
        doc = escorts.to_dict(gens)
        text = json.dumps(doc)
        assert json.loads(text)["delta"] == 0.2
        assert len(json.loads(text)["s_words"]) == 4

    def test_anchor_validation(self):
        gens, structure = case23_fixture()
        light = Subspace.span(np.array([1.0, 0.0, 1.0]))
        with pytest.raises(ValueError, match="exactly 4"):
            build_escort_sets(gens, structure, [light], delta=0.2)
        spacelike = Subspace.span(np.array([1.0, 0.0, 0.0]))
        others = [Subspace.span(np.array([1.0, 0.0, -1.0])),
                  Subspace.span(np.array([0.0, 1.0, 1.0])),
                  Subspace.span(np.array([0.0, 1.0, -1.0]))]
        with pytest.raises(ValueError, match="isotropic"):
            build_escort_sets(gens, structure, [spacelike] + others, delta=0.2)
        with pytest.raises(ValueError, match="separated"):
            build_escort_sets(gens, structure,
                              [light, light] + others[:2], delta=0.2)
