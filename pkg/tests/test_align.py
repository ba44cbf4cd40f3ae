import numpy as np
import pytest

from so3align.align import (
    AlignmentConfig,
    align,
    align_axis_consistent,
    align_pasi,
    alignment_objective,
    apply_alignment,
    pasi_match_table,
    procrustes_refine,
    recompute_hypothesis,
)
from so3align.errors import AllHypothesesDegenerate, EmptySet
from so3align.matchers import MatcherConfig
from so3align.permutations import IDENTITY, enumerate_signed_permutations, from_mapping
from so3align.rotation import RotationSet, axis_rotation, geodesic_angle
from so3align.synthesis import CorruptionSpec, corrupt, generate_scenario, plant_global, random_rotations, scenario
from so3align.tbv import tbvs_from_so3

BIN = np.deg2rad(1.0)
ETH = from_mapping("Ax->-By, Ay->+Bx, Az->+Bz")
PASI = AlignmentConfig(pasi=True)


def planted(seed, n=1000, l=None, number=1, level=None):
    a = generate_scenario(scenario(number, n, seed=seed))
    r = random_rotations(1, seed=10_000 + seed)[0]
    b = plant_global(a, r, l, shuffle_seed=seed)
    if level:
        b = corrupt(b, CorruptionSpec(level=level, seed=seed))
    return a, b, r


class TestAxisConsistent:
    def test_identical_sets(self):
        a = generate_scenario(scenario(1, 500, seed=0))
        assert geodesic_angle(align_axis_consistent(a, a).r_bar, np.eye(3)) <= BIN

    @pytest.mark.parametrize("number", [1, 2, 3])
    def test_noiseless_recovery(self, number):
        for seed in range(5):
            a, b, r = planted(seed, 2000, number=number)
            assert geodesic_angle(align_axis_consistent(a, b).r_bar, r) < 1e-9

    @pytest.mark.parametrize("fusion", ["projected_mean", "karcher"])
    def test_rotation_fusions(self, fusion):
        a, b, r = planted(1)
        ga = align_axis_consistent(a, b, AlignmentConfig(fusion=fusion))
        assert np.rad2deg(geodesic_angle(ga.r_bar, r)) < 1.0

    def test_b5_instance(self):
        errs = [np.rad2deg(geodesic_angle(align_axis_consistent(*planted(s, 2000, level="B5")[:2]).r_bar, planted(s, 10)[2])) for s in range(5)]
        assert max(errs) <= 2.0

    def test_fuses_three_axes(self):
        a, b, _ = planted(2)
        ga = align_axis_consistent(a, b)
        assert len(ga.per_axis) == 3 and ga.l_star == IDENTITY
        assert ga.score == pytest.approx(sum(r.score for r in ga.per_axis))

    def test_empty(self):
        with pytest.raises(EmptySet):
            align_axis_consistent(np.empty((0, 3, 3)), np.eye(3)[None])

    def test_bad_fusion(self):
        with pytest.raises(ValueError):
            AlignmentConfig(fusion="median")


class TestPasi:
    def test_axis_consistent_data(self):
        a, b, r = planted(3)
        ga = align_pasi(a, b, PASI)
        assert ga.l_star == IDENTITY
        assert geodesic_angle(ga.r_bar, align_axis_consistent(a, b).r_bar) <= BIN

    def test_planted_eth_matrix(self):
        for seed in range(5):
            a, b, r = planted(seed, l=ETH)
            ga = align_pasi(a, b, PASI)
            assert ga.l_star == ETH
            assert geodesic_angle(ga.r_bar, r) <= BIN

    def test_scores_finite_and_selected_is_max(self):
        a, b, _ = planted(4, l=ETH)
        ga = align_pasi(a, b, PASI)
        assert len(ga.hypothesis_scores) == 24 and np.all(np.isfinite(ga.hypothesis_scores))
        assert ga.score == ga.hypothesis_scores.max()
        assert ga.hypotheses[int(np.argmax(ga.hypothesis_scores))] == ga.l_star

    def test_score_consistency_exact(self):
        a, b, _ = planted(5, n=400, l=ETH)
        ga = align_pasi(a, b, PASI)
        for l, s in zip(ga.hypotheses, ga.hypothesis_scores):
            assert recompute_hypothesis(a, b, l, PASI.matcher) == s

    def test_identity_wins_on_unpermuted_data(self):
        wins = 0
        for seed in range(20):
            a, b, _ = planted(seed, n=500, number=1 + seed % 3)
            ga = align_pasi(a, b, PASI)
            wins += ga.hypothesis_scores[0] == ga.hypothesis_scores.max()
        assert wins >= 19

    def test_relabel_equivariance(self):
        a, b, r = planted(6)
        base = apply_alignment(b, align_pasi(a, b, PASI)).matrices
        for lp in enumerate_signed_permutations()[1:6]:
            b2 = RotationSet(lp.matrix @ b.matrices)
            out = apply_alignment(b2, align_pasi(a, b2, PASI)).matrices
            assert np.max(geodesic_angle(out, base)) <= BIN

    def test_cardinality_and_no_mutation(self):
        a, b, _ = planted(7, n=300, l=ETH)
        a_copy, b_copy = a.matrices.copy(), b.matrices.copy()
        ga = align_pasi(a, b, PASI)
        assert len(apply_alignment(b, ga)) == len(b)
        assert np.array_equal(a.matrices, a_copy) and np.array_equal(b.matrices, b_copy)

    def test_improper_search(self):
        a, b, _ = planted(8, n=300)
        ga = align_pasi(a, b, AlignmentConfig(pasi=True, proper_only=False))
        assert len(ga.hypotheses) == 48 and ga.l_star == IDENTITY

    def test_threads_match_serial(self):
        a, b, _ = planted(9, n=300, l=ETH)
        one = align_pasi(a, b, AlignmentConfig(pasi=True, threads=1))
        four = align_pasi(a, b, AlignmentConfig(pasi=True, threads=4))
        assert np.array_equal(one.hypothesis_scores, four.hypothesis_scores)
        assert np.array_equal(one.r_bar, four.r_bar)

    def test_all_degenerate(self):
        flips = np.stack([np.eye(3), np.diag([-1.0, -1, 1]), np.diag([-1.0, 1, -1]), np.diag([1.0, -1, -1])])
        with pytest.raises(AllHypothesesDegenerate):
            align_pasi(flips, flips, PASI)

    def test_table_has_eighteen_entries(self):
        a, b, _ = planted(0, n=200)
        assert len(pasi_match_table(tbvs_from_so3(a), tbvs_from_so3(b), MatcherConfig())) == 18

    def test_dispatch(self):
        a, b, _ = planted(0, n=200, l=ETH)
        assert align(a, b, PASI).l_star == ETH
        assert align(a, b).l_star == IDENTITY


class TestApplyAlignment:
    def test_identity(self):
        a, _, _ = planted(0, n=50)
        ga = align_axis_consistent(a, a)
        ga.r_bar = np.eye(3)
        assert np.array_equal(apply_alignment(a, ga).matrices, a.matrices)

    def test_right_composition(self):
        a, b, _ = planted(1, n=50)
        ga = align_axis_consistent(a, b)
        np.testing.assert_allclose(apply_alignment(b, ga).matrices, b.matrices @ ga.r_bar.T, atol=1e-15)

    def test_planted_pairs_close(self):
        a = generate_scenario(scenario(1, 800, seed=3))
        r = random_rotations(1, seed=3)[0]
        b = plant_global(a, r, ETH)  # unshuffled: index i pairs with i
        out = apply_alignment(b, align_pasi(a, b, PASI))
        assert np.max(geodesic_angle(out.matrices, a.matrices)) <= BIN

    def test_keeps_timestamps(self):
        a, b, _ = planted(2, n=40)
        b = RotationSet(b.matrices, np.arange(40.0))
        assert np.array_equal(apply_alignment(b, align_axis_consistent(a, b)).timestamps, b.timestamps)


class TestRefine:
    def test_noiseless_unchanged(self):
        a, b, r = planted(0)
        ga = align_axis_consistent(a, b)
        ref = procrustes_refine(a, b, ga)
        assert geodesic_angle(ref.r_bar, ga.r_bar) < 1e-9

    def test_perturbed_gets_closer(self):
        for seed in range(5):
            a, b, r = planted(seed, 2000)
            ga = align_axis_consistent(a, b)
            ga.r_bar = axis_rotation("z", np.deg2rad(3.0)) @ ga.r_bar
            before = geodesic_angle(ga.r_bar, r)
            after = geodesic_angle(procrustes_refine(a, b, ga).r_bar, r)
            assert after < before

    def test_guard_under_heavy_outliers(self):
        for seed in range(5):
            a, b, r = planted(seed, 2000, level="B7")
            ga = align_axis_consistent(a, b)
            ref = procrustes_refine(a, b, ga)
            grew = np.rad2deg(geodesic_angle(ref.r_bar, r) - geodesic_angle(ga.r_bar, r))
            assert (not ref.refined) or grew <= 0.1

    def test_objective_prefers_truth(self):
        a, b, _ = planted(1)
        ga = align_axis_consistent(a, b)
        good = alignment_objective(a, apply_alignment(b, ga))
        ga.r_bar = axis_rotation("x", np.deg2rad(5)) @ ga.r_bar
        assert alignment_objective(a, apply_alignment(b, ga)) < good

    def test_config_flag(self):
        a, b, r = planted(2)
        ga = align_axis_consistent(a, b, AlignmentConfig(procrustes_refine=True))
        assert geodesic_angle(ga.r_bar, r) < 1e-9
