import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cspfolio.portfolio import (Bounds, FeatureMatrix, PortfolioConfig, PortfolioModel,
                                RuntimeMatrix, best_single, cluster, cross_validate, derive_seed,
                                family_accuracy, normalize_apply, normalize_fit, par_score,
                                random_cluster_baseline, select, stratified_folds, train, vbs)

TO = 100.0


def matrix(rows, solvers=("A", "B"), timeout=TO):
    return RuntimeMatrix(tuple(f"i{i}" for i in range(len(rows))), solvers, rows, timeout)


def two_families(n_each=6, seed=0):
    """Two separable feature blobs; A is 10x faster on the first, B on the second."""
    rng = np.random.default_rng(seed)
    feats = np.vstack([rng.normal(0, 0.05, (n_each, 2)), rng.normal(5, 0.05, (n_each, 2))])
    rt = np.array([[1.0, 10.0]] * n_each + [[10.0, 1.0]] * n_each)
    ids = tuple(f"i{i}" for i in range(2 * n_each))
    return (FeatureMatrix(ids, ("f1", "f2"), feats), RuntimeMatrix(ids, ("A", "B"), rt, TO),
            ["a"] * n_each + ["b"] * n_each)


class TestPar:
    def test_penalty(self):
        assert par_score([10, 3600], 3600, 10) == 18005

    def test_plain_mean(self):
        assert par_score([1, 2, 3], 100) == 2

    def test_par1(self):
        assert par_score([10, 100], 100, 1) == 55

    def test_invalid(self):
        with pytest.raises(ValueError):
            par_score([], 10)

    def test_matrix_clips(self):
        assert matrix([[150.0, 3.0]]).runtimes[0, 0] == TO


class TestNormalize:
    def test_column(self):
        b = normalize_fit([[0], [5], [10]])
        assert normalize_apply(b, [[0], [5], [10]]).ravel().tolist() == [-1, 0, 1]

    def test_constant(self):
        b = normalize_fit([[7], [7]])
        assert normalize_apply(b, [[7], [7]]).ravel().tolist() == [0, 0]

    def test_clamp(self):
        assert normalize_apply(Bounds(np.array([0.0]), np.array([10.0])), [12.0]).tolist() == [1]

    @given(arrays(float, (8, 3), elements=st.floats(-1e3, 1e3)))
    def test_training_rows_in_range(self, rows):
        out = normalize_apply(normalize_fit(rows), rows)
        assert np.all(out >= -1) and np.all(out <= 1)


class TestCluster:
    def test_pairs(self):
        pts = [(0, 0), (0, 0.1), (1, 1), (1, 0.9)]
        c = cluster(pts, min_cluster_size=2, max_k=4, seed=0)
        assert c.k == 2
        assert c.assignment[0] == c.assignment[1] != c.assignment[2] == c.assignment[3]

    def test_min_size_forces_one(self):
        pts = np.arange(10, dtype=float).reshape(5, 2)
        c = cluster(pts, min_cluster_size=5, max_k=5, seed=3)
        assert c.k == 1
        assert np.allclose(c.centroids[0], pts.mean(axis=0))

    def test_fewer_points_than_min_size(self):
        assert cluster([(0, 0), (9, 9)], min_cluster_size=3, max_k=4, seed=0).k == 1

    @given(arrays(float, (12, 2), elements=st.floats(-5, 5)), st.integers(0, 2**31))
    @settings(max_examples=30, deadline=None)
    def test_deterministic(self, pts, seed):
        a = cluster(pts, 3, 4, seed)
        b = cluster(pts, 3, 4, seed)
        assert a.k == b.k
        assert np.array_equal(a.centroids, b.centroids)
        assert np.array_equal(a.assignment, b.assignment)
        assert np.bincount(a.assignment).min() >= 3 or a.k == 1


class TestTrainSelect:
    def test_separable(self):
        feats, rt, _ = two_families()
        model = train(feats, rt, PortfolioConfig(min_cluster_size=2, max_k=2))
        assert model.k == 2
        assert select(model, feats.values[0]) == "A"
        assert select(model, feats.values[-1]) == "B"

    def test_single_solver(self):
        feats, rt, _ = two_families()
        only = RuntimeMatrix(rt.instances, ("S",), rt.runtimes[:, :1], TO)
        model = train(feats, only, PortfolioConfig(min_cluster_size=2, max_k=3))
        assert set(model.cluster_solver) == {"S"}

    def test_tie_lexicographic(self):
        feats, _, _ = two_families(3)
        rt = RuntimeMatrix(feats.instances, ("zeta", "alpha"), np.full((6, 2), 5.0), TO)
        model = train(feats, rt, PortfolioConfig(min_cluster_size=10))
        assert model.cluster_solver == ["alpha"]

    def test_tie_more_solved(self):
        feats, _, _ = two_families(1)
        rt = RuntimeMatrix(feats.instances, ("A", "B"), [[0.0, 100.0], [1000.0, 0.0]], 50.0)
        # A: (0 + 500)/2 = 250, B: (500 + 0)/2 = 250, both solve 1 -> lexicographic
        model = train(feats, rt, PortfolioConfig(min_cluster_size=10))
        assert model.cluster_solver == ["A"]
        rt2 = RuntimeMatrix(feats.instances, ("A", "B"), [[50.0, 25.0], [25.0, 25.0]], 50.0)
        # f=1: A = (50 + 25)/2 = 37.5 with 1 solved, B = 25 with 2 solved
        model = train(feats, rt2, PortfolioConfig(min_cluster_size=10, par=1.0))
        assert model.cluster_solver == ["B"]

    def test_select_rules(self):
        model = PortfolioModel(("f",), np.array([0.0]), np.array([2.0]),
                               np.array([[-1.0], [0.0], [1.0]]), ["A", "B", "C"])
        assert select(model, [1.0]) == "B"     # exactly on centroid 2
        model.centroids = np.array([[-0.5], [2.0], [0.5]])
        assert select(model, [1.0]) == "A"     # equidistant from 1 and 3
        k1 = PortfolioModel(("f",), np.array([0.0]), np.array([2.0]), np.array([[0.0]]), ["Z"])
        assert {select(k1, [x]) for x in (-5, 0, 1, 9)} == {"Z"}
        with pytest.raises(ValueError):
            select(model, [1.0], schema=("g",))

    def test_json_round_trip(self):
        feats, rt, _ = two_families()
        model = train(feats, rt, PortfolioConfig(min_cluster_size=2, max_k=2, seed=9))
        back = PortfolioModel.from_json(model.to_json())
        assert back.to_json() == model.to_json()
        for row in feats.values:
            assert select(back, row) == select(model, row)

    @given(st.floats(0.1, 100), st.floats(-50, 50))
    @settings(max_examples=20, deadline=None)
    def test_affine_invariance(self, scale, shift):
        feats, rt, _ = two_families()
        cfg = PortfolioConfig(min_cluster_size=2, max_k=3, seed=4)
        base = train(feats, rt, cfg)
        moved = FeatureMatrix(feats.instances, feats.schema, feats.values * scale + shift)
        other = train(moved, rt, cfg)
        assert [select(base, r) for r in feats.values] == \
            [select(other, r) for r in moved.values]


class TestBaselines:
    example = staticmethod(lambda: matrix([[10.0, TO], [TO, 5.0]]))

    def test_vbs(self):
        assert vbs(self.example()) == (7.5, 2)

    def test_best_single(self):
        assert best_single(self.example()) == ("B", 502.5, 1)

    def test_single_column(self):
        m = matrix([[3.0], [TO]], solvers=("S",))
        assert best_single(m) == ("S", par_score([3.0, TO], TO), 1)

    @given(arrays(float, (9, 3), elements=st.floats(0, 150)), st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_random_cluster_extremes(self, rows, seed):
        m = matrix(rows, solvers=("A", "B", "C"))
        assert random_cluster_baseline(None, m, 1, seed=seed) == best_single(m)[1:]
        assert random_cluster_baseline(None, m, 9, seed=seed) == vbs(m)
        mid = random_cluster_baseline(None, m, 3, seed=seed)
        assert mid == random_cluster_baseline(None, m, 3, seed=seed)
        assert vbs(m)[0] <= mid[0] <= best_single(m)[1]


class TestFolds:
    def test_exact_stratification(self):
        fams = ["a"] * 5 + ["b"] * 5
        fold_of, small = stratified_folds(fams, 5, seed=1)
        assert small == []
        for fold in range(5):
            members = [fams[i] for i in np.flatnonzero(fold_of == fold)]
            assert sorted(members) == ["a", "b"]

    def test_two_folds_four_instances(self):
        fams = ["a", "a", "b", "b"]
        fold_of, _ = stratified_folds(fams, 2, seed=0)
        for fold in range(2):
            assert sorted(fams[i] for i in np.flatnonzero(fold_of == fold)) == ["a", "b"]

    def test_small_family_reported(self):
        _, small = stratified_folds(["a"] * 12 + ["b"] * 3, 10, seed=0)
        assert small == ["b"]

    @given(st.lists(st.sampled_from("abc"), min_size=4, max_size=40), st.integers(2, 6))
    def test_balanced(self, fams, folds):
        fold_of, _ = stratified_folds(fams, folds, seed=7)
        for fam in set(fams):
            counts = np.bincount(fold_of[[i for i, f in enumerate(fams) if f == fam]],
                                 minlength=folds)
            assert counts.max() - counts.min() <= 1


class TestCrossValidate:
    def test_dominant_solver(self):
        feats, rt, fams = two_families(10)
        dom = RuntimeMatrix(rt.instances, ("A", "B"),
                            np.column_stack([np.ones(20), np.full(20, 50.0)]), TO)
        rep = cross_validate(feats, dom, fams, folds=5,
                             config=PortfolioConfig(min_cluster_size=2, max_k=3))
        assert rep.par_of("Portfolio") == rep.par_of("Best Single")

    def test_separable_closes_gap(self):
        feats, rt, fams = two_families(10)
        rep = cross_validate(feats, rt, fams, folds=5,
                             config=PortfolioConfig(min_cluster_size=2, max_k=3))
        assert rep.par_of("Portfolio") == rep.par_of("VBS") < rep.par_of("Best Single")
        assert rep.gap_closed == 1.0

    def test_overhead_capping(self):
        ids = ("i0", "i1", "i2", "i3")
        feats = FeatureMatrix(ids, ("f",), [[0.0], [0.0], [1.0], [1.0]])
        rt = RuntimeMatrix(ids, ("A",), [[3599.0]] * 4, 3600.0)
        rep = cross_validate(feats, rt, ["a", "a", "b", "b"], folds=2,
                             config=PortfolioConfig(min_cluster_size=1),
                             overhead=[2.0, 0.0, 0.0, 0.0])
        assert rep.solved_of("Portfolio") == 3
        assert rep.solved_of("Best Single") == 4

    def test_mismatch(self):
        feats, rt, fams = two_families()
        with pytest.raises(ValueError, match="instance sets differ"):
            cross_validate(feats.take(range(5)), rt, fams[:5])

    def test_report_render(self):
        feats, rt, fams = two_families(10)
        text = cross_validate(feats, rt, fams, folds=5).render()
        lines = text.splitlines()
        assert [l.split()[0] for l in lines[1:5]] == ["VBS", "Portfolio", "Random", "Best"]
        assert text == cross_validate(feats, rt, fams, folds=5).render()


def test_derive_seed_stable():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert derive_seed(1, "a") != derive_seed(1, "b") != derive_seed(2, "a")


def test_family_accuracy():
    feats, _, fams = two_families(10)
    assert family_accuracy(feats.values, fams, folds=5) == 1.0
    noise = np.random.default_rng(0).normal(size=(40, 2))
    assert family_accuracy(noise, ["a", "b"] * 20, folds=5) < 0.9
