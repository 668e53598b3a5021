import math

import numpy as np
import pytest
from scipy import stats

from stitlab import estimators as est, geometry as g, mnw
from stitlab.measures import HyperplaneMeasureSpec


SQ = g.ConvexPolytope.box([0, 0], [1, 1])
ISO1 = HyperplaneMeasureSpec.isotropic(1)
ISO2 = HyperplaneMeasureSpec.isotropic(2)


def _run2(seed, t=4.0, W=SQ):
    return mnw.run(ISO2, t, W, np.random.default_rng(seed))


def test_d1_exact_counts():
    W = g.ConvexPolytope.interval(0.0, 5.0)
    Y = mnw.run(ISO1, 2.0, W, np.random.default_rng(4))
    assert est.total_surface(Y) == len(Y.i_facets)
    assert len(est.interior_vertices(Y)) == len(Y.i_facets)
    assert est.vertex_intensity(Y) == pytest.approx(len(Y.i_facets) / 5.0)
    assert est.facet_intensity(Y) == pytest.approx(len(Y.i_facets) / 5.0)


def test_single_split_has_no_interior_vertices():
    # one chord: both endpoints lie on the window boundary
    for seed in range(40):
        rng = np.random.default_rng(seed)
        Y = mnw.run(ISO2, 0.3, SQ, rng)
        if len(Y.i_facets) == 1:
            assert est.interior_vertices(Y) == []
            return
    pytest.fail("no single-split realization found")


def test_interior_vertex_endpoint_rule_2d():
    # every interior vertex of the T-tessellation is the endpoint of exactly
    # one segment, so the count must equal 2 * (facets) - (boundary endpoints)
    Y = _run2(8)
    n_int = len(est.interior_vertices(Y))
    n_bdry = sum(
        1
        for f in Y.i_facets
        for p in f.facet.vertices
        if Y.window.distance_to_boundary(p) <= 1e-8
    )
    assert n_int + n_bdry == 2 * len(Y.i_facets)


def test_interior_vertices_3d_on_facet_junctions():
    spec = HyperplaneMeasureSpec.isotropic(3)
    cube = g.ConvexPolytope.box([0, 0, 0], [1, 1, 1])
    Y = mnw.run(spec, 3.0, cube, np.random.default_rng(12))
    vs = est.interior_vertices(Y)
    for p in vs:
        assert cube.distance_to_boundary(p) > 0
    # each reported vertex lies on at least two facet carriers
    for p in vs:
        hits = sum(
            1
            for f in Y.i_facets
            if abs(float(np.asarray(p) @ np.asarray(f.carrier.normal))
                   - f.carrier.offset) < 1e-7
        )
        assert hits >= 2


def test_minus_sampling_monotone_and_empty():
    Y = _run2(3, t=6.0)
    s_small = est.isegment_sample(Y, 0.05)
    s_big = est.isegment_sample(Y, 0.2)
    assert len(s_big) <= len(s_small)
    assert all(s > 0 for s in s_small)
    with pytest.raises(est.EmptySample):
        est.isegment_sample(Y, 10.0)


def test_summarize_fields():
    Y = mnw.run(ISO2, 2.0, SQ, np.random.default_rng(5), checkpoints=[1.0, 2.0])
    s = est.summarize(Y, seed_index=7, delta=0.1)
    assert s.seed_index == 7
    assert s.total_surface == pytest.approx(Y.total_surface())
    assert s.i_facet_count == len(Y.i_facets)
    assert set(s.checkpoint_totals) == {1.0, 2.0}


def test_discretize_weights_sum_to_surface():
    Y = _run2(17, t=5.0)
    pts, wts = est.discretize_facets(Y, 0.03)
    assert wts.sum() == pytest.approx(Y.total_surface(), rel=1e-12)
    assert wts.max() <= 0.03 + 1e-12


def test_discretize_polygon_3d():
    spec = HyperplaneMeasureSpec.isotropic(3)
    cube = g.ConvexPolytope.box([0, 0, 0], [1, 1, 1])
    Y = mnw.run(spec, 1.5, cube, np.random.default_rng(1))
    pts, wts = est.discretize_facets(Y, 0.15)
    assert wts.sum() == pytest.approx(Y.total_surface(), rel=1e-9)
    for p in pts:
        assert cube.contains(p, tol=1e-9)


def test_k_function_h_validation():
    Y = _run2(0)
    with pytest.raises(ValueError):
        est.k_function_estimate(Y, [0.5], delta=0.1, h=0.2, t=4.0)


def test_k_function_nondecreasing():
    Ys = [_run2(100 + i, t=3.0) for i in range(3)]
    rows = est.k_function_estimate(
        Ys, [0.2, 0.3, 0.4], delta=0.2, h=0.02, t=3.0
    )
    vals = [v for _, v in rows]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[0] > 0


def test_k_function_refinement_stable():
    Y = _run2(7, t=3.0)
    coarse = est.k_function_estimate(Y, [0.3], delta=0.2, h=0.03, t=3.0)[0][1]
    fine = est.k_function_estimate(Y, [0.3], delta=0.2, h=0.01, t=3.0)[0][1]
    assert fine == pytest.approx(coarse, rel=0.05)


def test_aggregate_basic():
    a = est.aggregate([1.0, 2.0, 3.0], target=2.0)
    assert a.estimate == pytest.approx(2.0)
    assert a.se == pytest.approx(1.0 / math.sqrt(3))
    assert a.z == pytest.approx(0.0)
    with pytest.raises(ValueError):
        est.aggregate([1.0])


def test_ratio_aggregate_beats_mean_of_means():
    # per-replicate means of a size-dependent sample are ratio-biased;
    # the pooled ratio estimator is not
    rng = np.random.default_rng(9)
    sums, counts, naive = [], [], []
    for _ in range(2000):
        n = rng.poisson(5) + 1
        x = rng.exponential(size=n)
        sums.append(x.sum())
        counts.append(n)
        naive.append(x.mean())
    r = est.ratio_aggregate(sums, counts, target=1.0)
    assert abs(r.z) < 4
    assert r.estimate == pytest.approx(np.sum(sums) / np.sum(counts), rel=1e-12)
    with pytest.raises(ValueError):
        est.ratio_aggregate([1.0], [1])


def test_aggregate_variance_normal_sample():
    rng = np.random.default_rng(0)
    x = rng.normal(0.0, 2.0, 4000)
    a = est.aggregate_variance(x, target=4.0)
    assert abs(a.z) < 4
    # for a normal sample the moment SE approaches sqrt(2/(n-1)) sigma^2
    assert a.se == pytest.approx(4.0 * math.sqrt(2.0 / len(x)), rel=0.1)
    with pytest.raises(ValueError):
        est.aggregate_variance([1.0, 2.0, 3.0])


def test_normality_diagnostics():
    rng = np.random.default_rng(1)
    d = est.normality_diagnostics(rng.normal(size=2000))
    assert abs(d["skewness"]) < 0.2
    assert d["ks_pvalue"] > 0.01
    d2 = est.normality_diagnostics(np.ones(10))
    assert d2["degenerate"]


def test_skewness_test_detects_exponential():
    rng = np.random.default_rng(2)
    g1, z, p = est.skewness_test(rng.exponential(size=1000))
    assert g1 > 1.0 and z > 10 and p < 1e-6
    g0, z0, p0 = est.skewness_test(rng.normal(size=1000))
    assert abs(z0) < 4 and p0 > 1e-4


def test_skewness_se_convention():
    x = stats.norm.rvs(size=600, random_state=3)
    g1, z, _ = est.skewness_test(x)
    assert z == pytest.approx(g1 / math.sqrt(6 / 600), rel=1e-12)
