import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poisson_extremes.geometry import ConvexBody, Flat, Hyperplane
from poisson_extremes.limits import alpha_t
from poisson_extremes.models import (
    ModelSpec,
    f_gilbert,
    f_hyperplane_simplex,
    f_intersecting,
    f_point_simplex,
    f_proximity,
    f_sphere_chord,
    run_model,
)
from poisson_extremes.orderstats import EnumerationStrategy
from poisson_extremes.sampling import SeededStream


def _line(base, direction):
    return Flat(base=base, frame=np.asarray(direction, float)[None, :])


def test_f_proximity_examples():
    window = ConvexBody.ball(np.zeros(3), 2.0)
    e = _line([0, 0, 0], [1, 0, 0])
    f = _line([0, 1, 0], [1, 0, 0])
    value, converged = f_proximity(e, f, window)
    assert converged and value == pytest.approx(1.0, abs=1e-8)
    g = _line([0, 0, 0], [0, 1, 0])
    assert f_proximity(e, g, window)[0] == pytest.approx(0.0, abs=1e-8)
    skew = _line([0, 0, 1], [0, 1, 0])
    assert f_proximity(e, skew, window)[0] == pytest.approx(1.0, abs=1e-8)


def test_f_intersecting_examples():
    plane_z = Flat(base=[0, 0, 0], frame=[[1, 0, 0], [0, 1, 0]])
    plane_y = Flat(base=[0, 0, 0], frame=[[1, 0, 0], [0, 0, 1]])
    value, degenerate = f_intersecting([plane_z, plane_y], 3, 2, 2, 1)
    assert not degenerate and value == pytest.approx(2.0, abs=1e-10)

    # intersection line sits at distance sqrt(0.72), chord radius sqrt(0.28)
    plane_z6 = Flat(base=[0, 0, 0.6], frame=[[1, 0, 0], [0, 1, 0]])
    plane_y6 = Flat(base=[0, 0.6, 0], frame=[[1, 0, 0], [0, 0, 1]])
    assert f_intersecting([plane_z6, plane_y6], 3, 2, 2, 1)[0] == pytest.approx(2 * math.sqrt(0.28), rel=1e-9)

    # intersection line misses the unit ball: no value, but not degenerate
    plane_far = Flat(base=[0, 0, 2.0], frame=[[1, 0, 0], [0, 1, 0]])
    value, degenerate = f_intersecting([plane_far, plane_y], 3, 2, 2, 1)
    assert value is None and not degenerate

    # coincident planes are degenerate
    value, degenerate = f_intersecting([plane_z, plane_z], 3, 2, 2, 1)
    assert value is None and degenerate


def test_f_sphere_chord():
    assert f_sphere_chord(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == pytest.approx(2.0)
    assert f_sphere_chord(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(math.sqrt(2))
    assert f_sphere_chord(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0


def test_f_gilbert():
    assert f_gilbert(np.array([0.0]), np.array([0.05]), 0.1) == pytest.approx(0.05)
    assert f_gilbert(np.array([0.0]), np.array([0.2]), 0.1) is None
    assert f_gilbert(np.array([0.3]), np.array([0.3]), 0.1) == 0.0


def test_f_point_simplex():
    assert f_point_simplex([(0, 0), (1, 0), (0, 1)])[0] == pytest.approx(0.5)
    value, degenerate = f_point_simplex([(0, 0), (1, 1), (2, 2)])
    assert value is None and degenerate


def test_f_hyperplane_simplex_examples():
    lines = [Hyperplane([1.0, 0.0], 0.0), Hyperplane([0.0, 1.0], 0.0),
             Hyperplane([1.0, 1.0], 1.0)]
    big = ConvexBody.box(np.array([-2.0, -2.0]), np.array([2.0, 2.0]))
    assert f_hyperplane_simplex(lines, big)[0] == pytest.approx(0.5, rel=1e-12)

    # simplex vertices (1,0), (0,1) fall outside the small window
    small = ConvexBody.ball(np.zeros(2), 0.3)
    value, degenerate = f_hyperplane_simplex(lines, small)
    assert value is None and not degenerate

    parallel = [Hyperplane([1.0, 0.0], 0.0), Hyperplane([1.0, 0.0], 1.0),
                Hyperplane([0.0, 1.0], 0.0)]
    value, degenerate = f_hyperplane_simplex(parallel, big)
    assert value is None and degenerate


@given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=0.1, max_value=2.0))
@settings(max_examples=25, deadline=None)
def test_f_hyperplane_simplex_scaling(seed, delta):
    # scaling every offset by delta dilates the simplex, so V -> delta^d V
    rng = np.random.default_rng(seed)
    normals = rng.normal(size=(3, 2))
    offsets = rng.uniform(0.1, 0.5, size=3)
    window = ConvexBody.box(np.array([-1000.0, -1000.0]), np.array([1000.0, 1000.0]))
    base = f_hyperplane_simplex(
        [Hyperplane(normals[i], offsets[i]) for i in range(3)], window)[0]
    scaled = f_hyperplane_simplex(
        [Hyperplane(normals[i], delta * offsets[i]) for i in range(3)], window)[0]
    if base is None or scaled is None:
        return
    assert scaled == pytest.approx(delta**2 * base, rel=1e-8)


def test_run_model_forced_gilbert_distances():
    spec = ModelSpec(kind="gilbert", d=1, window=ConvexBody.box(np.zeros(1), np.ones(1)), delta_expr="0.4")
    run = run_model(spec, 1.0, 10.0, 3, sample=np.array([[0.1], [0.2], [0.5]]))
    assert np.allclose(run.values, [0.1, 0.3, 0.4])
    assert np.allclose(run.order_stats, [0.1, 0.3, 0.4])


def test_run_model_empty_sample():
    spec = ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2))
    run = run_model(spec, 5.0, 1.0, 2, sample=np.empty((0, 2)))
    assert run.values.size == 0
    assert np.all(np.isinf(run.order_stats))


def test_run_model_forced_point_simplices():
    spec = ModelSpec(kind="point_simplices", d=2, window=ConvexBody.unit_cube(2))
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    run = run_model(spec, 1.0, 10.0, 4, sample=pts)
    assert np.allclose(run.values, [0.5, 0.5, 0.5, 0.5])


def test_run_model_rescaling_and_order():
    spec = ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2), delta_expr="t**-0.5")
    run = run_model(spec, 50.0, 1.5, 5, stream=SeededStream(12))
    assert np.all(np.diff(run.values) >= 0)
    assert np.allclose(run.rescaled, run.values * 50.0**run.gamma)
    finite = run.order_stats[np.isfinite(run.order_stats)]
    assert np.allclose(finite, np.sort(run.rescaled)[: finite.size])
    assert np.all(np.diff(run.order_stats[np.isfinite(run.order_stats)]) >= 0)


def test_run_model_strategy_agreement():
    spec = ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2), delta_expr="t**-0.5")
    for r in range(5):
        stream = SeededStream(77).child(r)
        fast = run_model(spec, 80.0, 1.2, 3, stream=stream)
        brute = run_model(spec, 80.0, 1.2, 3, stream=stream,
                          strategy=EnumerationStrategy(kind="brute_force"))
        assert np.allclose(fast.values, brute.values)


def test_gilbert_monotone_in_delta():
    base = ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2), delta_expr="0.05")
    wide = ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2), delta_expr="0.2")
    sample = SeededStream(3)
    for r in range(5):
        pts = np.asarray(
            run_model(base, 100.0, 10.0, 1, stream=sample.child(r)).diagnostics["n_items"])
        a = run_model(base, 100.0, 1e9, 1, stream=sample.child(r))
        b = run_model(wide, 100.0, 1e9, 1, stream=sample.child(r))
        assert set(np.round(a.values, 12)) <= set(np.round(b.values, 12))


def test_functional_symmetry_on_sampled_tuples():
    rng = np.random.default_rng(8)
    window = ConvexBody.unit_cube(2)
    pts = rng.uniform(size=(4, 2))
    assert f_point_simplex(pts[[0, 1, 2]])[0] == f_point_simplex(pts[[2, 0, 1]])[0]
    assert f_gilbert(pts[0], pts[1], 1.0) == f_gilbert(pts[1], pts[0], 1.0)
    lines = [Hyperplane(rng.normal(size=2), rng.uniform(0.1, 0.4)) for _ in range(3)]
    box = ConvexBody.box(np.array([-9.0, -9.0]), np.array([9.0, 9.0]))
    assert f_hyperplane_simplex(lines, box)[0] == f_hyperplane_simplex(lines[::-1], box)[0]


def test_campbell_mean_count_matches_alpha():
    # empirical mean of #{rescaled values <= x} vs the exact mean formula
    spec = ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2), delta_expr="t**-0.5")
    t, x, reps = 50.0, 1.0, 1500
    counts = np.array([
        np.count_nonzero(run_model(spec, t, x, 1, stream=SeededStream(21).child(r)).rescaled <= x)
        for r in range(reps)
    ], dtype=float)
    target = alpha_t(spec, x, t).value
    se = counts.std(ddof=1) / math.sqrt(reps)
    assert abs(counts.mean() - target) < 3 * se


def test_degenerate_tuples_counted():
    # duplicated hyperplane directions are measure zero but must be skipped

    spec = ModelSpec(kind="hyperplane_simplices", d=2, window=ConvexBody.unit_cube(2))
    lines = [Hyperplane([1.0, 0.0], 0.2), Hyperplane([1.0, 0.0], 0.4),
             Hyperplane([0.0, 1.0], 0.2), Hyperplane([1.0, 1.0], 0.9)]
    run = run_model(spec, 1.0, 100.0, 1, sample=lines)
    assert run.diagnostics["skipped_degenerate"] >= 1
