import numpy as np
import pytest

from baslib.benchmarks import build_benchmark, reference_polytope
from baslib.errors import DimensionMismatch, InvalidParameter, StochasticModelError
from baslib.reach import (
    Box,
    TemplatePolytope,
    check_containment,
    octagon_template,
    reach_step,
    reach_tube,
    support,
    template_hull,
)
from baslib.simulate import UniformInputs, monte_carlo

X0 = np.array([18.0, 18.0, 35.0, 35.0])


def test_box_support_closed_forms():
    box = Box(np.zeros(2), np.ones(2))
    assert support(box, np.array([1.0, 1.0])) == 2.0
    assert support(box, np.array([-1.0, 0.5])) == 0.5
    p = np.array([3.0, -2.0, 7.0])
    single = Box.point(p)
    rng = np.random.default_rng(0)
    for _ in range(10):
        d = rng.normal(size=3)
        assert support(single, d) == pytest.approx(d @ p, abs=1e-12)


def test_box_support_vs_sampling_oracle():
    rng = np.random.default_rng(42)
    lo = rng.uniform(-5, 0, size=4)
    hi = lo + rng.uniform(0.5, 4, size=4)
    box = Box(lo, hi)
    pts = box.sample(rng, 100_000)
    for _ in range(5):
        d = rng.normal(size=4)
        d /= np.linalg.norm(d)
        sampled_max = (pts @ d).max()
        val = support(box, d)
        assert val >= sampled_max
        assert val - sampled_max < 1e-2  # corners are approached by sampling
        # the exact maximizer is the corner selected by the sign pattern
        assert val == pytest.approx(d @ box.support_argmax(d), abs=1e-12)


def test_polytope_support_lp():
    # unit square as a template polytope
    dirs = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    poly = TemplatePolytope(dirs, np.array([1.0, 0.0, 1.0, 0.0]))
    assert support(poly, np.array([1.0, 1.0])) == pytest.approx(2.0, abs=1e-9)
    assert support(poly, np.array([-1.0, 0.0])) == pytest.approx(0.0, abs=1e-9)
    # degenerate template: only upper bounds, unbounded below
    degen = TemplatePolytope(np.array([[1.0, 0.0]]), np.array([1.0]))
    with pytest.raises(InvalidParameter, match="unbounded"):
        support(degen, np.array([-1.0, 0.0]))


def test_octagon_template_family():
    t4 = octagon_template(4)
    assert t4.shape == (32, 4)
    assert len({tuple(d) for d in t4}) == 32
    norms = np.abs(t4).sum(axis=1)
    assert set(norms.tolist()) == {1.0, 2.0}
    assert (np.abs(t4).sum(axis=1) == 1).sum() == 8
    t2 = octagon_template(2)
    assert t2.shape == (8, 2)


def test_template_hull_of_box():
    box = Box(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    poly = template_hull(box, octagon_template(2))
    assert poly.bound_for(np.array([1.0, 1.0])) == 3.0
    assert poly.bound_for(np.array([-1.0, 0.0])) == 0.0


def test_reach_step_exact_image_of_singletons():
    m = build_benchmark("cs1-det").model
    poly = reach_step(Box.point(X0), m, Box.interval(20.0, 20.0), None)
    img = m.a @ X0 + m.b @ np.array([20.0]) + m.q
    for d, b in zip(poly.directions, poly.bounds):
        assert b == pytest.approx(d @ img, abs=1e-9)


def test_reach_step_first_coordinate_bounds():
    m = build_benchmark("cs1-det").model
    e1 = np.eye(4)[0]
    poly = reach_step(Box.point(X0), m, Box.interval(20.0, 20.0), None)
    assert poly.bound_for(e1) == pytest.approx(19.0252, abs=1e-3)
    poly = reach_step(Box.point(X0), m, Box.interval(15.0, 22.0), None)
    # monotone in u: the bound is attained at u = 22
    want = 0.6682 * 18 + 0.02632 * 35 + 0.1320 * 22 + 3.4364
    assert poly.bound_for(e1) == pytest.approx(want, abs=1e-12)
    assert poly.bound_for(e1) == pytest.approx(19.2892, abs=1e-3)


def test_reach_step_rejects_stochastic_models():
    stoch = build_benchmark("cs1-stoch").model
    with pytest.raises(StochasticModelError, match="probabilistic"):
        reach_step(Box.point(X0), stoch, Box.interval(15, 22), None)


def test_reach_step_monotone_in_input_set():
    m = build_benchmark("cs1-det").model
    small = reach_step(Box.point(X0), m, Box.interval(18.0, 19.0), None)
    large = reach_step(Box.point(X0), m, Box.interval(15.0, 22.0), None)
    assert np.all(large.bounds >= small.bounds - 1e-12)
    x_small = Box(X0 - 0.1, X0 + 0.1)
    x_large = Box(X0 - 1.0, X0 + 1.0)
    p_small = reach_step(x_small, m, Box.interval(15, 22), None)
    p_large = reach_step(x_large, m, Box.interval(15, 22), None)
    assert np.all(p_large.bounds >= p_small.bounds - 1e-12)


def test_template_exactness_via_maximizing_corner():
    # for the affine image of boxes each bound is attained by a feasible pair
    m = build_benchmark("cs1-det").model
    x_box = Box(X0 - 0.5, X0 + 0.5)
    u_box = Box.interval(15.0, 22.0)
    poly = reach_step(x_box, m, u_box, None)
    for d, b in zip(poly.directions, poly.bounds):
        x_corner = x_box.support_argmax(m.a.T @ d)
        u_corner = u_box.support_argmax(m.b.T @ d)
        attained = d @ (m.a @ x_corner + m.b @ u_corner + m.q)
        assert attained == pytest.approx(b, abs=1e-9)


def test_reach_tube_zero_steps_is_hull():
    m = build_benchmark("cs1-det").model
    x_box = Box(X0 - 0.25, X0 + 0.25)
    steps, tube = reach_tube(m, x_box, Box.interval(15, 22), None, 0)
    assert len(steps) == 1
    np.testing.assert_allclose(
        tube.bounds, template_hull(x_box, octagon_template(4)).bounds, atol=1e-12
    )


def test_sampled_trajectories_inside_tube():
    bench = build_benchmark("cs1-det")
    m = bench.model
    steps, tube = reach_tube(m, Box.point(X0), Box.interval(15, 22), None, 6)
    mc = monte_carlo(m, X0, UniformInputs(15.0, 22.0), None,
                     n_traces=500, seed=31, n_steps=6)
    for tr in mc.traces:
        for k in range(7):
            inside, margin, _ = check_containment(tr.states[k], steps[k])
            assert inside, (k, margin)
        inside, margin, _ = check_containment(tr.states, tube)
        assert inside, margin


def test_check_containment_reporting():
    poly = reference_polytope("cs1-det")
    inside, margin, _ = check_containment(
        np.array([19.0252, 18.7588, 31.0122, 31.8098]), poly
    )
    assert inside and margin > 0
    bad = np.array([25.0, 18.7588, 31.0122, 31.8098])
    inside, margin, worst = check_containment(bad, poly)
    assert not inside
    np.testing.assert_array_equal(
        poly.directions[worst], np.array([1.0, 0, 0, 0])
    )
    assert margin == pytest.approx(22.2282 - 25.0, abs=1e-9)
    # empty trace is vacuously inside
    inside, margin, worst = check_containment(np.empty((0, 4)), poly)
    assert inside and margin == float("inf") and worst == -1


def test_box_validation():
    with pytest.raises(InvalidParameter):
        Box(np.array([1.0]), np.array([0.0]))
    with pytest.raises(DimensionMismatch):
        support(Box.interval(0, 1), np.array([1.0, 2.0]))
