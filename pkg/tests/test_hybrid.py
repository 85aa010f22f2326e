import numpy as np
import pytest

from baslib.errors import GuardError, InvalidParameter
from baslib.hybrid import (
    Guard,
    HybridAutomaton,
    MODE_TABLE,
    box_flowpipe,
    build_hybrid_cs3,
    integrate,
    rk4_step_map,
)
from baslib.reach import Box


@pytest.fixture(scope="module")
def ha():
    return build_hybrid_cs3()


def test_mode_table_values():
    a, c = MODE_TABLE["(O,-)"]
    assert a[0, 0] == -0.0116 and c[0] == 0.2565
    # fan-off zone dynamics decouple from the supply air
    assert a[0, 1] == 0.0
    # recirculating high-speed mode has no constant in the supply-air row
    a_hcl, c_hcl = MODE_TABLE["(H,Cl)"]
    assert c_hcl[1] == 0.0
    a_hop, c_hop = MODE_TABLE["(H,Op)"]
    assert c_hop[1] == 0.0076


def test_off_mode_field_and_equilibrium(ha):
    a, c = ha.field_of("(O,-)")
    drift = a @ np.array([20.0, 20.0]) + c
    assert drift[0] == pytest.approx(-0.0116 * 20 + 0.2565, abs=1e-15)
    assert drift[0] == pytest.approx(0.0245, abs=1e-12)
    assert 0.2565 / 0.0116 == pytest.approx(22.112, abs=1e-3)


def test_guard_ordering_enforced():
    with pytest.raises(InvalidParameter, match="ordered"):
        build_hybrid_cs3({"delta": 3.0, "delta_2": 2.0})


def test_cold_start_mode_sequence(ha):
    tr = integrate(ha, (15.0, 15.0), None, 120.0, 0.01)
    assert tr.mode_sequence == ("(O,-)", "(H,Op)", "(M,Op)", "(O,-)")
    assert [e.target for e in tr.events] == ["(H,Op)", "(M,Op)", "(O,-)"]
    assert tr.events[0].time == 0.0
    times = [e.time for e in tr.events]
    assert times == sorted(times) and len(set(times)) == len(times)
    assert tr.times[-1] == pytest.approx(120.0, abs=1e-9)


def test_warm_start_stays_off(ha):
    tr = integrate(ha, (20.0, 20.0), None, 120.0, 0.01)
    assert tr.mode_sequence == ("(O,-)",)
    assert tr.events == ()


def test_off_mode_against_closed_form(ha):
    # scalar exponential solution of dTz = -0.0116 Tz + 0.2565
    tr = integrate(ha, (20.0, 20.0), None, 120.0, 0.01)
    eq = 0.2565 / 0.0116
    t_end = tr.times[-1]
    want = eq + (20.0 - eq) * np.exp(-0.0116 * t_end)
    assert abs(tr.states[-1, 0] - want) < 1e-6
    # monotone approach from below, staying within the documented envelope
    assert np.all(np.diff(tr.states[:, 0]) > 0)
    assert tr.states[:, 0].min() >= 19.0 and tr.states[:, 0].max() <= 22.2


def test_horizon_zero(ha):
    tr = integrate(ha, (20.0, 20.0), None, 0.0, 0.01)
    assert len(tr.times) == 1 and tr.events == ()
    np.testing.assert_array_equal(tr.states[0], [20.0, 20.0])


def test_state_continuity_across_jumps(ha):
    tr = integrate(ha, (15.0, 15.0), None, 120.0, 0.01)
    # no resets: consecutive samples never jump by more than one step's flow
    max_rate = max(
        np.abs(a).sum(axis=1).max() * 40 + np.abs(c).max()
        for a, c in MODE_TABLE.values()
    )
    diffs = np.abs(np.diff(tr.states, axis=0)).max(axis=1)
    dts = np.diff(tr.times)
    assert np.all(diffs <= max_rate * dts + 1e-9)


def test_event_time_converges_with_step(ha):
    t_coarse = integrate(ha, (15.0, 15.0), None, 60.0, 0.02)
    t_fine = integrate(ha, (15.0, 15.0), None, 60.0, 0.01)
    for e1, e2 in zip(t_coarse.events[1:], t_fine.events[1:]):
        assert abs(e1.time - e2.time) < 10 * 0.02


def test_nondeterministic_guards_rejected(ha):
    bad = HybridAutomaton(
        ha.modes,
        (
            Guard("(O,-)", "(H,Op)", "fall_below", 16.0),
            Guard("(O,-)", "(H,Cl)", "fall_below", 17.0),
        ),
        "(O,-)", ha.bounds, ha.params,
    )
    with pytest.raises(GuardError, match="nondeterministic"):
        integrate(bad, (15.0, 15.0), None, 10.0, 0.01)


def test_unknown_mode_rejected(ha):
    with pytest.raises(GuardError, match="unknown initial mode"):
        integrate(ha, (20.0, 20.0), "(X,-)", 1.0, 0.01)


def test_recirculation_ladder_reaches_closed_modes():
    ha = build_hybrid_cs3(recirculation=True)
    tr = integrate(ha, (14.5, 15.0), None, 400.0, 0.01)
    assert tr.mode_sequence == (
        "(O,-)", "(H,Cl)", "(H,Op)", "(M,Op)", "(M,Cl)", "(O,-)"
    )


def test_rk4_map_matches_explicit_rk4():
    rng = np.random.default_rng(5)
    a = rng.normal(scale=0.05, size=(2, 2))
    c = rng.normal(scale=0.2, size=2)
    h = 0.37

    def f(x):
        return a @ x + c

    x = rng.normal(size=2)
    k1 = f(x)
    k2 = f(x + h / 2 * k1)
    k3 = f(x + h / 2 * k2)
    k4 = f(x + h * k3)
    explicit = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    r, rv = rk4_step_map(a, c, h)
    np.testing.assert_allclose(r @ x + rv, explicit, atol=1e-12)


# -- flowpipes ---------------------------------------------------------------

def test_flowpipe_singleton_collapses_to_trajectory(ha):
    x0 = np.array([15.0, 15.0])
    pipe = box_flowpipe(ha, Box.point(x0), None, 60.0, 0.01)
    tr = integrate(ha, x0, None, 60.0, 0.01)
    for k in range(0, len(tr.times), 200):
        assert pipe.contains(tr.times[k], tr.states[k], tol=1e-6)
    # boxes stay tight for a degenerate start
    widths = [seg.box.hi - seg.box.lo for seg in pipe.segments]
    assert np.max(widths) < 0.15


def test_flowpipe_contains_sampled_trajectories(ha):
    x0_box = Box(np.array([14.8, 15.0]), np.array([15.2, 15.2]))
    pipe = box_flowpipe(ha, x0_box, None, 120.0, 0.01)
    rng = np.random.default_rng(12)
    for _ in range(25):
        x0 = rng.uniform(x0_box.lo, x0_box.hi)
        tr = integrate(ha, x0, None, 120.0, 0.01)
        for k in range(0, len(tr.times), 137):
            assert pipe.contains(tr.times[k], tr.states[k]), (x0, tr.times[k])
        assert pipe.contains(tr.times[-1], tr.states[-1])


def test_flowpipe_boxes_within_declared_bounds(ha):
    x0_box = Box(np.array([14.8, 15.0]), np.array([15.2, 15.2]))
    pipe = box_flowpipe(ha, x0_box, None, 120.0, 0.01)
    for seg in pipe.segments:
        assert seg.box.lo[0] >= 10.0 - 1e-9 and seg.box.hi[0] <= 30.0 + 1e-9
        assert seg.box.lo[1] >= 15.0 - 1e-9 and seg.box.hi[1] <= 30.0 + 1e-9


def test_flowpipe_truncation_warns(ha):
    # initial box partly below the supply-air domain: clipped, with a record
    x0_box = Box(np.array([14.8, 14.8]), np.array([15.2, 15.2]))
    pipe = box_flowpipe(ha, x0_box, None, 1.0, 0.01)
    assert any("truncated" in w for w in pipe.warnings)


def test_flowpipe_mode_coverage(ha):
    x0_box = Box(np.array([14.8, 15.0]), np.array([15.2, 15.2]))
    pipe = box_flowpipe(ha, x0_box, None, 120.0, 0.01)
    modes = {seg.mode for seg in pipe.segments}
    assert modes == {"(H,Op)", "(M,Op)", "(O,-)"}
