import json
import math

import numpy as np
import pytest

from baslib.components import (
    Component,
    ComponentKind,
    ComponentParams,
    ModeConfig,
    apply_mode,
    default_params,
    enumerate_modes,
    instantiate_component,
    make_zone,
)
from baslib.dynamics import eval_algebraic, eval_drift
from baslib.errors import InvalidParameter, MissingParameter


@pytest.fixture(scope="module")
def params():
    return default_params()


def test_boiler_off_mode_zeroes_drift(params):
    comp = instantiate_component(ComponentKind.BOILER, params)
    off = apply_mode(comp, ModeConfig(boiler="off"))
    assert np.all(off.model.drift_a == 0.0)
    assert np.all(off.model.drift_q == 0.0)
    assert np.all(off.model.noise_sigma == 0.0)
    assert eval_drift(off.model, [63.0], [])[0] == 0.0
    on = apply_mode(off, ModeConfig(boiler="on"))
    assert eval_drift(on.model, [75.0], [])[0] == pytest.approx(0.0)


def test_mixer_open_selects_outside_air(params):
    comp = instantiate_component(ComponentKind.MIXER, params)
    opened = apply_mode(comp, ModeConfig(mixer="open"))
    out = eval_algebraic(opened.model, opened.model.default_mode, [9.0, 20.0, 22.0])
    assert out[0] == 9.0
    closed = apply_mode(comp, ModeConfig(mixer="closed"))
    out = eval_algebraic(closed.model, closed.model.default_mode, [9.0, 20.0, 22.0])
    assert out[0] == pytest.approx(21.0)


def test_valve_exponential_law():
    p = ComponentParams({"tau": math.e, "w_max": 1.0})
    comp = instantiate_component(ComponentKind.VALVE, p)
    w = eval_algebraic(comp.model, "healthy", [0.5])
    assert w[0] == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert eval_algebraic(comp.model, "healthy", [1.0])[0] == pytest.approx(1.0)
    assert eval_algebraic(comp.model, "healthy", [0.0])[0] == pytest.approx(1 / math.e)


def test_valve_mode_axes(params):
    coil_valve = instantiate_component(ComponentKind.VALVE, params, role="ahu_coil")
    faulty = apply_mode(coil_valve, ModeConfig(ahu_coil_valve="faulty"))
    # stuck at zero flow regardless of commanded position
    for pos in (0.0, 0.5, 1.0):
        assert eval_algebraic(faulty.model, faulty.model.default_mode, [pos])[0] == 0.0
    rad2 = instantiate_component(ComponentKind.VALVE, params, role="radiator2")
    w_max = params.require("w_max")
    tau = params.require("tau")
    full = apply_mode(rad2, ModeConfig(radiator2_valve="fully_open"))
    assert eval_algebraic(full.model, full.model.default_mode, [0.3])[0] == \
        pytest.approx(w_max)
    closed = apply_mode(rad2, ModeConfig(radiator2_valve="closed"))
    assert eval_algebraic(closed.model, closed.model.default_mode, [0.3])[0] == \
        pytest.approx(w_max / tau)


def test_fan_modes_freeze_air_flow(params):
    duct = instantiate_component(ComponentKind.AHU_AIR_DUCT, params)
    assert not duct.model.is_affine
    off = apply_mode(duct, ModeConfig(fan="off"))
    assert off.model.is_affine
    # with m_a = 0 the T_d column is dead: only wall/zone conduction remains
    d0 = eval_drift(off.model, [20.0], [25.0, 22.0])
    d1 = eval_drift(off.model, [20.0], [99.0, 22.0])
    assert d0[0] == d1[0]
    high = apply_mode(duct, ModeConfig(fan="high"))
    base = duct.model
    want = eval_drift(base, [20.0], [params.require("m_a_high"), 25.0, 22.0])
    got = eval_drift(high.model, [20.0], [25.0, 22.0])
    assert got[0] == pytest.approx(want[0], abs=1e-12)


def test_apply_mode_idempotent(params):
    duct = instantiate_component(ComponentKind.AHU_AIR_DUCT, params)
    mode = ModeConfig(fan="medium")
    once = apply_mode(duct, mode)
    twice = apply_mode(once, mode)
    np.testing.assert_array_equal(once.model.drift_a, twice.model.drift_a)
    np.testing.assert_array_equal(once.model.drift_b, twice.model.drift_b)
    np.testing.assert_array_equal(once.model.drift_q, twice.model.drift_q)


def test_enumerate_modes_counts():
    all_modes = enumerate_modes()
    assert len(all_modes) == 144
    assert len(set(all_modes)) == 144
    assert len(enumerate_modes({"boiler"})) == 2
    assert len(enumerate_modes(set())) == 1
    assert enumerate_modes(set())[0] == ModeConfig()
    with pytest.raises(InvalidParameter):
        enumerate_modes({"boiler", "humidifier"})


def test_enumerate_modes_deterministic_order():
    assert enumerate_modes({"fan"}) == [
        ModeConfig(fan="off"), ModeConfig(fan="medium"), ModeConfig(fan="high")
    ]


def test_missing_parameter_names_symbol():
    with pytest.raises(MissingParameter) as exc:
        instantiate_component(ComponentKind.BOILER, ComponentParams({"k_b": 75.0}))
    assert exc.value.symbol == "tau_sw"


def test_nonpositive_capacity_rejected():
    with pytest.raises(InvalidParameter):
        ComponentParams({"C_z1": -2.0})
    with pytest.raises(InvalidParameter):
        ComponentParams({"tau": 0.0})


def test_params_json_roundtrip(tmp_path, params):
    doc = params.to_json_dict()
    path = tmp_path / "params.json"
    path.write_text(json.dumps(doc))
    back = ComponentParams.from_json_file(path)
    for sym in params:
        assert back.require(sym) == params.require(sym)
        assert back.unit(sym) == params.unit(sym)


def test_default_params_flagged_non_authoritative():
    from importlib.resources import files

    doc = json.loads(
        files("baslib.data").joinpath("default_params.json").read_text()
    )
    assert doc["_meta"]["authoritative"] is False


def test_zone_block_shape_and_sparsity(params):
    zone = make_zone(params)
    # two zones plus the five walls of the default layout
    assert zone.states.names == (
        "T_z1", "T_z2", "T_w2", "T_w3", "T_w5", "T_w6", "T_w7"
    )
    a = zone.drift_a
    idx = {n: i for i, n in enumerate(zone.states.names)}
    # partition wall couples to both zones; outer walls to their own zone only
    assert a[idx["T_w7"], idx["T_z1"]] > 0 and a[idx["T_w7"], idx["T_z2"]] > 0
    assert a[idx["T_w5"], idx["T_z1"]] > 0 and a[idx["T_w5"], idx["T_z2"]] == 0
    assert a[idx["T_w6"], idx["T_z2"]] > 0 and a[idx["T_w6"], idx["T_z1"]] == 0
    # zones do not couple directly (only through walls)
    assert a[idx["T_z1"], idx["T_z2"]] == 0 and a[idx["T_z2"], idx["T_z1"]] == 0
    assert all(a[i, i] < 0 for i in range(a.shape[0]))
    # occupancy enters through the CO2 disturbances, solar through T_out
    assert "CO2_1" in zone.disturbances.names
    assert "T_out" in zone.disturbances.names and "T_hall" in zone.disturbances.names


def test_zone_reduced_by_fixed_walls(params):
    zone = make_zone(
        params, fixed_wall_temperature=18.0,
        include_occupancy=False, include_solar=False, include_coil_return=False,
    )
    assert zone.states.names == ("T_z1", "T_z2")
    assert zone.disturbances.dim == 0
    # the fixed wall temperature shows up as a constant heat in-flow
    assert np.all(zone.drift_q > 0)


def test_boiler_drift_depends_only_on_own_state(params):
    comp = instantiate_component(ComponentKind.BOILER, params)
    assert comp.model.states.dim == 1
    assert comp.model.inputs.dim == 0
