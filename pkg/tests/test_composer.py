import numpy as np
import pytest

from baslib.benchmarks import build_benchmark, cs1_structural
from baslib.channels import ChannelSpace
from baslib.components import (
    Component,
    ComponentKind,
    ComponentParams,
    ModeConfig,
    apply_mode,
    default_params,
    instantiate_component,
)
from baslib.composer import Alias, Connection, Wiring, connect, flatten
from baslib.discretize import forward_euler
from baslib.dynamics import AffineVariant, AlgebraicMap, ContinuousModel
from baslib.errors import WiringError
from baslib.simulate import constant_schedule, simulate


@pytest.fixture(scope="module")
def params():
    return default_params()


def _mixer_duct(params):
    mixer = instantiate_component(ComponentKind.MIXER, params, "mixer")
    mixer = apply_mode(mixer, ModeConfig(mixer="open"))  # T_d = T_out
    duct = instantiate_component(ComponentKind.AHU_AIR_DUCT, params, "duct")
    duct = apply_mode(duct, ModeConfig(fan="medium"))    # freeze m_a
    wiring = Wiring(connections=(Connection("mixer", "T_d", "duct", "T_d"),))
    return connect([mixer, duct], wiring)


def test_mixer_feeds_duct(params):
    comp = _mixer_duct(params)
    flat = flatten(comp)
    # after substitution the duct drift reads T_out directly
    assert "T_out" in flat.inputs.names
    i_tout = flat.inputs.index("T_out")
    assert flat.drift_b[0, i_tout] > 0
    # evaluating composite and flat model agrees
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.normal(20, 3, size=1)
        u = rng.normal(18, 4, size=flat.inputs.dim)
        np.testing.assert_allclose(comp.drift(x, u), flat.drift(x, u), atol=1e-12)


def test_dangling_reference_rejected(params):
    mixer = instantiate_component(ComponentKind.MIXER, params, "mixer")
    duct = instantiate_component(ComponentKind.AHU_AIR_DUCT, params, "duct")
    wiring = Wiring(connections=(Connection("mixer", "T_zz", "duct", "T_d"),))
    with pytest.raises(WiringError, match="dangling"):
        connect([mixer, duct], wiring)


def test_duplicate_drive_rejected(params):
    mixer = instantiate_component(ComponentKind.MIXER, params, "mixer")
    duct = instantiate_component(ComponentKind.AHU_AIR_DUCT, params, "duct")
    wiring = Wiring(
        connections=(Connection("mixer", "T_d", "duct", "T_d"),),
        aliases=(Alias("sig", "duct", "T_d"),),
    )
    with pytest.raises(WiringError, match="driven more than once"):
        connect([mixer, duct], wiring)


def _passthrough(name, in_ch, out_ch):
    return Component(
        ComponentKind.MIXER, name,
        AlgebraicMap(
            ChannelSpace.of("inputs", (in_ch, "degC")),
            ChannelSpace.of("outputs", (out_ch, "degC")),
            {"id": AffineVariant(np.array([[1.0]]), np.zeros(1))},
        ),
        ComponentParams({}),
    )


def test_algebraic_cycle_rejected():
    a = _passthrough("a", "ain", "aout")
    b = _passthrough("b", "bin", "bout")
    wiring = Wiring(connections=(
        Connection("a", "aout", "b", "bin"),
        Connection("b", "bout", "a", "ain"),
    ))
    with pytest.raises(WiringError, match="cycle"):
        connect([a, b], wiring)


def test_cs1_pipeline_states_and_classification():
    comp = cs1_structural()
    assert comp.state_names == ("T_z1", "T_z2", "T_rw_r1", "T_rw_r2")
    assert comp.free_controls == ("T_sa",)
    assert comp.free_exogenous == ()
    flat = flatten(comp)
    assert flat.states.dim == sum(
        c.model.states.dim for c in comp.components
        if isinstance(c.model, ContinuousModel)
    )


def test_cs1_pipeline_reproduces_published_structure():
    """Sparsity and sign pattern of the published 4-state matrices.

    Values depend on undisclosed physical parameters; the structure does not.
    """
    flat = flatten(cs1_structural())
    ref = build_benchmark("cs1-det").model
    dm = forward_euler(flat, 15.0)
    np.testing.assert_array_equal(dm.a != 0.0, ref.a != 0.0)
    np.testing.assert_array_equal(dm.b != 0.0, ref.b != 0.0)
    # continuous-time signs: self-relaxation negative, couplings positive
    assert all(flat.drift_a[i, i] < 0 for i in range(4))
    off = flat.drift_a[~np.eye(4, dtype=bool)]
    assert np.all(off[off != 0] > 0)
    assert np.all(flat.drift_b >= 0) and np.all(flat.drift_q > 0)
    assert np.all(dm.q > 0)


def test_composite_simulation_equals_flattened():
    comp = cs1_structural()
    flat = flatten(comp)
    delta = 15.0
    dm = forward_euler(flat, delta)
    x = np.array([18.0, 18.0, 35.0, 35.0])
    xs_composite = [x.copy()]
    for _ in range(20):
        x = x + delta * comp.drift(x, np.array([20.0]))
        xs_composite.append(x.copy())
    trace = simulate(dm, [18.0, 18.0, 35.0, 35.0],
                     constant_schedule(20.0, delta), None, seed=0, n_steps=20)
    np.testing.assert_allclose(np.array(xs_composite), trace.states, atol=1e-9)


def test_flatten_of_empty_composite():
    comp = connect([], Wiring())
    flat = flatten(comp)
    assert flat.states.dim == 0


def test_wiring_doc_roundtrip_fields():
    comp = cs1_structural()
    doc = comp.to_wiring_doc()
    assert {c["name"] for c in doc["components"]} == {"zone", "rad1", "rad2"}
    assert len(doc["connections"]) == 4
    assert doc["inputs"] == ["T_sa"]
    assert doc["states"] == ["T_z1", "T_z2", "T_rw_r1", "T_rw_r2"]
