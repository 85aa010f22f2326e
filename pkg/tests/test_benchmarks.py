import numpy as np
import pytest

from baslib import benchmarks as bm
from baslib.benchmarks import (
    BENCHMARK_IDS,
    build_benchmark,
    disturbance_law,
    load_trace_csv,
    printed_matrices,
    reference_polytope,
    sim_rel_lookup,
    sim_rel_table,
)
from baslib.errors import MissingTableEntry, TraceFormatError, UnknownBenchmark
from baslib.hybrid import HybridAutomaton
from baslib.io import discrete_model_from_dict, discrete_model_to_dict


def test_registry_is_closed():
    assert len(BENCHMARK_IDS) == 9
    with pytest.raises(UnknownBenchmark) as exc:
        build_benchmark("cs9")
    assert "cs1-det" in str(exc.value)


def test_cs1_matrix_spot_values():
    b = build_benchmark("cs1-det")
    assert b.model.a[0, 0] == 0.6682
    assert b.model.b[0, 0] == 0.1320
    np.testing.assert_array_equal(
        b.model.q, np.array([3.4364, 2.9272, 13.0207, 10.4166])
    )


def test_cs2_matrix_spot_values():
    b = build_benchmark("cs2-full")
    assert b.model.a[0, 0] == 0.9998
    assert b.model.q[0] == 0.2482
    assert b.model.a.shape == (7, 7)
    assert b.model.f.shape == (7, 6)
    assert b.model.state_names == (
        "T_z1", "T_z2", "T_w5", "T_w6", "T_w2", "T_w3", "T_w7"
    )


def test_printed_fidelity_everywhere():
    # every printed decimal string parses to exactly the built matrix entry
    for bid, tables in bm.PRINTED.items():
        bench = build_benchmark(bid)
        model = bench.model
        mats = {"A": model.a, "B": model.b, "Q": model.q.reshape(1, -1),
                "Sigma": model.sigma.reshape(1, -1)}
        if model.n_disturbances:
            mats["F"] = model.f
        for name, rows in tables.items():
            built = np.atleast_2d(mats[name])
            for i, row in enumerate(rows):
                for j, cell in enumerate(row):
                    assert float(cell) == built[i, j], (bid, name, i, j)


def test_cs1_variants_share_drift_matrices():
    det = build_benchmark("cs1-det").model
    dist = build_benchmark("cs1-dist").model
    stoch = build_benchmark("cs1-stoch").model
    np.testing.assert_array_equal(det.a, dist.a)
    np.testing.assert_array_equal(det.a, stoch.a)
    np.testing.assert_array_equal(det.b, stoch.b)
    np.testing.assert_array_equal(det.q, stoch.q)
    # the disturbance variant swaps in its own constant vector
    np.testing.assert_array_equal(
        dist.q, np.array([3.3378, 2.9106, 13.0207, 10.4166])
    )


def test_steady_state_constants():
    assert (bm.T_W_SS, bm.T_SP, bm.T_SW_B_SS) == (18.0, 20.0, 75.0)
    assert (bm.T_RW_R1_SS, bm.T_RW_R2_SS) == (35.0, 35.0)
    assert (bm.T_Z1_SS, bm.T_Z2_SS) == (20.0, 20.0)


def test_model_json_roundtrip():
    for bid in BENCHMARK_IDS:
        bench = build_benchmark(bid)
        if isinstance(bench.model, HybridAutomaton):
            continue
        doc = discrete_model_to_dict(bench.model)
        back = discrete_model_from_dict(doc)
        for fld in ("a", "b", "f", "q", "sigma", "output_c"):
            np.testing.assert_array_equal(
                getattr(back, fld), getattr(bench.model, fld)
            )
        assert back.state_names == bench.model.state_names


def test_disturbance_laws():
    dist = build_benchmark("cs1-dist")
    assert dist.disturbances.channels == ("CO2_1", "CO2_2")
    np.testing.assert_array_equal(dist.disturbances.means, [500.0, 500.0])
    np.testing.assert_array_equal(dist.disturbances.stds, [100.0, 100.0])
    full = build_benchmark("cs2-full").disturbances
    assert full.channels == ("T_out", "T_hall", "CO2_1", "CO2_2", "T_rw_r1", "T_rw_r2")
    np.testing.assert_array_equal(full.means, [9, 15, 500, 500, 35, 35])
    abs4 = build_benchmark("cs2-abs4").disturbances
    assert abs4.channels[-1] == "T_z2"
    assert abs4.means[-1] == 20.0 and abs4.stds[-1] == 1.0
    with pytest.raises(ValueError):
        bm.DisturbanceLaw(("a",), np.array([0.0]), np.array([-1.0]))


def test_disturbance_sampling_shapes():
    law = disturbance_law(("CO2_1", "CO2_2"))
    rng = np.random.default_rng(0)
    assert law.sample(rng).shape == (2,)
    assert law.sample(rng, 5).shape == (5, 2)


def test_sim_rel_lookup():
    assert sim_rel_lookup(1, 1e-2) == 0.2854
    assert sim_rel_lookup(4, 1.0) == 0.0008
    assert sim_rel_lookup(3, 10 ** -0.5) == 0.1933
    table = sim_rel_table()
    assert len(table) == 28
    assert all(eps >= 0 for eps in table.values())
    with pytest.raises(MissingTableEntry):
        sim_rel_lookup(1, 1e-4)
    with pytest.raises(MissingTableEntry):
        sim_rel_lookup(5, 1e-2)


def test_reference_polytopes():
    for bid in ("cs1-det", "cs1-dist"):
        poly = reference_polytope(bid)
        assert poly.n_facets == 32
        assert poly.dim == 4
    det = reference_polytope("cs1-det")
    assert det.bound_for(np.array([1.0, 0, 0, 0])) == 22.2282
    assert det.bound_for(np.array([0, 0, -1.0, 0])) == 105.958
    with pytest.raises(UnknownBenchmark):
        reference_polytope("cs2-full")


def test_printed_matrices_accessor():
    tables = printed_matrices("cs1-det")
    assert tables["A"][0][0] == "0.6682"
    with pytest.raises(UnknownBenchmark):
        printed_matrices("cs3-hybrid")


# -- measured traces ---------------------------------------------------------

def _write(tmp_path, text):
    path = tmp_path / "trace.csv"
    path.write_text(text)
    return path


def test_load_trace_two_rows(tmp_path):
    trace = load_trace_csv(_write(tmp_path, "t_min,T_z1\n0,20.5\n1,20.7\n"))
    assert len(trace) == 2
    assert trace.channels == ("T_z1",)
    np.testing.assert_allclose(trace.channel("T_z1"), [20.5, 20.7])


def test_load_trace_non_monotone_rejected(tmp_path):
    with pytest.raises(TraceFormatError, match="increasing"):
        load_trace_csv(_write(tmp_path, "t_min,T_z1\n0,20\n2,21\n1,22\n"))


def test_load_trace_malformed_row(tmp_path):
    with pytest.raises(TraceFormatError, match="fields"):
        load_trace_csv(_write(tmp_path, "t_min,T_z1\n0,20\n1\n"))
    with pytest.raises(TraceFormatError, match="non-numeric"):
        load_trace_csv(_write(tmp_path, "t_min,T_z1\n0,warm\n"))


def test_load_trace_unknown_unit_suffix(tmp_path):
    with pytest.raises(TraceFormatError, match="unit"):
        load_trace_csv(_write(tmp_path, "t_min,T_z1[furlong]\n0,20\n"))


def test_load_trace_two_days_of_minutes(tmp_path):
    rows = "\n".join(f"{i},{20 + 0.001 * i}" for i in range(2880))
    trace = load_trace_csv(_write(tmp_path, "t_min,T_z1[degC]\n" + rows + "\n"))
    assert len(trace) == 2880
    # one-minute sampling spans two days
    assert trace.duration_minutes == pytest.approx(2879.0)
    assert trace.duration_minutes + 1.0 == pytest.approx(2 * 1440.0)
    assert trace.units == ("degC",)


def test_load_trace_requires_timestamp_column(tmp_path):
    with pytest.raises(TraceFormatError, match="timestamp"):
        load_trace_csv(_write(tmp_path, "T_z1,T_z2\n1,2\n"))
