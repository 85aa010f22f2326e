"""Benchmark registry: the concrete case-study models, printed verbatim.

Every matrix entry is stored as the literal decimal string it was published
with and converted with ``float`` at build time, so builders are bit-exact
with respect to the printed tables and serialisation round-trips cannot lose
precision.  The registry is closed: nine ids covering the two-zone radiator
setup (deterministic / disturbed / stochastic), the seven-state wall model
with its four reduced-order variants, and the switched single-zone heating
automaton.

Benchmarks are constructed from these numbers directly, never re-derived
from physical parameters; ``cs1_structural`` builds the matching
component-pipeline composite so tests can compare structure (sparsity and
signs), not values.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .channels import canonical_unit
from .components import (
    Component,
    ComponentKind,
    ComponentParams,
    default_params,
    instantiate_component,
    make_zone,
)
from .composer import Alias, CompositeModel, Connection, Wiring, connect
from .discretize import DiscreteModel
from .dynamics import rename_channels
from .errors import MissingTableEntry, TraceFormatError, UnknownBenchmark
from .hybrid import HybridAutomaton, build_hybrid_cs3
from .reach import Box, TemplatePolytope

# Steady-state operating points shared by the two-zone case studies.
T_W_SS = 18.0          # wall temperature held constant, degC
T_SP = 20.0            # zone temperature set point, degC
T_SW_B_SS = 75.0       # boiler supply water, degC
T_Z1_SS = 20.0
T_Z2_SS = 20.0
T_RW_R1_SS = 35.0      # radiator return water, degC
T_RW_R2_SS = 35.0
T_RW_A_SS = 35.0       # AHU coil return water, degC

DELTA_DEFAULT = 15.0   # sampling time, minutes

SAFE_SET_CS1 = Box(np.array([19.5, 19.5]), np.array([20.5, 20.5]))
INPUT_INTERVAL_CS1 = (15.0, 22.0)
INPUT_INTERVAL_CS2 = (15.0, 30.0)

BENCHMARK_IDS = (
    "cs1-det", "cs1-dist", "cs1-stoch",
    "cs2-full", "cs2-abs4", "cs2-abs3", "cs2-abs2", "cs2-abs1",
    "cs3-hybrid",
)

# ---------------------------------------------------------------------------
# Printed decimal tables (single source of truth for every builder)
# ---------------------------------------------------------------------------

_CS1_A = [
    ["0.6682", "0", "0.02632", "0"],
    ["0", "0.6830", "0", "0.02096"],
    ["1.0005", "0", "-0.000499", "0"],
    ["0", "0.8004", "0", "0.1996"],
]
_CS1_B = [["0.1320"], ["0.1402"], ["0"], ["0"]]
_CS1_QD = ["3.4364", "2.9272", "13.0207", "10.4166"]
_CS1_FDA = [["8.760e-06", "0"], ["0", "2.704e-07"], ["0", "0"], ["0", "0"]]
_CS1_QDA = ["3.3378", "2.9106", "13.0207", "10.4166"]
_CS1_SIGMA = ["0.0774", "0.0774", "0.3872", "0.3098"]

_CS2_A = [
    ["0.9998", "6.54e-9", "2.23e-5", "2.23e-5", "2.23e-5", "4.88e-14", "4.88e-14"],
    ["5.739e-9", "0.9998", "4.27e-14", "4.27e-14", "2.23e-5", "2.23e-5", "2.23e-5"],
    ["0.0005", "1.27e-12", "0.9989", "6.54e-9", "6.54e-9", "7.13e-18", "7.13e-18"],
    ["0.0005", "1.27e-12", "6.54e-9", "0.9989", "6.54e-9", "7.13e-18", "7.13e-18"],
    ["0.00051", "0.00058", "5.73e-9", "5.73e-9", "0.9989", "6.54e-9", "6.54e-9"],
    ["1.11e-12", "0.00058", "6.25e-18", "6.25e-18", "6.54e-9", "0.9989", "6.54e-9"],
    ["1.11e-12", "0.00058", "6.25e-18", "6.25e-18", "6.54e-9", "6.54e-9", "0.9980"],
]
_CS2_B = [["0.000122"], ["0.000122"], ["3.58e-8"], ["3.58e-8"],
          ["6.72e-8"], ["3.58e-8"], ["3.58e-8"]]
_CS2_F = [
    ["1.027e-8", "5.734e-9", "7.31e-9", "2.71e-15", "0.0013", "0.0014"],
    ["1.91e-7", "5.73e-9", "1.39e-17", "1.24e-6", "0.0021", "0.0022"],
    ["2.00e-12", "0.0005", "2.13e-12", "3.96e-19", "3.84e-7", "3.84e-7"],
    ["0.0009", "1.11e-12", "2.13e-12", "3.96e-19", "3.84e-7", "3.84e-7"],
    ["3.90e-11", "2.09e-12", "1.87e-12", "3.63e-10", "9.78e-7", "9.78e-7"],
    ["3.72e-11", "0.00051", "2.042e-21", "3.63e-10", "6.41e-7", "6.41e-7"],
    ["0.01708", "1.11e-12", "2.04e-21", "3.63e-10", "6.40e-7", "6.41e-7"],
]
_CS2_Q = ["0.2482", "-0.0055", "0.1270", "0.0201", "0.0145", "0.0144", "0.0145"]

_CS2A4_A = [
    ["0.9998", "2.23e-5", "2.23e-5", "2.23e-5"],
    ["0.00058", "0.9989", "6.54e-9", "6.54e-9"],
    ["0.00058", "6.54e-9", "0.9989", "6.54e-9"],
    ["0.00051", "5.73e-9", "5.73e-9", "0.9989"],
]
_CS2A4_B = [["0.00012"], ["3.5859e-8"], ["3.5859e-8"], ["3.1424e-8"]]
_CS2A4_F = [
    ["1.02e-8", "5.73e-9", "7.31e-9", "0.0013", "6.54e-9"],
    ["2.00e-12", "0.0005", "2.13e-12", "3.84e-7", "1.27e-12"],
    ["0.0009", "1.11e-12", "2.13e-12", "3.84e-7", "1.27e-12"],
    ["1.75e-12", "9.79e-13", "1.87e-12", "3.37e-7", "0.00058"],
]
_CS2A4_Q = ["0.2482", "0.1270", "0.0145", "0.0145"]

_CS2A3_A = [
    ["0.9998", "2.23e-5", "2.23e-5"],
    ["0.00058", "0.9989", "6.54e-9"],
    ["0.00058", "6.54e-9", "0.9980"],
]
_CS2A3_B = [["0.000122"], ["0.000122"], ["3.58e-8"]]
_CS2A3_F = [
    ["6.29e-9", "5.73e-9", "7.31e-9", "0.0013"],
    ["1.22e-12", "0.00051", "2.13e-12", "3.84e-7"],
    ["0.00056", "1.11e-12", "2.13e-12", "3.84e-7"],
]
_CS2A3_Q = ["0.2482", "0.1270", "0.0145"]

_CS2A2_A = [["0.9998", "2.237e-5"], ["0.00058", "0.9989"]]
_CS2A2_B = [["0.00012"], ["3.58e-8"]]
_CS2A2_F = [["1.027e-8", "7.31e-9", "0.0013"], ["0.00091", "2.13e-12", "3.84e-7"]]
_CS2A2_Q = ["0.2482", "0.1270"]

_CS2A1_A = [["0.9998"]]
_CS2A1_B = [["0.000122"]]
_CS2A1_F = [["6.31e-5", "7.31e-9", "0.0013"]]
_CS2A1_Q = ["0.2482"]

PRINTED: dict[str, dict] = {
    "cs1-det": {"A": _CS1_A, "B": _CS1_B, "Q": [_CS1_QD]},
    "cs1-dist": {"A": _CS1_A, "B": _CS1_B, "F": _CS1_FDA, "Q": [_CS1_QDA]},
    "cs1-stoch": {"A": _CS1_A, "B": _CS1_B, "Q": [_CS1_QD], "Sigma": [_CS1_SIGMA]},
    "cs2-full": {"A": _CS2_A, "B": _CS2_B, "F": _CS2_F, "Q": [_CS2_Q]},
    "cs2-abs4": {"A": _CS2A4_A, "B": _CS2A4_B, "F": _CS2A4_F, "Q": [_CS2A4_Q]},
    "cs2-abs3": {"A": _CS2A3_A, "B": _CS2A3_B, "F": _CS2A3_F, "Q": [_CS2A3_Q]},
    "cs2-abs2": {"A": _CS2A2_A, "B": _CS2A2_B, "F": _CS2A2_F, "Q": [_CS2A2_Q]},
    "cs2-abs1": {"A": _CS2A1_A, "B": _CS2A1_B, "F": _CS2A1_F, "Q": [_CS2A1_Q]},
}


def printed_matrices(benchmark_id: str) -> dict:
    """The raw printed decimal strings a builder uses, keyed by matrix name."""
    if benchmark_id not in PRINTED:
        raise UnknownBenchmark(benchmark_id, tuple(PRINTED))
    return PRINTED[benchmark_id]


def _mat(rows) -> np.ndarray:
    return np.array([[float(s) for s in row] for row in rows], dtype=float)


def _vec(row) -> np.ndarray:
    return np.array([float(s) for s in row], dtype=float)


# ---------------------------------------------------------------------------
# Disturbance laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisturbanceLaw:
    """Per-channel independent Gaussians, sampled fresh every step."""

    channels: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        stds = np.asarray(self.stds, dtype=float)
        if np.any(stds < 0):
            raise ValueError("disturbance standard deviations must be >= 0")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def dim(self) -> int:
        return len(self.channels)

    def sample(self, rng, n: int | None = None) -> np.ndarray:
        size = (self.dim,) if n is None else (n, self.dim)
        return self.means + self.stds * rng.standard_normal(size)


_GAUSS = {
    "T_out": (9.0, 1.0),
    "T_hall": (15.0, 1.0),
    "CO2_1": (500.0, 100.0),
    "CO2_2": (500.0, 100.0),
    "T_rw_r1": (35.0, 5.0),
    "T_rw_r2": (35.0, 5.0),
    "T_z2": (20.0, 1.0),
}


def disturbance_law(channels: tuple[str, ...]) -> DisturbanceLaw:
    means = np.array([_GAUSS[c][0] for c in channels])
    stds = np.array([_GAUSS[c][1] for c in channels])
    return DisturbanceLaw(channels, means, stds)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Benchmark:
    id: str
    model: DiscreteModel | HybridAutomaton
    disturbances: DisturbanceLaw | None
    input_interval: tuple[float, float] | None
    x0_default: tuple[float, ...]
    description: str


_CS1_STATES = ("T_z1", "T_z2", "T_rw_r1", "T_rw_r2")
_CS2_STATES = ("T_z1", "T_z2", "T_w5", "T_w6", "T_w2", "T_w3", "T_w7")


def _cs1_output() -> np.ndarray:
    return np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]])


def _e1_output(n: int) -> np.ndarray:
    c = np.zeros((1, n))
    c[0, 0] = 1.0
    return c


def _build_cs1(kind: str) -> Benchmark:
    a, b = _mat(_CS1_A), _mat(_CS1_B)
    if kind == "dist":
        f, q = _mat(_CS1_FDA), _vec(_CS1_QDA)
        dist_names = ("CO2_1", "CO2_2")
        law = disturbance_law(dist_names)
    else:
        f, q = np.zeros((4, 0)), _vec(_CS1_QD)
        dist_names = ()
        law = None
    sigma = _vec(_CS1_SIGMA) if kind == "stoch" else np.zeros(4)
    model = DiscreteModel(
        a, b, f, q, sigma, DELTA_DEFAULT, _cs1_output(),
        _CS1_STATES, ("T_sa",), dist_names,
    )
    return Benchmark(
        f"cs1-{kind}", model, law, INPUT_INTERVAL_CS1,
        (T_Z1_SS, T_Z2_SS, T_RW_R1_SS, T_RW_R2_SS),
        "two-zone radiator heating, 4 states"
        + {"det": " (deterministic)", "dist": " (additive CO2 disturbance)",
           "stoch": " (process noise)"}[kind],
    )


_CS2_TABLE = {
    "cs2-full": (_CS2_A, _CS2_B, _CS2_F, _CS2_Q, _CS2_STATES,
                 ("T_out", "T_hall", "CO2_1", "CO2_2", "T_rw_r1", "T_rw_r2")),
    "cs2-abs4": (_CS2A4_A, _CS2A4_B, _CS2A4_F, _CS2A4_Q,
                 ("T_z1", "T_w5", "T_w2", "T_w7"),
                 ("T_out", "T_hall", "CO2_1", "T_rw_r1", "T_z2")),
    "cs2-abs3": (_CS2A3_A, _CS2A3_B, _CS2A3_F, _CS2A3_Q,
                 ("T_z1", "T_w5", "T_w2"),
                 ("T_out", "T_hall", "CO2_1", "T_rw_r1")),
    "cs2-abs2": (_CS2A2_A, _CS2A2_B, _CS2A2_F, _CS2A2_Q,
                 ("T_z1", "T_w2"), ("T_out", "CO2_1", "T_rw_r1")),
    "cs2-abs1": (_CS2A1_A, _CS2A1_B, _CS2A1_F, _CS2A1_Q,
                 ("T_z1",), ("T_out", "CO2_1", "T_rw_r1")),
}


def _build_cs2(bid: str) -> Benchmark:
    a_s, b_s, f_s, q_s, states, dists = _CS2_TABLE[bid]
    n = len(states)
    model = DiscreteModel(
        _mat(a_s), _mat(b_s), _mat(f_s), _vec(q_s), np.zeros(n),
        DELTA_DEFAULT, _e1_output(n), states, ("T_sa",), dists,
    )
    x0 = tuple(T_SP if s.startswith("T_z") else T_W_SS for s in states)
    plural = "state" if n == 1 else "states"
    return Benchmark(
        bid, model, disturbance_law(dists), INPUT_INTERVAL_CS2, x0,
        f"two-zone wall network, {n} {plural}"
        if bid == "cs2-full" else f"reduced wall-network model, {n} {plural}",
    )


def build_benchmark(benchmark_id: str) -> Benchmark:
    """Look up and build one registry entry (matrices at printed precision)."""
    if benchmark_id not in BENCHMARK_IDS:
        raise UnknownBenchmark(benchmark_id, BENCHMARK_IDS)
    if benchmark_id.startswith("cs1-"):
        return _build_cs1(benchmark_id.split("-", 1)[1])
    if benchmark_id.startswith("cs2-"):
        return _build_cs2(benchmark_id)
    return Benchmark(
        "cs3-hybrid", build_hybrid_cs3(), None, None, (20.0, 20.0),
        "single-zone heating automaton, 5 modes over (T_z1, T_sa)",
    )


# ---------------------------------------------------------------------------
# Published reach-tube polytopes (facet lists over the cs1 state order)
# ---------------------------------------------------------------------------

_POLY_CS1_DET = [
    ((1, 0, 0, 0), "22.2282"), ((0, 1, 0, 0), "22"),
    ((0, 0, 1, 0), "40"), ((0, 0, 0, 1), "40"),
    ((-1, 0, 0, 0), "-10.0899"), ((0, -1, 0, 0), "-5.40334"),
    ((0, 0, -1, 0), "105.958"), ((0, 0, 0, -1), "-11.1481"),
    ((1, 1, 0, 0), "44"), ((1, 0, 1, 0), "62"),
    ((1, 0, 0, 1), "62"), ((1, -1, 0, 0), "9.40198"),
    ((1, 0, -1, 0), "116.097"), ((1, 0, 0, -1), "1.12788"),
    ((-1, 1, 0, 0), "7"), ((-1, 0, 1, 0), "25"),
    ((-1, 0, 0, 1), "25"), ((-1, -1, 0, 0), "-15.4932"),
    ((-1, 0, -1, 0), "95.8203"), ((-1, 0, 0, -1), "-21.238"),
    ((0, 1, 1, 0), "62"), ((0, 1, 0, 1), "62"),
    ((0, 1, -1, 0), "114.105"), ((0, 1, 0, -1), "-5.50237"),
    ((0, -1, 1, 0), "25"), ((0, -1, 0, 1), "25"),
    ((0, -1, -1, 0), "100.555"), ((0, -1, 0, -1), "-16.5515"),
    ((0, 0, 1, 1), "80"), ((0, 0, 1, -1), "10"),
    ((0, 0, -1, 1), "126.441"), ((0, 0, -1, -1), "94.8101"),
]

_POLY_CS1_DIST = [
    ((1, 0, 0, 0), "22.3242"), ((0, 1, 0, 0), "22"),
    ((0, 0, 1, 0), "40"), ((0, 0, 0, 1), "40"),
    ((-1, 0, 0, 0), "-10.1225"), ((0, -1, 0, 0), "-5.38875"),
    ((0, 0, -1, 0), "109.275"), ((0, 0, 0, -1), "-11.1512"),
    ((1, 1, 0, 0), "44"), ((1, 0, 1, 0), "62"),
    ((1, 0, 0, 1), "62"), ((1, -1, 0, 0), "9.50273"),
    ((1, 0, -1, 0), "119.446"), ((1, 0, 0, -1), "1.20718"),
    ((-1, 1, 0, 0), "7"), ((-1, 0, 1, 0), "25"),
    ((-1, 0, 0, 1), "25"), ((-1, -1, 0, 0), "-15.5113"),
    ((-1, 0, -1, 0), "99.1041"), ((-1, 0, 0, -1), "-21.2737"),
    ((0, 1, 1, 0), "62"), ((0, 1, 0, 1), "62"),
    ((0, 1, -1, 0), "117.336"), ((0, 1, 0, -1), "-5.51993"),
    ((0, -1, 1, 0), "25"), ((0, -1, 0, 1), "25"),
    ((0, -1, -1, 0), "103.886"), ((0, -1, 0, -1), "-16.5399"),
    ((0, 0, 1, 1), "80"), ((0, 0, 1, -1), "10"),
    ((0, 0, -1, 1), "129.684"), ((0, 0, -1, -1), "98.1239"),
]

_REACH_POLYTOPES = {"cs1-det": _POLY_CS1_DET, "cs1-dist": _POLY_CS1_DIST}


def reference_polytope(benchmark_id: str) -> TemplatePolytope:
    """The published 32-facet reach-tube polytope for cs1-det or cs1-dist."""
    if benchmark_id not in _REACH_POLYTOPES:
        raise UnknownBenchmark(benchmark_id, tuple(_REACH_POLYTOPES))
    rows = _REACH_POLYTOPES[benchmark_id]
    dirs = np.array([r[0] for r in rows], dtype=float)
    bounds = np.array([float(r[1]) for r in rows])
    return TemplatePolytope(dirs, bounds)


# ---------------------------------------------------------------------------
# (epsilon, delta) simulation-relation table for the reduced cs2 models
# ---------------------------------------------------------------------------

SIM_REL_DELTAS = (1.0, 10 ** -0.5, 10 ** -1.0, 10 ** -1.5,
                  10 ** -2.0, 10 ** -2.5, 10 ** -3.0)

_SIM_REL_EPS = {
    4: ("0.0008", "0.1754", "0.2084", "0.2339", "0.2555", "0.2745", "0.2910"),
    3: ("0.0006", "0.1933", "0.2312", "0.2598", "0.2831", "0.3065", "0.3241"),
    2: ("0.0011", "0.1950", "0.2373", "0.2681", "0.2928", "0.3155", "0.3278"),
    1: ("0.0010", "0.1953", "0.2371", "0.2595", "0.2854", "0.3103", "0.3254"),
}


def sim_rel_table() -> dict[tuple[int, float], float]:
    """All 28 (abstract order, delta) -> epsilon entries."""
    return {
        (order, d): float(eps)
        for order, row in _SIM_REL_EPS.items()
        for d, eps in zip(SIM_REL_DELTAS, row)
    }


def sim_rel_lookup(abstract_order: int, delta: float) -> float:
    """Output-deviation bound epsilon for one (abstract order, delta) pair."""
    if abstract_order not in _SIM_REL_EPS:
        raise MissingTableEntry(
            f"no abstract model of order {abstract_order}; orders are 4..1"
        )
    for d, eps in zip(SIM_REL_DELTAS, _SIM_REL_EPS[abstract_order]):
        if math.isclose(d, delta, rel_tol=1e-9, abs_tol=0.0):
            return float(eps)
    raise MissingTableEntry(
        f"no table entry for delta={delta!r}; tabulated deltas: "
        + ", ".join(f"{d:.6g}" for d in SIM_REL_DELTAS)
    )


# ---------------------------------------------------------------------------
# Measured traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasuredTrace:
    """Time-indexed sensor table loaded from CSV (times in minutes)."""

    times: np.ndarray
    channels: tuple[str, ...]
    units: tuple[str, ...]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration_minutes(self) -> float:
        return float(self.times[-1] - self.times[0]) if len(self.times) else 0.0

    def channel(self, name: str) -> np.ndarray:
        return self.values[:, self.channels.index(name)]


def _parse_header_cell(cell: str) -> tuple[str, str]:
    cell = cell.strip()
    if cell.endswith("]") and "[" in cell:
        name, unit = cell[:-1].split("[", 1)
        try:
            return name.strip(), canonical_unit(unit.strip())
        except ValueError as exc:
            raise TraceFormatError(f"unknown unit suffix in column {cell!r}: {exc}")
    return cell, ""


def load_trace_csv(path) -> MeasuredTrace:
    """Load a measured trace: header ``t_min,<channel>[,<channel>...]``.

    Channel headers may carry a ``[unit]`` suffix from the known unit set.
    Timestamps must be strictly increasing; rows must be numeric and of equal
    arity.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file") from None
        if not header:
            raise TraceFormatError(f"{path}: empty header row")
        tname, _ = _parse_header_cell(header[0])
        if tname not in ("t_min", "t", "timestamp"):
            raise TraceFormatError(
                f"{path}: first column must be the timestamp (t_min), got {tname!r}"
            )
        parsed = [_parse_header_cell(c) for c in header[1:]]
        names = tuple(p[0] for p in parsed)
        units = tuple(p[1] for p in parsed)
        times, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise TraceFormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise TraceFormatError(
                    f"{path}:{lineno}: non-numeric value in {row!r}"
                ) from None
            times.append(vals[0])
            rows.append(vals[1:])
    times_arr = np.array(times)
    if len(times_arr) >= 2 and np.any(np.diff(times_arr) <= 0):
        k = int(np.nonzero(np.diff(times_arr) <= 0)[0][0])
        raise TraceFormatError(
            f"{path}: timestamps not strictly increasing at row {k + 2} "
            f"({times_arr[k]} -> {times_arr[k + 1]})"
        )
    return MeasuredTrace(
        times_arr, names, units,
        np.array(rows).reshape(len(times_arr), len(names)),
    )


# ---------------------------------------------------------------------------
# Component-pipeline reconstruction of the 4-state radiator setup
# ---------------------------------------------------------------------------

def cs1_structural(params: ComponentParams | None = None,
                   m_a: float = 10.0, w_r: float = 0.05) -> CompositeModel:
    """Two simplified zones plus two radiators, wired as in the first case
    study: walls held at ``T_W_SS``, occupancy and solar gains dropped, fan
    and radiator water flows fixed, boiler supply frozen at ``T_SW_B_SS``.

    Used to check that the component/composer pipeline reproduces the
    structure (sparsity and signs) of the published 4-state matrices; the
    numeric values depend on physical parameters the published tables do not
    disclose.
    """
    p = params or default_params()
    zone_model = make_zone(
        p, fixed_wall_temperature=T_W_SS,
        include_occupancy=False, include_solar=False, include_coil_return=False,
    ).freeze_input("m_a", m_a)
    zone = Component(ComponentKind.ZONE, "zone", zone_model, p)
    rads = []
    for i in (1, 2):
        model = instantiate_component(ComponentKind.RADIATOR, p, f"rad{i}").model
        model = rename_channels(model, states={"T_rw_r": f"T_rw_r{i}"})
        model = model.freeze_input("w_r", w_r).freeze_input("T_sw_b", T_SW_B_SS)
        rads.append(Component(ComponentKind.RADIATOR, f"rad{i}", model, p))
    wiring = Wiring(
        connections=(
            Connection("rad1", "T_rw_r1", "zone", "T_rw_r1"),
            Connection("rad2", "T_rw_r2", "zone", "T_rw_r2"),
            Connection("zone", "T_z1", "rad1", "T_z"),
            Connection("zone", "T_z2", "rad2", "T_z"),
        ),
        aliases=(
            Alias("T_sa", "zone", "T_sa1"),
            Alias("T_sa", "zone", "T_sa2"),
        ),
    )
    return connect([zone, *rads], wiring)
