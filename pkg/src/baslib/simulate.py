"""Trajectory generation for discrete-time models.

The random stream is counter-based (Philox) and fully determined by the user
seed: trace ``i`` of a Monte-Carlo ensemble draws from the child stream
``SeedSequence(seed).spawn`` position ``i``, and each step consumes a
fixed-size block (disturbance draws, then noise draws), so results do not
depend on evaluation order and ensembles can be generated in parallel.

Wall-clock anchoring of input schedules: step 0 starts at 00:00 of day 1 and
step k covers [k*Delta, (k+1)*Delta) minutes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .benchmarks import DisturbanceLaw
from .discretize import DiscreteModel
from .errors import DimensionMismatch, InvalidParameter

WEEKDAY_SCHEDULE_NAME = "cs1-weekday"


@dataclass(frozen=True)
class InputSchedule:
    """Map from step index to input vector, with a wall-clock anchor."""

    fn: object                       # callable step -> array-like
    delta_minutes: float = 15.0
    anchor_minutes: float = 0.0      # wall-clock time of step 0
    name: str = ""

    def u_at(self, k: int) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.fn(k), dtype=float))

    def minutes_of_day(self, k: int) -> float:
        return (self.anchor_minutes + k * self.delta_minutes) % 1440.0


def constant_schedule(u, delta_minutes: float = 15.0) -> InputSchedule:
    vec = np.atleast_1d(np.asarray(u, dtype=float))
    return InputSchedule(lambda k: vec, delta_minutes, name=f"const:{vec.tolist()}")


def weekday_schedule(delta_minutes: float = 15.0,
                     on_temp: float = 20.0, off_temp: float = 18.0) -> InputSchedule:
    """Supply-air set-point schedule: ``on_temp`` during the occupied windows
    08:00-12:00 and 13:00-18:00 (closed-open), ``off_temp`` otherwise."""

    def fn(k: int):
        minute = (k * delta_minutes) % 1440.0
        on = (480.0 <= minute < 720.0) or (780.0 <= minute < 1080.0)
        return np.array([on_temp if on else off_temp])

    return InputSchedule(fn, delta_minutes, name=WEEKDAY_SCHEDULE_NAME)


def input_schedule(name: str, delta_minutes: float = 15.0) -> InputSchedule:
    if name == WEEKDAY_SCHEDULE_NAME:
        return weekday_schedule(delta_minutes)
    raise InvalidParameter(
        f"unknown named schedule {name!r}; known: {WEEKDAY_SCHEDULE_NAME}"
    )


@dataclass(frozen=True)
class Trace:
    """States (K+1 x n), inputs (K x m) and disturbances of one simulation."""

    states: np.ndarray
    inputs: np.ndarray
    disturbances: np.ndarray
    delta_minutes: float
    seed: object = None
    model_id: str = ""

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    def outputs(self, model: DiscreteModel) -> np.ndarray:
        return model.outputs(self.states)

    def times_minutes(self) -> np.ndarray:
        return np.arange(self.states.shape[0]) * self.delta_minutes


def step(model: DiscreteModel, x, u, d=None, w=None) -> np.ndarray:
    """One transition A x + B u + F d + Q + diag(sigma) w."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != model.n_states:
        raise DimensionMismatch("states", model.n_states, x.size)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.size != model.n_inputs:
        raise DimensionMismatch("inputs", model.n_inputs, u.size)
    out = model.a @ x + model.b @ u + model.q
    if model.n_disturbances:
        if d is None:
            raise DimensionMismatch("disturbances", model.n_disturbances, 0)
        d = np.asarray(d, dtype=float).reshape(-1)
        if d.size != model.n_disturbances:
            raise DimensionMismatch("disturbances", model.n_disturbances, d.size)
        out = out + model.f @ d
    if w is not None and np.any(model.sigma):
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.size != model.n_states:
            raise DimensionMismatch("noise", model.n_states, w.size)
        out = out + model.sigma * w
    return out


def trace_seed_sequence(seed, trace_index: int = 0) -> np.random.SeedSequence:
    """Stable per-trace substream derivation (trace 0 is the base stream)."""
    if isinstance(seed, np.random.SeedSequence):
        root = seed
    else:
        root = np.random.SeedSequence(seed)
    return np.random.SeedSequence(
        entropy=root.entropy, spawn_key=root.spawn_key + (trace_index,)
    )


def _generator(seed, trace_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(trace_seed_sequence(seed, trace_index))
    )


def _resolve_input(inputs, k: int, x: np.ndarray, n_steps: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Accept an InputSchedule, a closed-loop controller (.control), or a
    random open-loop sampler (.sample_u)."""
    if hasattr(inputs, "control"):
        return np.atleast_1d(np.asarray(inputs.control(x, k, n_steps), dtype=float))
    if hasattr(inputs, "sample_u"):
        return np.atleast_1d(np.asarray(inputs.sample_u(rng, k), dtype=float))
    return inputs.u_at(k)


@dataclass(frozen=True)
class UniformInputs:
    """Open-loop inputs drawn uniformly from a box at every step."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, float)))

    def sample_u(self, rng, k: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi)


def simulate(
    model: DiscreteModel,
    x0,
    inputs,
    law: DisturbanceLaw | None = None,
    seed=0,
    n_steps: int = 0,
    model_id: str = "",
    trace_index: int = 0,
) -> Trace:
    """Iterate ``step`` with seeded disturbance and noise draws.

    Identical (model, x0, inputs, law, seed, n_steps) give bitwise identical
    traces.  Each step consumes one disturbance block (when the model has
    disturbance channels) and one noise block of ``n_states`` standard-normal
    draws, whether or not sigma is zero, so zeroing sigma leaves the stream
    alignment unchanged.
    """
    if n_steps < 0:
        raise InvalidParameter("n_steps must be >= 0")
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.size != model.n_states:
        raise DimensionMismatch("states", model.n_states, x.size)
    rng = _generator(seed, trace_index)
    n = model.n_states
    states = np.empty((n_steps + 1, n))
    states[0] = x
    us = np.empty((n_steps, model.n_inputs))
    ds = np.empty((n_steps, model.n_disturbances))
    for k in range(n_steps):
        if model.n_disturbances:
            if law is None:
                raise InvalidParameter(
                    "model has disturbance channels; a DisturbanceLaw is required"
                )
            d = law.sample(rng)
        else:
            d = None
        w = rng.standard_normal(n)
        u = _resolve_input(inputs, k, states[k], n_steps, rng)
        states[k + 1] = step(model, states[k], u, d, w)
        us[k] = u
        if model.n_disturbances:
            ds[k] = d
    return Trace(states, us, ds, model.delta_minutes, seed, model_id)


@dataclass(frozen=True)
class MonteCarloResult:
    traces: tuple[Trace, ...]
    mean: np.ndarray          # (K+1, n) per-step ensemble mean
    std: np.ndarray           # (K+1, n) per-step ensemble standard deviation

    @property
    def n_traces(self) -> int:
        return len(self.traces)

    def stacked_states(self) -> np.ndarray:
        return np.stack([t.states for t in self.traces])


def monte_carlo(
    model: DiscreteModel,
    x0,
    inputs,
    law: DisturbanceLaw | None = None,
    n_traces: int = 1,
    seed=0,
    n_steps: int = 0,
    model_id: str = "",
) -> MonteCarloResult:
    """Ensemble of independent traces with per-trace derived seeds.

    Trace ``i`` equals ``simulate(..., seed=seed, trace_index=i)`` exactly,
    so ``n_traces=1`` reduces to a single ``simulate`` call and results are
    independent of evaluation order.
    """
    if n_traces < 1:
        raise InvalidParameter("n_traces must be >= 1")
    traces = tuple(
        simulate(model, x0, inputs, law, seed, n_steps, model_id, trace_index=i)
        for i in range(n_traces)
    )
    stack = np.stack([t.states for t in traces])
    return MonteCarloResult(traces, stack.mean(axis=0), stack.std(axis=0))
