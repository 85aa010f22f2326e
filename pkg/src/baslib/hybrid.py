"""Single-zone heating automaton: five fan/mixer modes with guarded switching.

Continuous state is (T_z1, T_sa); each discrete mode carries an affine ODE
field.  Guards are threshold predicates on the zone temperature relative to
the set point; crossing a guard fires the unique enabled transition with no
state reset.  Integration is fixed-step RK4 (for an affine field the RK4
step is itself an affine map, precomputed per mode), with guard crossings
located by bisection inside the crossing step.

``box_flowpipe`` propagates axis-aligned boxes instead of points: the affine
RK4 step maps a box to the exact interval hull of its image, inflated by a
truncation remainder; when a box straddles a guard it splits into the
crossing and non-crossing parts, and boxes entering a new mode are widened
by one step's worth of field difference to cover trajectories that switched
mid-step.  Guard contact is tested at step resolution, so sub-step
tangential grazes share the integrator's semantics.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GuardError, InvalidParameter
from .reach import Box

STATE_NAMES = ("T_z1", "T_sa")

# Per-mode affine fields dT/dt = A x + c over x = (T_z1, T_sa), 1/min units.
MODE_TABLE: dict[str, tuple[np.ndarray, np.ndarray]] = {
    "(O,-)": (np.array([[-0.0116, 0.0], [0.0183, -0.0183]]),
              np.array([0.2565, 0.0])),
    "(M,Op)": (np.array([[-0.0292, 0.0176], [0.0183, -0.0185]]),
               np.array([0.2565, 0.005])),
    "(M,Cl)": (np.array([[-0.0292, 0.0176], [0.0183, -0.0183]]),
               np.array([0.2565, 0.0])),
    "(H,Op)": (np.array([[-0.038, 0.0264], [0.0183, -0.0186]]),
               np.array([0.2565, 0.0076])),
    "(H,Cl)": (np.array([[-0.038, 0.0264], [0.0186, -0.0186]]),
               np.array([0.2565, 0.0])),
}

DEFAULT_PARAMS = {
    "T_SP": 20.0, "delta": 1.0, "delta_2": 2.0, "delta_3": 3.0,
    "delta_4": 4.0, "delta_5": 5.0, "T_out": 25.0, "T_w_ss": 18.0,
    "m_a_med": 10.0, "m_a_high": 15.0, "CO2_ss": 500.0,
}

STATE_BOUNDS = Box(np.array([10.0, 15.0]), np.array([30.0, 30.0]))


@dataclass(frozen=True)
class Guard:
    """Threshold predicate on T_z1.

    ``kind`` is "fall_below" (enabled when T_z1 <= threshold) or "rise_above"
    (enabled when T_z1 >= threshold).  ``unless_below`` gates a fall_below
    guard off when T_z1 is at or under that value, which keeps stacked
    falling guards disjoint.
    """

    source: str
    target: str
    kind: str
    threshold: float
    unless_below: float | None = None

    def enabled(self, t_z: float) -> bool:
        if self.kind == "fall_below":
            ok = t_z <= self.threshold
            if self.unless_below is not None:
                ok = ok and t_z > self.unless_below
            return ok
        return t_z >= self.threshold

    def enabled_interval(self) -> tuple[float, float]:
        """(lo, hi) interval of T_z1 values where the guard is enabled."""
        if self.kind == "fall_below":
            lo = -np.inf if self.unless_below is None else self.unless_below
            return lo, self.threshold
        return self.threshold, np.inf

    def describe(self) -> str:
        op = "<=" if self.kind == "fall_below" else ">="
        gate = (
            f" (and T_z1 > {self.unless_below:g})"
            if self.unless_below is not None else ""
        )
        return f"T_z1 {op} {self.threshold:g}{gate}"


@dataclass(frozen=True)
class HybridAutomaton:
    modes: dict
    guards: tuple[Guard, ...]
    initial_mode: str
    bounds: Box = STATE_BOUNDS
    params: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))

    def __post_init__(self):
        for g in self.guards:
            if g.source not in self.modes or g.target not in self.modes:
                raise GuardError(f"guard references unknown mode: {g}")

    def field_of(self, mode: str) -> tuple[np.ndarray, np.ndarray]:
        return self.modes[mode]

    def guards_from(self, mode: str) -> tuple[Guard, ...]:
        return tuple(g for g in self.guards if g.source == mode)

    def enabled_guards(self, mode: str, x) -> tuple[Guard, ...]:
        return tuple(g for g in self.guards_from(mode) if g.enabled(float(x[0])))


def build_hybrid_cs3(params: dict | None = None, recirculation: bool = False) -> HybridAutomaton:
    """The five-mode single-zone automaton with its heating guard ladder.

    Default ladder (threshold offsets below the set point):

        (O,-)  --T_z1 <= T_SP - delta_4-->  (H,Op)
        (H,Op) --T_z1 >= T_SP - delta_3-->  (M,Op)
        (M,Op) --T_z1 >= T_SP - delta_2-->  (O,-)

    All modes heat (outside air is warmer than the set point), so there are
    no cooling transitions; once the zone is inside the comfort band the fan
    switches off and stays off.  With ``recirculation=True`` the ladder is
    extended through the closed-mixer modes using the remaining two
    thresholds: deep cold enters (H,Cl) at T_SP - delta_5, hands over to
    (H,Op) at T_SP - delta_4, and the medium stage passes through (M,Cl)
    before settling at T_SP - delta.  The guard graph is a documented
    reconstruction and fully configurable through ``params``.
    """
    p = dict(DEFAULT_PARAMS)
    if params:
        p.update(params)
    d1, d2, d3, d4, d5 = (p["delta"], p["delta_2"], p["delta_3"],
                          p["delta_4"], p["delta_5"])
    if not (d1 < d2 < d3 < d4 < d5):
        raise InvalidParameter(
            f"guard offsets must be strictly ordered "
            f"delta < delta_2 < delta_3 < delta_4 < delta_5, got "
            f"{(d1, d2, d3, d4, d5)}"
        )
    tsp = p["T_SP"]
    if not recirculation:
        guards = (
            Guard("(O,-)", "(H,Op)", "fall_below", tsp - d4),
            Guard("(H,Op)", "(M,Op)", "rise_above", tsp - d3),
            Guard("(M,Op)", "(O,-)", "rise_above", tsp - d2),
        )
    else:
        guards = (
            Guard("(O,-)", "(H,Cl)", "fall_below", tsp - d5),
            Guard("(O,-)", "(H,Op)", "fall_below", tsp - d4, unless_below=tsp - d5),
            Guard("(H,Cl)", "(H,Op)", "rise_above", tsp - d4),
            Guard("(H,Op)", "(M,Op)", "rise_above", tsp - d3),
            Guard("(M,Op)", "(M,Cl)", "rise_above", tsp - d2),
            Guard("(M,Cl)", "(O,-)", "rise_above", tsp - d1),
        )
    modes = {name: (a.copy(), c.copy()) for name, (a, c) in MODE_TABLE.items()}
    return HybridAutomaton(modes, guards, "(O,-)", STATE_BOUNDS, p)


# --------------------------------------------------------------------------
# Integration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    time: float
    source: str
    target: str
    guard: str


@dataclass(frozen=True)
class HybridTrace:
    times: np.ndarray
    modes: tuple[str, ...]
    states: np.ndarray            # (len(times), 2)
    events: tuple[Event, ...]
    warnings: tuple[str, ...] = ()

    @property
    def mode_sequence(self) -> tuple[str, ...]:
        seq = [self.modes[0]] if self.modes else []
        for m in self.modes[1:]:
            if m != seq[-1]:
                seq.append(m)
        return tuple(seq)

    def state_at_end(self) -> np.ndarray:
        return self.states[-1]


def rk4_step_map(a: np.ndarray, c: np.ndarray, h: float):
    """Affine map (R, r) of one RK4 step for dx/dt = a x + c.

    R is the degree-4 Taylor truncation of exp(h a); r the matching
    truncation of the inhomogeneous response.
    """
    eye = np.eye(a.shape[0])
    ha = h * a
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    ha4 = ha3 @ ha
    r_mat = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha4 / 24.0
    s_mat = eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0
    return r_mat, h * (s_mat @ c)


def _segment_tables(a, c, h, n_max):
    """Cumulative powers: states after i steps are P[i] @ x0 + w[i]."""
    r_mat, r_vec = rk4_step_map(a, c, h)
    p = np.empty((n_max + 1, 2, 2))
    w = np.empty((n_max + 1, 2))
    p[0] = np.eye(2)
    w[0] = 0.0
    for i in range(n_max):
        p[i + 1] = r_mat @ p[i]
        w[i + 1] = r_mat @ w[i] + r_vec
    return p, w


def integrate(
    ha: HybridAutomaton,
    x0,
    q0: str | None = None,
    horizon_minutes: float = 120.0,
    step: float = 0.01,
    bisect_tol: float = 1e-6,
) -> HybridTrace:
    """Simulate the automaton from a point; guards located to ``bisect_tol``.

    At most one transition may be enabled at any point (else GuardError), and
    a freshly entered mode must not have an immediately enabled guard of its
    own (guard ladders are hysteretic by construction).
    """
    if step <= 0:
        raise InvalidParameter("step must be > 0")
    x = np.asarray(x0, dtype=float).reshape(2).copy()
    mode = ha.initial_mode if q0 is None else q0
    if mode not in ha.modes:
        raise GuardError(f"unknown initial mode {mode!r}")
    t = 0.0
    times = [t]
    modes = [mode]
    states = [x.copy()]
    events: list[Event] = []
    tables: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    n_max = int(np.ceil(horizon_minutes / step)) + 1

    def fire_if_enabled() -> bool:
        nonlocal mode
        enabled = ha.enabled_guards(mode, x)
        if len(enabled) > 1:
            raise GuardError(
                f"nondeterministic guards at t={t:.6f}, x={x}: "
                + "; ".join(g.describe() for g in enabled)
            )
        if enabled:
            g = enabled[0]
            if events and events[-1].time == t:
                raise GuardError(
                    f"immediate guard chain at t={t:.6f}: {g.describe()}"
                )
            events.append(Event(t, g.source, g.target, g.describe()))
            mode = g.target
            if ha.enabled_guards(mode, x):
                raise GuardError(
                    f"guard of mode {mode} enabled immediately after entry "
                    f"at t={t:.6f}; the guard ladder must be hysteretic"
                )
            return True
        return False

    while t < horizon_minutes - 1e-12:
        fire_if_enabled()
        a_mat, c_vec = ha.field_of(mode)
        if mode not in tables:
            tables[mode] = _segment_tables(a_mat, c_vec, step, n_max)
        powers, offsets = tables[mode]
        n_whole = int(np.floor((horizon_minutes - t) / step + 1e-9))
        n_whole = min(n_whole, n_max)
        # states at the next n_whole grid points, in one sweep
        xs = powers[1:n_whole + 1] @ x + offsets[1:n_whole + 1]
        guards = ha.guards_from(mode)
        cross_idx = None
        if guards and n_whole:
            enabled_any = np.zeros(n_whole, dtype=bool)
            for g in guards:
                if g.kind == "fall_below":
                    mask = xs[:, 0] <= g.threshold
                    if g.unless_below is not None:
                        mask &= xs[:, 0] > g.unless_below
                else:
                    mask = xs[:, 0] >= g.threshold
                enabled_any |= mask
            hits = np.nonzero(enabled_any)[0]
            if hits.size:
                cross_idx = int(hits[0])
        if cross_idx is None:
            # no crossing on the grid: emit the block, then a partial last step
            for i in range(n_whole):
                t_i = t + (i + 1) * step
                times.append(t_i)
                modes.append(mode)
                states.append(xs[i].copy())
            t = t + n_whole * step
            if n_whole:
                x = xs[-1].copy()
            if t < horizon_minutes - 1e-12:
                h_last = horizon_minutes - t
                r_mat, r_vec = rk4_step_map(a_mat, c_vec, h_last)
                x = r_mat @ x + r_vec
                t = horizon_minutes
                times.append(t)
                modes.append(mode)
                states.append(x.copy())
            continue
        # crossing inside step (cross_idx); bisect from the previous grid point
        for i in range(cross_idx):
            times.append(t + (i + 1) * step)
            modes.append(mode)
            states.append(xs[i].copy())
        x_prev = x if cross_idx == 0 else xs[cross_idx - 1]
        t_prev = t + cross_idx * step

        def enabled_at(s: float) -> bool:
            r_mat, r_vec = rk4_step_map(a_mat, c_vec, s)
            xp = r_mat @ x_prev + r_vec
            return bool(ha.enabled_guards(mode, xp))

        lo_s, hi_s = 0.0, step
        while hi_s - lo_s > bisect_tol:
            mid = 0.5 * (lo_s + hi_s)
            if enabled_at(mid):
                hi_s = mid
            else:
                lo_s = mid
        r_mat, r_vec = rk4_step_map(a_mat, c_vec, hi_s)
        x = r_mat @ x_prev + r_vec
        t = t_prev + hi_s
        times.append(t)
        modes.append(mode)
        states.append(x.copy())
        fire_if_enabled()
        if modes and times[-1] == t:
            modes[-1] = mode  # sample carries the post-jump mode label

    states_arr = np.array(states)
    warn = []
    bad = ~(
        (states_arr >= ha.bounds.lo - 1e-9) & (states_arr <= ha.bounds.hi + 1e-9)
    ).all(axis=1)
    if bad.any():
        k = int(np.nonzero(bad)[0][0])
        warn.append(
            f"state left the declared bounds at t={times[k]:.4f} "
            f"(x={states_arr[k]})"
        )
    return HybridTrace(
        np.array(times), tuple(modes), states_arr, tuple(events), tuple(warn)
    )


# --------------------------------------------------------------------------
# Box flowpipes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowpipeSegment:
    t_lo: float
    t_hi: float
    mode: str
    box: Box


@dataclass(frozen=True)
class Flowpipe:
    segments: tuple[FlowpipeSegment, ...]
    warnings: tuple[str, ...]

    def covering(self, t: float) -> tuple[FlowpipeSegment, ...]:
        return tuple(s for s in self.segments if s.t_lo - 1e-12 <= t <= s.t_hi + 1e-12)

    def contains(self, t: float, x, tol: float = 1e-9) -> bool:
        return any(s.box.contains(x, tol) for s in self.covering(t))


def _affine_box_image(r_mat: np.ndarray, r_vec: np.ndarray, box: Box,
                      pad: float) -> Box:
    center = r_mat @ box.center + r_vec
    radius = np.abs(r_mat) @ box.radius + pad
    return Box(center - radius, center + radius)


def _step_remainder(a: np.ndarray, c: np.ndarray, h: float, box: Box) -> float:
    """Sup-norm bound on (true flow - RK4 map) plus intra-step chord sag."""
    m = h * float(np.abs(a).sum(axis=1).max())
    xsup = float(np.max(np.abs(np.stack([box.lo, box.hi]))))
    csup = float(np.abs(c).max())
    em = np.exp(m)
    tail = (m ** 5 / 120.0) * em * xsup + (m ** 4 / 120.0) * em * h * csup
    anorm = float(np.abs(a).sum(axis=1).max())
    accel = anorm * (anorm * xsup + csup)
    sag = h * h / 8.0 * accel
    return tail + sag


def box_flowpipe(
    ha: HybridAutomaton,
    x0_box: Box,
    q0: str | None = None,
    horizon_minutes: float = 120.0,
    step: float = 0.01,
) -> Flowpipe:
    """Interval-arithmetic flowpipe over the automaton's mode graph.

    Boxes straddling a guard split into crossing and non-crossing parts; the
    crossing part continues in the target mode, inflated by one step of the
    field difference to cover mid-step switches.  Same-mode branches merge to
    their interval hull each step, and every box is clipped to the declared
    state bounds (with a warning recorded when clipping occurs).
    """
    if step <= 0:
        raise InvalidParameter("step must be > 0")
    mode0 = ha.initial_mode if q0 is None else q0
    warnings: list[str] = []

    def clip(box: Box, t: float) -> Box | None:
        inter = box.intersect(ha.bounds)
        if inter is None:
            warnings.append(f"branch left the state bounds entirely at t={t:.4f}")
            return None
        if not (np.allclose(inter.lo, box.lo) and np.allclose(inter.hi, box.hi)):
            warnings.append(f"box truncated to the state bounds at t={t:.4f}")
        return inter

    start = clip(x0_box, 0.0)
    if start is None:
        return Flowpipe((), tuple(warnings))
    branches: list[tuple[str, Box]] = [(mode0, start)]
    segments: list[FlowpipeSegment] = []
    maps = {m: rk4_step_map(*ha.field_of(m), step) for m in ha.modes}

    def entry_inflation(src: str, tgt: str, box: Box) -> float:
        a_s, c_s = ha.field_of(src)
        a_t, c_t = ha.field_of(tgt)
        xsup = float(np.max(np.abs(np.stack([box.lo, box.hi]))))
        diff = float(np.abs(a_s - a_t).sum(axis=1).max()) * xsup \
            + float(np.abs(c_s - c_t).max())
        return step * diff

    def resolve_jumps(t: float, items: list[tuple[str, Box]]) -> list[tuple[str, Box]]:
        out: list[tuple[str, Box]] = []
        work = list(items)
        for _ in range(16):  # nested splits terminate quickly; hard stop
            nxt: list[tuple[str, Box]] = []
            changed = False
            for mode, box in work:
                pieces = [box]
                fired = False
                for g in ha.guards_from(mode):
                    lo, hi = g.enabled_interval()
                    rest: list[Box] = []
                    for piece in pieces:
                        cl, ch = piece.lo[0], piece.hi[0]
                        in_lo, in_hi = max(cl, lo), min(ch, hi)
                        if in_lo > in_hi:
                            rest.append(piece)
                            continue
                        fired = True
                        jump_box = Box(
                            np.array([in_lo, piece.lo[1]]),
                            np.array([in_hi, piece.hi[1]]),
                        )
                        pad = entry_inflation(mode, g.target, jump_box)
                        jump_box = Box(jump_box.lo - pad, jump_box.hi + pad)
                        jb = clip(jump_box, t)
                        if jb is not None:
                            nxt.append((g.target, jb))
                        if cl < in_lo:
                            rest.append(Box(
                                np.array([cl, piece.lo[1]]),
                                np.array([np.nextafter(in_lo, cl), piece.hi[1]]),
                            ))
                        if in_hi < ch:
                            rest.append(Box(
                                np.array([np.nextafter(in_hi, ch), piece.lo[1]]),
                                np.array([ch, piece.hi[1]]),
                            ))
                    pieces = rest
                for piece in pieces:
                    nxt.append((mode, piece))
                changed = changed or fired
            work = nxt
            if not changed:
                break
        return work

    n_steps = int(np.ceil(horizon_minutes / step - 1e-9))
    t = 0.0
    for k in range(n_steps):
        h = min(step, horizon_minutes - t)
        branches = resolve_jumps(t, branches)
        # merge same-mode branches to bound the branch count
        merged: dict[str, Box] = {}
        for mode, box in branches:
            merged[mode] = box if mode not in merged else merged[mode].hull(box)
        new_branches: list[tuple[str, Box]] = []
        for mode, box in merged.items():
            a_mat, c_vec = ha.field_of(mode)
            r_mat, r_vec = maps[mode] if h == step else rk4_step_map(a_mat, c_vec, h)
            pad = _step_remainder(a_mat, c_vec, h, box)
            nxt = _affine_box_image(r_mat, r_vec, box, pad)
            nxt_clipped = clip(nxt, t + h)
            seg_box = box.hull(nxt) if nxt_clipped is None else box.hull(nxt_clipped)
            seg_box = Box(seg_box.lo - pad, seg_box.hi + pad)
            sb = seg_box.intersect(ha.bounds)
            if sb is not None:
                segments.append(FlowpipeSegment(t, t + h, mode, sb))
            if nxt_clipped is not None:
                new_branches.append((mode, nxt_clipped))
        branches = new_branches
        if not branches:
            break
        t += h
    return Flowpipe(tuple(segments), tuple(warnings))
