"""Input-output composition of component instances.

Components couple through named ports: a connection feeds one component's
output (a state of a dynamic component, or an output of an algebraic map)
into another component's input or disturbance channel.  Unbound ports become
the composite's inputs (control) and disturbances (exogenous), inheriting
the classification declared by their component; ports can also be tied to a
shared named signal with an alias (e.g. one supply-air temperature feeding
both zones).

``flatten`` substitutes every algebraic output into its consumers and
returns an explicit :class:`~baslib.dynamics.ContinuousModel`.  Algebraic
loops are rejected rather than solved; none of the plant configurations
needs them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSpace
from .components import Component
from .dynamics import (
    AffineVariant,
    AlgebraicMap,
    BilinearTerm,
    ContinuousModel,
    eval_algebraic,
)
from .errors import WiringError


@dataclass(frozen=True)
class Connection:
    producer: str
    output: str
    consumer: str
    input: str

    def __str__(self):
        return f"{self.producer}.{self.output} -> {self.consumer}.{self.input}"


@dataclass(frozen=True)
class Alias:
    """Bind a consumer port to a shared, named global signal."""

    signal: str
    consumer: str
    input: str
    exogenous: bool = False


@dataclass(frozen=True)
class Wiring:
    connections: tuple[Connection, ...] = ()
    aliases: tuple[Alias, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "connections", tuple(self.connections))
        object.__setattr__(self, "aliases", tuple(self.aliases))


def _is_dynamic(comp: Component) -> bool:
    return isinstance(comp.model, ContinuousModel)


def _outputs_of(comp: Component) -> tuple[str, ...]:
    if _is_dynamic(comp):
        return comp.model.states.names
    return comp.model.outputs.names


def _inports_of(comp: Component) -> list[tuple[str, str, bool]]:
    """(channel name, unit, is_exogenous) for every in-port of a component."""
    m = comp.model
    ports = [(n, m.inputs.unit(n), False) for n in m.inputs.names]
    if isinstance(m, ContinuousModel):
        ports += [(n, m.disturbances.unit(n), True) for n in m.disturbances.names]
    return ports


@dataclass(frozen=True)
class CompositeModel:
    components: tuple[Component, ...]
    wiring: Wiring
    # derived maps, filled by connect()
    state_index: dict = field(repr=False, compare=False, hash=False, default=None)
    bound: dict = field(repr=False, compare=False, hash=False, default=None)
    free_controls: tuple = ()
    free_exogenous: tuple = ()
    state_names: tuple = ()
    state_provenance: tuple = ()
    algebraic_order: tuple = ()

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise WiringError(f"no component named {name!r}")

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def drift(self, x, u, d=None) -> np.ndarray:
        """Evaluate the composite drift by resolving ports on the fly."""
        x = np.asarray(x, dtype=float).reshape(-1)
        u = np.asarray(u, dtype=float).reshape(-1)
        d = np.zeros(0) if d is None else np.asarray(d, dtype=float).reshape(-1)
        if x.size != self.n_states:
            raise WiringError(f"state vector has {x.size} entries, expected {self.n_states}")
        values: dict[tuple[str, str], float] = {}
        for ci, comp in enumerate(self.components):
            if _is_dynamic(comp):
                for sj, sname in enumerate(comp.model.states.names):
                    values[(comp.name, sname)] = x[self.state_index[(comp.name, sname)]]
        ctrl = {name: u[i] for i, name in enumerate(self.free_controls)}
        exo = {name: d[i] for i, name in enumerate(self.free_exogenous)}

        def port_value(comp: Component, channel: str) -> float:
            key = (comp.name, channel)
            src = self.bound.get(key)
            if src is None:
                gname = self._global_name(comp.name, channel)
                return ctrl[gname] if gname in ctrl else exo[gname]
            if isinstance(src, Alias):
                return ctrl.get(src.signal, exo.get(src.signal))
            return values[(src.producer, src.output)]

        # resolve algebraic maps in dependency order
        for name in self.algebraic_order:
            comp = self.component(name)
            vec = np.array([port_value(comp, ch) for ch in comp.model.inputs.names])
            out = eval_algebraic(comp.model, comp.model.default_mode, vec)
            for oj, oname in enumerate(comp.model.outputs.names):
                values[(comp.name, oname)] = out[oj]

        rows = []
        for comp in self.components:
            if not _is_dynamic(comp):
                continue
            m = comp.model
            xv = np.array([values[(comp.name, s)] for s in m.states.names])
            uv = np.array([port_value(comp, ch) for ch in m.inputs.names])
            dv = np.array([port_value(comp, ch) for ch in m.disturbances.names])
            rows.append(m.drift(xv, uv, dv if m.disturbances.dim else None))
        return np.concatenate(rows) if rows else np.zeros(0)

    def _global_name(self, comp_name: str, channel: str) -> str:
        plain = [n for n in self.free_controls + self.free_exogenous if n == channel]
        if plain:
            return channel
        return f"{comp_name}.{channel}"

    def to_wiring_doc(self) -> dict:
        """JSON-ready description: component list + connection list."""
        return {
            "components": [
                {"name": c.name, "kind": c.kind.value, "role": c.role}
                for c in self.components
            ],
            "connections": [
                {"producer": c.producer, "output": c.output,
                 "consumer": c.consumer, "input": c.input}
                for c in self.wiring.connections
            ],
            "aliases": [
                {"signal": a.signal, "consumer": a.consumer,
                 "input": a.input, "exogenous": a.exogenous}
                for a in self.wiring.aliases
            ],
            "states": list(self.state_names),
            "inputs": list(self.free_controls),
            "disturbances": list(self.free_exogenous),
        }


def connect(components, wiring: Wiring) -> CompositeModel:
    """Wire component instances into a composite; validates the wiring.

    Raises :class:`WiringError` on dangling channel references, doubly driven
    ports, or cycles among algebraic maps.
    """
    components = tuple(components)
    byname = {}
    for c in components:
        if c.name in byname:
            raise WiringError(f"duplicate component name {c.name!r}")
        byname[c.name] = c

    outputs = {(c.name, o) for c in components for o in _outputs_of(c)}
    inports = {(c.name, p[0]): p for c in components for p in _inports_of(c)}

    bound: dict[tuple[str, str], Connection | Alias] = {}
    for conn in wiring.connections:
        if conn.producer not in byname or (conn.producer, conn.output) not in outputs:
            raise WiringError(f"dangling producer reference: {conn}")
        if conn.consumer not in byname or (conn.consumer, conn.input) not in inports:
            raise WiringError(f"dangling consumer reference: {conn}")
        key = (conn.consumer, conn.input)
        if key in bound:
            raise WiringError(f"input {key[0]}.{key[1]} driven more than once")
        bound[key] = conn
    for alias in wiring.aliases:
        if alias.consumer not in byname or (alias.consumer, alias.input) not in inports:
            raise WiringError(
                f"dangling alias reference: {alias.signal} -> {alias.consumer}.{alias.input}"
            )
        key = (alias.consumer, alias.input)
        if key in bound:
            raise WiringError(f"input {key[0]}.{key[1]} driven more than once")
        bound[key] = alias

    # cycle check over algebraic-to-algebraic edges
    algebraic = [c.name for c in components if not _is_dynamic(c)]
    edges = {a: set() for a in algebraic}
    for conn in wiring.connections:
        if conn.producer in edges and conn.consumer in edges:
            edges[conn.producer].add(conn.consumer)
    order, seen, active = [], set(), []

    def visit(node):
        if node in active:
            cycle = active[active.index(node):] + [node]
            raise WiringError(f"algebraic cycle: {' -> '.join(cycle)}")
        if node in seen:
            return
        active.append(node)
        for nxt in sorted(edges[node]):
            visit(nxt)
        active.pop()
        seen.add(node)
        order.append(node)

    for node in algebraic:
        visit(node)
    topo = tuple(reversed(order))  # producers before consumers

    # free ports -> global channels (merge equal plain names of same kind)
    state_pairs = [
        (c.name, s) for c in components if _is_dynamic(c) for s in c.model.states.names
    ]
    state_index = {pair: i for i, pair in enumerate(state_pairs)}
    plain_counts: dict[str, int] = {}
    free_ports = []
    for c in components:
        for ch, unit, exo in _inports_of(c):
            if (c.name, ch) not in bound:
                free_ports.append((c.name, ch, unit, exo))
                plain_counts[ch] = plain_counts.get(ch, 0) + 1

    controls: list[str] = []
    exogenous: list[str] = []
    signal_kind: dict[str, bool] = {}
    for cname, ch, unit, exo in free_ports:
        gname = ch if plain_counts[ch] == 1 else f"{cname}.{ch}"
        target = exogenous if exo else controls
        if gname not in target:
            target.append(gname)
    for alias in wiring.aliases:
        pk = inports[(alias.consumer, alias.input)]
        exo = alias.exogenous or pk[2]
        prev = signal_kind.get(alias.signal)
        if prev is not None and prev != exo:
            raise WiringError(
                f"alias signal {alias.signal!r} used as both control and exogenous"
            )
        signal_kind[alias.signal] = exo
        target = exogenous if exo else controls
        if alias.signal not in target:
            target.append(alias.signal)

    # flattened state names: plain when globally unique
    scounts: dict[str, int] = {}
    for _, s in state_pairs:
        scounts[s] = scounts.get(s, 0) + 1
    state_names = tuple(
        s if scounts[s] == 1 else f"{cn}.{s}" for cn, s in state_pairs
    )

    return CompositeModel(
        components, wiring,
        state_index=state_index, bound=bound,
        free_controls=tuple(controls), free_exogenous=tuple(exogenous),
        state_names=state_names, state_provenance=tuple(state_pairs),
        algebraic_order=topo,
    )


class _Expr:
    """Affine expression over [states, controls, exogenous, 1]."""

    __slots__ = ("x", "u", "d", "c")

    def __init__(self, nx, nu, nd):
        self.x = np.zeros(nx)
        self.u = np.zeros(nu)
        self.d = np.zeros(nd)
        self.c = 0.0

    @property
    def channel_part(self):
        return np.concatenate([self.x, self.u, self.d])

    def scaled(self, a: float) -> "_Expr":
        e = _Expr(len(self.x), len(self.u), len(self.d))
        e.x, e.u, e.d, e.c = a * self.x, a * self.u, a * self.d, a * self.c
        return e

    def add(self, other: "_Expr"):
        self.x += other.x
        self.u += other.u
        self.d += other.d
        self.c += other.c


def flatten(composite: CompositeModel) -> ContinuousModel:
    """Substitute algebraic outputs into consumer drifts; explicit matrices.

    Channel-name provenance is retained: flattened state names match the
    component channels (qualified by component name only on collision).
    Bilinear factors must resolve to a single free channel or a constant.
    """
    comps = composite.components
    nx = composite.n_states
    controls = composite.free_controls
    exogenous = composite.free_exogenous
    nu, nd = len(controls), len(exogenous)
    uidx = {n: i for i, n in enumerate(controls)}
    didx = {n: i for i, n in enumerate(exogenous)}

    exprs: dict[tuple[str, str], _Expr] = {}
    for (cname, sname), i in composite.state_index.items():
        e = _Expr(nx, nu, nd)
        e.x[i] = 1.0
        exprs[(cname, sname)] = e

    def port_expr(comp: Component, channel: str) -> _Expr:
        key = (comp.name, channel)
        src = composite.bound.get(key)
        if src is None:
            gname = composite._global_name(comp.name, channel)
            e = _Expr(nx, nu, nd)
            if gname in uidx:
                e.u[uidx[gname]] = 1.0
            else:
                e.d[didx[gname]] = 1.0
            return e
        if isinstance(src, Alias):
            e = _Expr(nx, nu, nd)
            if src.signal in uidx:
                e.u[uidx[src.signal]] = 1.0
            else:
                e.d[didx[src.signal]] = 1.0
            return e
        return exprs[(src.producer, src.output)]

    for name in composite.algebraic_order:
        comp = composite.component(name)
        amap: AlgebraicMap = comp.model
        var = amap.variant(amap.default_mode)
        if not isinstance(var, AffineVariant):
            raise WiringError(
                f"algebraic component {name!r} is not affine in mode "
                f"{amap.default_mode!r}; apply a mode fixing it before flattening"
            )
        in_exprs = [port_expr(comp, ch) for ch in amap.inputs.names]
        for oj, oname in enumerate(amap.outputs.names):
            out = _Expr(nx, nu, nd)
            out.c = var.offset[oj]
            for ij, e in enumerate(in_exprs):
                out.add(e.scaled(var.matrix[oj, ij]))
            exprs[(comp.name, oname)] = out

    a = np.zeros((nx, nx))
    b = np.zeros((nx, nu))
    f = np.zeros((nx, nd))
    q = np.zeros(nx)
    sigma = np.zeros(nx)
    bil_n: dict[int, np.ndarray] = {}
    bil_p: dict[int, np.ndarray] = {}
    bil_g: dict[int, np.ndarray] = {}

    def _bil_slot(k):
        if k not in bil_n:
            bil_n[k] = np.zeros((nx, nx))
            bil_p[k] = np.zeros((nx, nu))
            bil_g[k] = np.zeros((nx, nd))
        return bil_n[k], bil_p[k], bil_g[k]

    for comp in comps:
        if not _is_dynamic(comp):
            continue
        m: ContinuousModel = comp.model
        rows = [composite.state_index[(comp.name, s)] for s in m.states.names]
        rsel = np.array(rows)
        sigma[rsel] = m.noise_sigma
        for lj, s in enumerate(m.states.names):
            a[rsel, composite.state_index[(comp.name, s)]] += m.drift_a[:, lj]
        q[rsel] += m.drift_q
        port_lists = [(m.inputs.names, m.drift_b), (m.disturbances.names, m.drift_f)]
        resolved: dict[str, _Expr] = {}
        for names, mat in port_lists:
            for lj, ch in enumerate(names):
                e = resolved.setdefault(ch, port_expr(comp, ch))
                col = mat[:, lj]
                if not np.any(col):
                    continue
                a[rsel] += np.outer(col, e.x)
                b[rsel] += np.outer(col, e.u)
                f[rsel] += np.outer(col, e.d)
                q[rsel] += col * e.c

        for term in m.bilinear:
            factor_ch = m.inputs.names[term.input_index]
            fe = resolved.setdefault(factor_ch, port_expr(comp, factor_ch))
            chans = fe.channel_part
            nz = np.nonzero(chans)[0]
            if len(nz) > 1 or (len(nz) == 1 and chans[nz[0]] != 1.0):
                raise WiringError(
                    f"bilinear factor {comp.name}.{factor_ch} is bound to a "
                    f"non-trivial expression; freeze it or rewire"
                )

            def fold(local_mat, local_names, into_row_of):
                """Distribute u_k * (local_mat @ local_channels)."""
                if local_mat is None:
                    return None
                acc_x = np.zeros((nx, nx))
                acc_u = np.zeros((nx, nu))
                acc_d = np.zeros((nx, nd))
                acc_c = np.zeros(nx)
                for lj, ch in enumerate(local_names):
                    col = local_mat[:, lj]
                    if not np.any(col):
                        continue
                    if into_row_of == "state":
                        gi = composite.state_index[(comp.name, ch)]
                        acc_x[rsel, gi] += col
                    else:
                        e = resolved.setdefault(ch, port_expr(comp, ch))
                        acc_x[rsel] += np.outer(col, e.x)
                        acc_u[rsel] += np.outer(col, e.u)
                        acc_d[rsel] += np.outer(col, e.d)
                        acc_c[rsel] += col * e.c
                return acc_x, acc_u, acc_d, acc_c

            parts = [fold(term.on_states, m.states.names, "state")]
            if term.on_inputs is not None:
                parts.append(fold(term.on_inputs, m.inputs.names, "port"))
            if term.on_disturbances is not None:
                parts.append(fold(term.on_disturbances, m.disturbances.names, "port"))

            if len(nz) == 0:
                # frozen factor: constant times the inner expression
                c0 = fe.c
                for px, pu, pd, pc in parts:
                    a += c0 * px
                    b += c0 * pu
                    f += c0 * pd
                    q += c0 * pc
                continue
            gi = int(nz[0])
            if fe.c != 0.0:
                for px, pu, pd, pc in parts:
                    a += fe.c * px
                    b += fe.c * pu
                    f += fe.c * pd
                    q += fe.c * pc
            if gi < nu + nx and gi >= nx:
                k = gi - nx
                gn, gp, gg = _bil_slot(k)
                for px, pu, pd, pc in parts:
                    gn += px
                    gp += pu
                    gg += pd
                    b[:, k] += pc
            else:
                raise WiringError(
                    f"bilinear factor {comp.name}.{factor_ch} must resolve to a "
                    f"free control input (got a state or exogenous channel)"
                )

    units_x = tuple(
        composite.component(cn).model.states.unit(s)
        for cn, s in composite.state_provenance
    )

    def _unit_of_global(gname, kind_exo):
        for c in comps:
            for ch, unit, exo in _inports_of(c):
                if (c.name, ch) in composite.bound:
                    src = composite.bound[(c.name, ch)]
                    if isinstance(src, Alias) and src.signal == gname:
                        return unit
                    continue
                if composite._global_name(c.name, ch) == gname and exo == kind_exo:
                    return unit
        return "degC"

    states = ChannelSpace(composite.state_names, units_x, "states")
    inputs = ChannelSpace(
        tuple(controls), tuple(_unit_of_global(g, False) for g in controls), "inputs"
    )
    dists = ChannelSpace(
        tuple(exogenous), tuple(_unit_of_global(g, True) for g in exogenous),
        "disturbances",
    )
    terms = tuple(
        BilinearTerm(
            k,
            bil_n[k],
            bil_p[k] if np.any(bil_p[k]) else None,
            bil_g[k] if np.any(bil_g[k]) else None,
        )
        for k in sorted(bil_n)
        if np.any(bil_n[k]) or np.any(bil_p[k]) or np.any(bil_g[k])
    )
    return ContinuousModel(states, inputs, dists, a, b, f, q, terms, sigma)
