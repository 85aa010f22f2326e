"""Component constructors and discrete-mode machinery.

Eight component kinds cover the whole plant: boiler, valve, mixer, AHU
heating coil, AHU air duct, radiator, zone block and return-water collector.
Each constructor folds physical parameters into the matrices of a
:class:`~baslib.dynamics.ContinuousModel` or the variants of an
:class:`~baslib.dynamics.AlgebraicMap`.

Discrete operation is captured by :class:`ModeConfig`: six independent axes
(boiler on/off, fan off/medium/high, mixer open/closed, three valve axes)
whose cartesian product yields 144 plant configurations.
``apply_mode`` specialises a component to one configuration; it always
re-derives from the component's base model, so it is idempotent.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .channels import ChannelSpace
from .dynamics import (
    AffineVariant,
    AlgebraicMap,
    BilinearTerm,
    ContinuousModel,
    ValveLawVariant,
)
from .errors import InvalidParameter, MissingParameter


class ComponentKind(Enum):
    BOILER = "boiler"
    VALVE = "valve"
    MIXER = "mixer"
    AHU_HEATING_COIL = "ahu_heating_coil"
    AHU_AIR_DUCT = "ahu_air_duct"
    RADIATOR = "radiator"
    ZONE = "zone"
    COLLECTOR = "collector"


# Symbols that must be strictly positive (capacities, volumes, resistances,
# time constants) or nonnegative (noise intensities), matched by prefix.
_POSITIVE_PREFIXES = ("C", "V", "R", "tau")
_NONNEGATIVE_PREFIXES = ("sigma",)


class ComponentParams:
    """Flat symbol -> value mapping with optional unit strings.

    Serialized as a flat JSON document with one ``"symbol[unit]"`` key per
    parameter.  Positivity of capacities/volumes/resistances/time constants
    and nonnegativity of noise intensities are enforced on construction.
    """

    def __init__(self, values: Mapping[str, float], units: Mapping[str, str] | None = None):
        self._values = {k: float(v) for k, v in values.items()}
        self._units = dict(units or {})
        for sym, val in self._values.items():
            if sym.startswith(_POSITIVE_PREFIXES) and not sym.startswith("CO2"):
                if val <= 0:
                    raise InvalidParameter(f"parameter {sym!r} must be > 0, got {val}")
            if sym.startswith(_NONNEGATIVE_PREFIXES) and val < 0:
                raise InvalidParameter(f"parameter {sym!r} must be >= 0, got {val}")

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._values

    def __iter__(self):
        return iter(self._values)

    def get(self, symbol: str, default: float | None = None) -> float | None:
        return self._values.get(symbol, default)

    def require(self, symbol: str, kind: str = "") -> float:
        if symbol not in self._values:
            raise MissingParameter(symbol, kind)
        return self._values[symbol]

    def unit(self, symbol: str) -> str:
        return self._units.get(symbol, "")

    def updated(self, **overrides: float) -> "ComponentParams":
        merged = dict(self._values)
        merged.update(overrides)
        return ComponentParams(merged, self._units)

    # -- flat JSON form: {"symbol[unit]": value, ...} ------------------------

    def to_json_dict(self) -> dict:
        out = {}
        for sym, val in sorted(self._values.items()):
            unit = self._units.get(sym, "")
            key = f"{sym}[{unit}]" if unit else sym
            out[key] = val
        return out

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "ComponentParams":
        values, units = {}, {}
        for key, val in doc.items():
            if key.startswith("_"):
                continue  # metadata entries
            sym, unit = key, ""
            if key.endswith("]") and "[" in key:
                sym, unit = key[:-1].split("[", 1)
            values[sym] = float(val)
            if unit:
                units[sym] = unit
        return cls(values, units)

    @classmethod
    def from_json_file(cls, path) -> "ComponentParams":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def default_params() -> ComponentParams:
    """Placeholder parameter set shipped with the library.

    The magnitudes are plausible for a small two-zone teaching space but are
    NOT estimated from any real plant (see the ``_meta`` block of the file);
    the benchmark builders never read them.
    """
    from importlib.resources import files

    doc = json.loads(files("baslib.data").joinpath("default_params.json").read_text())
    return ComponentParams.from_json_dict(doc)


# --------------------------------------------------------------------------
# Discrete modes
# --------------------------------------------------------------------------

MODE_AXES: dict[str, tuple[str, ...]] = {
    "boiler": ("on", "off"),
    "fan": ("off", "medium", "high"),
    "mixer": ("open", "closed"),
    "ahu_coil_valve": ("healthy", "faulty"),
    "radiator1_valve": ("healthy", "faulty"),
    "radiator2_valve": ("fully_open", "half_open", "closed"),
}


@dataclass(frozen=True)
class ModeConfig:
    boiler: str = "on"
    fan: str = "off"
    mixer: str = "open"
    ahu_coil_valve: str = "healthy"
    radiator1_valve: str = "healthy"
    radiator2_valve: str = "fully_open"

    def __post_init__(self):
        for axis, values in MODE_AXES.items():
            v = getattr(self, axis)
            if v not in values:
                raise InvalidParameter(
                    f"mode axis {axis!r} has no value {v!r}; choose from {values}"
                )


def enumerate_modes(relevant: Iterable[str] | None = None) -> list[ModeConfig]:
    """Cartesian product over the selected mode axes, lexicographic order.

    Unselected axes stay at their defaults.  All six axes give the full
    144-configuration set; the empty set gives the single default config.
    """
    axes = list(MODE_AXES) if relevant is None else [a for a in MODE_AXES if a in set(relevant)]
    if relevant is not None:
        unknown = set(relevant) - set(MODE_AXES)
        if unknown:
            raise InvalidParameter(f"unknown mode axes: {sorted(unknown)}")
    pools = [MODE_AXES[a] for a in axes]
    configs = []
    for combo in itertools.product(*pools):
        configs.append(ModeConfig(**dict(zip(axes, combo))))
    return configs


# --------------------------------------------------------------------------
# Component wrapper
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    """A named component instance: its kind, current model and parameters.

    ``base_model`` is the as-instantiated model; ``apply_mode`` always
    specialises from it (idempotence).  ``role`` disambiguates which mode axis
    drives a valve instance ("ahu_coil", "radiator1" or "radiator2").
    """

    kind: ComponentKind
    name: str
    model: ContinuousModel | AlgebraicMap
    params: ComponentParams
    role: str | None = None
    base_model: ContinuousModel | AlgebraicMap = None

    def __post_init__(self):
        if self.base_model is None:
            object.__setattr__(self, "base_model", self.model)


def instantiate_component(
    kind: ComponentKind,
    params: ComponentParams,
    name: str | None = None,
    role: str | None = None,
) -> Component:
    """Build one component's dynamics with parameters folded into matrices."""
    builder = _BUILDERS[kind]
    model = builder(params)
    return Component(kind, name or kind.value, model, params, role)


def apply_mode(component: Component, mode: ModeConfig) -> Component:
    """Specialise a component to one discrete configuration.

    Total over declared modes: kinds unaffected by an axis pass through
    unchanged.  Boiler "off" zeroes the drift; fan levels freeze the air mass
    flow; mixer position selects the open/closed variant; valve axes select
    the matching valve-law variant.
    """
    base = component.base_model
    kind = component.kind
    if kind is ComponentKind.BOILER:
        if mode.boiler == "off":
            zero = ContinuousModel(
                base.states, base.inputs, base.disturbances,
                np.zeros((1, 1)), np.zeros((1, base.inputs.dim)),
                np.zeros((1, base.disturbances.dim)), np.zeros(1),
                (), np.zeros(1),
            )
            return replace(component, model=zero)
        return replace(component, model=base)
    if kind in (ComponentKind.AHU_AIR_DUCT, ComponentKind.ZONE):
        level = _fan_level(component.params, mode.fan)
        model = base
        if "m_a" in base.inputs:
            model = base.freeze_input("m_a", level)
        return replace(component, model=model)
    if kind is ComponentKind.MIXER:
        return replace(component, model=base.with_default(mode.mixer))
    if kind is ComponentKind.VALVE:
        role = component.role or "ahu_coil"
        if role == "radiator2":
            tag = mode.radiator2_valve
        elif role == "radiator1":
            tag = mode.radiator1_valve
        else:
            tag = mode.ahu_coil_valve
        return replace(component, model=base.with_default(tag))
    return replace(component, model=base)


def _fan_level(params: ComponentParams, fan: str) -> float:
    if fan == "off":
        return 0.0
    if fan == "medium":
        return params.require("m_a_med")
    return params.require("m_a_high")


# --------------------------------------------------------------------------
# Builders
# --------------------------------------------------------------------------

def _build_boiler(p: ComponentParams) -> ContinuousModel:
    # dT_sw_b = (-T_sw_b + k_b)/tau_sw + sigma_sw dW   (boiler enabled)
    tau = p.require("tau_sw", "boiler")
    k_b = p.require("k_b", "boiler")
    sigma = p.get("sigma_sw", 0.0)
    return ContinuousModel(
        ChannelSpace.of("states", ("T_sw_b", "degC")),
        ChannelSpace.empty("inputs"),
        ChannelSpace.empty("disturbances"),
        np.array([[-1.0 / tau]]),
        np.zeros((1, 0)),
        np.zeros((1, 0)),
        np.array([k_b / tau]),
        (),
        np.array([sigma]),
    )


def _build_valve(p: ComponentParams) -> AlgebraicMap:
    tau = p.require("tau", "valve")
    w_max = p.require("w_max", "valve")
    stuck = p.get("w_stuck", 0.0)  # "faulty" semantics: stuck at zero flow
    law = ValveLawVariant(tau, w_max)
    variants = {
        "healthy": law,
        "faulty": AffineVariant(np.zeros((1, 1)), np.array([stuck])),
        "fully_open": AffineVariant(np.zeros((1, 1)), np.array([law(1.0)])),
        "half_open": AffineVariant(np.zeros((1, 1)), np.array([law(0.5)])),
        "closed": AffineVariant(np.zeros((1, 1)), np.array([law(0.0)])),
    }
    return AlgebraicMap(
        ChannelSpace.of("inputs", ("X", "1")),
        ChannelSpace.of("outputs", ("w", "kg/s")),
        variants,
        "healthy",
    )


def mixing_variant(n: int, ratio: float) -> AffineVariant:
    """T_d = ratio * T_out + (1 - ratio) * mean(T_z_i); convex for ratio in [0,1]."""
    row = np.concatenate([[ratio], np.full(n, (1.0 - ratio) / n)])
    return AffineVariant(row[None, :], np.zeros(1), convex_rows=True)


def _build_mixer(p: ComponentParams) -> AlgebraicMap:
    n = int(p.require("n", "mixer"))
    ins = [("T_out", "degC")] + [(f"T_z{i+1}", "degC") for i in range(n)]
    variants = {"open": mixing_variant(n, 1.0), "closed": mixing_variant(n, 0.0)}
    if "u_d" in p:
        variants["blend"] = mixing_variant(n, p.require("u_d"))
    return AlgebraicMap(
        ChannelSpace.of("inputs", *ins),
        ChannelSpace.of("outputs", ("T_d", "degC")),
        variants,
        "open",
    )


def _build_collector(p: ComponentParams) -> AlgebraicMap:
    # T_rw_b = u_v T_rw_a + (1 - u_v) mean(T_rw_r_i)
    n = int(p.require("n", "collector"))
    ins = [("T_rw_a", "degC")] + [(f"T_rw_r{i+1}", "degC") for i in range(n)]
    variants = {"open": mixing_variant(n, 1.0), "closed": mixing_variant(n, 0.0)}
    if "u_v" in p:
        variants["blend"] = mixing_variant(n, p.require("u_v"))
    return AlgebraicMap(
        ChannelSpace.of("inputs", *ins),
        ChannelSpace.of("outputs", ("T_rw_b", "degC")),
        variants,
        "blend" if "u_v" in p else "open",
    )


def _water_cell(p: ComponentParams, kind: str, volume_sym: str, ua_sym: str,
                state: str, flow: str, driving: str, sigma_sym: str) -> ContinuousModel:
    """Shared shape of heating coil and radiator:

    c * dT = C_pw * w * (T_sw_b - T) + UA * (T_drv - T),  c = C_pw rho_h V.
    Water flow w multiplies both the state and the supply temperature input.
    """
    c_pw = p.require("C_pw", kind)
    c = c_pw * p.require("rho_h", kind) * p.require(volume_sym, kind)
    ua = p.require(ua_sym, kind)
    sigma = p.get(sigma_sym, 0.0)
    states = ChannelSpace.of("states", (state, "degC"))
    inputs = ChannelSpace.of(
        "inputs", (flow, "kg/s"), ("T_sw_b", "degC"), (driving, "degC")
    )
    bil = BilinearTerm(
        input_index=0,
        on_states=np.array([[-c_pw / c]]),
        on_inputs=np.array([[0.0, c_pw / c, 0.0]]),
    )
    return ContinuousModel(
        states, inputs, ChannelSpace.empty("disturbances"),
        np.array([[-ua / c]]),
        np.array([[0.0, 0.0, ua / c]]),
        np.zeros((1, 0)),
        np.zeros(1),
        (bil,),
        np.array([sigma]),
    )


def _build_heating_coil(p: ComponentParams) -> ContinuousModel:
    return _water_cell(p, "ahu_heating_coil", "V_a", "UA_a",
                       "T_rw_a", "w_a", "T_d", "sigma_rw_a")


def _build_radiator(p: ComponentParams) -> ContinuousModel:
    return _water_cell(p, "radiator", "V_r", "UA_r",
                       "T_rw_r", "w_r", "T_z", "sigma_rw_r")


def _build_air_duct(p: ComponentParams) -> ContinuousModel:
    # c * dT_sa = m_a C_pa (T_d - T_sa) + UA_a (T_z - T_sa), c = C_a rho_a V_a
    kind = "ahu_air_duct"
    c = p.require("C_a", kind) * p.require("rho_a", kind) * p.require("V_a", kind)
    c_pa = p.require("C_pa", kind)
    ua = p.require("UA_a", kind)
    sigma = p.get("sigma_sa", 0.0)
    states = ChannelSpace.of("states", ("T_sa", "degC"))
    inputs = ChannelSpace.of(
        "inputs", ("m_a", "m3/h"), ("T_d", "degC"), ("T_z", "degC")
    )
    bil = BilinearTerm(
        input_index=0,
        on_states=np.array([[-c_pa / c]]),
        on_inputs=np.array([[0.0, c_pa / c, 0.0]]),
    )
    return ContinuousModel(
        states, inputs, ChannelSpace.empty("disturbances"),
        np.array([[-ua / c]]),
        np.array([[0.0, 0.0, ua / c]]),
        np.zeros((1, 0)),
        np.zeros(1),
        (bil,),
        np.array([sigma]),
    )


@dataclass(frozen=True)
class WallSpec:
    """One wall of the zone RC network.

    ``zones`` lists adjacent zone indices (1-based); ``exterior`` names the
    far-side boundary channel ("out", "hall" or None for interior partition
    walls); windowed walls receive the solar gain term.
    """

    name: str
    zones: tuple[int, ...]
    exterior: str | None = None
    windowed: bool = False
    area_symbol: str | None = None  # window area symbol for the solar gain


# Default two-zone layout: hall-side walls w2/w3, windowed outside walls
# w5/w6, and the shared partition w7.  The exact correspondence of Table-like
# RC wirings to a real floor plan is configuration, not physics: pass a
# custom ``walls`` tuple to ``make_zone`` to change it.
DEFAULT_WALLS: tuple[WallSpec, ...] = (
    WallSpec("w2", (1,), "hall"),
    WallSpec("w3", (2,), "hall"),
    WallSpec("w5", (1,), "out", windowed=True, area_symbol="A_1"),
    WallSpec("w6", (2,), "out", windowed=True, area_symbol="A_2"),
    WallSpec("w7", (1, 2)),
)


def make_zone(
    params: ComponentParams,
    walls: Sequence[WallSpec] = DEFAULT_WALLS,
    fixed_wall_temperature: float | None = None,
    include_occupancy: bool = True,
    include_solar: bool = True,
    include_coil_return: bool = True,
) -> ContinuousModel:
    """Coupled zone/wall thermal block.

    Zone air nodes:

        C_zi dT_zi = sum_w (T_w - T_zi)/R_w_zi          (wall conduction)
                     + P_rad_i (alpha_2 (T_rw_ri - T_zi) + alpha_1)
                     + mu_i CO2_i + beta_1_i            (occupancy)
                     + m_a C_pa (T_sa_i - T_zi)         (supply air)

    Wall nodes (when not held at a fixed temperature):

        C_w dT_w = (T_ext - T_w)/R_w_ext + sum_l (T_zl - T_w)/R_w_zl
                   + alpha_3 (T_rw_a - T_w)             (coil return water)
                   + alpha_0 A_i T_out + beta_2         (windowed walls)

    The exterior conduction is written wall-to-boundary (RC reading of the
    network); with ``fixed_wall_temperature`` set, wall states are eliminated
    and each zone sees (T_w_ss - T_zi)/R_i with the mean resistance R_i.
    The flags mirror the case studies' simplifying assumptions.
    """
    kind = "zone"
    n = int(params.require("n", kind))
    wall_list = list(walls) if fixed_wall_temperature is None else []
    zone_names = [f"T_z{i+1}" for i in range(n)]
    wall_names = [f"T_{w.name}" for w in wall_list]
    state_names = zone_names + wall_names
    nx = len(state_names)

    input_names = ["m_a"] + [f"T_sa{i+1}" for i in range(n)] + \
        [f"T_rw_r{i+1}" for i in range(n)]
    if include_coil_return and wall_list:
        input_names.append("T_rw_a")
    dist_names = []
    if include_occupancy:
        dist_names += [f"CO2_{i+1}" for i in range(n)]
    exteriors = sorted({w.exterior for w in wall_list if w.exterior})
    if include_solar and any(w.windowed for w in wall_list) and "out" not in exteriors:
        exteriors.append("out")
    dist_names += [f"T_{e}" for e in exteriors]

    states = ChannelSpace(
        tuple(state_names), tuple("degC" for _ in state_names), "states"
    )
    units = {"m_a": "m3/h"}
    inputs = ChannelSpace(
        tuple(input_names),
        tuple(units.get(nm, "degC") for nm in input_names),
        "inputs",
    )
    dists = ChannelSpace(
        tuple(dist_names),
        tuple("ppm" if nm.startswith("CO2") else "degC" for nm in dist_names),
        "disturbances",
    )

    a = np.zeros((nx, nx))
    b = np.zeros((nx, inputs.dim))
    f = np.zeros((nx, dists.dim))
    q = np.zeros(nx)
    n_ma_state = np.zeros((nx, nx))
    n_ma_input = np.zeros((nx, inputs.dim))
    sigma = np.zeros(nx)

    c_pa = params.require("C_pa", kind)
    for i in range(n):
        zi = i
        c_z = params.require(f"C_z{i+1}", kind)
        sigma[zi] = params.get(f"sigma_z{i+1}", 0.0)
        # radiator return water heat gain
        p_rad = params.require(f"P_rad_{i+1}", kind)
        a2 = params.require("alpha_2", kind)
        a[zi, zi] -= p_rad * a2 / c_z
        b[zi, inputs.index(f"T_rw_r{i+1}")] += p_rad * a2 / c_z
        q[zi] += p_rad * params.require("alpha_1", kind) / c_z
        # occupancy heat gain
        if include_occupancy:
            f[zi, dists.index(f"CO2_{i+1}")] += params.require(f"mu_{i+1}", kind) / c_z
            q[zi] += params.require(f"beta_1_{i+1}", kind) / c_z
        # supply air (bilinear in m_a)
        n_ma_state[zi, zi] -= c_pa / c_z
        n_ma_input[zi, inputs.index(f"T_sa{i+1}")] += c_pa / c_z
        # wall conduction
        if fixed_wall_temperature is not None:
            r_i = params.require(f"R_{i+1}", kind)  # mean wall resistance
            a[zi, zi] -= 1.0 / (c_z * r_i)
            q[zi] += fixed_wall_temperature / (c_z * r_i)
        else:
            for w in wall_list:
                if (i + 1) in w.zones:
                    r = params.require(f"R_{w.name}_z{i+1}", kind)
                    wi = n + wall_list.index(w)
                    a[zi, zi] -= 1.0 / (c_z * r)
                    a[zi, wi] += 1.0 / (c_z * r)

    for widx, w in enumerate(wall_list):
        wi = n + widx
        c_w = params.require(f"C_{w.name}", kind)
        sigma[wi] = params.get(f"sigma_{w.name}", 0.0)
        if w.exterior:
            r_ext = params.require(f"R_{w.name}_ext", kind)
            a[wi, wi] -= 1.0 / (c_w * r_ext)
            f[wi, dists.index(f"T_{w.exterior}")] += 1.0 / (c_w * r_ext)
        for zl in w.zones:
            r = params.require(f"R_{w.name}_z{zl}", kind)
            a[wi, wi] -= 1.0 / (c_w * r)
            a[wi, zl - 1] += 1.0 / (c_w * r)
        if include_coil_return:
            a3 = params.require("alpha_3", kind)
            a[wi, wi] -= a3 / c_w
            b[wi, inputs.index("T_rw_a")] += a3 / c_w
        if include_solar and w.windowed:
            a0 = params.require("alpha_0", kind)
            area = params.require(w.area_symbol or "A_1", kind)
            f[wi, dists.index("T_out")] += a0 * area / c_w
            q[wi] += params.require("beta_2", kind) / c_w

    bil = ()
    if np.any(n_ma_state) or np.any(n_ma_input):
        bil = (BilinearTerm(inputs.index("m_a"), n_ma_state, n_ma_input),)
    return ContinuousModel(states, inputs, dists, a, b, f, q, bil, sigma)


_BUILDERS = {
    ComponentKind.BOILER: _build_boiler,
    ComponentKind.VALVE: _build_valve,
    ComponentKind.MIXER: _build_mixer,
    ComponentKind.AHU_HEATING_COIL: _build_heating_coil,
    ComponentKind.AHU_AIR_DUCT: _build_air_duct,
    ComponentKind.RADIATOR: _build_radiator,
    ComponentKind.ZONE: make_zone,
    ComponentKind.COLLECTOR: _build_collector,
}
