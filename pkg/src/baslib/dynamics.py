"""Continuous-time affine-bilinear stochastic dynamics and algebraic maps.

The common substrate for every physical component: a drift that is affine in
states, inputs and disturbances plus declared bilinear couplings in which one
input multiplies an affine expression, and diagonal additive process noise,

    dx = [A x + B u + F d + q + sum_k u_k (N_k x + P_k u + G_k d)] dt
         + diag(sigma) dW.

Time is measured in minutes throughout, so rate matrices carry 1/min
semantics.  Bilinear couplings are stored explicitly; analyses that need an
affine model freeze the bilinear input to a constant with
:meth:`ContinuousModel.freeze_input`.

Algebraic (static) maps cover the mixer, collector and valve relations: a
finite set of mode-tagged variants, each either an affine map or the
exponential valve law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .channels import ChannelSpace
from .errors import DimensionMismatch, InvalidParameter, UnknownMode


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.flags.writeable = False
    return a


def _as_vec(v, space: ChannelSpace) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    space.check_vector(arr)
    return arr


@dataclass(frozen=True)
class BilinearTerm:
    """One coupling ``u_k * (N x + P u + G d)`` added to the drift.

    ``input_index`` identifies the multiplying input channel u_k.  ``on_states``
    is required; the input/disturbance factors arise when an air-flow rate
    multiplies a temperature that is itself an input (duct, zone) and may be
    omitted.
    """

    input_index: int
    on_states: np.ndarray
    on_inputs: np.ndarray | None = None
    on_disturbances: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "on_states", _freeze(self.on_states))
        for name in ("on_inputs", "on_disturbances"):
            m = getattr(self, name)
            if m is not None:
                object.__setattr__(self, name, _freeze(m))


@dataclass(frozen=True)
class ContinuousModel:
    """Immutable affine-bilinear SDE over named channel spaces."""

    states: ChannelSpace
    inputs: ChannelSpace
    disturbances: ChannelSpace
    drift_a: np.ndarray          # state x state, 1/min
    drift_b: np.ndarray          # state x input
    drift_f: np.ndarray          # state x disturbance
    drift_q: np.ndarray          # state (constant term)
    bilinear: tuple[BilinearTerm, ...] = ()
    noise_sigma: np.ndarray = None  # per-state diffusion intensity, degC/sqrt(min)

    def __post_init__(self):
        n, m, p = self.states.dim, self.inputs.dim, self.disturbances.dim
        sigma = self.noise_sigma if self.noise_sigma is not None else np.zeros(n)
        object.__setattr__(self, "drift_a", _freeze(np.reshape(self.drift_a, (n, n))))
        object.__setattr__(self, "drift_b", _freeze(np.reshape(self.drift_b, (n, m))))
        object.__setattr__(self, "drift_f", _freeze(np.reshape(self.drift_f, (n, p))))
        object.__setattr__(self, "drift_q", _freeze(np.reshape(self.drift_q, (n,))))
        object.__setattr__(self, "noise_sigma", _freeze(np.reshape(sigma, (n,))))
        object.__setattr__(self, "bilinear", tuple(self.bilinear))
        if np.any(self.noise_sigma < 0):
            raise InvalidParameter("noise_sigma entries must be >= 0")
        for term in self.bilinear:
            if not 0 <= term.input_index < m:
                raise DimensionMismatch(self.inputs.label, m, term.input_index)
            if term.on_states.shape != (n, n):
                raise DimensionMismatch(self.states.label, n, term.on_states.shape[0])
            if term.on_inputs is not None and term.on_inputs.shape != (n, m):
                raise DimensionMismatch(self.inputs.label, m, term.on_inputs.shape[1])
            if term.on_disturbances is not None and term.on_disturbances.shape != (n, p):
                raise DimensionMismatch(
                    self.disturbances.label, p, term.on_disturbances.shape[1]
                )

    @property
    def is_affine(self) -> bool:
        return not self.bilinear

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(self.noise_sigma == 0.0))

    def drift(self, x, u, d=None) -> np.ndarray:
        return eval_drift(self, x, u, d)

    def freeze_input(self, name: str, value: float) -> "ContinuousModel":
        """Substitute a constant for one input channel.

        Bilinear terms multiplying the frozen input collapse into the affine
        part; occurrences of the input inside other terms' ``on_inputs``
        factors collapse into those terms' state/constant parts.  The channel
        is removed from the input space.
        """
        k = self.inputs.index(name)
        keep = [i for i in range(self.inputs.dim) if i != k]
        new_inputs = ChannelSpace(
            tuple(self.inputs.names[i] for i in keep),
            tuple(self.inputs.units[i] for i in keep),
            self.inputs.label,
        )
        a = self.drift_a.copy()
        b = self.drift_b.copy()
        f = self.drift_f.copy()
        q = self.drift_q + value * self.drift_b[:, k]
        new_terms: list[BilinearTerm] = []
        for t in self.bilinear:
            on_states = t.on_states
            on_inputs = t.on_inputs
            on_dist = t.on_disturbances
            if t.input_index == k:
                # the multiplier itself becomes the constant `value`
                a = a + value * on_states
                if on_inputs is not None:
                    q = q + value * value * on_inputs[:, k]
                    rest = on_inputs.copy()
                    rest[:, k] = 0.0
                    b = b + value * rest
                if on_dist is not None:
                    f = f + value * on_dist
                continue
            new_index = t.input_index - (1 if t.input_index > k else 0)
            if on_inputs is not None:
                col = on_inputs[:, k]
                if np.any(col != 0.0):
                    # u_j * (P[:,k] * value) becomes an extra B column on u_j
                    b = b.copy()
                    b[:, t.input_index] += value * col
                on_inputs = np.delete(on_inputs, k, axis=1)
                if not np.any(on_inputs):
                    on_inputs = None
            new_terms.append(
                BilinearTerm(new_index, on_states, on_inputs, on_dist)
            )
        b = np.delete(b, k, axis=1)
        return ContinuousModel(
            self.states, new_inputs, self.disturbances,
            a, b, f, q, tuple(new_terms), self.noise_sigma,
        )

    def with_noise(self, sigma) -> "ContinuousModel":
        return ContinuousModel(
            self.states, self.inputs, self.disturbances,
            self.drift_a, self.drift_b, self.drift_f, self.drift_q,
            self.bilinear, np.asarray(sigma, dtype=float),
        )


def rename_channels(
    model: ContinuousModel,
    states: Mapping[str, str] | None = None,
    inputs: Mapping[str, str] | None = None,
    disturbances: Mapping[str, str] | None = None,
) -> ContinuousModel:
    """Return a copy of the model with channels renamed (matrices unchanged)."""

    def _apply(space: ChannelSpace, mapping) -> ChannelSpace:
        if not mapping:
            return space
        return ChannelSpace(
            tuple(mapping.get(n, n) for n in space.names), space.units, space.label
        )

    return ContinuousModel(
        _apply(model.states, states),
        _apply(model.inputs, inputs),
        _apply(model.disturbances, disturbances),
        model.drift_a, model.drift_b, model.drift_f, model.drift_q,
        model.bilinear, model.noise_sigma,
    )


def eval_drift(model: ContinuousModel, x, u, d=None) -> np.ndarray:
    """Evaluate the drift A x + sum_k u_k (N_k x + P_k u + G_k d) + B u + F d + q."""
    xv = _as_vec(x, model.states)
    uv = _as_vec(u, model.inputs)
    dv = (
        _as_vec(d, model.disturbances)
        if d is not None
        else np.zeros(model.disturbances.dim)
    )
    if d is None and model.disturbances.dim:
        raise DimensionMismatch(model.disturbances.label, model.disturbances.dim, 0)
    out = model.drift_a @ xv + model.drift_b @ uv + model.drift_f @ dv + model.drift_q
    for t in model.bilinear:
        contrib = t.on_states @ xv
        if t.on_inputs is not None:
            contrib = contrib + t.on_inputs @ uv
        if t.on_disturbances is not None:
            contrib = contrib + t.on_disturbances @ dv
        out = out + uv[t.input_index] * contrib
    return out


# --------------------------------------------------------------------------
# Algebraic (static) maps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineVariant:
    """output = matrix @ inputs + offset."""

    matrix: np.ndarray
    offset: np.ndarray
    convex_rows: bool = False  # mixer/collector: temperature coefficients sum to 1

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(np.atleast_2d(self.matrix)))
        object.__setattr__(self, "offset", _freeze(np.reshape(self.offset, (-1,))))
        if self.convex_rows:
            sums = self.matrix.sum(axis=1)
            if not np.allclose(sums, 1.0, atol=1e-12):
                raise InvalidParameter(
                    f"convex-combination map has row sums {sums}, expected 1"
                )


@dataclass(frozen=True)
class ValveLawVariant:
    """Exponential valve opening law  w = (1/tau) exp(ln(tau) X) w_max.

    Equivalently w = w_max * tau**(X - 1): w(1) = w_max, w(0) = w_max / tau.
    Input is the valve position X; output the water flow rate w.
    """

    tau: float
    w_max: float

    def __post_init__(self):
        if self.tau <= 0 or self.w_max < 0:
            raise InvalidParameter("valve law needs tau > 0 and w_max >= 0")

    def __call__(self, position: float) -> float:
        return math.exp(math.log(self.tau) * position) * self.w_max / self.tau


Variant = Union[AffineVariant, ValveLawVariant]


@dataclass(frozen=True)
class AlgebraicMap:
    """Static input-output relation with mode-selectable variants."""

    inputs: ChannelSpace
    outputs: ChannelSpace
    variants: Mapping[str, Variant]
    default_mode: str = ""
    _variants: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        variants = dict(self.variants)
        if not variants:
            raise InvalidParameter("algebraic map needs at least one variant")
        object.__setattr__(self, "_variants", variants)
        default = self.default_mode or next(iter(variants))
        object.__setattr__(self, "default_mode", default)
        for tag, var in variants.items():
            if isinstance(var, AffineVariant):
                if var.matrix.shape != (self.outputs.dim, self.inputs.dim):
                    raise DimensionMismatch(
                        self.inputs.label, self.inputs.dim, var.matrix.shape[1]
                    )
            elif isinstance(var, ValveLawVariant):
                if self.inputs.dim != 1 or self.outputs.dim != 1:
                    raise DimensionMismatch(self.inputs.label, 1, self.inputs.dim)

    @property
    def modes(self) -> tuple[str, ...]:
        return tuple(self._variants)

    def variant(self, mode: str | None = None) -> Variant:
        tag = self.default_mode if mode is None else mode
        try:
            return self._variants[tag]
        except KeyError:
            raise UnknownMode(tag, self.modes) from None

    def __call__(self, inputs, mode: str | None = None) -> np.ndarray:
        return eval_algebraic(self, self.default_mode if mode is None else mode, inputs)

    def with_default(self, mode: str) -> "AlgebraicMap":
        self.variant(mode)  # validate
        return AlgebraicMap(self.inputs, self.outputs, self._variants, mode)


def eval_algebraic(amap: AlgebraicMap, mode: str, inputs) -> np.ndarray:
    """Evaluate one variant of an algebraic map on an input vector."""
    var = amap.variant(mode)
    vec = _as_vec(inputs, amap.inputs)
    if isinstance(var, ValveLawVariant):
        return np.array([var(vec[0])])
    return var.matrix @ vec + var.offset
