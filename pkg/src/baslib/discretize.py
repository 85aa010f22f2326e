"""Forward-Euler and Euler-Maruyama discretization at sampling time Delta.

Both schemes share the drift update

    A_d = I + Delta A,   B_d = Delta B,   F_d = Delta F,   Q_d = Delta q;

Euler-Maruyama additionally drives each state with sqrt(Delta) * sigma_i
times an independent standard-normal draw per step.  The discrete noise
matrix is stored as the diagonal vector of per-step standard deviations, so
a model with all sigma_i = 0 discretizes to exactly the Forward-Euler result
field by field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import ContinuousModel, _freeze
from .errors import InvalidParameter, UnfrozenBilinear


@dataclass(frozen=True)
class DiscreteModel:
    """x[k+1] = A x[k] + B u[k] + F d[k] + Q + diag(sigma) W[k]."""

    a: np.ndarray
    b: np.ndarray
    f: np.ndarray
    q: np.ndarray
    sigma: np.ndarray               # per-step noise standard deviations
    delta_minutes: float
    output_c: np.ndarray            # output selection matrix
    state_names: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()
    disturbance_names: tuple[str, ...] = ()

    def __post_init__(self):
        n = np.atleast_2d(np.asarray(self.a)).shape[0]
        object.__setattr__(self, "a", _freeze(np.reshape(self.a, (n, n))))
        b = np.reshape(np.asarray(self.b, dtype=float), (n, -1))
        object.__setattr__(self, "b", _freeze(b))
        fm = np.asarray(self.f, dtype=float)
        fm = fm.reshape((n, -1)) if fm.size else fm.reshape((n, 0))
        object.__setattr__(self, "f", _freeze(fm))
        object.__setattr__(self, "q", _freeze(np.reshape(self.q, (n,))))
        object.__setattr__(self, "sigma", _freeze(np.reshape(self.sigma, (n,))))
        c = np.asarray(self.output_c, dtype=float)
        c = c.reshape((-1, n)) if c.size else c.reshape((0, n))
        object.__setattr__(self, "output_c", _freeze(c))
        if np.any(self.sigma < 0):
            raise InvalidParameter("per-step noise standard deviations must be >= 0")
        if not self.state_names:
            object.__setattr__(
                self, "state_names", tuple(f"x{i+1}" for i in range(n))
            )
        if not self.input_names:
            object.__setattr__(
                self, "input_names", tuple(f"u{i+1}" for i in range(self.b.shape[1]))
            )
        if not self.disturbance_names:
            object.__setattr__(
                self, "disturbance_names",
                tuple(f"d{i+1}" for i in range(self.f.shape[1])),
            )

    @property
    def n_states(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b.shape[1]

    @property
    def n_disturbances(self) -> int:
        return self.f.shape[1]

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(self.sigma == 0.0))

    def with_sigma(self, sigma) -> "DiscreteModel":
        return replace(self, sigma=np.asarray(sigma, dtype=float))

    def outputs(self, states: np.ndarray) -> np.ndarray:
        return states @ self.output_c.T


def _check_affine(model: ContinuousModel, what: str) -> None:
    if model.bilinear:
        name = model.inputs.names[model.bilinear[0].input_index]
        raise UnfrozenBilinear(name, what)


def _default_output(model: ContinuousModel) -> np.ndarray:
    # the paper-style convention: zone temperatures are the observed outputs
    rows = [i for i, nm in enumerate(model.states.names) if nm.startswith("T_z")]
    if not rows:
        return np.eye(model.states.dim)
    c = np.zeros((len(rows), model.states.dim))
    for r, i in enumerate(rows):
        c[r, i] = 1.0
    return c


def forward_euler(model: ContinuousModel, delta: float, output_c=None) -> DiscreteModel:
    """Deterministic Forward-Euler discretization; noise is dropped."""
    if delta < 0:
        raise InvalidParameter(f"sampling time must be >= 0, got {delta}")
    _check_affine(model, "forward_euler")
    n = model.states.dim
    return DiscreteModel(
        a=np.eye(n) + delta * model.drift_a,
        b=delta * model.drift_b,
        f=delta * model.drift_f,
        q=delta * model.drift_q,
        sigma=np.zeros(n),
        delta_minutes=delta,
        output_c=_default_output(model) if output_c is None else output_c,
        state_names=model.states.names,
        input_names=model.inputs.names,
        disturbance_names=model.disturbances.names,
    )


def euler_maruyama(model: ContinuousModel, delta: float, output_c=None) -> DiscreteModel:
    """Stochastic Euler-Maruyama discretization.

    Drift fields are identical to :func:`forward_euler`; the per-step noise
    standard deviations are sqrt(Delta) * sigma_i, multiplying independent
    standard-normal draws.
    """
    base = forward_euler(model, delta, output_c)
    return base.with_sigma(math.sqrt(delta) * model.noise_sigma)
