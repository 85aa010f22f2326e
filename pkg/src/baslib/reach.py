"""Deterministic reach tubes for discrete-time affine models.

Sets are template polytopes: a fixed family of facet directions with one
scalar bound per direction, {x : d^T x <= b_d for every d}.  The working
template is the octagonal family (+-e_i and +-e_i +- e_j), whose directions
use unit coefficients so facet bounds read directly as sums/differences of
physical variables.

One reach step maps a set X through x' = A x + B u + F d + Q with u, d
ranging over boxes; in every template direction the bound

    b'_d = support(X, A^T d) + support(U, B^T d) + support(D, F^T d) + d^T Q

is exact for the affine image of the sets (the set itself is then relaxed to
its template hull).  Iterating yields per-step polytopes; the tube is their
facet-wise union (per-direction max).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .discretize import DiscreteModel
from .errors import DimensionMismatch, InvalidParameter, StochasticModelError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by per-dimension closed intervals."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise DimensionMismatch("box", lo.size, hi.size)
        if np.any(lo > hi):
            raise InvalidParameter(f"box has lo > hi: {lo} vs {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        self.lo.flags.writeable = False
        self.hi.flags.writeable = False

    @classmethod
    def point(cls, x) -> "Box":
        x = np.asarray(x, dtype=float)
        return cls(x, x)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Box":
        return cls(np.array([lo]), np.array([hi]))

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def sample(self, rng, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def support_argmax(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        return np.where(d >= 0, self.hi, self.lo)

    def hull(self, other: "Box") -> "Box":
        return Box(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def intersect(self, other: "Box") -> "Box | None":
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)


@dataclass(frozen=True)
class TemplatePolytope:
    """{x : directions[i] . x <= bounds[i]} over a fixed direction family."""

    directions: np.ndarray          # (m, n)
    bounds: np.ndarray              # (m,)

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.directions, dtype=float))
        b = np.atleast_1d(np.asarray(self.bounds, dtype=float))
        if d.shape[0] != b.size:
            raise DimensionMismatch("template", d.shape[0], b.size)
        if not np.all(np.isfinite(b)):
            raise InvalidParameter("template bounds must be finite")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "bounds", b)
        self.directions.flags.writeable = False
        self.bounds.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def n_facets(self) -> int:
        return self.directions.shape[0]

    def margins(self, x) -> np.ndarray:
        """Per-facet slack b - d.x (negative where violated); x may be a batch."""
        x = np.asarray(x, dtype=float)
        return self.bounds - x @ self.directions.T

    def bound_for(self, direction) -> float:
        """Bound of the facet whose direction matches exactly."""
        direction = np.asarray(direction, dtype=float)
        hits = np.where((self.directions == direction).all(axis=1))[0]
        if hits.size == 0:
            raise KeyError(f"no facet with direction {direction}")
        return float(self.bounds[hits[0]])


def octagon_template(n: int) -> np.ndarray:
    """Octagonal direction family: +-e_i, then +-e_i +- e_j for i < j.

    For n = 4 this gives 8 + 24 = 32 facets.  Directions use coefficients in
    {-1, 0, 1} (not L2-normalized) so bounds compare directly with sums and
    differences of the state variables.
    """
    dirs = []
    eye = np.eye(n)
    for i in range(n):
        dirs.append(eye[i])
    for i in range(n):
        dirs.append(-eye[i])
    for i in range(n):
        for j in range(i + 1, n):
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                dirs.append(si * eye[i] + sj * eye[j])
    return np.array(dirs)


def support(s, direction) -> float:
    """Support function max_{x in s} direction . x.

    Closed form for boxes; an LP over the facet representation for template
    polytopes (raises if the direction is unbounded over a degenerate
    template).
    """
    d = np.asarray(direction, dtype=float)
    if isinstance(s, Box):
        if d.size != s.dim:
            raise DimensionMismatch("support direction", s.dim, d.size)
        return float(np.where(d >= 0, s.hi, s.lo) @ d)
    if isinstance(s, TemplatePolytope):
        if d.size != s.dim:
            raise DimensionMismatch("support direction", s.dim, d.size)
        res = linprog(
            -d, A_ub=s.directions, b_ub=s.bounds,
            bounds=[(None, None)] * s.dim, method="highs",
        )
        if res.status == 3:
            raise InvalidParameter(
                f"support unbounded in direction {d}: degenerate template"
            )
        if not res.success:
            raise InvalidParameter(f"support LP failed: {res.message}")
        return float(-res.fun)
    raise TypeError(f"unsupported set type {type(s).__name__}")


def template_hull(s, template: np.ndarray) -> TemplatePolytope:
    """Tightest template polytope containing the given set."""
    bounds = np.array([support(s, d) for d in template])
    return TemplatePolytope(template, bounds)


def _require_deterministic(model: DiscreteModel) -> None:
    if not model.is_deterministic:
        raise StochasticModelError(
            "reach-tube computation handles deterministic models only; for "
            "models with process noise use the grid-based probabilistic "
            "safety analysis (baslib.stochastic)"
        )


def reach_step(
    x_set, model: DiscreteModel, u_set: Box | None, d_set: Box | None,
    template: np.ndarray | None = None,
) -> TemplatePolytope:
    """One-step reachable set {A x + B u + F d + Q} as a template polytope."""
    _require_deterministic(model)
    n = model.n_states
    templ = octagon_template(n) if template is None else np.asarray(template, float)
    bounds = np.empty(len(templ))
    for i, d in enumerate(templ):
        val = support(x_set, model.a.T @ d)
        if model.n_inputs:
            if u_set is None:
                raise InvalidParameter("model has inputs but no input set given")
            val += support(u_set, model.b.T @ d)
        if model.n_disturbances:
            if d_set is None:
                raise InvalidParameter("model has disturbances but no disturbance set")
            val += support(d_set, model.f.T @ d)
        bounds[i] = val + d @ model.q
    return TemplatePolytope(templ, bounds)


def reach_tube(
    model: DiscreteModel, x0_set, u_set: Box | None, d_set: Box | None,
    n_steps: int, template: np.ndarray | None = None,
) -> tuple[list[TemplatePolytope], TemplatePolytope]:
    """Per-step reachable sets over N steps plus their facet-wise union."""
    _require_deterministic(model)
    if n_steps < 0:
        raise InvalidParameter("n_steps must be >= 0")
    templ = (
        octagon_template(model.n_states) if template is None
        else np.asarray(template, float)
    )
    steps = [template_hull(x0_set, templ)]
    current = steps[0]
    for _ in range(n_steps):
        current = reach_step(current, model, u_set, d_set, templ)
        steps.append(current)
    union_bounds = np.max([p.bounds for p in steps], axis=0)
    return steps, TemplatePolytope(templ, union_bounds)


def check_containment(x, polytope: TemplatePolytope, tol: float = 0.0):
    """Check one point or a trace (rows = points) against a polytope.

    Returns ``(inside, worst_margin, worst_facet_index)``; an empty trace is
    vacuously inside with infinite margin.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return True, float("inf"), -1
    pts = np.atleast_2d(x)
    margins = polytope.margins(pts)
    worst_flat = int(np.argmin(margins))
    worst_facet = worst_flat % polytope.n_facets
    worst = float(margins.reshape(-1)[worst_flat])
    return bool(worst >= -tol), worst, worst_facet
