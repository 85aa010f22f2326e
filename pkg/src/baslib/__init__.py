"""Modular building-automation-system model library.

Component dynamics, input-output composition, Euler discretization, a
benchmark registry with the published case-study matrices, and native
analysis engines: seeded simulation, template-polytope reach tubes,
grid-based probabilistic safety / policy synthesis, and hybrid-automaton
reachability.
"""

from .benchmarks import BENCHMARK_IDS, Benchmark, build_benchmark, sim_rel_lookup
from .channels import ChannelSpace
from .components import (
    Component,
    ComponentKind,
    ComponentParams,
    ModeConfig,
    apply_mode,
    enumerate_modes,
    instantiate_component,
)
from .composer import Alias, Connection, Wiring, connect, flatten
from .discretize import DiscreteModel, euler_maruyama, forward_euler
from .dynamics import AlgebraicMap, ContinuousModel, eval_algebraic, eval_drift
from .hybrid import HybridAutomaton, box_flowpipe, build_hybrid_cs3, integrate
from .reach import Box, TemplatePolytope, check_containment, reach_step, reach_tube, support
from .simulate import InputSchedule, Trace, monte_carlo, simulate, step
from .stochastic import (
    GaussianKernel,
    GridMDP,
    Policy,
    SafetySpec,
    compose_guarantee,
    grid_abstraction,
    refine_policy,
    safety_value_iteration,
    synthesize_cs2,
)

__version__ = "0.1.0"
