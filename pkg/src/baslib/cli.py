"""Command-line surface tying the analysis engines together.

Subcommands: list-benchmarks, simulate, reach, psafe, synth, hybrid-reach.
Every run validates its configuration before computing, computes before
writing, and finishes by writing ``manifest.json`` with a content hash per
artifact; identical (config, seed) runs produce bitwise identical artifacts.
Options may come from ``--config file.json`` with command-line flags taking
precedence; the default seed is the ``BAS_SEED`` environment variable.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import benchmarks, io, reach, stochastic
from .benchmarks import build_benchmark, load_trace_csv, reference_polytope
from .errors import BasError
from .hybrid import box_flowpipe, build_hybrid_cs3, integrate
from .reach import Box, check_containment, reach_tube
from .simulate import constant_schedule, simulate, weekday_schedule
from .stochastic import (
    SafetySpec,
    build_kernel_cs1_2d,
    grid_abstraction,
    safety_value_iteration,
    synthesize_cs2,
)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",") if p.strip() != ""])
    except ValueError:
        raise BasError(f"cannot parse vector {text!r}; expected comma-separated numbers")


def _effective(args: argparse.Namespace, config: dict, key: str, default):
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return default


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _default_seed() -> int:
    return int(os.environ.get("BAS_SEED", "0"))


def cmd_list_benchmarks(args, config) -> int:
    for bid in benchmarks.BENCHMARK_IDS:
        bench = build_benchmark(bid)
        print(f"{bid}\t{bench.description}")
    return 0


def cmd_simulate(args, config) -> int:
    bid = _effective(args, config, "benchmark", "cs1-det")
    n_steps = int(_effective(args, config, "k", 192))
    seed = int(_effective(args, config, "seed", _default_seed()))
    sched_name = _effective(args, config, "schedule", "cs1-weekday")
    u_const = _effective(args, config, "u-const", None)
    overlay = _effective(args, config, "overlay", None)
    out_dir = _ensure_out(_effective(args, config, "out-dir", "out"))

    bench = build_benchmark(bid)
    if bid == "cs3-hybrid":
        print("simulate handles discrete-time benchmarks; use hybrid-reach",
              file=sys.stderr)
        return 2
    model = bench.model
    x0_text = _effective(args, config, "x0", None)
    x0 = _parse_vector(x0_text) if x0_text else np.array(bench.x0_default)
    if x0.size != model.n_states:
        print(f"x0 needs {model.n_states} entries for {bid}", file=sys.stderr)
        return 2
    if u_const is not None:
        schedule = constant_schedule(float(u_const), model.delta_minutes)
    elif sched_name == "cs1-weekday":
        schedule = weekday_schedule(model.delta_minutes)
    else:
        print(f"unknown schedule {sched_name!r}", file=sys.stderr)
        return 2

    trace = simulate(model, x0, schedule, bench.disturbances, seed, n_steps, bid)
    files = []
    io.trace_to_csv(os.path.join(out_dir, "trace.csv"), trace,
                    model.state_names, model.input_names)
    files.append("trace.csv")
    io.write_json(
        os.path.join(out_dir, "trace.meta.json"),
        io.trace_meta_dict(trace, {"schedule": schedule.name, "x0": x0.tolist()}),
    )
    files.append("trace.meta.json")
    if overlay:
        measured = load_trace_csv(overlay)
        combined = os.path.join(out_dir, "overlay.csv")
        times = trace.times_minutes()
        with open(combined, "w", newline="") as fh:
            import csv as _csv

            writer = _csv.writer(fh)
            writer.writerow(
                ["t_min"] + [f"sim:{s}" for s in model.state_names]
                + [f"measured:{c}" for c in measured.channels]
            )
            for k, t in enumerate(times):
                row = [io.fmt(t)] + [io.fmt(v) for v in trace.states[k]]
                j = int(np.searchsorted(measured.times, t))
                if j < len(measured.times) and measured.times[j] == t:
                    row += [io.fmt(v) for v in measured.values[j]]
                else:
                    row += [""] * len(measured.channels)
                writer.writerow(row)
        files.append("overlay.csv")
    cfg = {"command": "simulate", "benchmark": bid, "k": n_steps, "seed": seed,
           "schedule": schedule.name, "x0": x0.tolist()}
    io.write_manifest(out_dir, cfg, files)
    print(f"wrote {len(files) + 1} files to {out_dir}")
    return 0


def cmd_reach(args, config) -> int:
    bid = _effective(args, config, "benchmark", "cs1-det")
    if bid not in ("cs1-det", "cs1-dist"):
        print("reach supports cs1-det and cs1-dist (deterministic models)",
              file=sys.stderr)
        return 2
    n = int(_effective(args, config, "n", 6))
    u_lo = float(_effective(args, config, "u-lo", benchmarks.INPUT_INTERVAL_CS1[0]))
    u_hi = float(_effective(args, config, "u-hi", benchmarks.INPUT_INTERVAL_CS1[1]))
    out_dir = _ensure_out(_effective(args, config, "out-dir", "out"))
    x0_text = _effective(args, config, "x0", "18,18,35,35")
    x0 = _parse_vector(x0_text)

    bench = build_benchmark(bid)
    model = bench.model
    if x0.size != model.n_states:
        print(f"x0 needs {model.n_states} entries", file=sys.stderr)
        return 2
    u_set = Box.interval(u_lo, u_hi)
    d_set = None
    if model.n_disturbances:
        d_lo = float(_effective(args, config, "d-lo", 0.0))
        d_hi = float(_effective(args, config, "d-hi", 1000.0))
        d_set = Box(np.full(model.n_disturbances, d_lo),
                    np.full(model.n_disturbances, d_hi))
    steps, tube = reach_tube(model, Box.point(x0), u_set, d_set, n)

    files = []
    for k, poly in enumerate(steps):
        name = f"reach_step_{k}.csv"
        io.polytope_to_csv(os.path.join(out_dir, name), poly, model.state_names)
        files.append(name)
    io.polytope_to_csv(os.path.join(out_dir, "reach_tube.csv"), tube,
                       model.state_names)
    files.append("reach_tube.csv")

    published = reference_polytope(bid)
    comparison = []
    for d, b in zip(tube.directions, tube.bounds):
        ref = published.bound_for(d)
        comparison.append({
            "direction": d.tolist(), "tube_bound": float(b),
            "published_bound": ref, "margin": ref - float(b),
        })
    report = {
        "benchmark": bid, "n_steps": n, "x0": x0.tolist(),
        "input_interval": [u_lo, u_hi],
        "facet_comparison": comparison,
        "note": (
            "facet margins against the published polytopes are informational: "
            "the published tube was computed with input steering toward the "
            "safe region, whose effect on individual bounds is not documented; "
            "containment of sampled trajectories in our tube is the sound check"
        ),
    }
    io.write_json(os.path.join(out_dir, "reach_report.json"), report)
    files.append("reach_report.json")
    cfg = {"command": "reach", "benchmark": bid, "n": n, "x0": x0.tolist(),
           "u": [u_lo, u_hi]}
    io.write_manifest(out_dir, cfg, files)
    print(f"wrote {len(files) + 1} files to {out_dir}")
    return 0


def cmd_psafe(args, config) -> int:
    n = int(_effective(args, config, "n", 6))
    cells = int(_effective(args, config, "cells", 40))
    n_actions = int(_effective(args, config, "actions", 15))
    out_dir = _ensure_out(_effective(args, config, "out-dir", "out"))

    kernel = build_kernel_cs1_2d()
    spec = SafetySpec(benchmarks.SAFE_SET_CS1, n)
    actions = np.linspace(kernel.u_lo[0], kernel.u_hi[0], n_actions)
    mdp = grid_abstraction(kernel, spec, cells, actions)
    vi = safety_value_iteration(mdp, n)

    values_path = os.path.join(out_dir, "psafe_values.csv")
    with open(values_path, "w", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(["Tz1_lo", "Tz1_hi", "Tz2_lo", "Tz2_hi", "V_N", "action"])
        e1, e2 = mdp.edges
        shape = mdp.shape
        for flat in range(mdp.n_cells):
            i, j = np.unravel_index(flat, shape)
            act = vi.policy.action(n, flat)
            writer.writerow([
                io.fmt(e1[i]), io.fmt(e1[i + 1]), io.fmt(e2[j]), io.fmt(e2[j + 1]),
                io.fmt(vi.final[flat]), io.fmt(act[0]),
            ])
    policy_doc = {
        "horizon": n,
        "actions": mdp.actions[:, 0].tolist(),
        "actions_by_remaining": vi.policy.actions_by_remaining.tolist(),
        "grid": {"cells": list(shape),
                 "safe_box_lo": spec.safe_box.lo.tolist(),
                 "safe_box_hi": spec.safe_box.hi.tolist()},
        "eta_per_step": mdp.eta,
    }
    io.write_json(os.path.join(out_dir, "psafe_policy.json"), policy_doc)
    report = {
        "command": "psafe", "n": n, "cells": cells, "actions": n_actions,
        "max_value": float(vi.final.max()),
        "eta_per_step": mdp.eta,
    }
    io.write_json(os.path.join(out_dir, "psafe_report.json"), report)
    files = ["psafe_values.csv", "psafe_policy.json", "psafe_report.json"]
    io.write_manifest(out_dir, report, files)
    print(f"wrote {len(files) + 1} files to {out_dir}")
    return 0


def cmd_synth(args, config) -> int:
    n_actions = int(_effective(args, config, "actions", 15))
    mc = int(_effective(args, config, "mc", 10_000))
    seed = int(_effective(args, config, "seed", _default_seed()))
    eta_target = float(_effective(args, config, "eta-target", 0.005))
    out_dir = _ensure_out(_effective(args, config, "out-dir", "out"))

    report = synthesize_cs2(
        n_actions=n_actions, mc_traces=mc, seed=seed, eta_target=eta_target
    )
    io.write_json(os.path.join(out_dir, "synthesis_report.json"),
                  report.to_json_dict())
    files = ["synthesis_report.json"]
    cfg = {"command": "synth", "actions": n_actions, "mc": mc, "seed": seed,
           "eta_target": eta_target}
    io.write_manifest(out_dir, cfg, files)
    doc = report.to_json_dict()
    for key in ("epsilon", "delta", "p_prime", "eta", "p", "mc_safety"):
        print(f"{key} = {doc[key]}")
    return 0


def cmd_hybrid_reach(args, config) -> int:
    x0 = _parse_vector(_effective(args, config, "x0", "15,15"))
    if x0.size != 2:
        print("x0 needs 2 entries (T_z1, T_sa)", file=sys.stderr)
        return 2
    horizon = float(_effective(args, config, "horizon", 120.0))
    step = float(_effective(args, config, "step", 0.01))
    radius = float(_effective(args, config, "x0-radius", 0.0))
    mode = _effective(args, config, "mode", None)
    out_dir = _ensure_out(_effective(args, config, "out-dir", "out"))

    ha = build_hybrid_cs3()
    trace = integrate(ha, x0, mode, horizon, step)
    files = []
    io.hybrid_trace_to_csv(os.path.join(out_dir, "hybrid_trace.csv"), trace)
    files.append("hybrid_trace.csv")
    io.write_json(os.path.join(out_dir, "hybrid_events.json"),
                  io.events_to_dict(trace))
    files.append("hybrid_events.json")
    io.write_json(os.path.join(out_dir, "automaton.json"),
                  io.automaton_to_dict(ha))
    files.append("automaton.json")
    x0_box = Box(x0 - radius, x0 + radius)
    pipe = box_flowpipe(ha, x0_box, mode, horizon, step)
    io.flowpipe_to_csv(os.path.join(out_dir, "flowpipe.csv"), pipe)
    files.append("flowpipe.csv")
    cfg = {"command": "hybrid-reach", "x0": x0.tolist(), "horizon": horizon,
           "step": step, "x0_radius": radius, "mode": mode or ha.initial_mode}
    io.write_manifest(out_dir, cfg, files)
    print(f"mode sequence: {' -> '.join(trace.mode_sequence)}")
    print(f"wrote {len(files) + 1} files to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baslib",
        description="building-automation model library and analysis engines",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--out-dir", dest="out_dir", help="artifact directory")
        p.add_argument("--seed", type=int, help="random seed (default $BAS_SEED)")

    sub.add_parser("list-benchmarks", help="print the benchmark registry")

    p = sub.add_parser("simulate", help="simulate a discrete-time benchmark")
    common(p)
    p.add_argument("--benchmark", help="benchmark id (default cs1-det)")
    p.add_argument("--k", type=int, help="number of steps (default 192)")
    p.add_argument("--x0", help="comma-separated initial state")
    p.add_argument("--schedule", help="input schedule name (cs1-weekday)")
    p.add_argument("--u-const", dest="u_const", type=float,
                   help="constant input overriding the schedule")
    p.add_argument("--overlay", help="measured-trace CSV to merge into the export")

    p = sub.add_parser("reach", help="deterministic reach tube (cs1)")
    common(p)
    p.add_argument("--benchmark", help="cs1-det or cs1-dist")
    p.add_argument("--n", type=int, help="horizon in steps (default 6)")
    p.add_argument("--x0", help="comma-separated initial state")
    p.add_argument("--u-lo", dest="u_lo", type=float)
    p.add_argument("--u-hi", dest="u_hi", type=float)
    p.add_argument("--d-lo", dest="d_lo", type=float)
    p.add_argument("--d-hi", dest="d_hi", type=float)

    p = sub.add_parser("psafe", help="grid-based probabilistic safety (cs1)")
    common(p)
    p.add_argument("--n", type=int, help="horizon in steps (default 6)")
    p.add_argument("--cells", type=int, help="cells per axis (default 40)")
    p.add_argument("--actions", type=int, help="input quantization (default 15)")

    p = sub.add_parser("synth", help="policy synthesis on the reduced model")
    common(p)
    p.add_argument("--actions", type=int, help="input quantization (default 15)")
    p.add_argument("--mc", type=int, help="Monte-Carlo runs (default 10000)")
    p.add_argument("--eta-target", dest="eta_target", type=float,
                   help="per-step abstraction error target (default 0.005)")

    p = sub.add_parser("hybrid-reach", help="hybrid trajectory and box flowpipe")
    common(p)
    p.add_argument("--x0", help="comma-separated (T_z1, T_sa), default 15,15")
    p.add_argument("--x0-radius", dest="x0_radius", type=float,
                   help="half-width of the initial box (default 0)")
    p.add_argument("--horizon", type=float, help="minutes (default 120)")
    p.add_argument("--step", type=float, help="integration step (default 0.01)")
    p.add_argument("--mode", help="initial mode (default (O,-))")

    return parser


_COMMANDS = {
    "list-benchmarks": cmd_list_benchmarks,
    "simulate": cmd_simulate,
    "reach": cmd_reach,
    "psafe": cmd_psafe,
    "synth": cmd_synth,
    "hybrid-reach": cmd_hybrid_reach,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            config = io.read_json(cfg_path)
        except (OSError, ValueError) as exc:
            print(f"cannot read config {cfg_path}: {exc}", file=sys.stderr)
            return 2
    try:
        return _COMMANDS[args.command](args, config)
    except BasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
