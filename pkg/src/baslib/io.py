"""Serialization helpers: model/polytope JSON, trace CSV, run manifests.

All CSV numerics are printed with 17 significant digits and JSON floats use
Python's shortest round-trip repr, so every artifact parses back to exactly
the values that were written.  JSON objects are emitted with sorted keys for
bitwise-reproducible files.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

from .discretize import DiscreteModel
from .hybrid import Flowpipe, HybridAutomaton, HybridTrace
from .reach import TemplatePolytope
from .simulate import Trace


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# -- discrete models --------------------------------------------------------

def discrete_model_to_dict(model: DiscreteModel) -> dict:
    return {
        "delta_minutes": model.delta_minutes,
        "state_names": list(model.state_names),
        "input_names": list(model.input_names),
        "disturbance_names": list(model.disturbance_names),
        "A": model.a.tolist(),
        "B": model.b.tolist(),
        "F": model.f.tolist(),
        "Q": model.q.tolist(),
        "Sigma_diag": model.sigma.tolist(),
        "C": model.output_c.tolist(),
    }


def discrete_model_from_dict(doc: dict) -> DiscreteModel:
    n = len(doc["Q"])
    return DiscreteModel(
        a=np.array(doc["A"], dtype=float).reshape(n, n),
        b=np.array(doc["B"], dtype=float).reshape(n, -1),
        f=np.array(doc["F"], dtype=float).reshape(n, -1),
        q=np.array(doc["Q"], dtype=float),
        sigma=np.array(doc["Sigma_diag"], dtype=float),
        delta_minutes=float(doc["delta_minutes"]),
        output_c=np.array(doc["C"], dtype=float).reshape(-1, n),
        state_names=tuple(doc["state_names"]),
        input_names=tuple(doc["input_names"]),
        disturbance_names=tuple(doc["disturbance_names"]),
    )


# -- polytopes ---------------------------------------------------------------

def polytope_to_csv(path, poly: TemplatePolytope, var_names=None) -> None:
    n = poly.dim
    names = var_names or [f"d_{i+1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + ["b"])
        for d, b in zip(poly.directions, poly.bounds):
            writer.writerow([fmt(v) for v in d] + [fmt(b)])


def polytope_from_csv(path) -> TemplatePolytope:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(c) for c in row] for row in rows[1:]])
    return TemplatePolytope(data[:, :-1], data[:, -1])


# -- traces -------------------------------------------------------------------

def trace_to_csv(path, trace: Trace, state_names, input_names) -> None:
    """Columns ``k,t_min,<states...>,<inputs...>``; the terminal row has no
    input entries."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "t_min"] + list(state_names) + list(input_names))
        times = trace.times_minutes()
        for k in range(trace.states.shape[0]):
            row = [str(k), fmt(times[k])] + [fmt(v) for v in trace.states[k]]
            if k < trace.inputs.shape[0]:
                row += [fmt(v) for v in trace.inputs[k]]
            else:
                row += [""] * len(input_names)
            writer.writerow(row)


def trace_from_csv(path, n_states: int):
    """Parse a trace CSV written by :func:`trace_to_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    body = rows[1:]
    states = np.array([[float(c) for c in row[2:2 + n_states]] for row in body])
    inputs = np.array(
        [[float(c) for c in row[2 + n_states:] if c != ""] for row in body[:-1]]
    )
    return states, inputs


def trace_meta_dict(trace: Trace, extra: dict | None = None) -> dict:
    doc = {
        "seed": trace.seed,
        "model_id": trace.model_id,
        "delta_minutes": trace.delta_minutes,
        "n_steps": trace.n_steps,
    }
    if extra:
        doc.update(extra)
    return doc


# -- hybrid artifacts ---------------------------------------------------------

def automaton_to_dict(ha: HybridAutomaton) -> dict:
    return {
        "state_names": ["T_z1", "T_sa"],
        "initial_mode": ha.initial_mode,
        "bounds": {"lo": ha.bounds.lo.tolist(), "hi": ha.bounds.hi.tolist()},
        "params": dict(ha.params),
        "modes": {
            name: {"A": a.tolist(), "c": c.tolist()}
            for name, (a, c) in ha.modes.items()
        },
        "guards": [
            {
                "source": g.source, "target": g.target, "kind": g.kind,
                "threshold": g.threshold, "unless_below": g.unless_below,
            }
            for g in ha.guards
        ],
    }


def flowpipe_to_csv(path, pipe: Flowpipe) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_lo", "t_hi", "mode", "Tz_lo", "Tz_hi", "Tsa_lo", "Tsa_hi"])
        for seg in pipe.segments:
            writer.writerow([
                fmt(seg.t_lo), fmt(seg.t_hi), seg.mode,
                fmt(seg.box.lo[0]), fmt(seg.box.hi[0]),
                fmt(seg.box.lo[1]), fmt(seg.box.hi[1]),
            ])


def hybrid_trace_to_csv(path, trace: HybridTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_min", "mode", "T_z1", "T_sa"])
        for t, m, x in zip(trace.times, trace.modes, trace.states):
            writer.writerow([fmt(t), m, fmt(x[0]), fmt(x[1])])


def events_to_dict(trace: HybridTrace) -> list:
    return [
        {"time": e.time, "source": e.source, "target": e.target, "guard": e.guard}
        for e in trace.events
    ]


# -- manifest -----------------------------------------------------------------

def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir, config: dict, files) -> str:
    """manifest.json listing every written artifact with a content hash."""
    entries = []
    for name in sorted(files):
        path = os.path.join(out_dir, name)
        entries.append({
            "path": name,
            "sha256": sha256_of(path),
            "bytes": os.path.getsize(path),
        })
    manifest_path = os.path.join(out_dir, "manifest.json")
    write_json(manifest_path, {"config": config, "files": entries})
    return manifest_path
