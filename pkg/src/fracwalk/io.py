"""JSON/CSV formats for graphs, matrices, observation data and results.

JSON output is deterministic: keys sorted, floats written with 17
significant digits (lossless round trip), NaN written as ``null``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import NonpositiveConductivity, ParseError
from .gauge import ConditionReport
from .graph_core import AdmissibilityReport, Graph, all_pairs_distances
from .recovery import CanonicalRepresentative
from .reconstruct import ReconstructionResult
from .simulator import EmpiricalData
from .walk_model import ObservationData


class GraphFile(NamedTuple):
    graph: Graph
    gamma: np.ndarray | None
    alpha: float | None
    theta: float | None


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        if not any(ch in text for ch in ".en"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, set, frozenset)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return "[" + ", ".join(_encode(v) for v in seq) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _matrix(rows, name: str) -> np.ndarray:
    try:
        arr = np.array([[np.nan if v is None else float(v) for v in row] for row in rows], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{name} is not a numeric matrix") from exc
    if arr.size and arr.ndim != 2:
        raise ParseError(f"{name} is not a rectangular matrix")
    return arr


# graphs

def graph_to_dict(g: Graph, gamma=None, alpha=None, theta=None) -> dict:
    out = {"n": g.n, "observable": g.observable, "edges": [list(e) for e in g.sorted_edges()]}
    if gamma is not None:
        out["gamma"] = np.asarray(gamma, dtype=float)
    if alpha is not None:
        out["alpha"] = float(alpha)
    if theta is not None:
        out["theta"] = float(theta)
    return out


def graph_from_dict(doc: dict) -> GraphFile:
    try:
        n = int(doc["n"])
        observable = int(doc["observable"])
        edges = [tuple(int(v) for v in e) for e in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed graph document: {exc}") from exc
    for e in edges:
        if len(e) != 2:
            raise ParseError(f"edge {e} is not a pair")
    g = Graph(n, observable, edges)
    all_pairs_distances(g)
    gamma = None
    if doc.get("gamma") is not None:
        gamma = np.asarray(doc["gamma"], dtype=float)
        if gamma.shape != (n,):
            raise ParseError(f"gamma has length {gamma.size}, expected {n}")
        if not (gamma > 0).all():
            raise NonpositiveConductivity("gamma must be positive")
    alpha = doc.get("alpha")
    theta = doc.get("theta")
    return GraphFile(
        g, gamma, None if alpha is None else float(alpha), None if theta is None else float(theta)
    )


def parse_graph(path) -> GraphFile:
    """Read and validate a graph file (connectivity enforced)."""
    return graph_from_dict(read_json(path))


def write_graph(path, g: Graph, gamma=None, alpha=None, theta=None) -> None:
    write_json(path, graph_to_dict(g, gamma, alpha, theta))


# matrices

def read_matrix_csv(path) -> np.ndarray:
    try:
        return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read CSV matrix {path}: {exc}") from exc


def matrix_document(path) -> dict:
    """Matrix file as a dict with at least ``matrix``; CSV files carry no
    metadata."""
    if str(path).lower().endswith(".csv"):
        return {"matrix": read_matrix_csv(path)}
    doc = read_json(path)
    if "matrix" not in doc:
        raise ParseError(f"{path} has no 'matrix' field")
    doc = dict(doc)
    doc["matrix"] = _matrix(doc["matrix"], "matrix")
    return doc


# observation data

def observation_to_dict(data: ObservationData) -> dict:
    return {"N": data.N, "K": data.K, "mats": [np.asarray(m) for m in data.mats]}


def observation_from_dict(doc: dict) -> ObservationData:
    try:
        N = int(doc["N"])
        mats = tuple(_matrix(m, "mats") for m in doc["mats"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed observation data: {exc}") from exc
    for m in mats:
        if m.shape != (N, N):
            raise ParseError(f"observation block of shape {m.shape}, expected {(N, N)}")
    return ObservationData(N=N, mats=mats)


def empirical_to_dict(emp: EmpiricalData) -> dict:
    out = observation_to_dict(emp.estimate)
    out["visit_counts"] = emp.visit_counts
    out["undefined_rows"] = emp.undefined_rows
    return out


# results

def canonical_to_dict(rep: CanonicalRepresentative) -> dict:
    return {"N": rep.N, "r": rep.r, "Q": rep.Q, "R1": rep.R1, "R2": rep.R2}


def canonical_from_dict(doc: dict) -> CanonicalRepresentative:
    try:
        N, r = int(doc["N"]), int(doc["r"])
        q = _matrix(doc["Q"], "Q")
        r1 = _matrix(doc["R1"], "R1").reshape(N, r)
        r2 = _matrix(doc["R2"], "R2").reshape(r, N)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed canonical representative: {exc}") from exc
    return CanonicalRepresentative(N=N, r=r, Q=q, R1=r1, R2=r2)


def reconstruction_to_dict(res: ReconstructionResult) -> dict:
    return {
        "distances": res.distances,
        "edges": [list(e) for e in sorted(res.edges)],
        "leaves": sorted(res.leaves),
        "neighbours": sorted(res.neighbours),
        "sigma1": res.sigma1,
        "sigma2": res.sigma2,
        "scale_convention": res.scale_convention,
    }


def condition_report_to_dict(rep: ConditionReport) -> dict:
    return {
        "p1": rep.p1,
        "p2_residual": rep.p2_residual,
        "p3_residual": rep.p3_residual,
        "overall": rep.overall,
    }


def admissibility_to_dict(rep: AdmissibilityReport) -> dict:
    return {
        "a1_ok": rep.a1_ok,
        "a1_rank": rep.a1_rank,
        "a2_ok": rep.a2_ok,
        "leaf_set": sorted(rep.leaf_set),
        "max_leaf_eccentricity": rep.max_leaf_eccentricity,
    }
