"""File ingestion: JSON spec files dispatched on their "kind" field.

Every loader reports schema problems with the offending field path;
domain-level validation (topology closure, filter axioms, ...) is
delegated to the corresponding constructors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, SchemaViolation
from .filter_algebra import IndicatorFilter, Refinement, check_filter_axioms
from .finite_topology import FiniteTopology, PointMap, validate_topology
from .flows import Flow, linear_flow, rotation_flow, scaling_flow, \
    translation_flow

KINDS = ("topology", "map", "filter", "refinement", "relation", "flow",
         "sequence")


@dataclass(frozen=True)
class RelationSpec:
    n: int
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class SequenceSpec:
    x: np.ndarray
    u: np.ndarray
    points: np.ndarray


def _field(payload: dict, name: str, where: str):
    if name not in payload:
        raise SchemaViolation(f"{where}: missing field {name!r}")
    return payload[name]


def _load_topology(payload: dict, where: str) -> FiniteTopology:
    n = _field(payload, "n", where)
    opens = _field(payload, "opens", where)
    if not isinstance(n, int) or n < 1:
        raise SchemaViolation(f"{where}.n: expected a positive integer")
    if not isinstance(opens, list):
        raise SchemaViolation(f"{where}.opens: expected a list of point lists")
    return validate_topology(n, opens)


def _load_map(payload: dict, where: str) -> PointMap:
    src = _load_topology(_field(payload, "source", where), where + ".source")
    tgt = _load_topology(_field(payload, "target", where), where + ".target")
    image = _field(payload, "image", where)
    if not isinstance(image, list) or len(image) != src.n:
        raise SchemaViolation(
            f"{where}.image: expected a list of {src.n} point indices")
    return PointMap(src, tgt, tuple(image))


def _load_filter(payload: dict, where: str,
                 proper: bool = True) -> IndicatorFilter:
    t = _load_topology(_field(payload, "topology", where), where + ".topology")
    values = _field(payload, "values", where)
    if not isinstance(values, list) or len(values) != len(t.opens):
        raise SchemaViolation(
            f"{where}.values: expected one 0/1 entry per open "
            f"({len(t.opens)} opens)")
    return check_filter_axioms(t, tuple(values), proper=proper)


def _load_refinement(payload: dict, where: str) -> Refinement:
    t = _load_topology(_field(payload, "topology", where), where + ".topology")
    assignment = _field(payload, "assignment", where)
    if not isinstance(assignment, list) or len(assignment) != t.n:
        raise SchemaViolation(
            f"{where}.assignment: expected one filter list per point")
    rows = []
    for i, row in enumerate(assignment):
        filters = []
        for j, values in enumerate(row):
            if not isinstance(values, list) or len(values) != len(t.opens):
                raise SchemaViolation(
                    f"{where}.assignment[{i}][{j}]: expected "
                    f"{len(t.opens)} 0/1 entries")
            filters.append(IndicatorFilter(t, tuple(values)))
        rows.append(tuple(filters))
    return Refinement(t, tuple(rows))


def _load_relation(payload: dict, where: str) -> RelationSpec:
    n = _field(payload, "n", where)
    pairs = _field(payload, "pairs", where)
    if not isinstance(n, int) or n < 1:
        raise SchemaViolation(f"{where}.n: expected a positive integer")
    out = []
    for i, pair in enumerate(pairs):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, int) and 0 <= v < n for v in pair)):
            raise SchemaViolation(
                f"{where}.pairs[{i}]: expected [i, j] with indices below {n}")
        out.append((pair[0], pair[1]))
    return RelationSpec(n, tuple(out))


def _load_flow(payload: dict, where: str) -> Flow:
    name = _field(payload, "name", where)
    if name == "translation":
        return translation_flow(_field(payload, "u", where))
    if name == "rotation":
        return rotation_flow(float(payload.get("omega", 1.0)))
    if name == "scaling":
        return scaling_flow(float(payload.get("rate", 1.0)))
    if name == "linear":
        return linear_flow(_field(payload, "generator", where))
    raise SchemaViolation(
        f"{where}.name: unknown flow {name!r} "
        "(translation, rotation, scaling, linear)")


def _load_sequence(payload: dict, where: str) -> SequenceSpec:
    x = np.asarray(_field(payload, "x", where), dtype=float)
    u = np.asarray(_field(payload, "u", where), dtype=float)
    points = np.asarray(_field(payload, "points", where), dtype=float)
    if points.ndim != 2 or points.shape[1] != len(x):
        raise SchemaViolation(
            f"{where}.points: expected an (N, {len(x)}) array")
    return SequenceSpec(x, u, points)


_LOADERS = {
    "topology": _load_topology,
    "map": _load_map,
    "filter": _load_filter,
    "refinement": _load_refinement,
    "relation": _load_relation,
    "flow": _load_flow,
    "sequence": _load_sequence,
}


def ingest(path: str, proper: bool = True):
    """Load and validate a spec file; returns the typed domain object."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror}") from e
    if not isinstance(payload, dict):
        raise SchemaViolation(f"{path}: top level must be an object")
    kind = payload.get("kind")
    if kind not in _LOADERS:
        raise SchemaViolation(
            f"{path}.kind: expected one of {KINDS}, got {kind!r}")
    if kind == "filter":
        return _load_filter(payload, path, proper=proper)
    return _LOADERS[kind](payload, path)
