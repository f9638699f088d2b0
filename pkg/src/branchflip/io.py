"""JSON documents and DOT export.

A document holds a triangulation (triangle count, gluing list, corner
labels), optionally a branching and a move log, plus free-form metadata::

    {"format_version": 1,
     "triangulation": {"triangles": 2, "gluings": [[0, 0, 1, 0, 0], ...],
                       "labels": [[0, 1, 2], [0, 1, 2]]},
     "branching": {"orient": [0, 1, 0]},
     "log": {"initial_key": "...", "moves": [{"type": "BFlip", ...}]},
     "metadata": {}}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema

from .branching import Branching
from .complex_core import Triangulation, build
from .errors import BranchflipError, SchemaError
from .moves import MoveLog, state_key

FORMAT_VERSION = 1

_INT = {"type": "integer", "minimum": 0}
SCHEMA = {
    "type": "object",
    "required": ["format_version", "triangulation"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "triangulation": {
            "type": "object",
            "required": ["triangles", "gluings", "labels"],
            "additionalProperties": False,
            "properties": {
                "triangles": {"type": "integer", "minimum": 1},
                "gluings": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "minItems": 5,
                        "maxItems": 5,
                        "prefixItems": [_INT, {"enum": [0, 1, 2]}, _INT, {"enum": [0, 1, 2]}, {"enum": [0, 1]}],
                    },
                },
                "labels": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3, "items": _INT}},
            },
        },
        "branching": {
            "type": ["object", "null"],
            "required": ["orient"],
            "properties": {"orient": {"type": "array", "items": {"enum": [0, 1]}}},
        },
        "log": {
            "type": ["object", "null"],
            "required": ["initial_key", "moves"],
            "properties": {
                "initial_key": {"type": "string"},
                "moves": {"type": "array", "items": {"type": "object", "required": ["type"]}},
            },
        },
        "metadata": {"type": "object"},
    },
}


_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass
class Document:
    triangulation: Triangulation
    branching: Branching | None = None
    log: MoveLog | None = None
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        T = self.triangulation
        return {
            "format_version": FORMAT_VERSION,
            "triangulation": {
                "triangles": T.F,
                "gluings": [[a[0], a[1], b[0], b[1], bit] for a, b, bit in T.gluing_list()],
                "labels": [list(r) for r in T.labels],
            },
            "branching": {"orient": list(self.branching.orient)} if self.branching is not None else None,
            "log": self.log.to_json() if self.log is not None else None,
            "metadata": dict(self.metadata),
        }


def _path(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "/"


def from_json(data) -> Document:
    try:
        _VALIDATOR.validate(data)
    except jsonschema.ValidationError as err:
        raise SchemaError(err.message, _path(err)) from err
    t = data["triangulation"]
    F = t["triangles"]
    if len(t["labels"]) != F:
        raise SchemaError(f"expected {F} label rows, got {len(t['labels'])}", "triangulation/labels")
    gl = [((a, i), (b, j), bit) for a, i, b, j, bit in t["gluings"]]
    for k, ((a, _), (b, _), _) in enumerate(gl):
        if a >= F or b >= F:
            raise SchemaError(f"triangle id out of range (F={F})", f"triangulation/gluings/{k}")
    try:
        T = build(F, gl, t["labels"])
    except BranchflipError as err:
        raise SchemaError(str(err), "triangulation/gluings") from err
    B = None
    if data.get("branching") is not None:
        orient = data["branching"]["orient"]
        if len(orient) != T.E:
            raise SchemaError(f"expected {T.E} edge bits, got {len(orient)}", "branching/orient")
        try:
            B = Branching(T, orient)
        except BranchflipError as err:
            raise SchemaError(str(err), "branching/orient") from err
    log = None
    if data.get("log") is not None:
        try:
            log = MoveLog.from_json(data["log"])
        except (KeyError, TypeError) as err:
            raise SchemaError(f"bad move: {err}", "log/moves") from err
    return Document(T, B, log, dict(data.get("metadata") or {}))


def emit(doc: Document) -> str:
    return json.dumps(doc.to_json(), indent=1, sort_keys=True) + "\n"


def parse(text: str) -> Document:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"not JSON: {err.msg}", "/") from err
    return from_json(data)


def load(path) -> Document:
    with open(path) as fh:
        return parse(fh.read())


def save(doc: Document, path):
    with open(path, "w") as fh:
        fh.write(emit(doc))


# -- DOT ------------------------------------------------------------------------

def _bits(o):
    return "".join(map(str, o))


def export_dot(graph, T: Triangulation | None = None, name="branchings") -> str:
    """DOT text for an inversion graph (orientation-tuple nodes on ``T``) or a
    census (canonical-key nodes).  Nodes are ordered by canonical key."""
    if hasattr(graph, "edges") and hasattr(graph, "seed_keys"):
        nodes = sorted({k for e in graph.edges for k in e} | set(graph.seed_keys))
        ids = {k: f"n{i}" for i, k in enumerate(nodes)}
        lines = [f"digraph {name} {{"]
        for k in nodes:
            lines.append(f'  {ids[k]} [label="{k[:12]}"];')
        for a, b in graph.edges:
            lines.append(f"  {ids[a]} -> {ids[b]} [dir=none];")
        lines.append("}")
        return "\n".join(lines) + "\n"
    if T is not None:
        keyed = sorted(graph.nodes, key=lambda o: (state_key(Branching(T, o, check=False)), o))
    else:
        keyed = sorted(graph.nodes)
    ids = {o: i for i, o in enumerate(keyed)}
    lines = [f"digraph {name} {{"]
    for o in keyed:
        lines.append(f'  n{ids[o]} [label="{_bits(o)}"];')
    for a, b in sorted(tuple(sorted((ids[a], ids[b]))) for a, b in graph.edges):
        lines.append(f"  n{a} -> n{b} [dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"
