"""Instance files: one JSON document per mapped disc, graph, patch or
glued disc, with a target declaration and a tolerances block.

Serialization is canonical (sorted keys, minimal separators, shortest
round-trip floats) so reports diff cleanly and byte-identical reruns are
meaningful.  Infinities are written as the string "inf"; JSON has no
literal for them.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .fields import HeightFieldPatch
from .graphs import GraphInTarget
from .majorize import PolyhedralDisc
from .mesh import MappedDisc
from .pseudometric import PseudometricMatrix
from .targets import EuclideanSpace

__all__ = [
    "FORMAT_VERSION",
    "DEFAULT_TOLERANCES",
    "mapped_disc_instance",
    "graph_instance",
    "patch_instance",
    "poly_disc_instance",
    "parse_instance",
    "validate_instance",
    "instance_to_json",
    "load_instance",
    "save_instance",
    "matrix_to_jsonable",
    "jsonable",
    "fixture_path",
]

FORMAT_VERSION = 1

DEFAULT_TOLERANCES = {
    "zero": 1e-9,
    "descent": 1e-8,
    "angle": 1e-6,
    "geodesic": 1e-9,
    "verify": 1e-9,
}

FIXTURE_ENV = "CATMIN_FIXTURES"


def fixture_path(name: str) -> Path:
    """Locate a named fixture, honoring the CATMIN_FIXTURES directory."""
    override = os.environ.get(FIXTURE_ENV)
    if override:
        candidate = Path(override) / name
        if candidate.exists():
            return candidate
    return Path(__file__).parent / "fixtures" / name


def jsonable(obj):
    """Recursively convert arrays/floats, encoding infinities as 'inf'."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            raise ValueError("NaN is not serializable")
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _parse_floats(obj):
    if isinstance(obj, list):
        return [_parse_floats(v) for v in obj]
    if obj == "inf":
        return math.inf
    if obj == "-inf":
        return -math.inf
    return obj


def matrix_to_jsonable(matrix: PseudometricMatrix) -> list:
    return jsonable(matrix.d)


def instance_to_json(doc: dict) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, separators=(",", ":")) + "\n"


def save_instance(doc: dict, path) -> None:
    Path(path).write_text(instance_to_json(doc), encoding="utf-8")


def load_instance(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _target_doc(target) -> dict:
    if isinstance(target, EuclideanSpace):
        return {"type": "euclidean", "dimension": target.dimension}
    raise TypeError("only Euclidean targets are declared in instance files")


def _target_from(doc: dict) -> EuclideanSpace:
    if doc.get("type") != "euclidean":
        raise ValueError(f"unsupported target type {doc.get('type')!r}")
    return EuclideanSpace(int(doc["dimension"]))


def _base(kind: str, target, tolerances, sample, metadata) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "tolerances": dict(DEFAULT_TOLERANCES, **(tolerances or {})),
    }
    if target is not None:
        doc["target"] = _target_doc(target)
    if sample is not None:
        doc["sample"] = [int(v) for v in sample]
    if metadata:
        doc["metadata"] = metadata
    return doc


def mapped_disc_instance(disc: MappedDisc, sample=None, tolerances=None, metadata=None) -> dict:
    doc = _base("mapped_disc", disc.target, tolerances, sample, metadata)
    doc["payload"] = {
        "vertices": jsonable(disc.vertices),
        "triangles": jsonable(disc.triangles),
        "boundary_loop": [int(v) for v in disc.boundary_loop],
        "images": jsonable(np.asarray(disc.images)),
    }
    return doc


def graph_instance(g: GraphInTarget, tolerances=None, metadata=None) -> dict:
    doc = _base("graph", g.target, tolerances, None, metadata)
    doc["payload"] = {
        "points": jsonable([np.asarray(p) for p in g.points]),
        "edges": [[int(u), int(v)] for u, v in g.edges],
        "pinned": sorted(int(v) for v in g.pinned),
        "rotation": [[int(w) for w in rot] for rot in g.rotation],
        "positions": jsonable(g.positions) if g.positions is not None else None,
    }
    return doc


def patch_instance(patch: HeightFieldPatch, tolerances=None, metadata=None) -> dict:
    doc = _base("patch", None, tolerances, None, metadata)
    doc["payload"] = {
        "x": jsonable(patch.x),
        "y": jsonable(patch.y),
        "values": jsonable(patch.values),
    }
    return doc


def poly_disc_instance(w: PolyhedralDisc, tolerances=None, metadata=None) -> dict:
    doc = _base("polyhedral_disc", None, tolerances, None, metadata)
    doc["payload"] = {
        "tri_coords": jsonable([c for c in w.tri_coords]),
        "tri_vertices": [[int(a) for a in tri] for tri in w.tri_vertices],
        "gluings": [[[int(f1), int(s1)], [int(f2), int(s2)]] for (f1, s1), (f2, s2) in w.gluings],
        "bridges": [[int(u), int(v), float(ln)] for u, v, ln in w.bridges],
        "boundary_walk": [int(v) for v in w.boundary_walk],
        "boundary_lengths": jsonable(w.boundary_lengths),
        "n_vertices": int(w.n_vertices),
    }
    return doc


def parse_instance(doc: dict):
    """Typed payload of an instance document.

    Returns (kind, object, doc); raises ValueError on malformed input.
    """
    problems = validate_instance(doc)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    kind = doc["kind"]
    payload = doc["payload"]
    if kind == "mapped_disc":
        target = _target_from(doc["target"])
        disc = MappedDisc(
            vertices=np.asarray(payload["vertices"], dtype=float),
            triangles=np.asarray(payload["triangles"], dtype=int),
            boundary_loop=[int(v) for v in payload["boundary_loop"]],
            images=np.asarray(payload["images"], dtype=float),
            target=target,
        )
        return kind, disc, doc
    if kind == "graph":
        target = _target_from(doc["target"])
        positions = payload.get("positions")
        g = GraphInTarget(
            points=[np.asarray(p, dtype=float) for p in payload["points"]],
            edges=[(int(u), int(v)) for u, v in payload["edges"]],
            pinned=set(int(v) for v in payload["pinned"]),
            rotation=[[int(w) for w in rot] for rot in payload["rotation"]],
            target=target,
            positions=np.asarray(positions, dtype=float) if positions is not None else None,
        )
        return kind, g, doc
    if kind == "patch":
        patch = HeightFieldPatch(
            x=np.asarray(_parse_floats(payload["x"]), dtype=float),
            y=np.asarray(_parse_floats(payload["y"]), dtype=float),
            values=np.asarray(_parse_floats(payload["values"]), dtype=float),
        )
        return kind, patch, doc
    if kind == "polyhedral_disc":
        w = PolyhedralDisc(
            tri_coords=[np.asarray(c, dtype=float) for c in payload["tri_coords"]],
            tri_vertices=[tuple(int(a) for a in tri) for tri in payload["tri_vertices"]],
            gluings=[
                ((int(p[0][0]), int(p[0][1])), (int(p[1][0]), int(p[1][1])))
                for p in payload["gluings"]
            ],
            bridges=[(int(u), int(v), float(ln)) for u, v, ln in payload["bridges"]],
            boundary_walk=[int(v) for v in payload["boundary_walk"]],
            boundary_lengths=[float(x) for x in payload["boundary_lengths"]],
            n_vertices=int(payload["n_vertices"]),
        )
        return kind, w, doc
    raise ValueError(f"unknown kind {kind!r}")


_KINDS = {"mapped_disc", "graph", "patch", "polyhedral_disc"}
_TARGET_KINDS = {"mapped_disc", "graph"}


def validate_instance(doc) -> list[str]:
    """Schema and invariant diagnostics in deterministic order."""
    problems: list[str] = []
    if not isinstance(doc, dict):
        return ["instance must be a JSON object"]
    if doc.get("format_version") != FORMAT_VERSION:
        problems.append(f"format_version must be {FORMAT_VERSION}")
    kind = doc.get("kind")
    if kind not in _KINDS:
        problems.append(f"kind must be one of {sorted(_KINDS)}")
        return problems
    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        problems.append("tolerances must be an object")
    else:
        for key in sorted(tols):
            val = tols[key]
            if not isinstance(val, (int, float)) or val < 0:
                problems.append(f"tolerance '{key}' must be a nonnegative number")
    if kind in _TARGET_KINDS:
        target = doc.get("target")
        if not isinstance(target, dict) or target.get("type") != "euclidean":
            problems.append("target must declare type 'euclidean'")
        elif not isinstance(target.get("dimension"), int) or target["dimension"] < 1:
            problems.append("target.dimension must be a positive integer")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        problems.append("payload missing")
        return problems
    if problems:
        return problems

    if kind == "mapped_disc":
        try:
            vertices = np.asarray(payload["vertices"], dtype=float)
            triangles = np.asarray(payload["triangles"], dtype=int)
            images = np.asarray(payload["images"], dtype=float)
            loop = [int(v) for v in payload["boundary_loop"]]
        except (KeyError, ValueError, TypeError) as exc:
            return [f"payload field error: {exc}"]
        n = len(vertices)
        if triangles.size and (triangles.min() < 0 or triangles.max() >= n):
            problems.append("payload.triangles: vertex index out of range")
        if any(v < 0 or v >= n for v in loop):
            problems.append("payload.boundary_loop: vertex index out of range")
        if len(images) != n:
            problems.append("payload.images: one image per vertex required")
        if not problems:
            disc = MappedDisc(vertices, triangles, loop, images,
                              _target_from(doc["target"]))
            problems.extend("payload: " + p for p in disc.validate())
        sample = doc.get("sample")
        if sample is not None:
            for v in sample:
                if not isinstance(v, int) or v < 0 or v >= n:
                    problems.append(f"sample: vertex index {v} out of range")
                    break
    elif kind == "graph":
        try:
            points = payload["points"]
            edges = payload["edges"]
            rotation = payload["rotation"]
            pinned = payload["pinned"]
        except KeyError as exc:
            return [f"payload field missing: {exc}"]
        n = len(points)
        for u, v in edges:
            if not (0 <= int(u) < n and 0 <= int(v) < n):
                problems.append(f"payload.edges: index ({u},{v}) out of range")
                break
        for v in pinned:
            if not (0 <= int(v) < n):
                problems.append(f"payload.pinned: index {v} out of range")
                break
        if len(rotation) != n:
            problems.append("payload.rotation must list every vertex")
        if not problems:
            g = GraphInTarget(
                points=[np.asarray(p, dtype=float) for p in points],
                edges=[(int(u), int(v)) for u, v in edges],
                pinned=set(int(v) for v in pinned),
                rotation=[[int(w) for w in rot] for rot in rotation],
                target=_target_from(doc["target"]),
                positions=np.asarray(payload["positions"], dtype=float)
                if payload.get("positions") is not None
                else None,
            )
            problems.extend("payload: " + p for p in g.validate())
    elif kind == "patch":
        try:
            HeightFieldPatch(
                x=np.asarray(_parse_floats(payload["x"]), dtype=float),
                y=np.asarray(_parse_floats(payload["y"]), dtype=float),
                values=np.asarray(_parse_floats(payload["values"]), dtype=float),
            )
        except (KeyError, ValueError, TypeError) as exc:
            problems.append(f"payload: {exc}")
    elif kind == "polyhedral_disc":
        try:
            w = PolyhedralDisc(
                tri_coords=[np.asarray(c, dtype=float) for c in payload["tri_coords"]],
                tri_vertices=[tuple(int(a) for a in tri) for tri in payload["tri_vertices"]],
                gluings=[
                    ((int(p[0][0]), int(p[0][1])), (int(p[1][0]), int(p[1][1])))
                    for p in payload["gluings"]
                ],
                bridges=[(int(u), int(v), float(ln)) for u, v, ln in payload["bridges"]],
                boundary_walk=[int(v) for v in payload["boundary_walk"]],
                boundary_lengths=[float(x) for x in payload["boundary_lengths"]],
                n_vertices=int(payload["n_vertices"]),
            )
            problems.extend("payload: " + p for p in w.validate())
        except (KeyError, ValueError, TypeError) as exc:
            problems.append(f"payload: {exc}")
    return problems
