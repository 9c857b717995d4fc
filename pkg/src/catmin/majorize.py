"""Comparison triangles, face majorants and glued polyhedral disc retracts.

Every bounded face of an embedded mapped graph is replaced by a fan of
planar triangles whose side lengths equal the corresponding target
distances.  Gluing the fans along shared graph edges produces an abstract
polyhedral disc W carrying an intrinsic metric; nonpositive curvature is
certified by the angle sums around interior vertices (a full turn or
more), and sampled thin-triangle checks probe the comparison inequality
directly.

Edges of the graph that bound no face (whiskers, tree parts) survive in W
as one-dimensional *bridge* segments; a graph with no faces at all glues
to a metric tree, which is a legitimate degenerate disc retract.

Intrinsic distances on W are overestimated by Dijkstra runs on an
edge-subdivided surface graph whose faces carry complete chord
connections; every query can report a conservative error bound derived
from the subdivision gap and the edge crossings of the returned path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .graphs import GraphInTarget
from .targets import TargetSpace, angle_from_sides

__all__ = [
    "ComparisonTriangle",
    "comparison_triangle",
    "FaceMajorant",
    "face_majorant",
    "PolyhedralDisc",
    "GlueError",
    "GlueReport",
    "glue_disc",
    "cat0_certificate",
    "Cat0Report",
    "thin_triangle_test",
    "boundary_and_area",
    "cut_vertices",
    "eps_net_report",
    "SurfaceGraph",
    "PolyhedralTarget",
    "cone_disc",
    "strip_disc",
]

GLUE_TOL = 1e-9
DEGENERATE_TOL = 1e-12
#: thin-triangle allowance in units of the subdivision gap; calibrated
#: against exact unfolding oracles in the test suite
THIN_ALLOWANCE_GAPS = 3.0


class GlueError(ValueError):
    """Raised when faces cannot be filled or glued consistently."""


# --------------------------------------------------------------------------
# comparison triangles


@dataclass
class ComparisonTriangle:
    """Planar triangle with prescribed side lengths.

    Corners are X, Y, Z with ``|YZ| = a``, ``|XZ| = b``, ``|XY| = c``;
    X sits at the origin and Y on the positive x-axis.  Collinear data is
    allowed and flagged.
    """

    sides: tuple[float, float, float]
    coords: np.ndarray
    degenerate: bool

    def corner_angles(self) -> tuple[float, float, float]:
        a, b, c = self.sides
        out = []
        for pair, opp in (((b, c), a), ((a, c), b), ((a, b), c)):
            if pair[0] > 0.0 and pair[1] > 0.0:
                out.append(angle_from_sides(pair[0], pair[1], opp))
            else:
                out.append(0.0)  # collapsed corner carries no angle
        return tuple(out)

    @property
    def area(self) -> float:
        return _triangle_area(self.coords)


def _triangle_area(coords: np.ndarray) -> float:
    (x1, y1), (x2, y2), (x3, y3) = coords
    return 0.5 * abs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1))


def comparison_triangle(a: float, b: float, c: float, slack: float = 1e-12) -> ComparisonTriangle:
    """Planar triangle with sides (a, b, c); degenerate inputs are flagged.

    Raises :class:`GlueError` when the triangle inequality fails beyond
    ``slack`` relative to the scale of the sides.
    """
    sides = (float(a), float(b), float(c))
    if min(sides) < 0.0:
        raise GlueError(f"negative side length in {sides}")
    scale = max(sides)
    eps = slack * max(scale, 1.0)
    for i in range(3):
        if sides[i] > sides[(i + 1) % 3] + sides[(i + 2) % 3] + eps:
            raise GlueError(f"triangle inequality fails for sides {sides}")
    if scale == 0.0:
        return ComparisonTriangle(sides, np.zeros((3, 2)), True)
    if sides[2] == 0.0:
        coords = np.array([(0.0, 0.0), (0.0, 0.0), (sides[1], 0.0)])
        return ComparisonTriangle(sides, coords, True)
    c_ = sides[2]
    x = (sides[1] ** 2 + c_ ** 2 - sides[0] ** 2) / (2.0 * c_)
    y = math.sqrt(max(sides[1] ** 2 - x ** 2, 0.0))
    coords = np.array([(0.0, 0.0), (c_, 0.0), (x, y)])
    degenerate = y <= DEGENERATE_TOL * max(scale, 1.0)
    return ComparisonTriangle(sides, coords, degenerate)


@dataclass
class FaceMajorant:
    """Fan of comparison triangles over one geodesic polygon."""

    triangles: list[ComparisonTriangle]
    corner_planar: list[float]        # accumulated planar angle per corner
    corner_target: list[float]        # comparison angle in the target
    witness_ok: bool                  # planar >= target at every corner


def face_majorant(loop_points: list, target: TargetSpace, angle_tol: float = 1e-9) -> FaceMajorant:
    """Fan-triangulate a closed geodesic polygon from its first vertex.

    Each fan triangle is the comparison triangle of its target side
    lengths; the accumulated planar angle at every polygon corner is
    checked against the target comparison angle there (fanning can only
    increase corner angles, so the witness must hold for genuine geodesic
    polygons in a nonpositively curved target).
    """
    k = len(loop_points)
    if k < 3:
        raise GlueError("a face needs at least 3 corners")
    d = target.distance
    side = [d(loop_points[i], loop_points[(i + 1) % k]) for i in range(k)]
    diag = [d(loop_points[0], loop_points[i]) for i in range(k)]
    triangles = [
        comparison_triangle(side[i], diag[i + 1], diag[i]) for i in range(1, k - 1)
    ]
    corner_planar = [0.0] * k
    for t_idx, tri in enumerate(triangles):
        ang = tri.corner_angles()  # corners (apex, w_{t_idx+1}, w_{t_idx+2})
        corner_planar[0] += ang[0]
        corner_planar[t_idx + 1] += ang[1]
        corner_planar[t_idx + 2] += ang[2]
    corner_target = []
    for j in range(k):
        try:
            corner_target.append(
                target.comparison_angle(
                    loop_points[j], loop_points[(j - 1) % k], loop_points[(j + 1) % k]
                )
            )
        except ValueError:
            corner_target.append(0.0)  # collapsed corner: nothing to majorize
    witness_ok = all(p >= t - angle_tol for p, t in zip(corner_planar, corner_target))
    return FaceMajorant(triangles, corner_planar, corner_target, witness_ok)


# --------------------------------------------------------------------------
# polyhedral discs


@dataclass
class PolyhedralDisc:
    """Disc retract glued from planar triangles plus 1-dimensional bridges.

    ``gluings`` identifies triangle sides isometrically; side ``s`` of a
    triangle joins its corners ``s`` and ``(s+1) % 3``.  Sides not listed
    in any gluing are boundary sides.  ``boundary_walk`` is the closed
    vertex walk of the boundary curve with matching segment lengths.
    """

    tri_coords: list[np.ndarray]
    tri_vertices: list[tuple[int, int, int]]
    gluings: list[tuple[tuple[int, int], tuple[int, int]]]
    bridges: list[tuple[int, int, float]]
    boundary_walk: list[int]
    boundary_lengths: list[float]
    n_vertices: int

    @property
    def n_triangles(self) -> int:
        return len(self.tri_coords)

    def side_corners(self, f: int, s: int) -> tuple[int, int]:
        tri = self.tri_vertices[f]
        return tri[s], tri[(s + 1) % 3]

    def side_length(self, f: int, s: int) -> float:
        p = self.tri_coords[f]
        return float(np.linalg.norm(p[s] - p[(s + 1) % 3]))

    def glued_sides(self) -> set[tuple[int, int]]:
        out = set()
        for pair in self.gluings:
            out.update(pair)
        return out

    def boundary_sides(self) -> list[tuple[int, int]]:
        glued = self.glued_sides()
        return [
            (f, s) for f in range(self.n_triangles) for s in range(3) if (f, s) not in glued
        ]

    def n_edges(self) -> int:
        return len(self.gluings) + len(self.boundary_sides()) + len(self.bridges)

    def used_vertices(self) -> set[int]:
        verts: set[int] = set()
        for tri in self.tri_vertices:
            verts.update(tri)
        for u, v, _ in self.bridges:
            verts.update((u, v))
        return verts

    def skeleton_edges(self) -> list[tuple[int, int]]:
        out = set()
        for (f1, s1), _ in self.gluings:
            u, v = self.side_corners(f1, s1)
            out.add((min(u, v), max(u, v)))
        for f, s in self.boundary_sides():
            u, v = self.side_corners(f, s)
            out.add((min(u, v), max(u, v)))
        for u, v, _ in self.bridges:
            out.add((min(u, v), max(u, v)))
        return sorted(out)

    def corner_angle(self, f: int, corner: int) -> float:
        p = self.tri_coords[f]
        u = p[(corner + 1) % 3] - p[corner]
        v = p[(corner + 2) % 3] - p[corner]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu <= DEGENERATE_TOL or nv <= DEGENERATE_TOL:
            return 0.0
        cos = float(np.dot(u, v) / (nu * nv))
        return float(np.arccos(np.clip(cos, -1.0, 1.0)))

    def vertex_angle_sums(self) -> dict[int, float]:
        sums: dict[int, float] = {}
        for f in range(self.n_triangles):
            for corner in range(3):
                v = self.tri_vertices[f][corner]
                sums[v] = sums.get(v, 0.0) + self.corner_angle(f, corner)
        return sums

    def interior_vertices(self) -> list[int]:
        """Vertices fully surrounded by glued triangles."""
        exposed = set(self.boundary_walk)
        for f, s in self.boundary_sides():
            exposed.update(self.side_corners(f, s))
        for u, v, _ in self.bridges:
            exposed.update((u, v))
        incident: set[int] = set()
        for tri in self.tri_vertices:
            incident.update(tri)
        return sorted(v for v in incident if v not in exposed)

    def validate(self) -> list[str]:
        problems: list[str] = []
        seen_sides = set()
        for (f1, s1), (f2, s2) in self.gluings:
            for f, s in ((f1, s1), (f2, s2)):
                if not (0 <= f < self.n_triangles and 0 <= s < 3):
                    return [f"gluing references missing side ({f},{s})"]
                if (f, s) in seen_sides:
                    problems.append(f"side ({f},{s}) glued twice")
                seen_sides.add((f, s))
            l1, l2 = self.side_length(f1, s1), self.side_length(f2, s2)
            if abs(l1 - l2) > GLUE_TOL:
                problems.append(
                    f"glued sides ({f1},{s1})~({f2},{s2}) differ in length by {abs(l1 - l2):.3g}"
                )
            if set(self.side_corners(f1, s1)) != set(self.side_corners(f2, s2)):
                problems.append(
                    f"glued sides ({f1},{s1})~({f2},{s2}) join different vertex pairs"
                )
        for u, v, ln in self.bridges:
            if ln < 0:
                problems.append(f"bridge ({u},{v}) has negative length")
        euler = len(self.used_vertices()) - self.n_edges() + self.n_triangles
        if euler != 1:
            problems.append(f"Euler characteristic {euler}, expected 1 for a disc retract")
        return problems

    def require_valid(self) -> "PolyhedralDisc":
        problems = self.validate()
        if problems:
            raise GlueError("invalid PolyhedralDisc: " + "; ".join(problems))
        return self

    def area(self) -> float:
        return float(sum(_triangle_area(c) for c in self.tri_coords))

    def boundary_length(self) -> float:
        return float(sum(self.boundary_lengths))

    def surface_graph(self, subdiv: int = 12) -> "SurfaceGraph":
        return SurfaceGraph(self, subdiv)


# --------------------------------------------------------------------------
# gluing an embedded graph into a polyhedral disc


def _excise_spurs(walk: list[int]) -> tuple[list[int], list[tuple[int, int]]]:
    """Strip out-and-back excursions from a closed walk.

    Returns the remaining simple cycle (possibly empty) and the excised
    edges; each excised edge bounds no polygon and becomes a bridge.
    """
    walk = list(walk)
    spurs: list[tuple[int, int]] = []
    while len(walk) >= 3:
        k = len(walk)
        spur_at = None
        for i in range(k):
            if walk[(i - 1) % k] == walk[(i + 1) % k]:
                spur_at = i
                break
        if spur_at is None:
            break
        # rotate so the spur tip sits at position 1, then drop positions 1, 2
        rot = walk[(spur_at - 1) % k:] + walk[: (spur_at - 1) % k]
        u, tip = rot[0], rot[1]
        spurs.append((min(u, tip), max(u, tip)))
        walk = [rot[0]] + rot[3:]
    if len(walk) == 2:
        u, v = walk
        if u != v:
            spurs.append((min(u, v), max(u, v)))
        walk = []
    elif len(walk) < 2:
        walk = []
    return walk, spurs


@dataclass
class GlueReport:
    majorants: list[FaceMajorant]
    witness_ok: bool
    angle_sums: dict[int, float]
    interior_vertices: list[int]
    max_length_drift: float


def glue_disc(g: GraphInTarget) -> tuple[PolyhedralDisc, GlueReport]:
    """Fill every bounded face of an embedded graph with a comparison fan.

    Faces come from the rotation system; fan apexes are the first vertices
    of the face walks.  Edges bounding no polygon become bridges.  The
    boundary curve of the result is the outer face walk.
    """
    g.require_valid()
    problems = g.spherical_diagnostics()
    if problems:
        raise GlueError("graph is not embeddable as given: " + "; ".join(problems))
    walks = g.faces()
    outer_idx = g.outer_face_index(walks)

    tri_coords: list[np.ndarray] = []
    tri_vertices: list[tuple[int, int, int]] = []
    gluings: list[tuple[tuple[int, int], tuple[int, int]]] = []
    majorants: list[FaceMajorant] = []
    owners_by_edge: dict[tuple[int, int], list[tuple[int, int]]] = {}
    polygon_edges: set[tuple[int, int]] = set()
    bridge_set: set[tuple[int, int]] = set()
    max_drift = 0.0

    for w_idx, walk in enumerate(walks):
        if w_idx == outer_idx:
            continue
        cycle, spurs = _excise_spurs(walk)
        bridge_set.update(spurs)
        if not cycle:
            continue
        k = len(cycle)
        maj = face_majorant([g.points[v] for v in cycle], g.target)
        majorants.append(maj)
        base = len(tri_coords)
        for i, tri in enumerate(maj.triangles):
            tri_coords.append(tri.coords.copy())
            tri_vertices.append((cycle[0], cycle[i + 1], cycle[i + 2]))
        for i in range(len(maj.triangles) - 1):
            gluings.append(((base + i, 2), (base + i + 1, 0)))  # shared fan diagonal
        for j in range(k):
            u, v = cycle[j], cycle[(j + 1) % k]
            if j == 0:
                owner = (base, 0)
            elif j == k - 1:
                owner = (base + len(maj.triangles) - 1, 2)
            else:
                owner = (base + j - 1, 1)
            owners_by_edge.setdefault((min(u, v), max(u, v)), []).append(owner)
            polygon_edges.add((min(u, v), max(u, v)))
            side_len = float(
                np.linalg.norm(
                    tri_coords[owner[0]][owner[1]]
                    - tri_coords[owner[0]][(owner[1] + 1) % 3]
                )
            )
            max_drift = max(max_drift, abs(side_len - g.edge_length(u, v)))

    for edge, owners in owners_by_edge.items():
        if len(owners) == 2:
            gluings.append((owners[0], owners[1]))
        elif len(owners) > 2:
            raise GlueError(f"edge {edge} bounds more than two polygons")

    for u, v in g.edges:
        key = (min(u, v), max(u, v))
        if key not in polygon_edges:
            bridge_set.add(key)
    bridges = [(u, v, g.edge_length(u, v)) for u, v in sorted(bridge_set)]

    outer_walk = walks[outer_idx]
    boundary_lengths = [
        g.edge_length(outer_walk[i], outer_walk[(i + 1) % len(outer_walk)])
        for i in range(len(outer_walk))
    ]
    disc = PolyhedralDisc(
        tri_coords=tri_coords,
        tri_vertices=tri_vertices,
        gluings=gluings,
        bridges=bridges,
        boundary_walk=list(outer_walk),
        boundary_lengths=boundary_lengths,
        n_vertices=g.n_vertices,
    )
    if max_drift > GLUE_TOL:
        raise GlueError(f"gluing length mismatch {max_drift:.3g} beyond {GLUE_TOL}")
    disc.require_valid()
    report = GlueReport(
        majorants=majorants,
        witness_ok=all(m.witness_ok for m in majorants),
        angle_sums=disc.vertex_angle_sums(),
        interior_vertices=disc.interior_vertices(),
        max_length_drift=max_drift,
    )
    return disc, report


# --------------------------------------------------------------------------
# certificates and measurements


@dataclass
class Cat0Report:
    ok: bool
    angle_sums: dict[int, float]
    interior_vertices: list[int]
    worst_deficit: float
    euler: int
    problems: list[str]
    tol_angle: float

    def summary(self) -> dict:
        return {
            "pass": bool(self.ok),
            "interior_vertices": list(self.interior_vertices),
            "angle_sums": {str(k): float(v) for k, v in sorted(self.angle_sums.items())},
            "worst_deficit": float(self.worst_deficit),
            "euler_characteristic": int(self.euler),
            "problems": list(self.problems),
        }


def cat0_certificate(w: PolyhedralDisc, tol_angle: float = 1e-6) -> Cat0Report:
    """Nonpositive-curvature certificate: at least a full turn around every
    interior vertex, plus simple connectivity of the complex."""
    problems = w.validate()
    sums = w.vertex_angle_sums()
    interior = w.interior_vertices()
    worst = max((2.0 * math.pi - sums.get(v, 0.0) for v in interior), default=0.0)
    euler = len(w.used_vertices()) - w.n_edges() + w.n_triangles
    ok = (not problems) and worst <= tol_angle and euler == 1
    return Cat0Report(ok, sums, interior, worst, euler, problems, tol_angle)


def boundary_and_area(w: PolyhedralDisc, slack: float = 1e-9) -> dict:
    """Boundary length, area, and the planar isoperimetric flag."""
    L = w.boundary_length()
    A = w.area()
    return {
        "boundary_length": L,
        "area": A,
        "isoperimetric_ok": bool(A <= L * L / (4.0 * math.pi) + slack),
    }


def cut_vertices(w: PolyhedralDisc) -> dict:
    """Articulation vertices of the 1-skeleton and its 2-connected blocks."""
    gr = nx.Graph()
    gr.add_nodes_from(sorted(w.used_vertices()))
    gr.add_edges_from(w.skeleton_edges())
    return {
        "cut_vertices": sorted(nx.articulation_points(gr)),
        "blocks": sorted(sorted(b) for b in nx.biconnected_components(gr)),
    }


# --------------------------------------------------------------------------
# intrinsic distances via an edge-subdivided surface graph


@dataclass
class _Node:
    kind: str       # "vertex" | "edge" | "bridge"
    ref: tuple


class SurfaceGraph:
    """Subdivided surface graph with complete chord connections per face.

    Dijkstra distances overestimate the intrinsic metric; the conservative
    per-query bound is ``(crossings + 2) * max_gap``, while in practice the
    overestimate behaves like the quadratic snapping error of straight
    crossings (the thin-triangle allowance relies on the calibrated value
    ``THIN_ALLOWANCE_GAPS * max_gap``).
    """

    def __init__(self, disc: PolyhedralDisc, subdiv: int = 12):
        if subdiv < 1:
            raise ValueError("subdiv must be >= 1")
        self.disc = disc
        self.subdiv = int(subdiv)
        self.nodes: list[_Node] = []
        self.node_chart: dict[tuple[int, int], np.ndarray] = {}
        self._vertex_node: dict[int, int] = {}
        self._side_chain: dict[tuple[int, int], list[int]] = {}
        self._bridge_chain: list[list[int]] = []
        self._face_ring: dict[int, tuple[list[int], np.ndarray]] = {}
        self._dist = None
        self._pred = None
        self._build()

    def _new_node(self, kind: str, ref: tuple) -> int:
        self.nodes.append(_Node(kind, ref))
        return len(self.nodes) - 1

    def _build(self):
        disc = self.disc
        r = self.subdiv
        glue_partner: dict[tuple[int, int], tuple[int, int]] = {}
        for (f1, s1), (f2, s2) in disc.gluings:
            glue_partner[(f1, s1)] = (f2, s2)
            glue_partner[(f2, s2)] = (f1, s1)

        def vertex_node(v: int) -> int:
            if v not in self._vertex_node:
                self._vertex_node[v] = self._new_node("vertex", (v,))
            return self._vertex_node[v]

        max_gap = 0.0

        def chain_of_side(f: int, s: int) -> list[int]:
            """Node chain along side (f, s), ordered corner s -> corner s+1."""
            nonlocal max_gap
            if (f, s) in self._side_chain:
                return self._side_chain[(f, s)]
            u, v = disc.side_corners(f, s)
            interior = [self._new_node("edge", (f, s, k)) for k in range(1, r)]
            chain = [vertex_node(u)] + interior + [vertex_node(v)]
            self._side_chain[(f, s)] = chain
            partner = glue_partner.get((f, s))
            if partner is not None:
                pu, _ = disc.side_corners(*partner)
                self._side_chain[partner] = chain if pu == u else chain[::-1]
            max_gap = max(max_gap, disc.side_length(f, s) / r)
            return chain

        weight: dict[tuple[int, int], float] = {}

        def connect(a: int, b: int, w: float):
            if a == b:
                return
            key = (min(a, b), max(a, b))
            if w < weight.get(key, np.inf):
                weight[key] = w

        for f in range(disc.n_triangles):
            coords = disc.tri_coords[f]
            ring: list[int] = []
            ring_xy: list[np.ndarray] = []
            for s in range(3):
                chain = chain_of_side(f, s)
                a_xy, b_xy = coords[s], coords[(s + 1) % 3]
                for k, node in enumerate(chain[:-1]):
                    t = k / r
                    xy = (1 - t) * a_xy + t * b_xy
                    ring.append(node)
                    ring_xy.append(xy)
                    self.node_chart.setdefault((node, f), xy)
            self._face_ring[f] = (list(ring), np.asarray(ring_xy))
            for i in range(len(ring)):
                for j in range(i + 1, len(ring)):
                    connect(ring[i], ring[j], float(np.linalg.norm(ring_xy[i] - ring_xy[j])))

        for b_idx, (u, v, length) in enumerate(disc.bridges):
            chain = [vertex_node(u)]
            for k in range(1, r):
                chain.append(self._new_node("bridge", (b_idx, k)))
            chain.append(vertex_node(v))
            for a, b in zip(chain, chain[1:]):
                connect(a, b, length / r)
            self._bridge_chain.append(chain)
            max_gap = max(max_gap, length / r)

        n = len(self.nodes)
        if weight:
            pairs = np.asarray(list(weight.keys()), dtype=int)
            w = np.asarray(list(weight.values()), dtype=float)
            self.matrix = csr_matrix(
                (
                    np.concatenate([w, w]),
                    (
                        np.concatenate([pairs[:, 0], pairs[:, 1]]),
                        np.concatenate([pairs[:, 1], pairs[:, 0]]),
                    ),
                ),
                shape=(n, n),
            )
        else:
            self.matrix = csr_matrix((n, n))
        self.max_gap = max_gap

    # ---------------- queries

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def vertex_node(self, v: int) -> int:
        return self._vertex_node[v]

    def side_chain(self, f: int, s: int) -> list[int]:
        return self._side_chain[(f, s)]

    def bridge_chain(self, b_idx: int) -> list[int]:
        return self._bridge_chain[b_idx]

    def all_pairs(self):
        if self._dist is None:
            self._dist, self._pred = _dijkstra(
                self.matrix, directed=False, return_predecessors=True
            )
        return self._dist, self._pred

    def distance(self, a: int, b: int) -> float:
        dist, _ = self.all_pairs()
        return float(dist[a, b])

    def path_nodes(self, a: int, b: int) -> list[int]:
        _, pred = self.all_pairs()
        if a == b:
            return [a]
        path = [b]
        cur = b
        while cur != a:
            cur = int(pred[a, cur])
            if cur < 0:
                return []
            path.append(cur)
        return path[::-1]

    def distance_with_bound(self, a: int, b: int) -> tuple[float, float]:
        """Distance overestimate with a conservative error bound:
        value - bound <= true distance <= value."""
        value = self.distance(a, b)
        crossings = max(len(self.path_nodes(a, b)) - 2, 0)
        return value, (crossings + 2) * self.max_gap

    # ---------------- points interior to faces
    #
    # A point strictly inside a face is addressed as ("face", f, (x, y)) in
    # the chart of f.  Its graph distances are exact: every route leaves
    # the face through a ring node.

    def face_point(self, f: int, bary):
        xy = np.asarray(bary, float) @ self.disc.tri_coords[f]
        return ("face", f, (float(xy[0]), float(xy[1])))

    def point_to_node_distances(self, locator) -> np.ndarray:
        dist, _ = self.all_pairs()
        if isinstance(locator, (int, np.integer)):
            return dist[int(locator)]
        _, f, xy = locator
        ring, ring_xy = self._face_ring[f]
        local = np.linalg.norm(ring_xy - np.asarray(xy), axis=1)
        return (dist[ring] + local[:, None]).min(axis=0)

    def point_distance(self, p, q) -> float:
        if isinstance(p, (int, np.integer)) and isinstance(q, (int, np.integer)):
            return self.distance(int(p), int(q))
        if isinstance(p, (int, np.integer)):
            p, q = q, p
        _, f, xy = p
        through = self.point_to_node_distances(q)
        ring, ring_xy = self._face_ring[f]
        local = np.linalg.norm(ring_xy - np.asarray(xy), axis=1)
        best = float((local + through[ring]).min())
        if not isinstance(q, (int, np.integer)) and q[1] == f:
            best = min(best, float(np.linalg.norm(np.asarray(xy) - np.asarray(q[2]))))
        return best

    def _segment_face(self, u: int, v: int, length: float) -> int | None:
        """A face whose chart realizes the path segment (u, v)."""
        for (node, f), pos_u in self.node_chart.items():
            if node != u:
                continue
            pos_v = self.node_chart.get((v, f))
            if pos_v is not None and abs(float(np.linalg.norm(pos_u - pos_v)) - length) <= 1e-9:
                return f
        return None

    def point_on_geodesic(self, a: int, b: int, t: float):
        """Point at parameter t of the graph geodesic between two nodes.

        Returns a node id when the position lands on one (or on a bridge,
        where nodes are gap-dense), and a face locator otherwise.
        """
        path = self.path_nodes(a, b)
        if len(path) <= 1:
            return a
        dist, _ = self.all_pairs()
        want = float(t) * dist[a, b]
        acc = 0.0
        for i in range(len(path) - 1):
            u, v = path[i], path[i + 1]
            step = dist[u, v]
            if acc + step >= want - 1e-12:
                if step <= 0.0:
                    return u
                s = (want - acc) / step
                if s <= 1e-9:
                    return u
                if s >= 1.0 - 1e-9:
                    return v
                f = self._segment_face(u, v, float(step))
                if f is None:
                    return u if s <= 0.5 else v  # bridge segment: snap to a node
                pu = self.node_chart[(u, f)]
                pv = self.node_chart[(v, f)]
                xy = (1.0 - s) * pu + s * pv
                return ("face", f, (float(xy[0]), float(xy[1])))
            acc += step
        return path[-1]

    def boundary_node_arcs(self) -> tuple[list[int], list[float]]:
        """Nodes along the boundary walk with cumulative arclengths."""
        disc = self.disc
        pool: dict[tuple[int, int], list[tuple[str, tuple]]] = {}
        for f, s in disc.boundary_sides():
            u, v = disc.side_corners(f, s)
            pool.setdefault((min(u, v), max(u, v)), []).append(("side", (f, s)))
        for b_idx, (u, v, _) in enumerate(disc.bridges):
            key = (min(u, v), max(u, v))
            pool.setdefault(key, []).extend([("bridge", (b_idx,))] * 2)
        walk = disc.boundary_walk
        nodes: list[int] = []
        arcs: list[float] = []
        acc = 0.0
        for i in range(len(walk)):
            u, v = walk[i], walk[(i + 1) % len(walk)]
            seg = disc.boundary_lengths[i]
            key = (min(u, v), max(u, v))
            entries = pool.get(key)
            chain = None
            if entries:
                kind, ref = entries.pop()
                if kind == "side":
                    chain = list(self.side_chain(*ref))
                else:
                    chain = list(self.bridge_chain(ref[0]))
                if chain[0] != self.vertex_node(u):
                    chain = chain[::-1]
            else:
                chain = [self.vertex_node(u), self.vertex_node(v)]
            m = len(chain) - 1
            for k, node in enumerate(chain[:-1]):
                nodes.append(node)
                arcs.append(acc + seg * (k / m if m else 0.0))
            acc += seg
        return nodes, arcs


class PolyhedralTarget(TargetSpace):
    """A polyhedral disc exposed through the target-space interface.

    Points are node ids of the underlying surface graph; distances are
    Dijkstra overestimates with a declared error bound, and geodesics are
    evaluated by arclength along the graph path, snapping to nodes.
    """

    def __init__(self, disc: PolyhedralDisc, subdiv: int = 12):
        self.disc = disc
        self.graph = disc.surface_graph(subdiv)

    @property
    def approximation_gap(self) -> float:
        return self.graph.max_gap

    def contains(self, p) -> bool:
        if isinstance(p, (int, np.integer)):
            return 0 <= int(p) < self.graph.n_nodes
        return (
            isinstance(p, tuple)
            and len(p) == 3
            and p[0] == "face"
            and 0 <= p[1] < self.disc.n_triangles
        )

    def _check(self, p):
        if not self.contains(p):
            raise ValueError(f"point {p!r} does not lie on this polyhedral target")
        return int(p) if isinstance(p, (int, np.integer)) else p

    def distance(self, p, q) -> float:
        return self.graph.point_distance(self._check(p), self._check(q))

    def distance_with_bound(self, p, q) -> tuple[float, float]:
        p, q = self._check(p), self._check(q)
        if isinstance(p, (int, np.integer)) and isinstance(q, (int, np.integer)):
            return self.graph.distance_with_bound(int(p), int(q))
        # face locators add at most one extra crossing on each side
        return self.graph.point_distance(p, q), 4 * self.graph.max_gap

    def _nearest_node(self, p) -> int:
        if isinstance(p, (int, np.integer)):
            return int(p)
        _, f, xy = p
        ring, ring_xy = self.graph._face_ring[f]
        k = int(np.argmin(np.linalg.norm(ring_xy - np.asarray(xy), axis=1)))
        return ring[k]

    def geodesic_eval(self, p, q, t: float):
        a = self._nearest_node(self._check(p))
        b = self._nearest_node(self._check(q))
        return self.graph.point_on_geodesic(a, b, float(t))


# --------------------------------------------------------------------------
# thin triangles and nets


def thin_triangle_test(
    w: PolyhedralDisc,
    samples: int = 10_000,
    seed: int = 0,
    subdiv: int = 24,
    allowance_gaps: float = THIN_ALLOWANCE_GAPS,
) -> dict:
    """Sampled comparison inequality on random geodesic triangles.

    For random node triangles (A, B, C) and random points p on side AB and
    q on side AC, the intrinsic distance d(p, q) must not exceed the
    distance of the matching points on the planar comparison triangle,
    up to the distance-approximation allowance.
    """
    sg = w.surface_graph(subdiv)
    dist, _ = sg.all_pairs()
    rng = np.random.default_rng(seed)
    n = sg.n_nodes
    allowance = allowance_gaps * sg.max_gap
    worst = -np.inf
    worst_case = None
    done = 0
    attempts = 0
    while done < samples and attempts < 30 * samples:
        attempts += 1
        a, b, c = (int(x) for x in rng.integers(0, n, size=3))
        if len({a, b, c}) < 3:
            continue
        ab, ac, bc = dist[a, b], dist[a, c], dist[b, c]
        if min(ab, ac, bc) <= 4 * sg.max_gap or not np.isfinite(ab + ac + bc):
            continue
        path_ab = sg.path_nodes(a, b)
        path_ac = sg.path_nodes(a, c)
        if len(path_ab) < 3 or len(path_ac) < 3:
            continue
        p = path_ab[int(rng.integers(1, len(path_ab) - 1))]
        q = path_ac[int(rng.integers(1, len(path_ac) - 1))]
        try:
            comp = comparison_triangle(bc, ac, ab)
        except GlueError:
            continue
        x, y, z = comp.coords
        p_bar = x + (y - x) * (dist[a, p] / ab)
        q_bar = x + (z - x) * (dist[a, q] / ac)
        violation = float(dist[p, q] - np.linalg.norm(p_bar - q_bar))
        if violation > worst:
            worst = violation
            worst_case = (a, b, c, p, q)
        done += 1
    return {
        "samples": done,
        "worst_violation": float(worst) if done else 0.0,
        "allowance": float(allowance),
        "beyond_allowance": float(worst - allowance) if done else 0.0,
        "violation_found": bool(done and worst > allowance),
        "worst_case_nodes": worst_case,
        "max_gap": float(sg.max_gap),
    }


def eps_net_report(w: PolyhedralDisc, eps_fracs=(0.1, 0.05), subdiv: int = 12) -> dict:
    """Greedy separated nets checked against the packing-count bound.

    With l = L / (2 pi), the net seeds ceil(10 l / eps) boundary points at
    equal arclength and then adds farthest nodes while they are more than
    eps from everything chosen; the interior count must stay within
    4 (l / eps)^2.
    """
    sg = w.surface_graph(subdiv)
    dist, _ = sg.all_pairs()
    L = w.boundary_length()
    ell = L / (2.0 * math.pi)
    b_nodes, b_arcs = sg.boundary_node_arcs()
    results = {}
    for frac in eps_fracs:
        eps = frac * L
        m = math.ceil(10.0 * ell / eps)
        chosen: list[int] = []
        for k in range(m):
            t = L * k / m
            idx = int(np.searchsorted(b_arcs, t, side="right")) - 1
            node = b_nodes[max(idx, 0)]
            if node not in chosen:
                chosen.append(node)
        n_boundary = len(chosen)
        mind = dist[chosen].min(axis=0)
        added = 0
        while True:
            node = int(np.argmax(mind))
            if mind[node] <= eps:
                break
            chosen.append(node)
            added += 1
            mind = np.minimum(mind, dist[node])
        bound_interior = 4.0 * (ell / eps) ** 2
        results[f"L/{round(1 / frac)}"] = {
            "eps": float(eps),
            "boundary_points": n_boundary,
            "boundary_bound": m,
            "interior_points": added,
            "interior_bound": bound_interior,
            "net_size": len(chosen),
            "total_bound": bound_interior + m,
            "ok": bool(added <= bound_interior and n_boundary <= m),
        }
    results["all_ok"] = all(v["ok"] for v in results.values() if isinstance(v, dict))
    return results


# --------------------------------------------------------------------------
# ready-made discs


def cone_disc(total_angle: float, n_triangles: int = 6, radius: float = 1.0) -> PolyhedralDisc:
    """Closed fan of isoceles triangles around one vertex with the given
    total apex angle; positively curved for totals below a full turn."""
    if n_triangles < 3:
        raise ValueError("a closed fan needs at least 3 triangles")
    apex = total_angle / n_triangles
    if apex >= math.pi:
        raise ValueError("per-triangle apex angle must be < pi")
    rim = 2.0 * radius * math.sin(apex / 2.0)
    tri_coords = []
    tri_vertices = []
    gluings = []
    for i in range(n_triangles):
        tri = comparison_triangle(rim, radius, radius)  # corners (apex, rim_i, rim_{i+1})
        tri_coords.append(tri.coords)
        tri_vertices.append((0, 1 + i, 1 + (i + 1) % n_triangles))
    for i in range(n_triangles):
        gluings.append(((i, 2), ((i + 1) % n_triangles, 0)))  # shared spoke
    disc = PolyhedralDisc(
        tri_coords=tri_coords,
        tri_vertices=tri_vertices,
        gluings=gluings,
        bridges=[],
        boundary_walk=[1 + i for i in range(n_triangles)],
        boundary_lengths=[rim] * n_triangles,
        n_vertices=n_triangles + 1,
    )
    return disc.require_valid()


def strip_disc(tri1_sides, tri2_sides) -> PolyhedralDisc:
    """Two triangles glued along their first side (corners 0 and 1)."""
    t1 = comparison_triangle(*tri1_sides)
    t2 = comparison_triangle(*tri2_sides)
    if abs(t1.sides[2] - t2.sides[2]) > GLUE_TOL:
        raise GlueError("shared sides differ in length")
    disc = PolyhedralDisc(
        tri_coords=[t1.coords, t2.coords],
        tri_vertices=[(0, 1, 2), (0, 1, 3)],
        gluings=[((0, 0), (1, 0))],
        bridges=[],
        boundary_walk=[2, 0, 3, 1],
        boundary_lengths=[
            t1.sides[1],  # 2 -> 0, i.e. |XZ| of t1
            t2.sides[1],  # 0 -> 3
            t2.sides[0],  # 3 -> 1
            t1.sides[0],  # 1 -> 2
        ],
        n_vertices=4,
    )
    return disc.require_valid()
