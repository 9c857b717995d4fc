"""PL saddle predicate and the ten-triangle pinwheel counterexample.

A map of a disc into Euclidean space is *saddle* when, for every affine
plane, each connected component of either open side of its preimage meets
the disc boundary.  On a PL map the component structure only changes when
the plane crosses a vertex image, so testing every plane through three
vertex images (plus nudged offsets and random planes) decides the
predicate at mesh resolution.

The pinwheel disc shows that saddle does not imply length-minimizing: ten
triangles with a hexagonal parameter boundary mapped onto three wings
around a vertical axis, the boundary running twice along each arm of a
spatial Y.  Rotating the central triangle counterclockwise about the axis
shortens all tip-to-ring edges while changing no other edge, and the
vertex length matrix decreases entrywise -- yet the configuration passes
every first-order minimization certificate.  Its coordinates come from a
recorded parameter search (tools/search_hexagon.py) and are frozen below.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .induced import length_pseudometric
from .mesh import MappedDisc
from .meshgen import make_mapped_disc
from .pseudometric import UnionFind
from .targets import EuclideanSpace

__all__ = [
    "SaddleVerdict",
    "check_plane",
    "is_saddle_pl",
    "hexagon_counterexample",
    "hexagon_graph",
    "shorten_by_rotation",
    "HEXAGON_PARAMS",
]

#: frozen pinwheel parameters, found once by tools/search_hexagon.py
HEXAGON_PARAMS = {
    "tip_radius": 1.0,
    "center_height": 1.0,
    "ring_radius": 0.25,
    "ring_height": 0.4,
    "twist": -0.2,
    "epsilon": 0.05,
    "max_epsilon": 0.1,
    "refinement": 2,
}


# --------------------------------------------------------------------------
# the saddle predicate


@dataclass
class SaddleVerdict:
    saddle: bool
    planes_tested: int
    witness: dict | None

    def __bool__(self):
        return self.saddle


def check_plane(
    disc: MappedDisc, normal, offset: float, tol: float = 1e-9
) -> list[dict]:
    """Components of either open side of a plane section that miss the boundary.

    Vertices within ``tol`` (times the image scale) of the plane count as
    lying on it; a component of the positive or negative open side is a
    violation when none of its triangles shows a positively/negatively
    sliced boundary edge.
    """
    img = np.asarray(disc.images, dtype=float)
    normal = np.asarray(normal, dtype=float)
    nn = np.linalg.norm(normal)
    if nn == 0.0:
        raise ValueError("zero normal")
    scale = max(1.0, float(np.abs(img).max()))
    g = (img @ normal - float(offset)) / nn
    g = np.where(np.abs(g) <= tol * scale, 0.0, g)
    tris = disc.triangles
    edge_faces = disc.edge_faces()
    boundary_edges = {e for e, fs in edge_faces.items() if len(fs) == 1}
    violations = []
    for side in (1.0, -1.0):
        s = side * g
        active = np.where(s[tris].max(axis=1) > 0.0)[0]
        if active.size == 0:
            continue
        pos_in_active = {int(f): k for k, f in enumerate(active)}
        uf = UnionFind(len(active))
        touches = [False] * len(active)
        for (u, v), fs in edge_faces.items():
            if max(s[u], s[v]) <= 0.0:
                continue
            ids = [pos_in_active[f] for f in fs if f in pos_in_active]
            for a, b in zip(ids, ids[1:]):
                uf.union(a, b)
            if (u, v) in boundary_edges:
                for a in ids:
                    touches[a] = True
        comp_touch: dict[int, bool] = {}
        comp_members: dict[int, list[int]] = {}
        for k in range(len(active)):
            root = uf.find(k)
            comp_touch[root] = comp_touch.get(root, False) or touches[k]
            comp_members.setdefault(root, []).append(int(active[k]))
        for root, ok in comp_touch.items():
            if not ok:
                violations.append(
                    {
                        "side": "positive" if side > 0 else "negative",
                        "normal": normal.tolist(),
                        "offset": float(offset),
                        "triangles": sorted(comp_members[root]),
                    }
                )
    return violations


def _candidate_planes(disc: MappedDisc, extra_planes: int, seed: int, nudge: float):
    img = np.asarray(disc.images, dtype=float)
    n = img.shape[0]
    scale = max(1.0, float(np.abs(img).max()))
    seen = set()
    planes = []

    def push(normal, offset):
        nn = np.linalg.norm(normal)
        if nn <= 1e-12 * scale:
            return
        normal = normal / nn
        for k in range(3):
            if abs(normal[k]) > 1e-12:
                if normal[k] < 0:
                    normal = -normal
                break
        key = (tuple(np.round(normal, 9)), round(float(offset), 9))
        if key in seen:
            return
        seen.add(key)
        planes.append((normal, float(offset)))

    for i, j, k in itertools.combinations(range(n), 3):
        normal = np.cross(img[j] - img[i], img[k] - img[i])
        nn = np.linalg.norm(normal)
        if nn <= 1e-12 * scale * scale:
            continue
        normal = normal / nn
        base = float(normal @ img[i])
        for off in (base, base + nudge * scale, base - nudge * scale):
            push(normal.copy(), off)
    rng = np.random.default_rng(seed)
    lo, hi = img.min(), img.max()
    for _ in range(extra_planes):
        normal = rng.standard_normal(3)
        offset = rng.uniform(lo - 0.1 * scale, hi + 0.1 * scale)
        push(normal, offset)
    return planes


def is_saddle_pl(
    disc: MappedDisc,
    extra_planes: int = 200,
    seed: int = 0,
    tol: float = 1e-9,
    nudge: float = 1e-7,
) -> SaddleVerdict:
    """Saddle verdict at mesh resolution.

    Tests every plane through a triple of distinct vertex images (with the
    offset also nudged both ways to break ties) plus seeded random planes.
    Degenerate (collinear) triples are skipped.
    """
    disc.require_valid()
    img = np.asarray(disc.images, dtype=float)
    if img.shape[1] != 3 or not isinstance(disc.target, EuclideanSpace):
        raise ValueError("the saddle predicate expects a disc mapped into Euclidean 3-space")
    planes = _candidate_planes(disc, extra_planes, seed, nudge)
    for normal, offset in planes:
        violations = check_plane(disc, normal, offset, tol)
        if violations:
            return SaddleVerdict(False, len(planes), violations[0])
    return SaddleVerdict(True, len(planes), None)


# --------------------------------------------------------------------------
# the pinwheel counterexample


def _hexagon_points(params: dict):
    t_r = params["tip_radius"]
    hc = params["center_height"]
    rho = params["ring_radius"]
    hq = params["ring_height"]
    twist = params["twist"]
    tips = [
        np.array([t_r * math.cos(a), t_r * math.sin(a), 0.0])
        for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)
    ]
    center = np.array([0.0, 0.0, hc])
    ring = [
        np.array([rho * math.cos(a + twist), rho * math.sin(a + twist), hq])
        for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)
    ]
    return tips, center, ring


#: triangle list of the pinwheel parameter hexagon; vertices 0..5 are the
#: hexagon corners, 6..8 the inner ring
HEXAGON_TRIANGLES = [
    (0, 1, 6), (1, 2, 6),      # wing 1 (tip1 - center - tip2 over ring point 1)
    (2, 3, 7), (3, 4, 7),      # wing 2
    (4, 5, 8), (5, 0, 8),      # wing 3
    (2, 6, 7),                 # blade at tip 2
    (4, 7, 8),                 # blade at tip 3
    (0, 8, 6),                 # blade at tip 1
    (6, 7, 8),                 # central triangle
]


def hexagon_counterexample(params: dict | None = None) -> MappedDisc:
    """The frozen ten-triangle pinwheel disc.

    Odd hexagon corners map to the three arm tips, even corners all map to
    the raised Y-center, and the inner ring maps to the twisted central
    triangle; the boundary therefore runs twice along each arm of the Y.
    """
    p = dict(HEXAGON_PARAMS)
    if params:
        p.update(params)
    tips, center, ring = _hexagon_points(p)
    vertices = []
    for k in range(6):
        a = k * math.pi / 3
        vertices.append((math.cos(a), math.sin(a)))
    for a in (math.pi / 3, math.pi, 5 * math.pi / 3):
        vertices.append((0.45 * math.cos(a), 0.45 * math.sin(a)))
    images = [tips[0], center, tips[1], center, tips[2], center] + ring
    return make_mapped_disc(vertices, HEXAGON_TRIANGLES, images)


def hexagon_graph(disc: MappedDisc | None = None):
    """The 1-skeleton of the pinwheel with its boundary pinned.

    Passes every first-order minimization certificate despite the global
    shortening rotation, which is exactly what makes it instructive.
    """
    from .graphs import GraphInTarget, rotation_from_positions

    if disc is None:
        disc = hexagon_counterexample()
    edges = disc.skeleton_edges()
    rotation = rotation_from_positions(disc.n_vertices, edges, disc.vertices)
    return GraphInTarget(
        points=[np.asarray(p, float) for p in disc.images],
        edges=edges,
        pinned=disc.boundary_vertex_set(),
        rotation=rotation,
        target=disc.target,
        positions=disc.vertices,
    )


def shorten_by_rotation(
    disc: MappedDisc,
    epsilon: float,
    refinement: int | None = None,
    strict_tol: float = 1e-9,
) -> tuple[MappedDisc, dict]:
    """Rotate the central triangle about the symmetry axis and compare.

    Returns the deformed disc plus a report comparing the vertex length
    matrices: for a validated counterclockwise ``epsilon`` no entry grows
    beyond ``strict_tol`` and at least one entry strictly shrinks, which
    witnesses that the original map admits a shortening deformation with
    fixed boundary.  The clockwise behavior at ``-epsilon`` is recorded as
    an observation.
    """
    disc.require_valid()
    if abs(epsilon) > HEXAGON_PARAMS["max_epsilon"]:
        raise ValueError(
            f"rotation angle {epsilon} outside the validated range "
            f"(+-{HEXAGON_PARAMS['max_epsilon']})"
        )
    r = refinement if refinement is not None else HEXAGON_PARAMS["refinement"]
    boundary = disc.boundary_vertex_set()
    free = sorted(v for v in range(disc.n_vertices) if v not in boundary)

    def rotated(eps: float) -> MappedDisc:
        images = np.asarray(disc.images, dtype=float).copy()
        c, s = math.cos(eps), math.sin(eps)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        for v in free:
            images[v] = rot @ images[v]
        return MappedDisc(
            disc.vertices.copy(),
            disc.triangles.copy(),
            list(disc.boundary_loop),
            images,
            disc.target,
        )

    base = length_pseudometric(disc, r).d
    deformed = rotated(epsilon)
    new = length_pseudometric(deformed, r).d
    diff = new - base
    cw = length_pseudometric(rotated(-epsilon), r).d
    report = {
        "epsilon": float(epsilon),
        "refinement": int(r),
        "max_increase": float(diff.max()),
        "max_strict_decrease": float((-diff).max()),
        "pareto": bool(diff.max() <= strict_tol),
        "strictly_shorter_somewhere": bool((-diff).max() > strict_tol),
        "boundary_unchanged": bool(
            np.allclose(
                np.asarray(deformed.images)[sorted(boundary)],
                np.asarray(disc.images)[sorted(boundary)],
            )
        ),
        "clockwise_max_increase": float((cw - base).max()),
        "rotated_vertices": free,
    }
    return deformed, report
