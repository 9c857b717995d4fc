"""Pseudometrics induced on a mapped disc: length, connecting, intrinsic.

Three pullbacks of the target metric to the mesh vertices, ordered
``length >= intrinsic >= connecting``:

* the *length* pseudometric is the infimal image length of refined-mesh
  paths between two vertices;
* the *connecting* pseudometric is the infimal image diameter of a
  connected 1-skeleton vertex subset containing both;
* the *intrinsic* pseudometric re-runs the length computation after
  collapsing the zero classes of the connecting pseudometric.

The connecting minimum over connected subsets is exact only at desk scale
(``n <= 14`` by default, exhaustive over all connected subsets).  Beyond
that a factor-2 bracket is computed by growing components inside metric
balls around each candidate center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _dijkstra

from .mesh import MappedDisc, RefinedGraph, build_refined_graph
from .pseudometric import PseudometricMatrix, UnionFind
from .targets import EuclideanSpace

__all__ = [
    "length_pseudometric",
    "connecting_pseudometric",
    "connecting_on_graph",
    "ConnectingResult",
    "intrinsic_pseudometric",
    "monotone_light_report",
    "MonotoneLightReport",
    "no_bubble_check",
    "ordering_chain_report",
    "vertex_image_distances",
    "EXACT_CONNECTING_LIMIT",
]

EXACT_CONNECTING_LIMIT = 14


def vertex_image_distances(disc: MappedDisc) -> np.ndarray:
    """Pairwise target distances between vertex images."""
    if isinstance(disc.target, EuclideanSpace):
        img = np.asarray(disc.images, dtype=float)
        diff = img[:, None, :] - img[None, :, :]
        return np.linalg.norm(diff, axis=2)
    n = disc.n_vertices
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = disc.target.distance(disc.images[i], disc.images[j])
    return d


def length_pseudometric(
    disc: MappedDisc, refinement: int = 1, graph: RefinedGraph | None = None
) -> PseudometricMatrix:
    """Shortest image length of refined-mesh paths between original vertices.

    Monotone non-increasing along nested refinements (r, 2r, 4r, ...) since
    every coarse sub-edge is a union of collinear finer ones.
    """
    g = graph if graph is not None else build_refined_graph(disc, refinement)
    dist = g.shortest_paths(g.orig_index)
    d = dist[:, g.orig_index]
    d = np.minimum(d, d.T)  # exact symmetry despite float noise
    np.fill_diagonal(d, 0.0)
    return PseudometricMatrix(d)


@dataclass
class ConnectingResult:
    """Connecting pseudometric, exact or bracketed between lower and upper."""

    upper: PseudometricMatrix
    lower: np.ndarray
    exact: bool

    @property
    def matrix(self) -> PseudometricMatrix:
        return self.upper


def _subset_connected(mask: int, adj: list[int]) -> bool:
    low = mask & (-mask)
    reached = low
    while True:
        grow = reached
        m = reached
        while m:
            b = m & (-m)
            grow |= adj[b.bit_length() - 1] & mask
            m ^= b
        if grow == reached:
            break
        reached = grow
    return reached == mask


def _exact_connecting(n: int, edges: list[tuple[int, int]], dimg: np.ndarray) -> np.ndarray:
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    size = 1 << n
    diam = np.zeros(size)
    connected = np.zeros(size, dtype=bool)
    members: list[list[int]] = [[] for _ in range(size)]
    for s in range(1, size):
        low = s & (-s)
        i = low.bit_length() - 1
        rest = s ^ low
        if rest == 0:
            diam[s] = 0.0
            connected[s] = True
            members[s] = [i]
            continue
        mem = members[rest]
        row = dimg[i]
        best = diam[rest]
        for j in mem:
            if row[j] > best:
                best = row[j]
        diam[s] = best
        members[s] = [i] + mem
        connected[s] = _subset_connected(s, adj)
    subsets = np.arange(size, dtype=np.int64)
    out = np.full((n, n), np.inf)
    np.fill_diagonal(out, 0.0)
    conn_idx = subsets[connected]
    conn_diam = diam[connected]
    for i in range(n):
        for j in range(i + 1, n):
            pair = (1 << i) | (1 << j)
            sel = (conn_idx & pair) == pair
            if sel.any():
                out[i, j] = out[j, i] = float(conn_diam[sel].min())
    return out


def _bracket_connecting(
    n: int, edges: list[tuple[int, int]], dimg: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """2-approximation by growing components inside balls around each center.

    For any connected witness set K containing a pair, centering at a point
    of K reaches the pair at radius <= diam K, and the grown component has
    diameter <= 2 diam K; hence upper/2 <= true value <= upper.
    """
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    upper = np.full((n, n), np.inf)
    np.fill_diagonal(upper, 0.0)
    for c in range(n):
        order = np.argsort(dimg[c], kind="stable")
        uf = UnionFind(n)
        added = np.zeros(n, dtype=bool)
        diam_of: dict[int, float] = {}
        members_of: dict[int, list[int]] = {}
        for v in order.tolist():
            if not np.isfinite(dimg[c][v]):
                break
            added[v] = True
            rv = uf.find(v)
            diam_of[rv] = 0.0
            members_of[rv] = [v]
            for w in nbrs[v]:
                if not added[w]:
                    continue
                rv, rw = uf.find(v), uf.find(w)
                if rv == rw:
                    continue
                ma, mb = members_of[rv], members_of[rw]
                cross = float(dimg[np.ix_(ma, mb)].max())
                d_new = max(diam_of[rv], diam_of[rw], cross)
                uf.union(rv, rw)
                root = uf.find(rv)
                merged = ma + mb
                members_of[root] = merged
                diam_of[root] = d_new
                for a in ma:
                    row = upper[a]
                    for b in mb:
                        if d_new < row[b]:
                            upper[a, b] = upper[b, a] = d_new
    lower = np.maximum(upper / 2.0, dimg)
    np.fill_diagonal(lower, 0.0)
    return lower, upper


def connecting_on_graph(
    n: int,
    edges: list[tuple[int, int]],
    image_distances: np.ndarray,
    exact_limit: int = EXACT_CONNECTING_LIMIT,
) -> ConnectingResult:
    """Connecting pseudometric of a vertex-weighted graph.

    ``image_distances`` is the pairwise target distance matrix of the vertex
    images; subsets are connected in the given graph.
    """
    dimg = np.asarray(image_distances, dtype=float)
    edges = [(int(u), int(v)) for u, v in edges]
    if n <= exact_limit:
        d = _exact_connecting(n, edges, dimg)
        return ConnectingResult(upper=PseudometricMatrix(d), lower=d.copy(), exact=True)
    lower, upper = _bracket_connecting(n, edges, dimg)
    return ConnectingResult(upper=PseudometricMatrix(upper), lower=lower, exact=False)


def connecting_pseudometric(
    disc: MappedDisc, exact_limit: int = EXACT_CONNECTING_LIMIT
) -> ConnectingResult:
    """Minimal image diameter of connected 1-skeleton subsets joining pairs."""
    disc.require_valid()
    return connecting_on_graph(
        disc.n_vertices, disc.skeleton_edges(), vertex_image_distances(disc), exact_limit
    )


def _connecting_classes(disc: MappedDisc, zero_tol: float) -> UnionFind:
    conn = connecting_pseudometric(disc)
    uf = UnionFind(disc.n_vertices)
    ii, jj = np.where(conn.upper.d <= zero_tol)
    for i, j in zip(ii.tolist(), jj.tolist()):
        if i < j:
            uf.union(i, j)
    return uf


def intrinsic_pseudometric(
    disc: MappedDisc,
    zero_tol: float = 1e-9,
    refinement: int = 1,
    graph: RefinedGraph | None = None,
) -> PseudometricMatrix:
    """Length pseudometric after collapsing connecting-zero vertex classes.

    Vertices whose connecting distance is ``<= zero_tol`` become a single
    routing node, so paths may teleport within a collapsed class.  Lies
    entrywise between the connecting and length pseudometrics up to the
    identification slack.
    """
    disc.require_valid()
    uf = _connecting_classes(disc, zero_tol)
    g = graph if graph is not None else build_refined_graph(disc, refinement)
    n = disc.n_vertices
    canon = np.arange(g.n_nodes)
    for i in range(n):
        canon[g.orig_index[i]] = g.orig_index[uf.find(i)]
    relabel: dict[int, int] = {}
    node_of = np.empty(g.n_nodes, dtype=int)
    for node in range(g.n_nodes):
        c = int(canon[node])
        if c not in relabel:
            relabel[c] = len(relabel)
        node_of[node] = relabel[c]
    best: dict[tuple[int, int], float] = {}
    for (u, v), w in zip(g.edges.tolist(), g.weights.tolist()):
        a, b = node_of[u], node_of[v]
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if w < best.get(key, np.inf):
            best[key] = w
    m = len(relabel)
    if best:
        e = np.asarray(list(best.keys()), dtype=int)
        w = np.asarray(list(best.values()), dtype=float)
        mat = csr_matrix(
            (np.concatenate([w, w]), (np.concatenate([e[:, 0], e[:, 1]]),
                                      np.concatenate([e[:, 1], e[:, 0]]))),
            shape=(m, m),
        )
    else:
        mat = csr_matrix((m, m))
    sources = node_of[g.orig_index]
    dist = _dijkstra(mat, directed=False, indices=np.asarray(sorted(set(sources.tolist()))))
    row_of = {s: k for k, s in enumerate(sorted(set(sources.tolist())))}
    d = np.empty((n, n))
    for i in range(n):
        d[i] = dist[row_of[sources[i]]][sources]
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return PseudometricMatrix(d)


@dataclass
class MonotoneLightReport:
    """Mesh-scale witnesses for the monotone-light splitting of the map."""

    classes: list[list[int]]
    class_connected: list[bool]
    image_groups: list[list[int]]          # groups of class ids with equal images
    group_light: list[bool]                # no edge joins two classes of the group
    monotone: bool
    light: bool


def monotone_light_report(
    disc: MappedDisc, zero_tol: float = 1e-9, image_tol: float = 1e-9
) -> MonotoneLightReport:
    """Check that connecting-zero classes are connected (monotone side) and
    that classes sharing an image are not joined by mesh edges (light side)."""
    disc.require_valid()
    uf = _connecting_classes(disc, zero_tol)
    groups = uf.groups()
    class_idx = {}
    for c, g in enumerate(groups):
        for v in g:
            class_idx[v] = c
    edges = disc.skeleton_edges()
    nbrs: dict[int, set[int]] = {}
    for u, v in edges:
        nbrs.setdefault(u, set()).add(v)
        nbrs.setdefault(v, set()).add(u)
    connected_flags = []
    for g in groups:
        gs = set(g)
        seen = {g[0]}
        stack = [g[0]]
        while stack:
            x = stack.pop()
            for y in nbrs.get(x, ()):
                if y in gs and y not in seen:
                    seen.add(y)
                    stack.append(y)
        connected_flags.append(len(seen) == len(gs))

    # group classes by (approximately) equal representative images
    reps = [g[0] for g in groups]
    dimg = vertex_image_distances(disc)
    guf = UnionFind(len(groups))
    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            if dimg[reps[a], reps[b]] <= image_tol:
                guf.union(a, b)
    image_groups = guf.groups()
    light_flags = []
    for grp in image_groups:
        grp_set = set(grp)
        ok = True
        for u, v in edges:
            cu, cv = class_idx[u], class_idx[v]
            if cu != cv and cu in grp_set and cv in grp_set:
                ok = False
                break
        light_flags.append(ok)
    return MonotoneLightReport(
        classes=groups,
        class_connected=connected_flags,
        image_groups=image_groups,
        group_light=light_flags,
        monotone=all(connected_flags),
        light=all(light_flags),
    )


def no_bubble_check(disc: MappedDisc, radius: float) -> list[dict]:
    """Witnesses of bubbles at the given scale.

    For each vertex image ``p``, every connected component of the mesh with
    the closed ``radius``-ball around ``p`` removed must contain a boundary
    vertex; components that do not are returned.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    disc.require_valid()
    dimg = vertex_image_distances(disc)
    boundary = disc.boundary_vertex_set()
    edges = disc.skeleton_edges()
    n = disc.n_vertices
    violations = []
    for center in range(n):
        keep = dimg[center] > radius
        if not keep.any():
            continue
        uf = UnionFind(n)
        for u, v in edges:
            if keep[u] and keep[v]:
                uf.union(u, v)
        comps: dict[int, list[int]] = {}
        for v in range(n):
            if keep[v]:
                comps.setdefault(uf.find(v), []).append(v)
        for comp in comps.values():
            if not any(v in boundary for v in comp):
                violations.append({"center_vertex": center, "component": sorted(comp)})
    return violations


def ordering_chain_report(
    disc: MappedDisc, refinement: int = 1, zero_tol: float = 1e-9, slack: float = 1e-9
) -> dict:
    """Entrywise check of length >= intrinsic >= connecting on one instance.

    The connecting side uses the exact value when available and the sound
    lower bracket otherwise.
    """
    graph = build_refined_graph(disc, refinement)
    length = length_pseudometric(disc, refinement, graph=graph)
    intrinsic = intrinsic_pseudometric(disc, zero_tol, refinement, graph=graph)
    conn = connecting_pseudometric(disc)
    allowed = slack + zero_tol
    gap1 = intrinsic.d - length.d
    gap1 = gap1[np.isfinite(gap1)]
    conn_side = conn.upper.d if conn.exact else conn.lower
    gap2 = conn_side - intrinsic.d
    gap2 = gap2[np.isfinite(gap2)]
    worst1 = float(gap1.max()) if gap1.size else 0.0
    worst2 = float(gap2.max()) if gap2.size else 0.0
    return {
        "length": length,
        "intrinsic": intrinsic,
        "connecting": conn,
        "worst_length_vs_intrinsic": worst1,
        "worst_intrinsic_vs_connecting": worst2,
        "chain_holds": bool(worst1 <= allowed and worst2 <= allowed),
        "slack": allowed,
    }
