"""Factor a sampled disc map through a nonpositively curved polyhedral disc.

Given a mapped disc and a finite vertex sample F, the pipeline

1. joins all sample pairs by shortest paths in the refined mesh graph and
   unites them into an embedded graph (shared subpaths automatically become
   shared edges),
2. straightens and relaxes that graph relative to the pinned boundary
   sample A = F on the boundary loop,
3. fills its bounded faces with comparison-triangle fans and glues them
   into a polyhedral disc W,
4. maps each sample vertex to its W vertex (the contraction p) and rules
   every W triangle onto the corresponding target triangle through the fan
   apex (the sampled short map q).

The contraction inequality d_W(p x, p y) <= d_mesh(x, y) holds by
construction: the relaxed graph is edgewise dominated by the original
paths, and W contains the graph edges isometrically.  Both it and the
sampled shortness of q are verified numerically on every run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphInTarget
from .majorize import Cat0Report, PolyhedralDisc, boundary_and_area, cat0_certificate, glue_disc
from .mesh import MappedDisc, RefinedGraph, build_refined_graph
from .minimize import MinimizationCertificate, relax, straighten
__all__ = ["geodesic_graph", "run_key_lemma", "refinement_study", "KeyLemmaResult"]


def _union_paths(graph: RefinedGraph, sources: list[int]) -> tuple[set[tuple[int, int]], np.ndarray]:
    """Union of shortest-path edge sets between all source-node pairs."""
    idx = np.asarray(sources, dtype=int)
    dist, pred = graph.shortest_paths(idx, return_predecessors=True)
    edges: set[tuple[int, int]] = set()
    for a_row, a_node in enumerate(sources):
        for b_row in range(a_row + 1, len(sources)):
            b_node = sources[b_row]
            if not np.isfinite(dist[a_row, b_node]):
                continue
            cur = b_node
            while cur != a_node:
                nxt = int(pred[a_row, cur])
                if nxt < 0:
                    break
                edges.add((min(cur, nxt), max(cur, nxt)))
                cur = nxt
    return edges, dist[:, idx]


def geodesic_graph(
    disc: MappedDisc, sample: list[int], refinement: int = 2,
    graph: RefinedGraph | None = None,
) -> tuple[GraphInTarget, dict[int, int]]:
    """Embedded union of refined-mesh shortest paths between sample vertices.

    Degree-2 chains between sample vertices and path intersections are
    contracted into single edges carrying their polylines, so the result
    is a small piecewise-geodesic graph; the rotation system is inherited
    from the parameter-plane embedding.  Returns the graph and the map
    from mesh vertex index to graph vertex index.
    """
    disc.require_valid()
    sample = sorted(dict.fromkeys(int(v) for v in sample))
    if not sample:
        raise ValueError("sample must be nonempty")
    g = graph if graph is not None else build_refined_graph(disc, refinement)
    source_nodes = [int(g.orig_index[v]) for v in sample]
    edge_set, _ = _union_paths(g, source_nodes)

    adj: dict[int, set[int]] = {}
    for u, v in edge_set:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    for n in source_nodes:
        adj.setdefault(n, set())

    essential = {n for n in adj if len(adj[n]) != 2}
    essential.update(source_nodes)
    if not essential:
        essential.add(min(adj))  # pure cycle: anchor one vertex

    # walk maximal chains between essential nodes
    chains: list[list[int]] = []
    seen_dir: set[tuple[int, int]] = set()
    for start in sorted(essential):
        for first in sorted(adj[start]):
            if (start, first) in seen_dir:
                continue
            chain = [start, first]
            seen_dir.add((start, first))
            while chain[-1] not in essential:
                prev, cur = chain[-2], chain[-1]
                nxts = [w for w in adj[cur] if w != prev]
                nxt = nxts[0]
                seen_dir.add((cur, nxt))
                chain.append(nxt)
            seen_dir.add((chain[-1], chain[-2]))
            for a, b in zip(chain, chain[1:]):
                seen_dir.add((a, b))
                seen_dir.add((b, a))
            chains.append(chain)

    # keep parallel chains and loops distinct by promoting interior nodes
    final_chains: list[list[int]] = []
    used_pairs: set[tuple[int, int]] = set()

    def push(chain: list[int]):
        key = (min(chain[0], chain[-1]), max(chain[0], chain[-1]))
        if chain[0] == chain[-1] or key in used_pairs:
            if len(chain) >= 3:
                mid = len(chain) // 2
                push(chain[: mid + 1])
                push(chain[mid:])
                return
        used_pairs.add(key)
        final_chains.append(chain)

    for chain in chains:
        push(chain)

    graph_nodes = sorted(
        {c[0] for c in final_chains} | {c[-1] for c in final_chains} | set(source_nodes)
    )
    index_of = {n: i for i, n in enumerate(graph_nodes)}
    points = [g.node_images[n] for n in graph_nodes]
    positions = np.asarray([g.node_param[n] for n in graph_nodes])
    edges = []
    edge_paths = {}
    depart: dict[int, list[tuple[float, int]]] = {i: [] for i in range(len(graph_nodes))}
    for chain in final_chains:
        u, v = index_of[chain[0]], index_of[chain[-1]]
        key = (min(u, v), max(u, v))
        edges.append(key)
        if len(chain) > 2:
            path_pts = [g.node_images[n] for n in chain]
            edge_paths[key] = path_pts if u <= v else path_pts[::-1]
        for a, b in ((chain[0], chain[1]), (chain[-1], chain[-2])):
            vec = g.node_param[b] - g.node_param[a]
            ang = float(np.arctan2(vec[1], vec[0]))
            other = index_of[chain[-1]] if a == chain[0] else index_of[chain[0]]
            depart[index_of[a]].append((ang, other))
    rotation = [[w for _, w in sorted(depart[i], key=lambda t: (t[0], t[1]))] for i in range(len(graph_nodes))]

    boundary = disc.boundary_vertex_set()
    pinned = {index_of[g.orig_index[v]] for v in sample if v in boundary}
    gamma = GraphInTarget(
        points=points,
        edges=edges,
        pinned=pinned,
        rotation=rotation,
        target=disc.target,
        positions=positions,
        edge_paths=edge_paths,
    )
    vertex_map = {v: index_of[int(g.orig_index[v])] for v in sample}
    return gamma, vertex_map


@dataclass
class KeyLemmaResult:
    sample: list[int]
    boundary_sample: list[int]
    collapsed: list[int]
    graph_initial: GraphInTarget | None
    graph: GraphInTarget | None
    certificate: MinimizationCertificate | None
    disc: PolyhedralDisc | None
    cat0: Cat0Report | None
    one_point: bool
    p_map: dict[int, int]
    verification: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.verification.get("ok", False))


def run_key_lemma(
    disc: MappedDisc,
    sample: list[int],
    refinement: int = 2,
    tol: float = 1e-6,
    shortness_samples: int = 2000,
    seed: int = 0,
    subdiv: int = 8,
    tol_descent: float = 1e-8,
    max_iter: int = 5000,
) -> KeyLemmaResult:
    """Full factorization run with numeric verification.

    Produces W, the vertex contraction p and sampled shortness data for q;
    the verification report records the worst contraction excess, the
    boundary agreement and the worst shortness excess.
    """
    disc.require_valid()
    sample = sorted(dict.fromkeys(int(v) for v in sample))
    if not sample:
        raise ValueError("sample must be nonempty")
    boundary = disc.boundary_vertex_set()
    boundary_sample = [v for v in sample if v in boundary]

    if not boundary_sample:
        # nothing pins the graph: a single point factors everything
        return KeyLemmaResult(
            sample=sample,
            boundary_sample=[],
            collapsed=[],
            graph_initial=None,
            graph=None,
            certificate=None,
            disc=None,
            cat0=None,
            one_point=True,
            p_map={v: 0 for v in sample},
            verification={
                "ok": True,
                "note": "no boundary sample: one-point space",
                "contraction_max_excess": 0.0,
                "boundary_max_distance": 0.0,
                "shortness_max_excess": 0.0,
            },
        )

    g = build_refined_graph(disc, refinement)
    source_nodes = [int(g.orig_index[v]) for v in sample]
    dist_all = g.shortest_paths(np.asarray(source_nodes))
    d_sample = dist_all[:, source_nodes]

    # keep the part of the sample at finite mesh distance from the boundary
    anchor_row = sample.index(boundary_sample[0])
    finite_mask = np.isfinite(d_sample[anchor_row])
    kept = [v for v, keep in zip(sample, finite_mask) if keep]
    collapsed = [v for v, keep in zip(sample, finite_mask) if not keep]

    if len(kept) <= 1:
        # a single usable vertex: the one-point space already satisfies
        # the contraction and carries the constant short map
        return KeyLemmaResult(
            sample=sample,
            boundary_sample=boundary_sample,
            collapsed=collapsed,
            graph_initial=None,
            graph=None,
            certificate=None,
            disc=None,
            cat0=None,
            one_point=True,
            p_map={v: 0 for v in sample},
            verification={
                "ok": True,
                "note": "single usable sample vertex: one-point space",
                "contraction_max_excess": 0.0,
                "boundary_max_distance": 0.0,
                "shortness_max_excess": 0.0,
            },
        )

    gamma0, vmap = geodesic_graph(disc, kept, refinement, graph=g)
    gamma_straight = straighten(gamma0)
    gamma, certificate = relax(gamma_straight, tol_descent=tol_descent, max_iter=max_iter)
    w_disc, glue_report = glue_disc(gamma)
    cat0 = cat0_certificate(w_disc)

    p_map = {v: vmap[v] for v in kept}
    anchor_vertex = vmap[boundary_sample[0]]
    for v in collapsed:
        p_map[v] = anchor_vertex

    sg = w_disc.surface_graph(subdiv)
    dist_w, _ = sg.all_pairs()

    # contraction: distances in W never exceed mesh length distances
    row_of = {v: i for i, v in enumerate(sample)}
    worst_contraction = -np.inf
    for i, x in enumerate(kept):
        for y in kept[i + 1:]:
            dw = dist_w[sg.vertex_node(p_map[x]), sg.vertex_node(p_map[y])]
            dm = d_sample[row_of[x], row_of[y]]
            worst_contraction = max(worst_contraction, float(dw - dm))
    if not kept or len(kept) == 1:
        worst_contraction = 0.0

    # boundary agreement: pinned vertices keep their original images
    target = disc.target
    worst_boundary = 0.0
    for v in boundary_sample:
        worst_boundary = max(
            worst_boundary,
            target.distance(gamma.points[vmap[v]], disc.images[v]),
        )

    # sampled shortness of the ruled correspondence q
    rng = np.random.default_rng(seed)
    q_point = _ruled_points(w_disc, sg, gamma)
    n_nodes = sg.n_nodes
    worst_shortness = -np.inf
    pairs_done = 0
    while n_nodes >= 2 and pairs_done < shortness_samples:
        need = shortness_samples - pairs_done
        a_idx = rng.integers(0, n_nodes, size=2 * need + 8)
        b_idx = rng.integers(0, n_nodes, size=2 * need + 8)
        for a, b in zip(a_idx.tolist(), b_idx.tolist()):
            if a == b:
                continue
            dy = target.distance(q_point[a], q_point[b])
            worst_shortness = max(worst_shortness, float(dy - dist_w[a, b]))
            pairs_done += 1
            if pairs_done >= shortness_samples:
                break
    if pairs_done == 0:
        worst_shortness = 0.0

    ba = boundary_and_area(w_disc)
    ok = (
        worst_contraction <= tol
        and worst_boundary <= tol
        and worst_shortness <= tol
        and cat0.ok
        and ba["isoperimetric_ok"]
    )
    verification = {
        "ok": bool(ok),
        "contraction_max_excess": float(worst_contraction),
        "boundary_max_distance": float(worst_boundary),
        "shortness_max_excess": float(worst_shortness),
        "shortness_pairs": pairs_done,
        "cat0_pass": bool(cat0.ok),
        "isoperimetric_ok": bool(ba["isoperimetric_ok"]),
        "boundary_length": ba["boundary_length"],
        "area": ba["area"],
        "glue_witness_ok": bool(glue_report.witness_ok),
        "relax_converged": bool(certificate.converged),
        "tolerance": tol,
    }
    return KeyLemmaResult(
        sample=sample,
        boundary_sample=boundary_sample,
        collapsed=collapsed,
        graph_initial=gamma0,
        graph=gamma,
        certificate=certificate,
        disc=w_disc,
        cat0=cat0,
        one_point=False,
        p_map=p_map,
        verification=verification,
    )


def _ruled_points(w_disc: PolyhedralDisc, sg, gamma: GraphInTarget) -> list:
    """Target point of every surface-graph node under the ruled map q.

    Graph vertices carry their relaxed target points; nodes interior to a
    side map onto the geodesic between the side's endpoint images; bridge
    nodes map onto the bridge geodesic.
    """
    target = gamma.target
    r = sg.subdiv
    out = [None] * sg.n_nodes
    for node_id, node in enumerate(sg.nodes):
        if node.kind == "vertex":
            out[node_id] = gamma.points[node.ref[0]]
        elif node.kind == "edge":
            f, s, k = node.ref
            u, v = w_disc.side_corners(f, s)
            out[node_id] = target.geodesic_eval(gamma.points[u], gamma.points[v], k / r)
        else:
            b_idx, k = node.ref
            u, v, _ = w_disc.bridges[b_idx]
            out[node_id] = target.geodesic_eval(gamma.points[u], gamma.points[v], k / r)
    return out


def refinement_study(
    disc: MappedDisc,
    sample_sequence: list[list[int]],
    refinement: int = 2,
    **kwargs,
) -> dict:
    """Distortion between consecutive factorizations over a nested sample.

    For consecutive W's the correspondence induced by shared sample
    vertices is compared pairwise; the table records the largest absolute
    distance change.  Evidence of stabilization only, no convergence claim.
    """
    for a, b in zip(sample_sequence, sample_sequence[1:]):
        if not set(a) <= set(b):
            raise ValueError("sample sequence must be nested")
    runs = [run_key_lemma(disc, F, refinement=refinement, **kwargs) for F in sample_sequence]
    table = []
    for k in range(len(runs) - 1):
        r1, r2 = runs[k], runs[k + 1]
        shared = sorted(set(r1.sample) & set(r2.sample))
        worst = 0.0
        increase = 0.0
        if not r1.one_point and not r2.one_point and len(shared) >= 2:
            sg1 = r1.disc.surface_graph(kwargs.get("subdiv", 8))
            sg2 = r2.disc.surface_graph(kwargs.get("subdiv", 8))
            d1, _ = sg1.all_pairs()
            d2, _ = sg2.all_pairs()
            for i, x in enumerate(shared):
                for y in shared[i + 1:]:
                    a = d1[sg1.vertex_node(r1.p_map[x]), sg1.vertex_node(r1.p_map[y])]
                    b = d2[sg2.vertex_node(r2.p_map[x]), sg2.vertex_node(r2.p_map[y])]
                    worst = max(worst, abs(float(a - b)))
                    increase = max(increase, float(b - a))
        table.append(
            {
                "from_size": len(r1.sample),
                "to_size": len(r2.sample),
                "shared": len(shared),
                "max_distortion": worst,
                "max_increase": increase,
            }
        )
    return {"runs": runs, "table": table}
