"""Length relaxation of mapped graphs and its first-order certificates.

A mapped graph is relaxed by sweeping the free vertices in ascending index
order; a vertex moves only along a direction that strictly shortens *all*
incident edges at once, so every edge length is monotone non-increasing
through the whole run.  The move direction solves the small convex program

    maximize t  subject to  <d, u_i> >= t for all i,  |d| <= 1,

whose value equals the norm of the minimum-norm point of the convex hull
of the unit edge directions u_i.  The value is zero exactly when the
origin lies in that hull, i.e. when no all-shortening direction exists.

The certificate records, per free vertex, the program value t*; per edge,
the deviation of its realization from the geodesic; and per interior
vertex, the sum of consecutive comparison angles in rotation order, which
must reach a full turn at a length-minimizing position.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphInTarget
from .targets import EuclideanSpace

__all__ = [
    "descent_direction",
    "min_norm_hull_point",
    "straighten",
    "relax",
    "certify_conditions",
    "MinimizationCertificate",
]

ZERO_EDGE_TOL = 1e-13


def min_norm_hull_point(units: np.ndarray) -> np.ndarray:
    """Minimum-norm point of the convex hull of the given row vectors.

    The optimum lies in the relative interior of a face spanned by at most
    ``dim + 1`` affinely independent points, so all small supports are
    enumerated and the best feasible affine projection wins.  Exact and
    deterministic at the degrees this package meets (k <= a few dozen).
    """
    u = np.asarray(units, dtype=float)
    k, dim = u.shape
    best = None
    best_norm = np.inf
    best_subset = (0,)
    max_support = min(k, dim + 1)
    for size in range(1, max_support + 1):
        for subset in itertools.combinations(range(k), size):
            pts = u[list(subset)]
            if size == 1:
                cand = pts[0]
            else:
                # project the origin onto the affine hull through a least
                # squares on difference vectors (no Gram squaring, so the
                # value stays accurate near degenerate faces)
                base = pts[0]
                diffs = (pts[1:] - base).T
                s, *_ = np.linalg.lstsq(diffs, -base, rcond=None)
                lam = np.concatenate([[1.0 - s.sum()], s])
                if np.any(lam < -1e-10):
                    continue
                cand = base + diffs @ s
            norm = float(np.linalg.norm(cand))
            if norm < best_norm - 1e-15:
                best_norm = norm
                best = cand
                best_subset = subset
    if best is None:
        return u[0]
    if 0.0 < best_norm < 1e-6 and len(best_subset) >= 2:
        # near stationarity the direction error of a double-precision
        # projection is eps / |w|; one extended-precision pass keeps the
        # direction usable down to values far below the certificates' tol
        refined = _refine_projection_longdouble(u[list(best_subset)])
        if refined is not None:
            best = refined
    return best


def _refine_projection_longdouble(pts64: np.ndarray) -> np.ndarray | None:
    """Affine projection of the origin in extended precision (MGS + QR)."""
    pts = pts64.astype(np.longdouble)
    base = pts[0]
    cols = [pts[j] - base for j in range(1, len(pts))]
    q_cols = []
    r = np.zeros((len(cols), len(cols)), dtype=np.longdouble)
    for j, col in enumerate(cols):
        v = col.copy()
        for i, q in enumerate(q_cols):
            r[i, j] = np.dot(q, v)
            v = v - r[i, j] * q
        r[j, j] = np.sqrt(np.dot(v, v))
        if r[j, j] == 0.0:
            return None
        q_cols.append(v / r[j, j])
    rhs = np.array([-np.dot(q, base) for q in q_cols], dtype=np.longdouble)
    s = np.zeros(len(cols), dtype=np.longdouble)
    for j in range(len(cols) - 1, -1, -1):
        s[j] = (rhs[j] - np.dot(r[j, j + 1:], s[j + 1:])) / r[j, j]
    lam_rest = s
    lam0 = 1.0 - lam_rest.sum()
    if lam0 < -1e-10 or np.any(lam_rest < -1e-10):
        return None
    w = base + sum(si * ci for si, ci in zip(s, cols))
    return np.asarray(w, dtype=float)


def descent_direction(units, tol: float = 1e-12) -> tuple[float, np.ndarray | None]:
    """Best guaranteed shortening rate t* and its direction at a vertex star.

    ``units`` are unit vectors toward the neighbors.  Returns ``(t*, d)``
    with ``t* > 0`` iff some unit direction d shortens every incident edge
    at first order (rate at least t* each); ``t* == 0`` means the origin
    lies in the convex hull of the stars and no such direction exists.
    """
    u = np.asarray(units, dtype=float)
    if u.ndim != 2 or u.shape[0] == 0:
        raise ValueError("need a nonempty list of unit vectors")
    w = min_norm_hull_point(u)
    t_star = float(np.linalg.norm(w))
    if t_star <= tol:
        return 0.0, None
    return t_star, w / t_star


def straighten(g: GraphInTarget) -> GraphInTarget:
    """Replace every edge realization by the geodesic between its endpoints.

    Vertex points are unchanged and no edge length increases, since a
    geodesic is the shortest realization with the given endpoints.
    """
    out = g.with_points(g.points)
    out.edge_paths = {}
    return out


@dataclass
class MinimizationCertificate:
    """First-order evidence that a mapped graph cannot be Pareto-shortened."""

    t_star: dict[int, float]
    angle_sums: dict[int, float]
    interior_vertices: list[int]
    residuals: dict[tuple[int, int], float]
    iterations: int
    converged: bool
    skipped_vertices: list[int] = field(default_factory=list)
    log: list[str] = field(default_factory=list)
    tol_descent: float = 1e-8
    tol_angle: float = 1e-6
    tol_geo: float = 1e-9

    @property
    def worst_t_star(self) -> float:
        return max(self.t_star.values(), default=0.0)

    @property
    def worst_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def worst_angle_deficit(self) -> float:
        gaps = [
            2.0 * np.pi - self.angle_sums[v]
            for v in self.interior_vertices
            if v in self.angle_sums
        ]
        return max(gaps, default=0.0)

    @property
    def valid(self) -> bool:
        return (
            self.worst_t_star <= self.tol_descent
            and self.worst_residual <= self.tol_geo
            and self.worst_angle_deficit <= self.tol_angle
        )

    def summary(self) -> dict:
        return {
            "valid": bool(self.valid),
            "converged": bool(self.converged),
            "iterations": self.iterations,
            "worst_t_star": float(self.worst_t_star),
            "worst_residual": float(self.worst_residual),
            "worst_angle_deficit": float(self.worst_angle_deficit),
            "skipped_vertices": list(self.skipped_vertices),
            "tolerances": {
                "descent": self.tol_descent,
                "angle": self.tol_angle,
                "geodesic": self.tol_geo,
            },
        }


def _vertex_star(g: GraphInTarget, nbrs: list[list[int]], v: int):
    p = g.points
    vecs = np.asarray([p[w] - p[v] for w in nbrs[v]])
    lens = np.linalg.norm(vecs, axis=1)
    return vecs, lens


def relax(
    g: GraphInTarget,
    tol_descent: float = 1e-8,
    max_iter: int = 2000,
) -> tuple[GraphInTarget, MinimizationCertificate]:
    """Sweep free vertices into Pareto-stationary position.

    Each accepted move strictly decreases every incident edge length
    (backtracking line search, halving from the shortest incident edge),
    so the final graph is edgewise dominated by the input.  Terminates
    when no free vertex admits a shortening direction above ``tol_descent``
    or when ``max_iter`` sweeps have run.
    """
    if not isinstance(g.target, EuclideanSpace):
        raise NotImplementedError(
            "relaxation moves vertices freely and is implemented for Euclidean targets"
        )
    g.require_valid()
    if g.edge_paths:
        g = straighten(g)
    work = g.with_points([np.array(p, dtype=float) for p in g.points])
    nbrs = work.neighbors()
    free = [v for v in range(work.n_vertices) if v not in work.pinned]
    skipped: set[int] = set()
    log: list[str] = []
    t_star: dict[int, float] = {}
    iterations = 0
    converged = False
    for sweep in range(max_iter):
        iterations = sweep + 1
        moved = False
        worst = 0.0
        for v in free:
            if not nbrs[v]:
                continue
            vecs, lens = _vertex_star(work, nbrs, v)
            if np.any(lens <= ZERO_EDGE_TOL):
                skipped.add(v)
                t_star[v] = 0.0
                continue
            units = vecs / lens[:, None]
            t, d = descent_direction(units)
            t_star[v] = t
            worst = max(worst, t)
            if t <= tol_descent or d is None:
                continue
            # the squared-length change along d is exactly
            # eta * (eta - 2 * len_w * <d, u_w>), so every incident edge
            # strictly shrinks whenever eta < 2 * min_w len_w * <d, u_w>;
            # this certificate avoids the cancellation of comparing
            # rounded lengths near stationarity
            drops = units @ d
            eta_max = 2.0 * float((lens * drops).min())
            if eta_max <= 1e-300:
                log.append(f"sweep {sweep}: vanishing step window at vertex {v}")
                continue
            step = float(lens.min())
            while step >= eta_max:
                step *= 0.5
            work.points[v] = work.points[v] + step * d
            moved = True
        if not moved:
            # a sweep without any accepted move repeats forever; stop here
            converged = worst <= tol_descent
            break
    if not converged:
        log.append(f"stalled after {iterations} sweeps; worst t* = {worst:.3g}")
    cert = certify_conditions(work, tol_descent=tol_descent)
    cert.iterations = iterations
    cert.converged = converged
    cert.skipped_vertices = sorted(skipped)
    cert.log = log + cert.log
    return work, cert


def _edge_residual(g: GraphInTarget, u: int, v: int, samples: int = 8) -> float:
    """Deviation of the edge realization from the endpoint geodesic."""
    key = (min(u, v), max(u, v))
    path = g.edge_paths.get(key)
    if path is None:
        return 0.0
    pts = list(path)
    seg = [0.0]
    for i in range(len(pts) - 1):
        seg.append(seg[-1] + g.target.distance(pts[i], pts[i + 1]))
    total = seg[-1]
    if total == 0.0:
        return 0.0
    worst = 0.0
    for k in range(1, samples):
        t = k / samples
        want = g.target.geodesic_eval(pts[0], pts[-1], t)
        s = t * total
        j = int(np.searchsorted(seg, s)) - 1
        j = max(0, min(j, len(pts) - 2))
        local = 0.0 if seg[j + 1] == seg[j] else (s - seg[j]) / (seg[j + 1] - seg[j])
        have = g.target.geodesic_eval(pts[j], pts[j + 1], local)
        worst = max(worst, g.target.distance(want, have))
    return worst


def certify_conditions(
    g: GraphInTarget,
    tol_geo: float = 1e-9,
    tol_descent: float = 1e-8,
    tol_angle: float = 1e-6,
) -> MinimizationCertificate:
    """Check the three necessary conditions of a length-minimizing position.

    (a) every edge is realized as a geodesic (residual <= tol_geo);
    (b) no free vertex admits an all-shortening direction (t* <= tol);
    (c) at every interior vertex the consecutive comparison angles in
        rotation order sum to at least a full turn.
    The conditions are necessary only: configurations exist that satisfy
    all three yet still admit a global shortening deformation.
    """
    g.require_valid()
    nbrs = g.neighbors()
    residuals = {e: _edge_residual(g, *e) for e in g.edges}
    t_star: dict[int, float] = {}
    skipped: list[int] = []
    euclidean = isinstance(g.target, EuclideanSpace)
    for v in range(g.n_vertices):
        if v in g.pinned or not nbrs[v]:
            continue
        if euclidean:
            vecs, lens = _vertex_star(g, nbrs, v)
            if np.any(lens <= ZERO_EDGE_TOL):
                skipped.append(v)
                t_star[v] = 0.0
                continue
            t, _ = descent_direction(vecs / lens[:, None])
            t_star[v] = t
    angle_sums: dict[int, float] = {}
    for v in range(g.n_vertices):
        if v in g.pinned:
            continue
        rot = g.rotation[v]
        if len(rot) < 2:
            continue
        try:
            total = 0.0
            for k, w in enumerate(rot):
                w2 = rot[(k + 1) % len(rot)]
                total += g.target.comparison_angle(g.points[v], g.points[w], g.points[w2])
            angle_sums[v] = total
        except ValueError:
            skipped.append(v)
    log: list[str] = []
    if g.spherical_diagnostics():
        # no planar embedding: the full-turn condition has no interior set
        interior = []
        log.append("rotation system is not spherical; angle condition not applied")
    else:
        outer = set(g.outer_walk())
        interior = [
            v
            for v in range(g.n_vertices)
            if v not in g.pinned and v not in outer and len(nbrs[v]) >= 2
        ]
    return MinimizationCertificate(
        t_star=t_star,
        angle_sums=angle_sums,
        interior_vertices=interior,
        residuals=residuals,
        iterations=0,
        converged=True,
        skipped_vertices=sorted(set(skipped)),
        log=log,
        tol_descent=tol_descent,
        tol_angle=tol_angle,
        tol_geo=tol_geo,
    )
