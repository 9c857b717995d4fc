"""Finite graphs mapped into a target space with a planar rotation system.

The rotation system (counterclockwise cyclic neighbor order per vertex)
determines the faces by the usual directed-edge tracing; for graphs that
come with parameter-plane positions the outer face is the clockwise walk.
Faces are what the disc-gluing stage fills with comparison triangles.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .targets import EuclideanSpace, TargetSpace

__all__ = ["GraphInTarget", "rotation_from_positions"]


def rotation_from_positions(
    n: int, edges: list[tuple[int, int]], positions: np.ndarray
) -> list[list[int]]:
    """Counterclockwise neighbor order read off parameter-plane positions."""
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    rotation = []
    for v in range(n):
        ang = {
            w: float(np.arctan2(positions[w][1] - positions[v][1],
                                positions[w][0] - positions[v][0]))
            for w in nbrs[v]
        }
        rotation.append(sorted(nbrs[v], key=lambda w: (ang[w], w)))
    return rotation


@dataclass
class GraphInTarget:
    """Vertices with target points, edges, a pinned subset and rotations."""

    points: list                               # per-vertex target point
    edges: list[tuple[int, int]]               # undirected, u < v
    pinned: set[int]
    rotation: list[list[int]]                  # CCW neighbor order per vertex
    target: TargetSpace
    positions: np.ndarray | None = None        # optional parameter-plane coords
    edge_paths: dict[tuple[int, int], list] = field(default_factory=dict)
    # optional polyline realizations (target points, endpoints included);
    # absent entries mean the edge is realized as the geodesic

    def __post_init__(self):
        self.edges = sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in self.edges)
        self.pinned = {int(v) for v in self.pinned}
        if isinstance(self.target, EuclideanSpace):
            self.points = [np.asarray(p, dtype=float) for p in self.points]
        if self.positions is not None:
            self.positions = np.asarray(self.positions, dtype=float)

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    def neighbors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            out[u].append(v)
            out[v].append(u)
        return out

    def edge_length(self, u: int, v: int) -> float:
        key = (min(u, v), max(u, v))
        path = self.edge_paths.get(key)
        if path is None:
            return self.target.distance(self.points[u], self.points[v])
        return sum(
            self.target.distance(path[i], path[i + 1]) for i in range(len(path) - 1)
        )

    def edge_lengths(self) -> dict[tuple[int, int], float]:
        return {e: self.edge_length(*e) for e in self.edges}

    def validate(self) -> list[str]:
        problems: list[str] = []
        n = self.n_vertices
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                problems.append(f"edge ({u},{v}) out of range")
            if u == v:
                problems.append(f"loop edge at {u}")
        if problems:
            return problems
        nbrs = self.neighbors()
        if len(self.rotation) != n:
            problems.append("rotation system must list every vertex")
            return problems
        for v in range(n):
            if sorted(self.rotation[v]) != sorted(nbrs[v]):
                problems.append(f"rotation at {v} is not a permutation of its neighbors")
        if problems:
            return problems
        # connectivity
        if n > 0:
            seen = {0}
            stack = [0]
            while stack:
                x = stack.pop()
                for y in nbrs[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != n:
                problems.append("graph is not connected")
        return problems

    def spherical_diagnostics(self) -> list[str]:
        """Check that face tracing tiles the directed edges with Euler 2.

        Required before faces can be filled with triangles; plain
        relaxation does not need it.
        """
        try:
            walks = self.faces()
        except ValueError as exc:
            return [str(exc)]
        euler = self.n_vertices - len(self.edges) + len(walks)
        if self.edges and euler != 2:
            return [f"rotation system is not spherical: Euler {euler} != 2"]
        return []

    def require_valid(self) -> "GraphInTarget":
        problems = self.validate()
        if problems:
            raise ValueError("invalid GraphInTarget: " + "; ".join(problems))
        return self

    def faces(self) -> list[list[int]]:
        """All face walks (closed vertex sequences) traced from the rotations."""
        idx_in_rot = [
            {w: k for k, w in enumerate(rot)} for rot in self.rotation
        ]
        unused = {(u, v) for u, v in self.edges} | {(v, u) for u, v in self.edges}
        walks: list[list[int]] = []
        for start in sorted(unused):
            if start not in unused:
                continue
            walk = []
            u, v = start
            guard = 4 * len(self.edges) + 4
            while (u, v) in unused:
                unused.remove((u, v))
                walk.append(u)
                k = idx_in_rot[v].get(u)
                if k is None:
                    raise ValueError(f"rotation at {v} does not mention {u}")
                w = self.rotation[v][k - 1]
                u, v = v, w
                guard -= 1
                if guard < 0:
                    raise ValueError("face tracing does not close up")
            if (u, v) != start:
                raise ValueError("face tracing does not close up")
            walks.append(walk)
        return walks

    def outer_face_index(self, walks: list[list[int]] | None = None) -> int:
        """Index of the outer face: the clockwise walk when positions are
        known, otherwise the walk of greatest image length."""
        if walks is None:
            walks = self.faces()
        if self.positions is not None:
            areas = []
            for walk in walks:
                pts = self.positions[walk]
                areas.append(
                    0.5
                    * float(
                        np.sum(
                            pts[:, 0] * np.roll(pts[:, 1], -1)
                            - np.roll(pts[:, 0], -1) * pts[:, 1]
                        )
                    )
                )
            return int(np.argmin(areas))
        lengths = []
        for walk in walks:
            tot = 0.0
            for i, u in enumerate(walk):
                v = walk[(i + 1) % len(walk)]
                tot += self.edge_length(u, v)
            lengths.append(tot)
        return int(np.argmax(lengths))

    def bounded_faces(self) -> list[list[int]]:
        walks = self.faces()
        outer = self.outer_face_index(walks)
        return [w for k, w in enumerate(walks) if k != outer]

    def outer_walk(self) -> list[int]:
        walks = self.faces()
        return walks[self.outer_face_index(walks)]

    def with_points(self, points) -> "GraphInTarget":
        return replace(self, points=list(points), edge_paths=dict(self.edge_paths))
