"""Geodesic target spaces: the interface and the Euclidean model.

A target space provides three primitives: a distance, constant-speed
geodesic evaluation, and the comparison angle read off side lengths by the
planar law of cosines.  Everything downstream (graph relaxation, triangle
majorants, disc gluing) consumes targets only through these primitives.
"""

from __future__ import annotations

import numpy as np

__all__ = ["TargetSpace", "EuclideanSpace", "angle_from_sides"]


def angle_from_sides(a: float, b: float, c: float) -> float:
    """Angle opposite side ``c`` in the planar triangle with sides a, b, c.

    The cosine is clamped to [-1, 1] so that slightly inconsistent side
    lengths (from approximate distances) still yield an angle.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("apex sides must be positive for an angle")
    cos = (a * a + b * b - c * c) / (2.0 * a * b)
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


class TargetSpace:
    """Abstract geodesic metric space."""

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def geodesic_eval(self, p, q, t: float):
        """Point at parameter ``t`` in [0, 1] on a constant-speed geodesic p->q."""
        raise NotImplementedError

    def comparison_angle(self, apex, p, q) -> float:
        """Angle at ``apex`` of the planar triangle with matching side lengths."""
        a = self.distance(apex, p)
        b = self.distance(apex, q)
        if a == 0.0 or b == 0.0:
            raise ValueError("comparison angle undefined: point coincides with apex")
        c = self.distance(p, q)
        return angle_from_sides(a, b, c)

    def contains(self, p) -> bool:
        return True


class EuclideanSpace(TargetSpace):
    """R^m with straight segments as geodesics."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = int(dimension)

    def point(self, coords) -> np.ndarray:
        p = np.asarray(coords, dtype=float)
        if p.shape != (self.dimension,):
            raise ValueError(f"expected a point of dimension {self.dimension}")
        return p

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return p.shape == (self.dimension,) and bool(np.all(np.isfinite(p)))

    def distance(self, p, q) -> float:
        return float(np.linalg.norm(np.asarray(p, float) - np.asarray(q, float)))

    def geodesic_eval(self, p, q, t: float) -> np.ndarray:
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        return (1.0 - t) * p + t * q

    def __repr__(self):
        return f"EuclideanSpace({self.dimension})"
