"""Strictly saddle height-field patches and their balancing field systems.

A patch is a map s(x, y) into Euclidean 3-space on a uniform grid.  On a
strictly saddle patch (principal curvatures of opposite sign everywhere),
an array of four vector fields

    v1 = e1 / sqrt(|k1|),  v2 = e2 / sqrt(|k2|),
    v3 = l1 * a1,          v4 = l2 * a2,

with e_i the unit principal directions and a_i the asymptotic coordinate
fields, can be scaled so that the second-order operator

    D_v s = sum_i v_i(v_i s)

vanishes: the normal parts cancel by construction (the principal terms
contribute opposite unit normal curvatures, the asymptotic terms have
none), and the tangential parts cancel when w = (l1^2, l2^2) satisfies
the semilinear system  dw1/dx = h1(x, y, w),  dw2/dy = h2(x, y, w)  along
the two asymptotic coordinate directions.  In rotated coordinates
x = t + z, y = t - z this is a first-order hyperbolic system with
characteristic speeds +-1; the solver marches it away from the grid
anti-diagonal (the t = 0 line) with unit data, following each
characteristic family exactly along the grid axes with a Heun corrector,
so the update is an upwind difference along the characteristics and the
scheme is second-order accurate.

The accompanying quadrature energy  E_v s = sum_i int |v_i s|^2  is an
exactly convex function of the grid values, which is what turns a
vanishing operator into minimality evidence under boundary-fixed
perturbations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HeightFieldPatch",
    "FieldArray",
    "CurvatureFrame",
    "FieldSystemError",
    "bilinear_saddle_patch",
    "difference_saddle_patch",
    "patch_from_function",
    "curvature_frame",
    "energy",
    "laplacian",
    "solve_field_system",
    "field_system_report",
    "perturbation_evidence",
]


class FieldSystemError(RuntimeError):
    """Raised when the field system cannot be solved on the given patch."""


@dataclass
class HeightFieldPatch:
    """Uniform rectangular grid carrying a map into Euclidean 3-space."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # (nx, ny, 3)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.x.size, self.y.size, 3):
            raise ValueError("values must have shape (len(x), len(y), 3)")
        for coords, name in ((self.x, "x"), (self.y, "y")):
            if coords.size < 5:
                raise ValueError(f"{name} grid needs at least 5 nodes for stencils")
            steps = np.diff(coords)
            if steps.min() <= 0 or np.ptp(steps) > 1e-9 * abs(steps[0]):
                raise ValueError(f"{name} grid must be uniform and increasing")

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def hy(self) -> float:
        return float(self.y[1] - self.y[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[0], self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "HeightFieldPatch":
        return HeightFieldPatch(self.x, self.y, np.asarray(values, dtype=float))

    def crop(self, i0: int, i1: int, j0: int, j1: int) -> "HeightFieldPatch":
        return HeightFieldPatch(self.x[i0:i1], self.y[j0:j1], self.values[i0:i1, j0:j1])


def patch_from_function(fn, half_width: float = 0.5, n: int = 32) -> HeightFieldPatch:
    """Sample (x, y) -> point in R^3 on a centered square grid of n cells."""
    coords = np.linspace(-half_width, half_width, n + 1)
    xs, ys = np.meshgrid(coords, coords, indexing="ij")
    vals = np.asarray(fn(xs, ys))
    if vals.shape[0] == 3:
        vals = np.moveaxis(vals, 0, -1)
    return HeightFieldPatch(coords, coords, vals)


def bilinear_saddle_patch(half_width: float = 0.5, n: int = 32, coef: float = 1.0) -> HeightFieldPatch:
    """The saddle z = coef * x * y; its asymptotic curves are the grid axes."""
    return patch_from_function(
        lambda xs, ys: np.stack([xs, ys, coef * xs * ys], axis=-1), half_width, n
    )


def difference_saddle_patch(half_width: float = 0.5, n: int = 32) -> HeightFieldPatch:
    """The saddle z = x^2 - y^2 with diagonal asymptotic directions."""
    return patch_from_function(
        lambda xs, ys: np.stack([xs, ys, xs * xs - ys * ys], axis=-1), half_width, n
    )


# --------------------------------------------------------------------------
# finite differences


def _d(arr: np.ndarray, h: float, axis: int) -> np.ndarray:
    return np.gradient(arr, h, axis=axis, edge_order=2)


def _dd(arr: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second derivative; central interior, one-sided 2nd order at edges."""
    out = np.empty_like(arr)
    a = np.moveaxis(arr, axis, 0)
    o = np.moveaxis(out, axis, 0)
    o[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / (h * h)
    o[0] = (2.0 * a[0] - 5.0 * a[1] + 4.0 * a[2] - a[3]) / (h * h)
    o[-1] = (2.0 * a[-1] - 5.0 * a[-2] + 4.0 * a[-3] - a[-4]) / (h * h)
    return out


def directional_derivative(patch: HeightFieldPatch, vec: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Derivative of a grid quantity along a parameter vector field."""
    ax = _d(arr, patch.hx, 0)
    ay = _d(arr, patch.hy, 1)
    return vec[..., :1] * ax + vec[..., 1:2] * ay


@dataclass
class FieldArray:
    """Vector fields on the patch grid, with the saddle scalings when solved."""

    fields: list[np.ndarray]                    # each (nx, ny, 2)
    patch: HeightFieldPatch
    lambda1: np.ndarray | None = None
    lambda2: np.ndarray | None = None
    shrunk: bool = False
    window: tuple[int, int] | None = None
    meta: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# curvature frame


@dataclass
class CurvatureFrame:
    kappa1: np.ndarray
    kappa2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    first_form: tuple[np.ndarray, np.ndarray, np.ndarray]    # E, F, G
    second_form: tuple[np.ndarray, np.ndarray, np.ndarray]   # L, M, N
    s_x: np.ndarray
    s_y: np.ndarray
    normal: np.ndarray


def _orient(vfield: np.ndarray, reference: np.ndarray) -> np.ndarray:
    sign = np.where(np.sum(vfield * reference, axis=-1, keepdims=True) < 0.0, -1.0, 1.0)
    return vfield * sign


def curvature_frame(patch: HeightFieldPatch, strict_tol: float = 1e-10) -> CurvatureFrame:
    """Principal and asymptotic data of a strictly saddle patch.

    Raises (with the offending node) when the Gauss curvature is not
    negative beyond ``strict_tol`` everywhere, since asymptotic directions
    then degenerate.
    """
    s = patch.values
    s_x = _d(s, patch.hx, 0)
    s_y = _d(s, patch.hy, 1)
    s_xx = _dd(s, patch.hx, 0)
    s_yy = _dd(s, patch.hy, 1)
    s_xy = _d(s_x, patch.hy, 1)
    normal = np.cross(s_x, s_y)
    nn = np.linalg.norm(normal, axis=-1, keepdims=True)
    if np.any(nn <= 0.0):
        raise FieldSystemError("degenerate parametrization: zero normal")
    normal = normal / nn
    E = np.sum(s_x * s_x, axis=-1)
    F = np.sum(s_x * s_y, axis=-1)
    G = np.sum(s_y * s_y, axis=-1)
    L = np.sum(s_xx * normal, axis=-1)
    M = np.sum(s_xy * normal, axis=-1)
    N = np.sum(s_yy * normal, axis=-1)
    det_i = E * G - F * F
    gauss = (L * N - M * M) / det_i
    if np.any(gauss >= -strict_tol):
        i, j = np.unravel_index(int(np.argmax(gauss)), gauss.shape)
        raise FieldSystemError(
            f"patch is not strictly saddle at node ({i},{j}): "
            f"Gauss curvature {gauss[i, j]:.3g}"
        )
    mean = (L * G - 2.0 * M * F + N * E) / (2.0 * det_i)
    root = np.sqrt(mean * mean - gauss)
    kappa1 = mean + root
    kappa2 = mean - root

    def principal_direction(kappa):
        # rows of (II - kappa I); the null vector is the direction
        a11 = L - kappa * E
        a12 = M - kappa * F
        a22 = N - kappa * G
        v = np.where(
            (np.abs(a11) >= np.abs(a22))[..., None],
            np.stack([-a12, a11], axis=-1),
            np.stack([-a22, a12], axis=-1),
        )
        norm_i = np.sqrt(
            E * v[..., 0] ** 2 + 2 * F * v[..., 0] * v[..., 1] + G * v[..., 1] ** 2
        )
        return v / norm_i[..., None]

    e1 = principal_direction(kappa1)
    e2 = principal_direction(kappa2)
    center = (patch.shape[0] // 2, patch.shape[1] // 2)
    e1 = _orient(e1, e1[center])
    e2 = _orient(e2, e2[center])

    # null directions of the second form: L u^2 + 2 M u v + N v^2 = 0
    disc = np.sqrt(M * M - L * N)
    small_l = np.abs(L) <= 1e-12 * np.maximum(np.abs(M), 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u_plus = np.where(small_l, 1.0, (-M + disc) / L)
        u_minus = np.where(small_l, -N / (2.0 * M), (-M - disc) / L)
    a_plus = np.stack([u_plus, np.ones_like(u_plus)], axis=-1)
    a_minus = np.stack([u_minus, np.ones_like(u_minus)], axis=-1)
    a_zero = np.stack([np.ones_like(u_plus), np.zeros_like(u_plus)], axis=-1)
    a_plus = np.where(small_l[..., None], a_zero, a_plus)
    a_plus /= np.linalg.norm(a_plus, axis=-1, keepdims=True)
    a_minus /= np.linalg.norm(a_minus, axis=-1, keepdims=True)
    # a1 is the family closer to the +x axis
    swap = np.abs(a_plus[..., 0]) < np.abs(a_minus[..., 0])
    a1 = np.where(swap[..., None], a_minus, a_plus)
    a2 = np.where(swap[..., None], a_plus, a_minus)
    a1 = _orient(a1, np.array([1.0, 0.0]))
    a2 = _orient(a2, np.array([0.0, 1.0]))
    return CurvatureFrame(
        kappa1, kappa2, e1, e2, a1, a2, (E, F, G), (L, M, N), s_x, s_y, normal
    )


# --------------------------------------------------------------------------
# energy and the operator


def energy(patch: HeightFieldPatch, fields: FieldArray | list, values: np.ndarray | None = None) -> float:
    """Trapezoidal quadrature of the summed squared directional derivatives.

    Exactly convex in the grid values: every term is a fixed nonnegative
    weight times the square of a linear stencil.
    """
    vecs = fields.fields if isinstance(fields, FieldArray) else fields
    vals = patch.values if values is None else np.asarray(values, dtype=float)
    total = 0.0
    for vec in vecs:
        deriv = directional_derivative(patch, vec, vals)
        dens = np.sum(deriv * deriv, axis=-1)
        total += float(np.trapezoid(np.trapezoid(dens, dx=patch.hy, axis=1), dx=patch.hx))
    return total


def laplacian(patch: HeightFieldPatch, fields: FieldArray | list) -> np.ndarray:
    """Nested directional derivatives sum_i v_i(v_i s) on interior nodes."""
    vecs = fields.fields if isinstance(fields, FieldArray) else fields
    s = patch.values
    out = np.zeros_like(s)
    for vec in vecs:
        g = directional_derivative(patch, vec, s)
        out += directional_derivative(patch, vec, g)
    return out[1:-1, 1:-1]


# --------------------------------------------------------------------------
# the field system


def _tangential_coefficients(frame: CurvatureFrame, u: np.ndarray):
    E, F, G = frame.first_form
    det = E * G - F * F
    ub1 = np.sum(u * frame.s_x, axis=-1)
    ub2 = np.sum(u * frame.s_y, axis=-1)
    c1 = (G * ub1 - F * ub2) / det
    c2 = (E * ub2 - F * ub1) / det
    return c1, c2


def solve_field_system(
    patch: HeightFieldPatch,
    pos_tol: float = 1e-9,
    asym_tol: float = 1e-8,
) -> FieldArray:
    """Solve for the asymptotic scalings that cancel the operator.

    Requires the grid axes to be the asymptotic coordinate directions
    (checked: the second form must vanish on them), which holds for
    patches sampled in asymptotic coordinates such as z = c x y.  The
    squared scalings w = (l1^2, l2^2) obey one transport equation per
    characteristic family; both are marched from unit data on the grid
    anti-diagonal with a Heun corrector.  If positivity fails, the patch
    is shrunk to the largest centered window on which it holds.
    """
    frame = curvature_frame(patch)
    nx, ny = patch.shape
    if nx != ny:
        raise FieldSystemError(
            "step configuration invalid for characteristic marching: grid must be square"
        )
    if abs(patch.hx - patch.hy) > 1e-12 * patch.hx:
        raise FieldSystemError(
            "step configuration invalid for characteristic marching: hx must equal hy"
        )
    E, F, G = frame.first_form
    L, M, N = frame.second_form
    scale = np.abs(M).max()
    if np.abs(L).max() > asym_tol * scale or np.abs(N).max() > asym_tol * scale:
        raise FieldSystemError(
            "grid axes are not asymptotic: sample the patch in asymptotic "
            "coordinates (second form must vanish on the axes)"
        )

    inv_sqrt_k1 = 1.0 / np.sqrt(np.abs(frame.kappa1))
    inv_sqrt_k2 = 1.0 / np.sqrt(np.abs(frame.kappa2))
    v1 = frame.e1 * inv_sqrt_k1[..., None]
    v2 = frame.e2 * inv_sqrt_k2[..., None]

    s = patch.values
    g1 = directional_derivative(patch, v1, s)
    g2 = directional_derivative(patch, v2, s)
    T = directional_derivative(patch, v1, g1) + directional_derivative(patch, v2, g2)
    A1 = _dd(s, patch.hx, 0)   # a1(a1 s) for the coordinate field a1
    A2 = _dd(s, patch.hy, 1)

    t1, t2 = _tangential_coefficients(frame, T)
    a11, a12 = _tangential_coefficients(frame, A1)
    a21, a22 = _tangential_coefficients(frame, A2)

    def h1(i, j, w1, w2):
        return -2.0 * (t1[i, j] + w1 * a11[i, j] + w2 * a21[i, j])

    def h2(i, j, w1, w2):
        return -2.0 * (t2[i, j] + w1 * a12[i, j] + w2 * a22[i, j])

    n = nx - 1
    hx, hy = patch.hx, patch.hy
    w1 = np.full((nx, ny), np.nan)
    w2 = np.full((nx, ny), np.nan)
    diag_i = np.arange(nx)
    w1[diag_i, n - diag_i] = 1.0
    w2[diag_i, n - diag_i] = 1.0

    for c in range(n + 1, 2 * n + 1):
        i = np.arange(max(0, c - n), min(n, c) + 1)
        j = c - i
        f1_prev = h1(i - 1, j, w1[i - 1, j], w2[i - 1, j])
        f2_prev = h2(i, j - 1, w1[i, j - 1], w2[i, j - 1])
        w1_star = w1[i - 1, j] + hx * f1_prev
        w2_star = w2[i, j - 1] + hy * f2_prev
        w1[i, j] = w1[i - 1, j] + 0.5 * hx * (f1_prev + h1(i, j, w1_star, w2_star))
        w2[i, j] = w2[i, j - 1] + 0.5 * hy * (f2_prev + h2(i, j, w1_star, w2_star))
    for c in range(n - 1, -1, -1):
        i = np.arange(max(0, c - n), min(n, c) + 1)
        j = c - i
        f1_next = h1(i + 1, j, w1[i + 1, j], w2[i + 1, j])
        f2_next = h2(i, j + 1, w1[i, j + 1], w2[i, j + 1])
        w1_star = w1[i + 1, j] - hx * f1_next
        w2_star = w2[i, j + 1] - hy * f2_next
        w1[i, j] = w1[i + 1, j] - 0.5 * hx * (f1_next + h1(i, j, w1_star, w2_star))
        w2[i, j] = w2[i, j + 1] - 0.5 * hy * (f2_next + h2(i, j, w1_star, w2_star))

    shrunk = False
    window = (0, nx)
    if np.isnan(w1).any() or np.isnan(w2).any():
        raise FieldSystemError("marching failed to cover the grid")
    if min(w1.min(), w2.min()) <= pos_tol:
        k = 0
        ok = -1
        while 2 * k < n:
            sl = slice(k, nx - k)
            if min(w1[sl, sl].min(), w2[sl, sl].min()) > pos_tol:
                ok = k
                break
            k += 1
        if ok < 0:
            raise FieldSystemError(
                "lost positivity of the squared scalings; the patch is too "
                "large for a positive solution"
            )
        shrunk = True
        window = (ok, nx - ok)
        sub = patch.crop(ok, nx - ok, ok, nx - ok)
        return _assemble(sub, curvature_frame(sub), w1[ok:nx - ok, ok:nx - ok],
                         w2[ok:nx - ok, ok:nx - ok], shrunk, window)
    return _assemble(patch, frame, w1, w2, shrunk, window)


def _assemble(patch, frame, w1, w2, shrunk, window) -> FieldArray:
    lam1 = np.sqrt(w1)
    lam2 = np.sqrt(w2)
    v1 = frame.e1 / np.sqrt(np.abs(frame.kappa1))[..., None]
    v2 = frame.e2 / np.sqrt(np.abs(frame.kappa2))[..., None]
    v3 = np.stack([lam1, np.zeros_like(lam1)], axis=-1)
    v4 = np.stack([np.zeros_like(lam2), lam2], axis=-1)
    return FieldArray(
        fields=[v1, v2, v3, v4],
        patch=patch,
        lambda1=lam1,
        lambda2=lam2,
        shrunk=shrunk,
        window=window,
    )


def field_system_report(fields: FieldArray) -> dict:
    """Residual and structural checks of a solved field array."""
    patch = fields.patch
    res = laplacian(patch, fields)
    res_norm = float(np.abs(res).max()) if res.size else 0.0
    frame = curvature_frame(patch)
    s = patch.values
    checks = {}
    for name, vec in (("v3", fields.fields[2]), ("v4", fields.fields[3])):
        g = directional_derivative(patch, vec, s)
        gg = directional_derivative(patch, vec, g)
        normal_part = np.abs(np.sum(gg * frame.normal, axis=-1))[2:-2, 2:-2]
        checks[f"{name}_normal_part_max"] = float(normal_part.max()) if normal_part.size else 0.0
    return {
        "residual_max": res_norm,
        "lambda_min": float(min(fields.lambda1.min(), fields.lambda2.min())),
        "shrunk": fields.shrunk,
        **checks,
    }


# --------------------------------------------------------------------------
# minimality evidence


def perturbation_evidence(
    patch: HeightFieldPatch,
    fields: FieldArray,
    trials: int = 100,
    seed: int = 0,
    amplitude: float = 0.05,
    tol: float = 1e-9,
    ts=(0.25, 0.5, 0.75),
) -> dict:
    """Boundary-fixed random perturbations never decrease the energy.

    Each trial adds a random smooth interior bump (two outer grid rings
    pinned) and checks both the minimality inequality E(s') >= E(s) - tol
    and the convexity inequality along the segment to s'.
    """
    rng = np.random.default_rng(seed)
    nx, ny = patch.shape
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ring = np.minimum.reduce([ii, jj, nx - 1 - ii, ny - 1 - jj])
    mask = np.clip(ring / 2.0, 0.0, 1.0)
    xs, ys = np.meshgrid(patch.x, patch.y, indexing="ij")
    e0 = energy(patch, fields)
    min_margin = np.inf
    worst_convexity = -np.inf
    for _ in range(trials):
        bump = np.zeros((nx, ny, 3))
        for _ in range(2):
            cx = rng.uniform(patch.x[1], patch.x[-2])
            cy = rng.uniform(patch.y[1], patch.y[-2])
            width = rng.uniform(0.15, 0.4) * (patch.x[-1] - patch.x[0])
            direction = rng.standard_normal(3)
            blob = np.exp(-(((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * width * width)))
            bump += blob[..., None] * direction
        bump *= (mask * amplitude)[..., None]
        s1 = patch.values + bump
        e1 = energy(patch, fields, values=s1)
        min_margin = min(min_margin, e1 - e0)
        for t in ts:
            st = (1.0 - t) * patch.values + t * s1
            et = energy(patch, fields, values=st)
            worst_convexity = max(worst_convexity, et - ((1.0 - t) * e0 + t * e1))
    return {
        "trials": trials,
        "energy": e0,
        "min_margin": float(min_margin),
        "never_decreases": bool(min_margin >= -tol),
        "convexity_max_violation": float(worst_convexity),
        "convex_ok": bool(worst_convexity <= tol),
        "tolerance": tol,
    }
