import numpy as np
import pytest

from catmin.fields import (
    FieldSystemError,
    HeightFieldPatch,
    bilinear_saddle_patch,
    curvature_frame,
    difference_saddle_patch,
    energy,
    field_system_report,
    laplacian,
    patch_from_function,
    perturbation_evidence,
    solve_field_system,
)


def unit_coordinate_fields(patch):
    nx, ny = patch.shape
    ex = np.zeros((nx, ny, 2))
    ex[..., 0] = 1.0
    ey = np.zeros((nx, ny, 2))
    ey[..., 1] = 1.0
    return [ex, ey]


# ------------------------------------------------------------- energy


def test_energy_constant_map_zero():
    patch = patch_from_function(lambda x, y: np.stack([0 * x + 1, 0 * y + 2, 0 * x], -1), 0.5, 8)
    assert energy(patch, unit_coordinate_fields(patch)) == pytest.approx(0.0, abs=1e-15)


def test_energy_linear_map_twice_area():
    patch = patch_from_function(lambda x, y: np.stack([x, y, 0 * x], -1), 0.5, 16)
    got = energy(patch, unit_coordinate_fields(patch))
    assert got == pytest.approx(2.0 * 1.0, abs=1e-12)  # area of [-1/2,1/2]^2 is 1


def test_energy_translation_invariant_and_quadratic_scaling():
    patch = bilinear_saddle_patch(0.5, 16, coef=1.3)
    fields = unit_coordinate_fields(patch)
    e0 = energy(patch, fields)
    shifted = patch.with_values(patch.values + np.array([3.0, -1.0, 2.0]))
    assert energy(shifted, fields) == pytest.approx(e0, rel=1e-12)
    scaled = patch.with_values(2.5 * patch.values)
    assert energy(scaled, fields) == pytest.approx(2.5**2 * e0, rel=1e-12)


def test_energy_matches_richardson_extrapolated_oracle():
    def run(n):
        patch = bilinear_saddle_patch(0.5, n, coef=1.0)
        return energy(patch, unit_coordinate_fields(patch))

    e1, e2, e4 = run(16), run(32), run(64)
    star = (4.0 * e4 - e2) / 3.0  # second-order extrapolation
    err1 = abs(e1 - star)
    err2 = abs(e2 - star)
    assert err2 <= err1 / 3.0  # roughly fourth of the error at half the step


# ------------------------------------------------------------- laplacian


def test_laplacian_linear_map_zero():
    patch = patch_from_function(lambda x, y: np.stack([x, 2 * y, x + y], -1), 0.5, 12)
    res = laplacian(patch, unit_coordinate_fields(patch))
    assert np.abs(res).max() <= 1e-12


def test_laplacian_quadratic_exact_any_grid():
    for n in (8, 16, 32):
        patch = patch_from_function(lambda x, y: np.stack([x, y, x * x], -1), 0.5, n)
        nx, ny = patch.shape
        ex = np.zeros((nx, ny, 2))
        ex[..., 0] = 1.0
        res = laplacian(patch, [ex])
        want = np.array([0.0, 0.0, 2.0])
        assert np.abs(res - want).max() <= 1e-10


# ------------------------------------------------------------- curvature


def test_curvature_frame_difference_saddle():
    patch = difference_saddle_patch(0.5, 32)
    frame = curvature_frame(patch)
    c = (16, 16)
    assert frame.kappa1[c] == pytest.approx(2.0, abs=1e-10)
    assert frame.kappa2[c] == pytest.approx(-2.0, abs=1e-10)
    for vec, want in ((frame.a1[c], [1, 1]), (frame.a2[c], [-1, 1])):
        want = np.asarray(want) / np.sqrt(2.0)
        assert min(np.linalg.norm(vec - want), np.linalg.norm(vec + want)) < 1e-9


def test_curvature_frame_off_center_matches_closed_form():
    # for z = x^2 - y^2 the Gauss curvature is -4 / (1 + 4x^2 + 4y^2)^2
    patch = difference_saddle_patch(0.5, 64)
    frame = curvature_frame(patch)
    i, j = 20, 40
    x, y = patch.x[i], patch.y[j]
    want = -4.0 / (1.0 + 4 * x * x + 4 * y * y) ** 2
    got = frame.kappa1[i, j] * frame.kappa2[i, j]
    assert got == pytest.approx(want, rel=1e-6)


def test_curvature_frame_rejects_plane_and_bowl():
    plane = patch_from_function(lambda x, y: np.stack([x, y, 0 * x], -1), 0.5, 8)
    with pytest.raises(FieldSystemError):
        curvature_frame(plane)
    bowl = patch_from_function(lambda x, y: np.stack([x, y, x * x + y * y], -1), 0.5, 8)
    with pytest.raises(FieldSystemError) as err:
        curvature_frame(bowl)
    assert "node" in str(err.value)


# ------------------------------------------------------------- field system


def test_solver_requires_asymptotic_axes():
    with pytest.raises(FieldSystemError) as err:
        solve_field_system(difference_saddle_patch(0.5, 16))
    assert "asymptotic" in str(err.value)


def test_solver_requires_square_grid():
    base = bilinear_saddle_patch(0.5, 16)
    ragged = HeightFieldPatch(base.x, base.y[:-2], base.values[:, :-2])
    with pytest.raises(FieldSystemError) as err:
        solve_field_system(ragged)
    assert "step configuration" in str(err.value)


def test_solver_positive_and_second_order_residual():
    norms = {}
    for n in (16, 32, 64):
        patch = bilinear_saddle_patch(0.5, n, coef=1.0)
        fa = solve_field_system(patch)
        rep = field_system_report(fa)
        assert rep["lambda_min"] > 0.0
        assert not rep["shrunk"]
        assert rep["v3_normal_part_max"] <= 1e-10
        assert rep["v4_normal_part_max"] <= 1e-10
        norms[n] = rep["residual_max"]
    order1 = np.log2(norms[16] / norms[32])
    order2 = np.log2(norms[32] / norms[64])
    assert 1.5 <= order1 <= 2.5
    assert 1.5 <= order2 <= 2.5


def test_solver_shrinks_when_positivity_fails():
    patch = bilinear_saddle_patch(0.7, 32, coef=3.0)
    fa = solve_field_system(patch)
    assert fa.shrunk
    lo, hi = fa.window
    assert 0 < lo < hi <= 33
    rep = field_system_report(fa)
    assert rep["lambda_min"] > 0.0


# ------------------------------------------------------------- minimality


def test_perturbation_evidence_on_solved_patch():
    patch = bilinear_saddle_patch(0.5, 24, coef=1.0)
    fa = solve_field_system(patch)
    rep = perturbation_evidence(patch, fa, trials=40, seed=7)
    assert rep["never_decreases"], rep
    assert rep["convex_ok"], rep


def test_perturbation_zero_is_equality():
    patch = bilinear_saddle_patch(0.5, 16, coef=1.0)
    fa = solve_field_system(patch)
    e0 = energy(patch, fa)
    assert energy(patch, fa, values=patch.values.copy()) == pytest.approx(e0, rel=1e-15)
