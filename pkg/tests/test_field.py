import math
import random

import numpy as np
import pytest

from varviz.errors import ModeError, SolverError
from varviz.field import (
    GridSpec,
    build_field,
    check_mode_kernel,
    eval_field,
    fit_exact,
)
from varviz.kernels import KERNEL_IDS, KernelSpec, kernel_class
from varviz.model_table import PointCloud

from oracles import solve_dense_gauss


def make_cloud(pts):
    xs, ys, vs = zip(*pts)
    bounds = (min(xs), max(xs), min(ys), max(ys))
    return PointCloud(
        xs=tuple(xs),
        ys=tuple(ys),
        values=tuple(vs),
        ids=tuple(range(len(pts))),
        labels=(None,) * len(pts),
        bounds=bounds,
    )


def random_cloud(rng, n):
    pts = set()
    while len(pts) < n:
        pts.add((round(rng.random(), 6), round(rng.random(), 6)))
    return make_cloud([(x, y, rng.uniform(-2, 2)) for x, y in sorted(pts)])


def test_single_center_weight():
    cloud = make_cloud([(0.5, 0.5, 2.0)])
    ridge = 1e-8
    sol = fit_exact(cloud, KernelSpec("gaussian", sigma=1.0), ridge=ridge)
    assert sol.weights[0] == pytest.approx(2.0 / (1.0 + ridge), rel=1e-12)


def test_coincident_centers_merged_by_mean():
    cloud = make_cloud([(0.3, 0.3, 1.0), (0.3, 0.3, 3.0), (0.7, 0.7, 5.0)])
    sol = fit_exact(cloud, KernelSpec("gaussian"))
    assert len(sol.xs) == 2
    assert 2.0 in sol.values  # merged mean of {1.0, 3.0}


def test_three_center_weights_match_gaussian_elimination_oracle():
    cloud = make_cloud([(0.1, 0.2, 1.0), (0.8, 0.3, -1.0), (0.4, 0.9, 0.5)])
    kernel = KernelSpec("gaussian", sigma=0.5)
    sol = fit_exact(cloud, kernel, ridge=0.0)
    # independent dense solve of the same system
    from varviz.kernels import eval_kernel

    n = len(sol.xs)
    a = [
        [
            eval_kernel(kernel, math.hypot(sol.xs[i] - sol.xs[j], sol.ys[i] - sol.ys[j]))
            for j in range(n)
        ]
        for i in range(n)
    ]
    want = solve_dense_gauss(a, list(sol.values))
    assert np.allclose(sol.weights, want, rtol=1e-9, atol=1e-12)
    # interpolation property at the centers
    pts = np.column_stack([sol.xs, sol.ys])
    vals = eval_field(sol, kernel, "exact", pts)
    assert np.allclose(vals, sol.values, atol=1e-6)


def test_exact_mode_hits_data_points_for_many_kernels():
    rng = random.Random(7)
    cloud = random_cloud(rng, 12)
    pts = np.column_stack([cloud.xs, cloud.ys])
    for kid in ("gaussian", "multiquadric", "inverse_multiquadric", "paper", "cubic"):
        sol = fit_exact(cloud, KernelSpec(kid), ridge=0.0)
        vals = eval_field(sol, KernelSpec(kid), "exact", pts)
        span = max(cloud.values) - min(cloud.values)
        assert np.max(np.abs(vals - np.array(cloud.values))) <= 1e-6 * span, kid


def test_shepard_equidistant_mean():
    cloud = make_cloud([(0.0, 0.5, 0.0), (1.0, 0.5, 1.0)])
    v = eval_field(cloud, KernelSpec("gaussian"), "shepard", np.array([[0.5, 0.5]]))
    assert v[0] == pytest.approx(0.5)


def test_shepard_center_coincidence_limit_rule():
    cloud = make_cloud([(0.2, 0.2, -3.0), (0.8, 0.8, 7.0)])
    v = eval_field(cloud, KernelSpec("gaussian"), "shepard", np.array([[0.2, 0.2]]))
    assert v[0] == -3.0


def test_shepard_bounded_by_value_range():
    rng = random.Random(3)
    cloud = random_cloud(rng, 15)
    probes = np.array([[rng.random(), rng.random()] for _ in range(500)])
    for kid in ("gaussian", "inverse_quadratic", "exponential_root", "beckmann"):
        vals = eval_field(cloud, KernelSpec(kid), "shepard", probes)
        assert vals.min() >= min(cloud.values) - 1e-12
        assert vals.max() <= max(cloud.values) + 1e-12


def test_additive_coincident_points_sum():
    cloud = make_cloud([(0.5, 0.5, 1.0), (0.5, 0.5, 1.0)])
    v = eval_field(cloud, KernelSpec("gaussian"), "additive", np.array([[0.5, 0.5]]))
    assert v[0] == pytest.approx(2.0)


def test_additive_isolated_point_peaks_at_value():
    cloud = make_cloud([(0.5, 0.5, 3.0)])
    v = eval_field(cloud, KernelSpec("gaussian", sigma=0.05), "additive", np.array([[0.5, 0.5]]))
    assert v[0] == pytest.approx(3.0)


def test_additive_linearity():
    rng = random.Random(11)
    cloud = random_cloud(rng, 10)
    probes = np.array([[rng.random(), rng.random()] for _ in range(50)])
    base = eval_field(cloud, KernelSpec("gaussian"), "additive", probes)
    scaled_cloud = make_cloud(
        [(x, y, 3.5 * v) for x, y, v in zip(cloud.xs, cloud.ys, cloud.values)]
    )
    scaled = eval_field(scaled_cloud, KernelSpec("gaussian"), "additive", probes)
    assert np.allclose(scaled, 3.5 * base, rtol=1e-12, atol=0)


def test_mode_kernel_compatibility():
    for kid in KERNEL_IDS:
        check_mode_kernel("exact", KernelSpec(kid))  # exact admits everything
    with pytest.raises(ModeError):
        check_mode_kernel("shepard", KernelSpec("cubic"))
    with pytest.raises(ModeError):
        check_mode_kernel("additive", KernelSpec("wave"))
    with pytest.raises(ModeError):
        check_mode_kernel("sideways", KernelSpec("gaussian"))


def test_build_field_constant_shepard_is_constant():
    cloud = make_cloud([(0.2, 0.2, 4.0), (0.8, 0.5, 4.0), (0.5, 0.9, 4.0)])
    grid, _ = build_field(cloud, KernelSpec("gaussian"), "shepard", GridSpec(32, 32))
    assert np.allclose(grid.values, 4.0)
    assert grid.value_range[0] == pytest.approx(4.0)


def test_build_field_mirror_symmetry():
    pts = [(0.3, 0.4, 1.0), (0.7, 0.4, 1.0), (0.3, 0.8, -2.0), (0.7, 0.8, -2.0)]
    cloud = make_cloud(pts)
    grid, _ = build_field(cloud, KernelSpec("gaussian"), "exact", GridSpec(64, 64))
    assert np.allclose(grid.values, grid.values[:, ::-1], rtol=1e-9, atol=1e-12)


def test_build_field_transpose_symmetry():
    pts = [(0.2, 0.6, 1.5), (0.6, 0.2, 1.5), (0.9, 0.9, -1.0)]
    cloud = make_cloud(pts)
    grid, _ = build_field(cloud, KernelSpec("gaussian"), "exact", GridSpec(48, 48))
    assert np.allclose(grid.values, grid.values.T, rtol=1e-9, atol=1e-11)


def test_point_permutation_bit_identity():
    rng = random.Random(5)
    cloud = random_cloud(rng, 9)
    perm = list(range(9))
    random.Random(99).shuffle(perm)
    shuffled = PointCloud(
        xs=tuple(cloud.xs[i] for i in perm),
        ys=tuple(cloud.ys[i] for i in perm),
        values=tuple(cloud.values[i] for i in perm),
        ids=tuple(cloud.ids[i] for i in perm),
        labels=tuple(cloud.labels[i] for i in perm),
        bounds=cloud.bounds,
    )
    for mode, kid in (("exact", "paper"), ("shepard", "gaussian"), ("additive", "gaussian")):
        g1, _ = build_field(cloud, KernelSpec(kid), mode, GridSpec(32, 32))
        g2, _ = build_field(shuffled, KernelSpec(kid), mode, GridSpec(32, 32))
        assert g1.values.tobytes() == g2.values.tobytes(), (mode, kid)


def test_grid_pixel_mapping_and_margin():
    grid = GridSpec(width=100, height=50, margin=0.05)
    xs = grid.x_coords()
    assert xs[0] == pytest.approx(-0.05 + 0.5 / 100 * 1.1)
    assert xs[-1] == pytest.approx(-0.05 + 99.5 / 100 * 1.1)
    # round-trip: domain position of a pixel maps back to that pixel
    for px in (0, 13, 99):
        x = xs[px]
        assert grid.to_pixel(x, 0.5)[0] == px


def test_grid_csv_export():
    cloud = make_cloud([(0.5, 0.5, 1.0)])
    grid, _ = build_field(cloud, KernelSpec("gaussian"), "exact", GridSpec(16, 16))
    lines = grid.to_csv().decode().strip().split("\n")
    assert lines[0] == "i,j,value"
    assert len(lines) == 16 * 16 + 1
    i, j, v = lines[1].split(",")
    assert (i, j) == ("0", "0")
    assert float(v) == grid.values[0, 0]


def test_conditioning_warning_attaches_instead_of_failing():
    # nearly-coincident centers (just outside the merge tolerance) make the
    # gaussian system numerically singular
    cloud = make_cloud([(0.5, 0.5, 1.0), (0.5 + 1e-9, 0.5, 2.0), (0.9, 0.9, 0.0)])
    sol = fit_exact(cloud, KernelSpec("gaussian", sigma=0.3), ridge=0.0)
    pts = np.column_stack([sol.xs, sol.ys])
    vals = eval_field(sol, KernelSpec("gaussian", sigma=0.3), "exact", pts)
    ok = np.allclose(vals, sol.values, atol=1e-6 * 2.0)
    assert ok or sol.warnings


def test_exactly_singular_system_raises():
    # two thin-plate centers at distance exactly 1: phi(0)=0 and phi(1)=0,
    # so the kernel matrix is identically zero
    cloud = make_cloud([(0.0, 0.0, 1.0), (1.0, 0.0, 2.0)])
    with pytest.raises(SolverError) as exc:
        fit_exact(cloud, KernelSpec("thin_plate"), ridge=0.0)
    assert "ridge=0.0" in str(exc.value)


def test_empty_cloud_rejected():
    cloud = PointCloud(xs=(), ys=(), values=(), ids=(), labels=(), bounds=(0, 1, 0, 1))
    with pytest.raises(SolverError):
        fit_exact(cloud, KernelSpec("gaussian"))
