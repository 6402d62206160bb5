"""Scalar fields over a raster grid from scattered model points.

Three evaluation modes share one kernel catalog:

* ``exact``    solves the kernel interpolation system so the field passes
               through every data value; admits any kernel.
* ``shepard``  kernel-weighted mean of the data values, bounded by the data
               range; needs a decaying kernel.
* ``additive`` unnormalized superposition scaled so an isolated point peaks
               at its own value; overlapping points sum ("darker and higher").

Point order never matters: inputs are sorted into a canonical order before
any floating-point work, so permuting the cloud reproduces grids bit for bit.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError, ModeError, SolverError
from .kernels import DECAYING, KernelSpec, eval_kernel_array
from .model_table import PointCloud

MODES = ("exact", "shepard", "additive")
DEFAULT_MODE = "exact"
DEFAULT_RIDGE = 1e-8
DUPLICATE_TOL = 1e-12
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Raster over the normalized unit square plus a margin on each side."""

    width: int = 256
    height: int = 256
    margin: float = 0.05

    def __post_init__(self):
        for name, v in (("width", self.width), ("height", self.height)):
            if not 16 <= v <= 4096:
                raise ConfigError(f"{name} must be in [16, 4096], got {v}")
        if not 0.0 <= self.margin < 0.5:
            raise ConfigError(f"margin must be in [0, 0.5), got {self.margin}")

    def x_coords(self) -> np.ndarray:
        """Domain x of each pixel-column center."""
        i = np.arange(self.width, dtype=float)
        return -self.margin + (i + 0.5) / self.width * (1.0 + 2.0 * self.margin)

    def y_coords(self) -> np.ndarray:
        i = np.arange(self.height, dtype=float)
        return -self.margin + (i + 0.5) / self.height * (1.0 + 2.0 * self.margin)

    def to_pixel(self, x: float, y: float) -> tuple[int, int]:
        """Nearest pixel (column, row) for a domain point."""
        px = int(round((x + self.margin) / (1.0 + 2.0 * self.margin) * self.width - 0.5))
        py = int(round((y + self.margin) / (1.0 + 2.0 * self.margin) * self.height - 0.5))
        return px, py


@dataclass(frozen=True)
class FieldSolution:
    """Expansion weights from the exact-mode solve over merged centers."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    kernel: KernelSpec
    ridge: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class FieldGrid:
    spec: GridSpec
    values: np.ndarray  # shape (height, width), row j / column i
    value_range: tuple[float, float]

    def to_csv(self) -> bytes:
        """width*height rows of "i,j,value" for external verification."""
        buf = io.StringIO()
        buf.write("i,j,value\n")
        for j in range(self.spec.height):
            row = self.values[j]
            for i in range(self.spec.width):
                buf.write(f"{i},{j},{float(row[i])!r}\n")
        return buf.getvalue().encode("utf-8")


def _canonical_arrays(cloud: PointCloud) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Point coordinates/values sorted by (x, y, value, id).

    Ids are unique, so the order is total: any permutation of the same cloud
    yields identical arrays and therefore bit-identical downstream results.
    """
    order = sorted(
        range(len(cloud)),
        key=lambda i: (cloud.xs[i], cloud.ys[i], cloud.values[i], cloud.ids[i]),
    )
    xs = np.array([cloud.xs[i] for i in order], dtype=float)
    ys = np.array([cloud.ys[i] for i in order], dtype=float)
    vs = np.array([cloud.values[i] for i in order], dtype=float)
    return xs, ys, vs


def _merge_duplicates(
    xs: np.ndarray, ys: np.ndarray, vs: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Average values of centers coinciding to within DUPLICATE_TOL.

    Input is canonically sorted, so coincident centers are adjacent.
    """
    out_x: list[float] = []
    out_y: list[float] = []
    out_v: list[list[float]] = []
    for x, y, v in zip(xs, ys, vs):
        if out_x and abs(x - out_x[-1]) <= DUPLICATE_TOL and abs(y - out_y[-1]) <= DUPLICATE_TOL:
            out_v[-1].append(v)
        else:
            out_x.append(x)
            out_y.append(y)
            out_v.append([v])
    merged = np.array([float(np.mean(vals)) for vals in out_v])
    return np.array(out_x), np.array(out_y), merged


def _distance_matrix(ax: np.ndarray, ay: np.ndarray, bx: np.ndarray, by: np.ndarray) -> np.ndarray:
    dx = ax[:, None] - bx[None, :]
    dy = ay[:, None] - by[None, :]
    return np.sqrt(dx * dx + dy * dy)


def check_mode_kernel(mode: str, kernel: KernelSpec) -> None:
    if mode not in MODES:
        raise ModeError(f"unknown field mode '{mode}'; one of {', '.join(MODES)}")
    if mode in ("shepard", "additive") and kernel.klass != DECAYING:
        raise ModeError(
            f"{mode} mode requires a decaying kernel; '{kernel.id}' is {kernel.klass}"
        )


def fit_exact(cloud: PointCloud, kernel: KernelSpec, ridge: float = DEFAULT_RIDGE) -> FieldSolution:
    """Solve (Phi + ridge*I) w = v over duplicate-merged centers.

    Dense LU with iterative refinement; if the residual cannot be driven
    below RESIDUAL_TOL * ||v|| a conditioning warning is attached rather
    than failing the render.
    """
    if len(cloud) == 0:
        raise SolverError("cannot fit a field to an empty cloud")
    if ridge < 0:
        raise ConfigError(f"ridge must be non-negative, got {ridge}")
    xs, ys, vs = _canonical_arrays(cloud)
    xs, ys, vs = _merge_duplicates(xs, ys, vs)
    n = len(xs)
    phi = eval_kernel_array(kernel, _distance_matrix(xs, ys, xs, ys))
    a = phi + ridge * np.eye(n)
    try:
        with warnings.catch_warnings(), np.errstate(all="ignore"):
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(a)
            w = scipy.linalg.lu_solve((lu, piv), vs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"kernel system singular (ridge={ridge!r}): {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise SolverError(f"kernel system singular (ridge={ridge!r}): non-finite weights")

    # Fixed-precision iterative refinement: recovers interpolation-grade
    # residuals even for the ill-conditioned growing kernels.
    v_norm = float(np.linalg.norm(vs))
    tol = RESIDUAL_TOL * max(v_norm, 1e-300)
    resid = vs - np.sum(a * w[None, :], axis=1)
    for _ in range(4):
        if float(np.linalg.norm(resid)) <= tol * 1e-3:
            break
        dw = scipy.linalg.lu_solve((lu, piv), resid)
        if not np.all(np.isfinite(dw)):
            break
        w = w + dw
        resid = vs - np.sum(a * w[None, :], axis=1)
    fit_warnings = ()
    if float(np.linalg.norm(resid)) > tol:
        fit_warnings = (
            f"ill-conditioned kernel system: residual {float(np.linalg.norm(resid)):.3e} "
            f"exceeds {tol:.3e} (kernel={kernel.id}, ridge={ridge!r})",
        )
    return FieldSolution(
        xs=xs, ys=ys, values=vs, weights=w, kernel=kernel, ridge=ridge, warnings=fit_warnings
    )


def _eval_exact(sol: FieldSolution, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    phi = eval_kernel_array(sol.kernel, _distance_matrix(px, py, sol.xs, sol.ys))
    # np.sum is pairwise and single-threaded: deterministic, unlike BLAS matmul.
    return np.sum(phi * sol.weights[None, :], axis=1)


def _eval_shepard(
    xs: np.ndarray,
    ys: np.ndarray,
    vs: np.ndarray,
    kernel: KernelSpec,
    px: np.ndarray,
    py: np.ndarray,
) -> np.ndarray:
    dist = _distance_matrix(px, py, xs, ys)
    phi = eval_kernel_array(kernel, dist)
    num = np.sum(phi * vs[None, :], axis=1)
    den = np.sum(phi, axis=1)
    out = num / den
    # Limit rule: a probe sitting exactly on a center takes that value.
    hit_rows, hit_cols = np.nonzero(dist == 0.0)
    if len(hit_rows):
        for row in np.unique(hit_rows):
            out[row] = float(np.mean(vs[hit_cols[hit_rows == row]]))
    return out


def _eval_additive(
    xs: np.ndarray,
    ys: np.ndarray,
    vs: np.ndarray,
    kernel: KernelSpec,
    px: np.ndarray,
    py: np.ndarray,
) -> np.ndarray:
    phi0 = float(eval_kernel_array(kernel, np.array([0.0]))[0])
    if phi0 == 0.0:
        raise ModeError(f"additive mode needs phi(0) != 0; kernel '{kernel.id}' has phi(0) = 0")
    phi = eval_kernel_array(kernel, _distance_matrix(px, py, xs, ys))
    return np.sum(phi * vs[None, :], axis=1) / phi0


def eval_field(
    source: FieldSolution | PointCloud,
    kernel: KernelSpec,
    mode: str,
    points: np.ndarray,
) -> np.ndarray:
    """Evaluate the field at arbitrary (n, 2) domain points."""
    check_mode_kernel(mode, kernel)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    px, py = points[:, 0].copy(), points[:, 1].copy()
    if mode == "exact":
        sol = source if isinstance(source, FieldSolution) else fit_exact(source, kernel)
        return _eval_exact(sol, px, py)
    if isinstance(source, FieldSolution):
        xs, ys, vs = source.xs, source.ys, source.values
    else:
        xs, ys, vs = _canonical_arrays(source)
    if mode == "shepard":
        return _eval_shepard(xs, ys, vs, kernel, px, py)
    return _eval_additive(xs, ys, vs, kernel, px, py)


def build_field(
    cloud: PointCloud,
    kernel: KernelSpec,
    mode: str = DEFAULT_MODE,
    grid: GridSpec = GridSpec(),
    ridge: float = DEFAULT_RIDGE,
) -> tuple[FieldGrid, tuple[str, ...]]:
    """Evaluate the field at every pixel center of the grid.

    Returns the grid plus any conditioning warnings from the solve.
    """
    check_mode_kernel(mode, kernel)
    warnings: tuple[str, ...] = ()
    gx = grid.x_coords()
    gy = grid.y_coords()
    values = np.empty((grid.height, grid.width), dtype=float)
    if mode == "exact":
        sol = fit_exact(cloud, kernel, ridge=ridge)
        warnings = sol.warnings
        for j in range(grid.height):
            values[j] = _eval_exact(sol, gx, np.full(grid.width, gy[j]))
    else:
        xs, ys, vs = _canonical_arrays(cloud)
        for j in range(grid.height):
            py = np.full(grid.width, gy[j])
            if mode == "shepard":
                values[j] = _eval_shepard(xs, ys, vs, kernel, gx, py)
            else:
                values[j] = _eval_additive(xs, ys, vs, kernel, gx, py)
    if not np.all(np.isfinite(values)):
        raise SolverError(f"field evaluation produced non-finite values (kernel={kernel.id})")
    vmin = float(values.min())
    vmax = float(values.max())
    return FieldGrid(spec=grid, values=values, value_range=(vmin, vmax)), warnings
