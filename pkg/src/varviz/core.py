"""Shared render pipeline behind both the CLI and the HTTP service.

One code path turns (ModelSet, RenderRequest) into PNG bytes plus metadata:
project -> normalize -> sample -> build field -> rasterize -> encode. Both
front ends call this, so equivalent parameterizations give identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError
from .field import (
    DEFAULT_MODE,
    DEFAULT_RIDGE,
    FieldGrid,
    GridSpec,
    build_field,
    check_mode_kernel,
    eval_field,
    fit_exact,
)
from .kernels import DEFAULT_C, DEFAULT_KERNEL, DEFAULT_SIGMA, KernelSpec
from .model_table import ModelSet, ProjectionSpec, normalize, project, sample
from .raster import (
    RasterImage,
    RenderSpec,
    encode_png,
    render_dots,
    render_heatmap,
    render_montage,
)

COLOR_SOURCES = ("field", "raw")


@dataclass(frozen=True)
class RenderRequest:
    x_metric: str
    y_metric: str
    color_metric: str
    allow_degenerate: bool = False
    kernel: str = DEFAULT_KERNEL
    sigma: float = DEFAULT_SIGMA
    c: float = DEFAULT_C
    field_mode: str = DEFAULT_MODE
    mode: str = "heatmap"
    palette: str = "red_blue"
    value_range: tuple[float, float] | None = None
    marker_radius: int | None = None
    show_indices: bool = False
    dot_darken: float = 0.7
    grid: GridSpec = dc_field(default_factory=GridSpec)
    max_points: int | None = None
    seed: int = 0
    color_source: str = "field"
    ridge: float = DEFAULT_RIDGE

    def __post_init__(self):
        if self.color_source not in COLOR_SOURCES:
            raise ConfigError(
                f"color_source must be one of {COLOR_SOURCES}, got '{self.color_source}'"
            )
        if self.max_points is not None and self.max_points < 1:
            raise ConfigError(f"max_points must be >= 1, got {self.max_points}")


@dataclass(frozen=True)
class RenderOutput:
    png: bytes
    image: RasterImage
    grid: FieldGrid
    dropped_rows: int
    warnings: tuple[str, ...]

    def metadata(self) -> dict[str, str]:
        lo, hi = self.grid.value_range
        return {
            "X-Grid-Min": repr(lo),
            "X-Grid-Max": repr(hi),
            "X-Dropped-Rows": str(self.dropped_rows),
            "X-Warnings": "; ".join(self.warnings),
        }


def execute_render(model_set: ModelSet, req: RenderRequest) -> RenderOutput:
    """Run the full pipeline; deterministic for fixed inputs."""
    kernel = KernelSpec(id=req.kernel, sigma=req.sigma, c=req.c)
    check_mode_kernel(req.field_mode, kernel)
    proj = project(
        model_set,
        ProjectionSpec(
            x_metric=req.x_metric,
            y_metric=req.y_metric,
            color_metric=req.color_metric,
            allow_degenerate=req.allow_degenerate,
        ),
    )
    cloud = normalize(proj.cloud)
    if req.max_points is not None:
        cloud = sample(cloud, req.max_points, req.seed)
    fgrid, field_warnings = build_field(
        cloud, kernel, mode=req.field_mode, grid=req.grid, ridge=req.ridge
    )
    warnings = proj.warnings + field_warnings

    spec = RenderSpec(
        mode=req.mode,
        palette=req.palette,
        value_range=req.value_range,
        marker_radius=req.marker_radius,
        show_indices=req.show_indices,
        dot_darken=req.dot_darken,
        grid=req.grid,
        x_label=req.x_metric,
        y_label=req.y_metric,
    )
    if req.mode == "heatmap":
        image = render_heatmap(fgrid, cloud, spec)
    else:
        if req.color_source == "raw":
            dot_values = list(cloud.values)
        else:
            pts = np.column_stack([cloud.xs, cloud.ys])
            if req.field_mode == "exact":
                sol = fit_exact(cloud, kernel, ridge=req.ridge)
                dot_values = eval_field(sol, kernel, "exact", pts)
            else:
                dot_values = eval_field(cloud, kernel, req.field_mode, pts)
        image = render_dots(cloud, dot_values, spec)
    return RenderOutput(
        png=encode_png(image),
        image=image,
        grid=fgrid,
        dropped_rows=proj.dropped_rows,
        warnings=warnings,
    )


def render_kernel_montage(
    model_set: ModelSet, req: RenderRequest, panel_grid: GridSpec | None = None
) -> bytes:
    """One heatmap per catalog kernel over the same points, tiled 4x4 in
    catalog order and captioned with kernel names."""
    from .kernels import kernel_catalog

    panel_grid = panel_grid or GridSpec(width=128, height=128)
    panels = []
    for kid, _, _, _ in kernel_catalog():
        panel_req = RenderRequest(
            x_metric=req.x_metric,
            y_metric=req.y_metric,
            color_metric=req.color_metric,
            allow_degenerate=req.allow_degenerate,
            kernel=kid,
            sigma=req.sigma,
            c=req.c,
            field_mode="exact",  # admits every kernel
            mode="heatmap",
            palette=req.palette,
            marker_radius=req.marker_radius,
            dot_darken=req.dot_darken,
            grid=panel_grid,
            max_points=req.max_points,
            seed=req.seed,
            ridge=req.ridge,
        )
        panels.append((kid, execute_render(model_set, panel_req).image))
    return encode_png(render_montage(panels, columns=4))
