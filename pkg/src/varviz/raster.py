"""Deterministic rasterization of fields and point clouds to PNG.

Two plot modes: a heatmap with darkened data dots overlaid, and a dot plot
of colored discs on white. Everything is drawn into a plain RGBA byte
buffer with the embedded bitmap font, integer (non-antialiased) discs and a
hand-rolled PNG encoder, so identical inputs always produce identical bytes.

Layout constants (chrome around the plot area) are fixed here and documented
in docs/api.md; golden-image tests depend on them.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import font5x7
from .errors import ConfigError, RenderError
from .field import FieldGrid, GridSpec
from .model_table import PointCloud

# --- fixed chrome layout (pixels) ---
MARGIN_LEFT = 64    # y-axis label column + tick labels
MARGIN_RIGHT = 96   # gap + colorbar + tick labels
MARGIN_TOP = 16
MARGIN_BOTTOM = 40  # x tick labels + axis name
COLORBAR_GAP = 10
COLORBAR_W = 14

NEUTRAL_GRAY = (128, 128, 128, 255)
CHROME_BG = (255, 255, 255, 255)
INK = (0, 0, 0, 255)

PALETTES: dict[str, tuple[tuple[int, int, int], ...]] = {
    # diverging red -> white -> blue (default; low values red)
    "red_blue": (
        (103, 0, 31), (153, 16, 39), (190, 48, 54), (214, 96, 77),
        (234, 142, 112), (247, 183, 153), (253, 219, 199), (249, 238, 231),
        (234, 241, 245), (209, 229, 240), (167, 208, 228), (120, 180, 213),
        (67, 147, 195), (44, 117, 180), (24, 84, 147), (5, 48, 97),
    ),
    # sequential dark purple -> teal -> yellow
    "viridis_like": (
        (68, 1, 84), (72, 26, 108), (71, 47, 125), (65, 68, 135),
        (57, 86, 140), (49, 104, 142), (42, 120, 142), (35, 136, 142),
        (31, 152, 139), (34, 168, 132), (53, 183, 121), (84, 197, 104),
        (122, 209, 81), (165, 219, 54), (210, 226, 27), (253, 231, 37),
    ),
    "grayscale": tuple((i * 17, i * 17, i * 17) for i in range(16)),
}

DEFAULT_PALETTE = "red_blue"
DEFAULT_DOT_DARKEN = 0.7
DEFAULT_MARKER_HEATMAP = 4
DEFAULT_MARKER_DOT = 8


@dataclass(frozen=True)
class RenderSpec:
    mode: str = "heatmap"  # heatmap | dot
    palette: str = DEFAULT_PALETTE
    value_range: tuple[float, float] | None = None
    marker_radius: int | None = None  # default depends on mode
    show_indices: bool = False
    dot_darken: float = DEFAULT_DOT_DARKEN
    grid: GridSpec = field(default_factory=GridSpec)
    x_label: str = "x"
    y_label: str = "y"

    def __post_init__(self):
        if self.mode not in ("heatmap", "dot"):
            raise ConfigError(f"mode must be 'heatmap' or 'dot', got '{self.mode}'")
        if self.palette not in PALETTES:
            raise ConfigError(f"unknown palette '{self.palette}'")
        if self.value_range is not None:
            lo, hi = self.value_range
            if not lo < hi:
                raise ConfigError(f"value_range needs lo < hi, got ({lo}, {hi})")
        if self.marker_radius is not None and not 1 <= self.marker_radius <= 64:
            raise ConfigError(f"marker_radius must be in [1, 64], got {self.marker_radius}")
        if not 0.0 < self.dot_darken <= 1.0:
            raise ConfigError(f"dot_darken must be in (0, 1], got {self.dot_darken}")

    @property
    def radius(self) -> int:
        if self.marker_radius is not None:
            return self.marker_radius
        return DEFAULT_MARKER_HEATMAP if self.mode == "heatmap" else DEFAULT_MARKER_DOT


class RasterImage:
    """A width*height RGBA pixel buffer with primitive draw operations."""

    def __init__(self, width: int, height: int, fill=CHROME_BG):
        self.width = width
        self.height = height
        self.pixels = bytearray(width * height * 4)
        r, g, b, a = fill
        self.pixels[:] = bytes((r, g, b, a)) * (width * height)

    def put(self, x: int, y: int, color) -> None:
        if 0 <= x < self.width and 0 <= y < self.height:
            off = (y * self.width + x) * 4
            self.pixels[off : off + 4] = bytes(color)

    def get(self, x: int, y: int) -> tuple[int, int, int, int]:
        off = (y * self.width + x) * 4
        return tuple(self.pixels[off : off + 4])

    def fill_rect(self, x0: int, y0: int, w: int, h: int, color) -> None:
        xa = max(0, x0)
        xb = min(self.width, x0 + w)
        if xb <= xa:
            return
        row = bytes(color) * (xb - xa)
        for y in range(max(0, y0), min(self.height, y0 + h)):
            off = (y * self.width + xa) * 4
            self.pixels[off : off + len(row)] = row

    def blit_rgba_rows(self, x0: int, y0: int, rgba: np.ndarray) -> None:
        """Copy an (h, w, 4) uint8 block; caller guarantees it fits."""
        h, w = rgba.shape[:2]
        flat = rgba.tobytes()
        for y in range(h):
            off = ((y0 + y) * self.width + x0) * 4
            self.pixels[off : off + w * 4] = flat[y * w * 4 : (y + 1) * w * 4]

    def rect_outline(self, x0: int, y0: int, w: int, h: int, color) -> None:
        for x in range(x0, x0 + w):
            self.put(x, y0, color)
            self.put(x, y0 + h - 1, color)
        for y in range(y0, y0 + h):
            self.put(x0, y, color)
            self.put(x0 + w - 1, y, color)

    def disc(self, cx: int, cy: int, radius: int, color) -> None:
        r2 = radius * radius
        for dy in range(-radius, radius + 1):
            for dx in range(-radius, radius + 1):
                if dx * dx + dy * dy <= r2:
                    self.put(cx + dx, cy + dy, color)

    def text(self, x: int, y: int, s: str, color=INK) -> None:
        cx = x
        for ch in s:
            rows = font5x7.glyph(ch)
            for gy, mask in enumerate(rows):
                for gx in range(font5x7.GLYPH_W):
                    if mask & (1 << (font5x7.GLYPH_W - 1 - gx)):
                        self.put(cx + gx, y + gy, color)
            cx += font5x7.GLYPH_W + font5x7.GLYPH_GAP

    def text_vertical(self, x: int, y: int, s: str, color=INK) -> None:
        """Characters stacked top-to-bottom (for the y-axis name)."""
        cy = y
        for ch in s:
            rows = font5x7.glyph(ch)
            for gy, mask in enumerate(rows):
                for gx in range(font5x7.GLYPH_W):
                    if mask & (1 << (font5x7.GLYPH_W - 1 - gx)):
                        self.put(x + gx, cy + gy, color)
            cy += font5x7.GLYPH_H + font5x7.GLYPH_GAP


def map_color(value: float, value_range: tuple[float, float], palette: str) -> tuple[int, int, int, int]:
    """Clamp value into the range and linearly interpolate palette anchors.

    Non-finite values take a fixed neutral gray.
    """
    lo, hi = value_range
    if not lo < hi:
        raise ConfigError(f"value_range needs lo < hi, got ({lo}, {hi})")
    if not np.isfinite(value):
        return NEUTRAL_GRAY
    anchors = PALETTES[palette]
    t = (float(value) - lo) / (hi - lo)
    t = min(1.0, max(0.0, t))
    pos = t * (len(anchors) - 1)
    idx = min(int(pos), len(anchors) - 2)
    frac = pos - idx
    a, b = anchors[idx], anchors[idx + 1]
    rgb = tuple(int(round(a[k] + (b[k] - a[k]) * frac)) for k in range(3))
    return (rgb[0], rgb[1], rgb[2], 255)


def map_colors_array(values: np.ndarray, value_range: tuple[float, float], palette: str) -> np.ndarray:
    """Vectorized map_color: same arithmetic, returns (..., 4) uint8.

    Kept operation-for-operation in sync with map_color; a unit test pins
    the scalar/vector agreement.
    """
    lo, hi = value_range
    if not lo < hi:
        raise ConfigError(f"value_range needs lo < hi, got ({lo}, {hi})")
    anchors = np.array(PALETTES[palette], dtype=float)
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    t = np.clip((np.where(finite, values, 0.0) - lo) / (hi - lo), 0.0, 1.0)
    pos = t * (len(anchors) - 1)
    idx = np.minimum(pos.astype(int), len(anchors) - 2)
    frac = (pos - idx)[..., None]
    rgb = np.round(anchors[idx] + (anchors[idx + 1] - anchors[idx]) * frac).astype(np.uint8)
    out = np.empty(values.shape + (4,), dtype=np.uint8)
    out[..., :3] = rgb
    out[..., 3] = 255
    out[~finite] = np.array(NEUTRAL_GRAY, dtype=np.uint8)
    return out


def darken(color: tuple[int, int, int, int], factor: float) -> tuple[int, int, int, int]:
    return (
        int(round(color[0] * factor)),
        int(round(color[1] * factor)),
        int(round(color[2] * factor)),
        255,
    )


def _fmt_tick(v: float) -> str:
    return f"{v:.4g}"


def _chrome_size(grid: GridSpec) -> tuple[int, int]:
    return (
        MARGIN_LEFT + grid.width + MARGIN_RIGHT,
        MARGIN_TOP + grid.height + MARGIN_BOTTOM,
    )


def _point_pixel(grid: GridSpec, x: float, y: float) -> tuple[int, int]:
    """Plot-area pixel of a normalized point; y axis points up on screen."""
    px, py = grid.to_pixel(x, y)
    return MARGIN_LEFT + px, MARGIN_TOP + (grid.height - 1 - py)


def _draw_chrome(
    img: RasterImage,
    grid: GridSpec,
    spec: RenderSpec,
    value_range: tuple[float, float],
    label_bounds,
) -> None:
    """Plot border, axis labels with original metric bounds, and colorbar."""
    img.rect_outline(MARGIN_LEFT - 1, MARGIN_TOP - 1, grid.width + 2, grid.height + 2, INK)

    x_min, x_max, y_min, y_max = label_bounds
    base_y = MARGIN_TOP + grid.height + 4
    img.text(MARGIN_LEFT, base_y, _fmt_tick(x_min))
    right_lbl = _fmt_tick(x_max)
    img.text(MARGIN_LEFT + grid.width - font5x7.text_width(right_lbl), base_y, right_lbl)
    name_w = font5x7.text_width(spec.x_label)
    img.text(MARGIN_LEFT + (grid.width - name_w) // 2, base_y + 12, spec.x_label)

    img.text(MARGIN_LEFT - 4 - font5x7.text_width(_fmt_tick(y_max)), MARGIN_TOP, _fmt_tick(y_max))
    img.text(
        MARGIN_LEFT - 4 - font5x7.text_width(_fmt_tick(y_min)),
        MARGIN_TOP + grid.height - font5x7.GLYPH_H,
        _fmt_tick(y_min),
    )
    img.text_vertical(4, MARGIN_TOP, spec.y_label[:24])

    # colorbar: vertical gradient, high values at the top
    bar_x = MARGIN_LEFT + grid.width + COLORBAR_GAP
    lo, hi = value_range
    for row in range(grid.height):
        t = 1.0 - (row + 0.5) / grid.height
        color = map_color(lo + t * (hi - lo), value_range, spec.palette)
        img.fill_rect(bar_x, MARGIN_TOP + row, COLORBAR_W, 1, color)
    img.rect_outline(bar_x - 1, MARGIN_TOP - 1, COLORBAR_W + 2, grid.height + 2, INK)
    lbl_x = bar_x + COLORBAR_W + 4
    img.text(lbl_x, MARGIN_TOP, _fmt_tick(hi))
    img.text(lbl_x, MARGIN_TOP + grid.height - font5x7.GLYPH_H, _fmt_tick(lo))


def index_label_boxes(cloud: PointCloud, spec: RenderSpec) -> list[tuple[int, int, int, int]]:
    """Bounding boxes (x, y, w, h) of the index labels, in draw order."""
    boxes = []
    for i in sorted(range(len(cloud)), key=lambda k: cloud.ids[k]):
        cx, cy = _point_pixel(spec.grid, cloud.xs[i], cloud.ys[i])
        text = str(cloud.ids[i])
        boxes.append(
            (cx + spec.radius + 2, cy - font5x7.GLYPH_H // 2, font5x7.text_width(text), font5x7.GLYPH_H)
        )
    return boxes


def _draw_points(
    img: RasterImage,
    cloud: PointCloud,
    colors: list[tuple[int, int, int, int]],
    spec: RenderSpec,
) -> None:
    """Discs in record-id order (later ids occlude), then optional indices."""
    order = sorted(range(len(cloud)), key=lambda k: cloud.ids[k])
    for i in order:
        cx, cy = _point_pixel(spec.grid, cloud.xs[i], cloud.ys[i])
        img.disc(cx, cy, spec.radius, colors[i])
    if spec.show_indices:
        for i in order:
            cx, cy = _point_pixel(spec.grid, cloud.xs[i], cloud.ys[i])
            img.text(cx + spec.radius + 2, cy - font5x7.GLYPH_H // 2, str(cloud.ids[i]))


def resolve_value_range(spec: RenderSpec, lo: float, hi: float) -> tuple[float, float]:
    """Explicit range wins; otherwise data range, widened if degenerate."""
    if spec.value_range is not None:
        return spec.value_range
    if lo == hi:
        return (lo - 0.5, hi + 0.5)
    return (lo, hi)


def render_heatmap(fgrid: FieldGrid, cloud: PointCloud, spec: RenderSpec) -> RasterImage:
    """Field pixels as background, darkened data dots on top."""
    if spec.mode != "heatmap":
        raise RenderError(f"render_heatmap called with mode '{spec.mode}'")
    if fgrid.spec != spec.grid:
        raise RenderError("field grid dimensions do not match the render spec grid")
    grid = spec.grid
    vrange = resolve_value_range(spec, *fgrid.value_range)
    w, h = _chrome_size(grid)
    img = RasterImage(w, h)
    # grid row j counts upward in domain y; screen rows count downward
    rgba = map_colors_array(fgrid.values[::-1], vrange, spec.palette)
    img.blit_rgba_rows(MARGIN_LEFT, MARGIN_TOP, rgba)
    colors = [
        darken(map_color(v, vrange, spec.palette), spec.dot_darken) for v in cloud.values
    ]
    _draw_points(img, cloud, colors, spec)
    _draw_chrome(img, grid, spec, vrange, cloud.label_bounds)
    return img


def render_dots(cloud: PointCloud, dot_values, spec: RenderSpec) -> RasterImage:
    """Colored discs on white; dot_values come from the field at each dot's
    position or from the raw color metric, per the caller's color_source."""
    if spec.mode != "dot":
        raise RenderError(f"render_dots called with mode '{spec.mode}'")
    dot_values = [float(v) for v in dot_values]
    if len(dot_values) != len(cloud):
        raise RenderError(f"{len(dot_values)} dot values for {len(cloud)} points")
    grid = spec.grid
    finite = [v for v in dot_values if np.isfinite(v)]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 1.0
    vrange = resolve_value_range(spec, lo, hi)
    w, h = _chrome_size(grid)
    img = RasterImage(w, h)
    img.fill_rect(MARGIN_LEFT, MARGIN_TOP, grid.width, grid.height, CHROME_BG)
    colors = [map_color(v, vrange, spec.palette) for v in dot_values]
    _draw_points(img, cloud, colors, spec)
    _draw_chrome(img, grid, spec, vrange, cloud.label_bounds)
    return img


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def encode_png(image: RasterImage) -> bytes:
    """Minimal 8-bit RGBA PNG writer: IHDR + one IDAT + IEND, no ancillary
    chunks, fixed zlib level, so equal pixels give equal bytes."""
    header = struct.pack(">IIBBBBB", image.width, image.height, 8, 6, 0, 0, 0)
    stride = image.width * 4
    raw = bytearray()
    for y in range(image.height):
        raw.append(0)  # filter: None
        raw += image.pixels[y * stride : (y + 1) * stride]
    return b"".join(
        [
            b"\x89PNG\r\n\x1a\n",
            _png_chunk(b"IHDR", header),
            _png_chunk(b"IDAT", zlib.compress(bytes(raw), 9)),
            _png_chunk(b"IEND", b""),
        ]
    )


def render_montage(
    panels: list[tuple[str, RasterImage]], columns: int = 4
) -> RasterImage:
    """Tile per-kernel renders into a captioned grid (CLI kernel comparison)."""
    if not panels:
        raise RenderError("montage needs at least one panel")
    pw = max(p.width for _, p in panels)
    caption_h = font5x7.GLYPH_H + 6
    ph = max(p.height for _, p in panels) + caption_h
    rows = (len(panels) + columns - 1) // columns
    img = RasterImage(columns * pw, rows * ph)
    for k, (name, panel) in enumerate(panels):
        gx = (k % columns) * pw
        gy = (k // columns) * ph
        img.text(gx + (pw - font5x7.text_width(name)) // 2, gy + 3, name)
        for y in range(panel.height):
            dst = ((gy + caption_h + y) * img.width + gx) * 4
            src = y * panel.width * 4
            img.pixels[dst : dst + panel.width * 4] = panel.pixels[src : src + panel.width * 4]
    return img
