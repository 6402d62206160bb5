"""Batch command-line interface.

Subcommands: render (PNG plot), kernels (4x4 kernel comparison montage),
generate (Rashomon pipeline to a model-table CSV), export-grid (field grid
as CSV) and serve (HTTP service). Exit codes: 0 success, 1 I/O failure,
2 validation failure, 3 solver or capacity failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    CapacityError,
    ConfigError,
    DomainError,
    EmptyInputError,
    EmptyProjectionError,
    ModeError,
    ParseError,
    RenderError,
    SchemaError,
    SolverError,
    VarError,
)
from .field import DEFAULT_MODE, DEFAULT_RIDGE, GridSpec, MODES
from .kernels import DEFAULT_C, DEFAULT_KERNEL, DEFAULT_SIGMA, KERNEL_IDS
from .raster import DEFAULT_DOT_DARKEN, PALETTES

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

_VALIDATION_ERRORS = (
    ParseError,
    EmptyInputError,
    SchemaError,
    EmptyProjectionError,
    ModeError,
    ConfigError,
    DomainError,
    RenderError,
)
_SOLVER_ERRORS = (SolverError, CapacityError)


def _add_render_flags(p: argparse.ArgumentParser, with_plot_mode: bool = True) -> None:
    p.add_argument("--input", required=True, help="model-table CSV")
    p.add_argument("--x", required=True, help="metric for the x axis")
    p.add_argument("--y", required=True, help="metric for the y axis")
    p.add_argument("--color", required=True, help="metric for the colorbar")
    p.add_argument("--kernel", default=DEFAULT_KERNEL, choices=KERNEL_IDS)
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.add_argument("--field", default=DEFAULT_MODE, choices=MODES, help="field evaluation mode")
    if with_plot_mode:
        p.add_argument("--mode", default="heatmap", choices=("heatmap", "dot"))
        p.add_argument("--palette", default="red_blue", choices=tuple(PALETTES))
        p.add_argument("--marker", type=int, default=None, help="marker radius in pixels")
        p.add_argument("--range", default=None, help="color range clamp as lo:hi")
        p.add_argument("--indices", action="store_true", help="draw record-id labels")
        p.add_argument("--dot-darken", type=float, default=DEFAULT_DOT_DARKEN)
        p.add_argument("--color-source", default="field", choices=("field", "raw"))
    p.add_argument("--resolution", type=int, default=256, help="grid width and height")
    p.add_argument("--max-points", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    p.add_argument("--allow-degenerate", action="store_true", help="permit x metric == y metric")
    p.add_argument("--out", required=True)


def _parse_range(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    try:
        lo_s, _, hi_s = text.partition(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise ConfigError(f"--range expects lo:hi, got '{text}'") from None
    if not lo < hi:
        raise ConfigError(f"--range needs lo < hi, got {lo}:{hi}")
    return (lo, hi)


def _request_from_args(args) -> "RenderRequest":
    from .core import RenderRequest

    return RenderRequest(
        x_metric=args.x,
        y_metric=args.y,
        color_metric=args.color,
        allow_degenerate=args.allow_degenerate,
        kernel=args.kernel,
        sigma=args.sigma,
        c=args.c,
        field_mode=args.field,
        mode=getattr(args, "mode", "heatmap"),
        palette=getattr(args, "palette", "red_blue"),
        value_range=_parse_range(getattr(args, "range", None)),
        marker_radius=getattr(args, "marker", None),
        show_indices=getattr(args, "indices", False),
        dot_darken=getattr(args, "dot_darken", DEFAULT_DOT_DARKEN),
        grid=GridSpec(width=args.resolution, height=args.resolution),
        max_points=args.max_points,
        seed=args.seed,
        color_source=getattr(args, "color_source", "field"),
        ridge=args.ridge,
    )


def _read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from exc


def _write_bytes(path: str, data: bytes) -> None:
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from exc


def _cmd_render(args) -> int:
    from .core import execute_render
    from .model_table import parse_model_table

    mset = parse_model_table(_read_bytes(args.input))
    out = execute_render(mset, _request_from_args(args))
    _write_bytes(args.out, out.png)
    for w in out.warnings:
        print(f"warning: {w}", file=sys.stderr)
    meta = out.metadata()
    print(
        f"wrote {args.out}: grid range [{meta['X-Grid-Min']}, {meta['X-Grid-Max']}], "
        f"dropped {out.dropped_rows} rows"
    )
    return EXIT_OK


def _cmd_kernels(args) -> int:
    from .core import render_kernel_montage
    from .model_table import parse_model_table

    mset = parse_model_table(_read_bytes(args.points))
    png = render_kernel_montage(mset, _request_from_args(args))
    _write_bytes(args.out, png)
    print(f"wrote {args.out}: 16-kernel montage")
    return EXIT_OK


def _cmd_generate(args) -> int:
    from .model_table import serialize_model_table
    from .pipeline import RashomonConfig, generate_rashomon, parse_config, parse_dataset

    dataset = parse_dataset(_read_bytes(args.data))
    if args.config:
        config = parse_config(_read_bytes(args.config).decode("utf-8"))
    else:
        config = RashomonConfig()
    result = generate_rashomon(
        dataset, config, test_fraction=args.test_fraction, split_seed=args.split_seed
    )
    _write_bytes(args.out, serialize_model_table(result.model_set))
    print(
        f"wrote {args.out}: {len(result.trees)} models, "
        f"optimum {result.optimum:.6g}, bound {result.bound:.6g}"
    )
    return EXIT_OK


def _cmd_export_grid(args) -> int:
    from .core import execute_render
    from .model_table import parse_model_table

    mset = parse_model_table(_read_bytes(args.input))
    out = execute_render(mset, _request_from_args(args))
    _write_bytes(args.out, out.grid.to_csv())
    lo, hi = out.grid.value_range
    print(f"wrote {args.out}: {args.resolution}x{args.resolution} grid, range [{lo!r}, {hi!r}]")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(max_upload=args.max_upload, spool_dir=args.spool)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="var", description="Rashomon-set visual analysis workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a heatmap or dot plot to PNG")
    _add_render_flags(p)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("kernels", help="render a 4x4 montage comparing all 16 kernels")
    p.add_argument("--points", required=True, help="model-table CSV supplying the points")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--color", required=True)
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.add_argument("--resolution", type=int, default=128, help="per-panel grid size")
    p.add_argument("--max-points", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    p.add_argument("--allow-degenerate", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(
        func=_cmd_kernels, kernel=DEFAULT_KERNEL, field=DEFAULT_MODE, mode="heatmap"
    )

    p = sub.add_parser("generate", help="run the Rashomon pipeline on a raw dataset")
    p.add_argument("--data", required=True, help="raw CSV, last column = 0/1 label")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model-table CSV to write")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("export-grid", help="emit the interpolated field grid as CSV")
    _add_render_flags(p, with_plot_mode=False)
    p.set_defaults(func=_cmd_export_grid)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="default: $VAR_PORT or 8321")
    p.add_argument(
        "--max-upload", type=int, default=None, help="default: $VAR_MAX_UPLOAD or 10 MiB"
    )
    p.add_argument("--spool", default=None, help="default: $VAR_SPOOL (unset: no spooling)")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    import os

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        if args.port is None:
            args.port = int(os.environ.get("VAR_PORT", "8321"))
        if args.max_upload is None:
            args.max_upload = int(os.environ.get("VAR_MAX_UPLOAD", str(10 * 1024 * 1024)))
        if args.spool is None:
            args.spool = os.environ.get("VAR_SPOOL") or None
    try:
        return args.func(args)
    except SystemExit as exc:  # I/O helpers exit with EXIT_IO
        return exc.code if isinstance(exc.code, int) else EXIT_IO
    except _SOLVER_ERRORS as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return EXIT_SOLVER
    except _VALIDATION_ERRORS as exc:
        line = getattr(exc, "line", None)
        loc = f" (line {line})" if line else ""
        print(f"error [{exc.code}]{loc}: {exc.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except VarError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
