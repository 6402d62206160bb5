#!/usr/bin/env python3
"""Regenerate the golden PNGs under tests/golden/ after an intentional
rendering change. The acceptance suite compares bytes against these files."""

from pathlib import Path

from varviz.core import RenderRequest, execute_render
from varviz.field import GridSpec
from varviz.model_table import parse_model_table

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"

GOLDEN_KERNELS = ("gaussian", "paper", "thin_plate")
GOLDEN_MODES = ("heatmap", "dot")


def golden_request(kernel: str, mode: str) -> RenderRequest:
    return RenderRequest(
        x_metric="train_acc",
        y_metric="test_acc",
        color_metric="n_leaves",
        kernel=kernel,
        field_mode="exact",
        mode=mode,
        grid=GridSpec(width=64, height=64),
    )


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)
    mset = parse_model_table((ROOT / "data" / "models_demo.csv").read_bytes())
    for kernel in GOLDEN_KERNELS:
        for mode in GOLDEN_MODES:
            out = execute_render(mset, golden_request(kernel, mode))
            path = GOLDEN / f"{mode}_{kernel}.png"
            path.write_bytes(out.png)
            print(f"wrote {path} ({len(out.png)} bytes)")


if __name__ == "__main__":
    main()
