"""Visual-analysis workbench for Rashomon sets of ML models."""

from .errors import VarError
from .field import FieldGrid, GridSpec, build_field, eval_field, fit_exact
from .kernels import KernelSpec, eval_kernel, kernel_catalog
from .model_table import (
    ModelRecord,
    ModelSet,
    PointCloud,
    ProjectionSpec,
    normalize,
    parse_model_table,
    project,
    sample,
    serialize_model_table,
)
from .pipeline import (
    BinaryFeature,
    Dataset,
    DecisionTree,
    RashomonConfig,
    binarize,
    enumerate_rashomon,
    evaluate_models,
    generate_rashomon,
    guess_thresholds,
    nansafe_cut,
)
from .raster import RenderSpec, encode_png, map_color, render_dots, render_heatmap

__all__ = [
    "VarError",
    "FieldGrid",
    "GridSpec",
    "build_field",
    "eval_field",
    "fit_exact",
    "KernelSpec",
    "eval_kernel",
    "kernel_catalog",
    "ModelRecord",
    "ModelSet",
    "PointCloud",
    "ProjectionSpec",
    "normalize",
    "parse_model_table",
    "project",
    "sample",
    "serialize_model_table",
    "BinaryFeature",
    "Dataset",
    "DecisionTree",
    "RashomonConfig",
    "binarize",
    "enumerate_rashomon",
    "evaluate_models",
    "generate_rashomon",
    "guess_thresholds",
    "nansafe_cut",
    "RenderSpec",
    "encode_png",
    "map_color",
    "render_dots",
    "render_heatmap",
]

__version__ = "0.1.0"
