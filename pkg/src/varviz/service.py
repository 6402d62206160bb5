"""HTTP facade over ingestion, pipeline, field and raster.

Endpoints (JSON in/out except PNG render bodies):

  POST /datasets                    multipart CSV upload -> dataset handle
  GET  /datasets                    list handles
  GET  /datasets/{id}/columns       per-column min/max/missing
  GET  /kernels                     the 16-kernel catalog
  POST /render                      RenderRequest document -> PNG bytes
  POST /rashomon/generate           raw dataset + config -> model-table handle

The dataset store is in-memory (optionally spooled to disk); renders are
pure functions of (stored bytes, request document), so identical requests
return byte-identical PNGs. Render metadata travels in X-* response headers
so the UI can bind the image body directly.
"""

from __future__ import annotations

import datetime
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .core import RenderRequest, execute_render
from .errors import VarError
from .field import DEFAULT_MODE, DEFAULT_RIDGE, GridSpec
from .kernels import DEFAULT_C, DEFAULT_KERNEL, DEFAULT_SIGMA, kernel_catalog
from .model_table import ModelSet, parse_model_table, serialize_model_table
from .pipeline import Dataset, RashomonConfig, generate_rashomon, parse_dataset

DEFAULT_MAX_UPLOAD = 10 * 1024 * 1024


@dataclass
class StoredDataset:
    id: str
    kind: str  # model_table | raw_dataset
    raw: bytes
    model_set: ModelSet | None
    dataset: Dataset | None
    created_at: str

    def handle(self) -> dict:
        if self.kind == "model_table":
            schema = list(self.model_set.schema)
            rows = len(self.model_set.records)
        else:
            schema = list(self.dataset.feature_names) + ["label"]
            rows = len(self.dataset)
        return {
            "id": self.id,
            "kind": self.kind,
            "schema": schema,
            "rows": rows,
            "created_at": self.created_at,
        }


class DatasetStore:
    """Insert/lookup guarded by a lock; handles immutable once created."""

    def __init__(self, spool_dir: str | None = None):
        self._lock = threading.Lock()
        self._items: dict[str, StoredDataset] = {}
        self._spool = Path(spool_dir) if spool_dir else None
        if self._spool:
            self._spool.mkdir(parents=True, exist_ok=True)

    def add(self, kind: str, raw: bytes) -> StoredDataset:
        model_set = parse_model_table(raw) if kind == "model_table" else None
        dataset = parse_dataset(raw) if kind == "raw_dataset" else None
        item = StoredDataset(
            id=uuid.uuid4().hex[:12],
            kind=kind,
            raw=raw,
            model_set=model_set,
            dataset=dataset,
            created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )
        with self._lock:
            self._items[item.id] = item
        if self._spool:
            (self._spool / f"{item.id}.csv").write_bytes(raw)
        return item

    def get(self, dataset_id: str) -> StoredDataset | None:
        with self._lock:
            return self._items.get(dataset_id)

    def list(self) -> list[StoredDataset]:
        with self._lock:
            return list(self._items.values())


class RenderDocument(BaseModel):
    """Wire form of a render request; field names match the spec'd types."""

    dataset_id: str
    x_metric: str
    y_metric: str
    color_metric: str
    allow_degenerate: bool = False
    kernel: str = DEFAULT_KERNEL
    sigma: float = DEFAULT_SIGMA
    c: float = DEFAULT_C
    field_mode: Literal["exact", "shepard", "additive"] = DEFAULT_MODE
    mode: Literal["heatmap", "dot"] = "heatmap"
    palette: str = "red_blue"
    value_range: Optional[tuple[float, float]] = None
    marker_radius: Optional[int] = None
    show_indices: bool = False
    dot_darken: float = 0.7
    width: int = 256
    height: int = 256
    margin: float = 0.05
    max_points: Optional[int] = None
    seed: int = 0
    color_source: Literal["field", "raw"] = "field"
    ridge: float = DEFAULT_RIDGE

    def to_request(self) -> RenderRequest:
        return RenderRequest(
            x_metric=self.x_metric,
            y_metric=self.y_metric,
            color_metric=self.color_metric,
            allow_degenerate=self.allow_degenerate,
            kernel=self.kernel,
            sigma=self.sigma,
            c=self.c,
            field_mode=self.field_mode,
            mode=self.mode,
            palette=self.palette,
            value_range=self.value_range,
            marker_radius=self.marker_radius,
            show_indices=self.show_indices,
            dot_darken=self.dot_darken,
            grid=GridSpec(width=self.width, height=self.height, margin=self.margin),
            max_points=self.max_points,
            seed=self.seed,
            color_source=self.color_source,
            ridge=self.ridge,
        )


class GenerateDocument(BaseModel):
    dataset_id: str
    depth_budget: int = 4
    rashomon_bound_adder: float = 0.03
    regularization: float = 0.02
    rashomon_bound_multiplier: float = 0.0
    trivial_extensions: bool = True
    n_est: int = 40
    stump_depth: int = 1
    test_fraction: float = Field(default=0.3, ge=0.0, lt=1.0)
    split_seed: int = 0

    def to_config(self) -> RashomonConfig:
        return RashomonConfig(
            depth_budget=self.depth_budget,
            rashomon_bound_adder=self.rashomon_bound_adder,
            regularization=self.regularization,
            rashomon_bound_multiplier=self.rashomon_bound_multiplier,
            trivial_extensions=self.trivial_extensions,
            n_est=self.n_est,
            stump_depth=self.stump_depth,
        )


def _error_response(exc: VarError, status: int) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": exc.code, "message": exc.message})


_STATUS_BY_CODE = {
    "empty_projection": 422,
    "capacity_error": 422,
    "solver_error": 500,
}


def create_app(max_upload: int = DEFAULT_MAX_UPLOAD, spool_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="var-workbench", version="0.1.0")
    store = DatasetStore(spool_dir=spool_dir)
    app.state.store = store
    app.state.max_upload = max_upload

    @app.exception_handler(VarError)
    async def _var_error(request: Request, exc: VarError):
        return _error_response(exc, _STATUS_BY_CODE.get(exc.code, 400))

    @app.post("/datasets")
    async def upload_dataset(
        file: UploadFile = File(...),
        kind: str = Form("model_table"),
    ):
        if kind not in ("model_table", "raw_dataset"):
            return JSONResponse(
                status_code=400,
                content={"code": "config_error", "message": f"unknown dataset kind '{kind}'"},
            )
        raw = await file.read()
        if len(raw) > app.state.max_upload:
            return JSONResponse(
                status_code=413,
                content={
                    "code": "too_large",
                    "message": f"upload of {len(raw)} bytes exceeds cap {app.state.max_upload}",
                },
            )
        item = store.add(kind, raw)
        return item.handle()

    @app.get("/datasets")
    async def list_datasets():
        return {"datasets": [item.handle() for item in store.list()]}

    @app.get("/datasets/{dataset_id}/columns")
    async def dataset_columns(dataset_id: str):
        item = store.get(dataset_id)
        if item is None:
            return JSONResponse(
                status_code=404,
                content={"code": "not_found", "message": f"unknown dataset '{dataset_id}'"},
            )
        if item.kind == "model_table":
            return {"columns": item.model_set.column_stats()}
        cols = []
        for j, name in enumerate(item.dataset.feature_names):
            present = [row[j] for row in item.dataset.rows if row[j] is not None]
            cols.append(
                {
                    "name": name,
                    "min": min(present) if present else None,
                    "max": max(present) if present else None,
                    "missing": len(item.dataset) - len(present),
                }
            )
        cols.append(
            {
                "name": "label",
                "min": float(min(item.dataset.labels)),
                "max": float(max(item.dataset.labels)),
                "missing": 0,
            }
        )
        return {"columns": cols}

    @app.get("/kernels")
    async def kernels():
        return {
            "kernels": [
                {"id": kid, "group": group, "class": klass, "formula": formula}
                for kid, group, klass, formula in kernel_catalog()
            ]
        }

    @app.post("/render")
    async def render(doc: RenderDocument):
        item = store.get(doc.dataset_id)
        if item is None:
            return JSONResponse(
                status_code=404,
                content={"code": "not_found", "message": f"unknown dataset '{doc.dataset_id}'"},
            )
        if item.kind != "model_table":
            return JSONResponse(
                status_code=400,
                content={
                    "code": "config_error",
                    "message": "render needs a model_table dataset; run /rashomon/generate first",
                },
            )
        out = execute_render(item.model_set, doc.to_request())
        return Response(content=out.png, media_type="image/png", headers=out.metadata())

    @app.post("/rashomon/generate")
    async def rashomon_generate(doc: GenerateDocument):
        item = store.get(doc.dataset_id)
        if item is None:
            return JSONResponse(
                status_code=404,
                content={"code": "not_found", "message": f"unknown dataset '{doc.dataset_id}'"},
            )
        if item.kind != "raw_dataset":
            return JSONResponse(
                status_code=400,
                content={
                    "code": "config_error",
                    "message": "generation needs a raw_dataset upload",
                },
            )
        result = generate_rashomon(
            item.dataset,
            doc.to_config(),
            test_fraction=doc.test_fraction,
            split_seed=doc.split_seed,
        )
        new_item = store.add("model_table", serialize_model_table(result.model_set))
        return {
            "handle": new_item.handle(),
            "models": len(result.trees),
            "optimum": result.optimum,
            "bound": result.bound,
            "config": result.config.to_dict(),
        }

    _mount_ui(app)
    return app


def _mount_ui(app: FastAPI) -> None:
    """Serve the built control-panel UI at /ui when frontend/dist exists."""
    dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if dist.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(dist), html=True), name="ui")


# Re-exported for ASGI servers: `uvicorn varviz.service:app`
app = create_app()
