"""Tables of per-model performance metrics and their 2-D projections.

A ModelSet is one row per ML model with named numeric metrics; projection
picks three metrics as (x, y, color) and drops rows with missing values in
any of the three, counting the drops instead of imputing. Axis normalization
is min-max per axis so Euclidean distances over heterogeneous metrics make
sense before any kernel sees them.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, replace

from .errors import EmptyInputError, EmptyProjectionError, ParseError, SchemaError

MISSING_TOKENS = {"", "na", "nan"}


def _is_missing_token(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


@dataclass(frozen=True)
class ModelRecord:
    id: int
    metrics: dict[str, float | None]
    label: str | None = None


@dataclass(frozen=True)
class ModelSet:
    schema: tuple[str, ...]
    records: tuple[ModelRecord, ...]

    def column(self, name: str) -> list[float | None]:
        if name not in self.schema:
            raise SchemaError(f"unknown metric '{name}'")
        return [rec.metrics[name] for rec in self.records]

    def column_stats(self) -> list[dict]:
        """Per-column name/min/max/missing summary, in schema order."""
        out = []
        for name in self.schema:
            present = [v for v in self.column(name) if v is not None]
            out.append(
                {
                    "name": name,
                    "min": min(present) if present else None,
                    "max": max(present) if present else None,
                    "missing": len(self.records) - len(present),
                }
            )
        return out


@dataclass(frozen=True)
class ProjectionSpec:
    x_metric: str
    y_metric: str
    color_metric: str
    allow_degenerate: bool = False


Bounds = tuple[float, float, float, float]


@dataclass(frozen=True)
class PointCloud:
    """Projected (x, y, value) points plus their enclosing bounds.

    ``bounds`` always encloses the current coordinates; ``label_bounds``
    keeps the pre-normalization extent for axis labeling.
    """

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    values: tuple[float, ...]
    ids: tuple[int, ...]
    labels: tuple[str | None, ...]
    bounds: Bounds
    label_bounds: Bounds = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.label_bounds is None:
            object.__setattr__(self, "label_bounds", self.bounds)

    def __len__(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class ProjectionResult:
    cloud: PointCloud
    dropped_rows: int
    warnings: tuple[str, ...] = ()


def parse_model_table(data: bytes, format: str = "csv") -> ModelSet:
    """Parse a UTF-8 CSV with header into a ModelSet.

    Empty cells, "NA" and "NaN" (case-insensitive) are missing values. A
    column named "label", or one whose non-missing cells all fail float
    parsing, is the text label column; at most one label column is allowed.
    """
    if format != "csv":
        raise ParseError(f"unsupported format '{format}'")
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc

    reader = csv.reader(io.StringIO(text))
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}", line=reader.line_num) from exc
    rows = [row for row in rows if row]  # ignore fully blank lines
    if not rows:
        raise EmptyInputError("no header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", line=1)
    body = rows[1:]
    if not body:
        raise EmptyInputError("file has a header but no data rows")

    ncols = len(header)
    for i, row in enumerate(body, start=2):
        if len(row) != ncols:
            raise ParseError(f"expected {ncols} fields, got {len(row)}", line=i)

    # Column typing pass: a cell either parses as float, is a missing token,
    # or fails. Columns where every non-missing cell fails are label text.
    parsed: list[list[float | None]] = [[None] * len(body) for _ in header]
    any_fail = [False] * ncols
    all_fail = [True] * ncols
    fail_at: list[tuple[int, str] | None] = [None] * ncols
    for r, row in enumerate(body):
        for c, cell in enumerate(row):
            if _is_missing_token(cell):
                continue
            try:
                v = float(cell)
                if not math.isfinite(v):
                    raise ValueError
                parsed[c][r] = v
                all_fail[c] = False
            except ValueError:
                if not any_fail[c]:
                    fail_at[c] = (r + 2, header[c])
                any_fail[c] = True

    label_cols = [c for c, name in enumerate(header) if name == "label"]
    label_cols += [c for c in range(ncols) if any_fail[c] and all_fail[c] and c not in label_cols]
    if len(label_cols) > 1:
        names = ", ".join(header[c] for c in label_cols)
        raise ParseError(f"multiple label columns detected: {names}")
    label_col = label_cols[0] if label_cols else None
    for c in range(ncols):
        if c == label_col:
            continue
        if any_fail[c]:
            line, col = fail_at[c]  # type: ignore[misc]
            raise ParseError(f"non-numeric cell in column '{col}'", line=line, column=col)

    schema = tuple(name for c, name in enumerate(header) if c != label_col)
    if not schema:
        raise EmptyInputError("no numeric columns")
    records = []
    for r, row in enumerate(body):
        metrics = {header[c]: parsed[c][r] for c in range(ncols) if c != label_col}
        label = None
        if label_col is not None and not _is_missing_token(row[label_col]):
            label = row[label_col]
        records.append(ModelRecord(id=r, metrics=metrics, label=label))
    return ModelSet(schema=schema, records=tuple(records))


def serialize_model_table(mset: ModelSet) -> bytes:
    """Inverse of parse_model_table; round-trips to an identical ModelSet."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    has_labels = any(rec.label is not None for rec in mset.records)
    header = list(mset.schema) + (["label"] if has_labels else [])
    writer.writerow(header)
    for rec in mset.records:
        row = ["" if rec.metrics[name] is None else repr(rec.metrics[name]) for name in mset.schema]
        if has_labels:
            row.append(rec.label if rec.label is not None else "")
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def project(mset: ModelSet, spec: ProjectionSpec) -> ProjectionResult:
    """Project records onto (x, y, color); rows missing any of the three
    selected metrics are dropped and counted."""
    warnings: list[str] = []
    for name in (spec.x_metric, spec.y_metric, spec.color_metric):
        if name not in mset.schema:
            raise SchemaError(f"unknown metric '{name}'; schema: {', '.join(mset.schema)}")
    if spec.x_metric == spec.y_metric:
        if not spec.allow_degenerate:
            raise SchemaError(
                f"x and y both '{spec.x_metric}'; pass allow_degenerate to render anyway"
            )
        warnings.append(f"degenerate projection: x and y are both '{spec.x_metric}'")

    xs, ys, vs, ids, labels = [], [], [], [], []
    dropped = 0
    for rec in mset.records:
        x = rec.metrics[spec.x_metric]
        y = rec.metrics[spec.y_metric]
        v = rec.metrics[spec.color_metric]
        if x is None or y is None or v is None:
            dropped += 1
            continue
        xs.append(x)
        ys.append(y)
        vs.append(v)
        ids.append(rec.id)
        labels.append(rec.label)
    if not xs:
        raise EmptyProjectionError(
            f"all {len(mset.records)} rows dropped: missing values in selected metrics"
        )
    bounds = (min(xs), max(xs), min(ys), max(ys))
    cloud = PointCloud(
        xs=tuple(xs),
        ys=tuple(ys),
        values=tuple(vs),
        ids=tuple(ids),
        labels=tuple(labels),
        bounds=bounds,
    )
    return ProjectionResult(cloud=cloud, dropped_rows=dropped, warnings=tuple(warnings))


def _minmax_scale(coords: tuple[float, ...], lo: float, hi: float) -> tuple[float, ...]:
    if hi == lo:
        return tuple(0.5 for _ in coords)
    span = hi - lo
    return tuple((v - lo) / span for v in coords)


def normalize(cloud: PointCloud) -> PointCloud:
    """Min-max scale x and y independently to [0, 1].

    A degenerate axis (max == min) maps to 0.5. Values are untouched and the
    original bounds are kept in label_bounds for axis labeling. Idempotent.
    """
    x_min, x_max, y_min, y_max = cloud.bounds
    xs = _minmax_scale(cloud.xs, x_min, x_max)
    ys = _minmax_scale(cloud.ys, y_min, y_max)
    bounds = (min(xs), max(xs), min(ys), max(ys))
    return PointCloud(
        xs=xs,
        ys=ys,
        values=cloud.values,
        ids=cloud.ids,
        labels=cloud.labels,
        bounds=bounds,
        label_bounds=cloud.label_bounds,
    )


def sample(cloud: PointCloud, max_points: int, seed: int) -> PointCloud:
    """Uniform random subsample without replacement, order-preserving and a
    pure function of (cloud, max_points, seed)."""
    if max_points < 1:
        raise SchemaError(f"max_points must be >= 1, got {max_points}")
    n = len(cloud)
    if n <= max_points:
        return cloud
    keep = sorted(random.Random(seed).sample(range(n), max_points))
    xs = tuple(cloud.xs[i] for i in keep)
    ys = tuple(cloud.ys[i] for i in keep)
    bounds = cloud.bounds  # still encloses the surviving subset
    return replace(
        cloud,
        xs=xs,
        ys=ys,
        values=tuple(cloud.values[i] for i in keep),
        ids=tuple(cloud.ids[i] for i in keep),
        labels=tuple(cloud.labels[i] for i in keep),
        bounds=bounds,
    )
