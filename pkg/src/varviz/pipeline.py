"""Desk-scale Rashomon sets of sparse decision trees.

Pipeline: boosted-stump threshold guessing -> missing-aware binarization
("feature_name<=threshold" columns) -> exact enumeration of every tree whose
regularized training loss is within the Rashomon bound -> per-model metrics.

The enumeration objective is L(T) = misclassification rate + lambda * leaves,
computed in exact rational arithmetic so bound comparisons never suffer float
ties. A capacity guard (<= 12 binary features, depth budget <= 4) keeps the
exhaustive search tractable; this is deliberately not a reimplementation of
a branch-and-bound tree farm.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError, ConfigError, EmptyInputError, ParseError, SchemaError
from .model_table import ModelRecord, ModelSet, _is_missing_token

logger = logging.getLogger(__name__)

MAX_BINARY_FEATURES = 12
MAX_DEPTH_BUDGET = 4

METRIC_SCHEMA = ("train_acc", "test_acc", "train_f1", "test_f1", "n_leaves", "train_loss")


@dataclass(frozen=True)
class Dataset:
    """Raw rows with float-or-missing features and a 0/1 label per row."""

    feature_names: tuple[str, ...]
    rows: tuple[tuple[float | None, ...], ...]
    labels: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class BinaryFeature:
    name: str
    source: str
    threshold: float
    nansafe: bool


@dataclass(frozen=True)
class RashomonConfig:
    depth_budget: int = 4
    rashomon_bound_adder: float = 0.03
    regularization: float = 0.02
    rashomon_bound_multiplier: float = 0.0
    trivial_extensions: bool = True
    n_est: int = 40
    stump_depth: int = 1

    def __post_init__(self):
        if self.depth_budget < 1:
            raise ConfigError(f"depth_budget must be >= 1, got {self.depth_budget}")
        if self.regularization < 0:
            raise ConfigError(f"regularization must be >= 0, got {self.regularization}")
        if self.rashomon_bound_adder < 0:
            raise ConfigError(f"rashomon_bound_adder must be >= 0, got {self.rashomon_bound_adder}")
        if self.rashomon_bound_multiplier < 0:
            raise ConfigError(
                f"rashomon_bound_multiplier must be >= 0, got {self.rashomon_bound_multiplier}"
            )
        if self.n_est < 1:
            raise ConfigError(f"n_est must be >= 1, got {self.n_est}")
        if self.stump_depth != 1:
            raise ConfigError("only stump_depth=1 is supported")

    def to_dict(self) -> dict:
        return {
            "depth_budget": self.depth_budget,
            "rashomon_bound_adder": self.rashomon_bound_adder,
            "regularization": self.regularization,
            "rashomon_bound_multiplier": self.rashomon_bound_multiplier,
            "trivial_extensions": self.trivial_extensions,
            "n_est": self.n_est,
            "stump_depth": self.stump_depth,
        }


_BOOL_STRINGS = {"true": True, "1": True, "false": False, "0": False}


def parse_config(text: str) -> RashomonConfig:
    """Flat key=value lines mirroring the RashomonConfig field names."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got '{line}'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in ("depth_budget", "n_est", "stump_depth"):
            values[key] = int(val)
        elif key in ("rashomon_bound_adder", "regularization", "rashomon_bound_multiplier"):
            values[key] = float(val)
        elif key == "trivial_extensions":
            low = val.lower()
            if low not in _BOOL_STRINGS:
                raise ConfigError(f"config line {lineno}: bad boolean '{val}'")
            values[key] = _BOOL_STRINGS[low]
        else:
            raise ConfigError(f"config line {lineno}: unknown key '{key}'")
    return RashomonConfig(**values)


def parse_dataset(data: bytes) -> Dataset:
    """CSV with header; last column is the 0/1 label, the rest are features."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise EmptyInputError("no header row")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError("need at least one feature column plus the label column", line=1)
    body = rows[1:]
    if not body:
        raise EmptyInputError("file has a header but no data rows")
    feature_names = tuple(header[:-1])
    out_rows = []
    labels = []
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=i)
        feats: list[float | None] = []
        for c, cell in enumerate(row[:-1]):
            if _is_missing_token(cell):
                feats.append(None)
                continue
            try:
                v = float(cell)
                if not math.isfinite(v):
                    raise ValueError
            except ValueError:
                raise ParseError(
                    f"non-numeric cell in column '{header[c]}'", line=i, column=header[c]
                ) from None
            feats.append(v)
        try:
            lab = float(row[-1])
        except ValueError:
            raise ParseError(f"label must be 0 or 1, got '{row[-1]}'", line=i) from None
        if lab not in (0.0, 1.0):
            raise ParseError(f"label must be 0 or 1, got '{row[-1]}'", line=i)
        out_rows.append(tuple(feats))
        labels.append(int(lab))
    return Dataset(feature_names=feature_names, rows=tuple(out_rows), labels=tuple(labels))


def split_dataset(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled split; train must keep both classes."""
    if not 0.0 <= test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in [0, 1), got {test_fraction}")
    idx = list(range(len(dataset)))
    random.Random(seed).shuffle(idx)
    n_test = int(round(test_fraction * len(idx)))
    test_idx = sorted(idx[:n_test])
    train_idx = sorted(idx[n_test:])

    def take(ids):
        return Dataset(
            feature_names=dataset.feature_names,
            rows=tuple(dataset.rows[i] for i in ids),
            labels=tuple(dataset.labels[i] for i in ids),
        )

    train = take(train_idx)
    if len(set(train.labels)) < 2:
        raise ConfigError("train split must contain at least one row of each class")
    return train, take(test_idx)


def nansafe_cut(value: float | None, threshold: float) -> bool:
    """(value <= threshold) OR value-is-missing: missing rows pass every cut."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return True
    return value <= threshold


def _midpoints(values: list[float]) -> list[float]:
    distinct = sorted(set(values))
    return [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]


def guess_thresholds(
    train: Dataset, n_est: int = 40, stump_depth: int = 1
) -> list[tuple[str, float]]:
    """Thresholds actually chosen by n_est rounds of adaptive boosting with
    depth-1 stumps over per-feature midpoints, deduplicated and sorted.

    Missing values never generate midpoints and fall on the <=-side of every
    cut, matching the nansafe binarization applied downstream.
    """
    if n_est < 1:
        raise ConfigError(f"n_est must be >= 1, got {n_est}")
    if stump_depth != 1:
        raise ConfigError("only stump_depth=1 is supported")
    n = len(train)
    y = np.array(train.labels, dtype=float)

    # Per feature: candidate thresholds plus sorted row order for prefix sums.
    per_feature = []
    for j, name in enumerate(train.feature_names):
        vals = [row[j] for row in train.rows]
        present = [(v, i) for i, v in enumerate(vals) if v is not None]
        cands = _midpoints([v for v, _ in present])
        if not cands:
            continue
        present.sort()
        sorted_idx = np.array([i for _, i in present], dtype=int)
        sorted_vals = np.array([v for v, _ in present], dtype=float)
        missing_idx = np.array([i for i, v in enumerate(vals) if v is None], dtype=int)
        # boundary[k]: rows on the <=-side of candidate k are sorted_idx[:boundary[k]]
        boundary = np.searchsorted(sorted_vals, np.array(cands), side="right")
        per_feature.append((j, name, cands, sorted_idx, missing_idx, boundary))
    if not per_feature:
        logger.warning("all features constant or missing: no thresholds to guess")
        return []

    w = np.full(n, 1.0 / n)
    selected: set[tuple[str, float]] = set()
    for _ in range(n_est):
        best: tuple[float, int, float, int] | None = None  # err, feature j, threshold, polarity
        for j, name, cands, sorted_idx, missing_idx, boundary in per_feature:
            w1 = w * y  # weight where label is 1
            w0 = w - w1
            miss0 = float(w0[missing_idx].sum()) if len(missing_idx) else 0.0
            miss1 = float(w1[missing_idx].sum()) if len(missing_idx) else 0.0
            total1 = float(w1.sum())
            pref0 = np.concatenate([[0.0], np.cumsum(w0[sorted_idx])])
            pref1 = np.concatenate([[0.0], np.cumsum(w1[sorted_idx])])
            total_w = float(w.sum())
            for k, t in enumerate(cands):
                b = boundary[k]
                # polarity 1: predict class 1 on the <=-side
                err1_side = miss0 + float(pref0[b]) + (total1 - miss1 - float(pref1[b]))
                for polarity, err in ((1, err1_side), (0, total_w - err1_side)):
                    if best is None or err < best[0]:
                        best = (err, j, t, polarity)
        assert best is not None
        err, j, t, polarity = best
        selected.add((train.feature_names[j], t))
        if err <= 0.0:
            break  # perfect stump: further rounds re-select it
        err = min(max(err, 1e-12), 1.0 - 1e-12)
        alpha = 0.5 * math.log((1.0 - err) / err)
        le_side = np.array(
            [nansafe_cut(row[j], t) for row in train.rows], dtype=bool
        )
        pred = np.where(le_side, float(polarity), float(1 - polarity))
        agree = pred == y
        w = w * np.exp(np.where(agree, -alpha, alpha))
        w = w / w.sum()
    return sorted(selected)


def binarize(
    data: Dataset, thresholds: list[tuple[str, float]], nansafe: bool
) -> tuple[np.ndarray, list[BinaryFeature]]:
    """Binary matrix with one "feature_name<=threshold" column per cut."""
    if not thresholds:
        raise EmptyInputError("no thresholds to binarize with")
    name_to_col = {name: j for j, name in enumerate(data.feature_names)}
    feats: list[BinaryFeature] = []
    cols = []
    for fname, t in thresholds:
        if fname not in name_to_col:
            raise SchemaError(f"threshold references unknown feature '{fname}'")
        j = name_to_col[fname]
        if nansafe:
            col = [nansafe_cut(row[j], t) for row in data.rows]
        else:
            col = [(row[j] is not None) and (row[j] <= t) for row in data.rows]
        cols.append(col)
        feats.append(
            BinaryFeature(name=f"{fname}<={t!r}", source=fname, threshold=t, nansafe=nansafe)
        )
    matrix = np.array(cols, dtype=bool).T if cols else np.zeros((len(data), 0), dtype=bool)
    return matrix, feats


# --- tree representation ---
# A tree structure is nested tuples: ("leaf", class) or
# ("node", feature_index, true_branch, false_branch); rows whose binary
# feature is 1 (cut holds) take the true branch. Depth of a lone leaf is 0.


def tree_depth(structure) -> int:
    if structure[0] == "leaf":
        return 0
    return 1 + max(tree_depth(structure[2]), tree_depth(structure[3]))


def tree_leaves(structure) -> int:
    if structure[0] == "leaf":
        return 1
    return tree_leaves(structure[2]) + tree_leaves(structure[3])


def _serialize(structure) -> str:
    if structure[0] == "leaf":
        return f"L{structure[1]}"
    return f"N{structure[1]}({_serialize(structure[2])},{_serialize(structure[3])})"


def structural_hash(structure) -> str:
    return hashlib.sha256(_serialize(structure).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class DecisionTree:
    structure: tuple
    n_leaves: int
    depth: int
    train_loss: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Predicted classes for a binary feature matrix (n, F)."""
        X = np.asarray(X, dtype=bool)
        out = np.empty(len(X), dtype=int)

        def walk(structure, idx: np.ndarray) -> None:
            if structure[0] == "leaf":
                out[idx] = structure[1]
                return
            _, j, true_b, false_b = structure
            mask = X[idx, j]
            walk(true_b, idx[mask])
            walk(false_b, idx[~mask])

        walk(self.structure, np.arange(len(X)))
        return out

    def describe(self, features: list[BinaryFeature] | None = None) -> str:
        def fmt(structure) -> str:
            if structure[0] == "leaf":
                return str(structure[1])
            _, j, tb, fb = structure
            name = features[j].name if features else f"f{j}"
            return f"({name} ? {fmt(tb)} : {fmt(fb)})"

        return fmt(self.structure)


def _assignment_masks(n_features: int) -> tuple[list[int], int]:
    """Bitmasks over all 2^F feature assignments; bit a is set in masks[j]
    iff assignment a has feature j true. Used to compare subtree prediction
    functions in O(1) bigint ops."""
    size = 1 << n_features
    full = (1 << size) - 1
    masks = []
    for j in range(n_features):
        block = ((1 << (1 << j)) - 1) << (1 << j)  # low half 0s, high half 1s
        width = 2 << j
        m = 0
        for pos in range(0, size, width):
            m |= block << pos
        masks.append(m)
    return masks, full


def enumerate_rashomon(
    X: np.ndarray, y, config: RashomonConfig
) -> list[DecisionTree]:
    """Every structurally distinct tree with L(T) <= L* + eps_add + eps_mul*L*.

    Exact-rational costs; output deduplicated and sorted by
    (loss, leaves, structural hash).
    """
    X = np.asarray(X, dtype=bool)
    if X.ndim != 2 or X.shape[1] == 0:
        raise EmptyInputError("empty binary feature matrix")
    n, nf = X.shape
    if n == 0:
        raise EmptyInputError("no training rows")
    if nf > MAX_BINARY_FEATURES:
        raise CapacityError(
            f"{nf} binary features exceeds the desk-scale guard of {MAX_BINARY_FEATURES}"
        )
    if config.depth_budget > MAX_DEPTH_BUDGET:
        raise CapacityError(
            f"depth_budget {config.depth_budget} exceeds the desk-scale guard of {MAX_DEPTH_BUDGET}"
        )
    y = np.asarray(y, dtype=int)
    if set(np.unique(y)) - {0, 1}:
        raise ConfigError("labels must be 0/1")

    lam = Fraction(config.regularization)
    eps_add = Fraction(config.rashomon_bound_adder)
    eps_mul = Fraction(config.rashomon_bound_multiplier)

    # Row bitmasks: columns[j] has bit i set iff X[i, j]; y_mask bit i iff label 1.
    columns = [0] * nf
    y_mask = 0
    for i in range(n):
        if y[i]:
            y_mask |= 1 << i
        row = X[i]
        for j in range(nf):
            if row[j]:
                columns[j] |= 1 << i
    full_rows = (1 << n) - 1

    def leaf_errors(support: int) -> tuple[int, int]:
        ones = (support & y_mask).bit_count()
        zeros = support.bit_count() - ones
        return ones, zeros  # errors when predicting 0, errors when predicting 1

    min_cost_memo: dict[tuple[int, int], Fraction] = {}

    def min_cost(support: int, depth: int) -> Fraction:
        key = (support, depth)
        got = min_cost_memo.get(key)
        if got is not None:
            return got
        err0, err1 = leaf_errors(support)
        best = Fraction(min(err0, err1), n) + lam
        if depth >= 1:
            for j in range(nf):
                s_true = support & columns[j]
                s_false = support & ~columns[j]
                cand = min_cost(s_true, depth - 1) + min_cost(s_false, depth - 1)
                if cand < best:
                    best = cand
        min_cost_memo[key] = best
        return best

    optimum = min_cost(full_rows, config.depth_budget)
    bound = optimum + eps_add + eps_mul * optimum

    amasks, afull = _assignment_masks(nf)

    def enum(support: int, depth: int, budget: Fraction) -> list[tuple[tuple, Fraction, int, int]]:
        """All subtree (structure, cost, leaves, prediction-mask) within budget."""
        out = []
        err0, err1 = leaf_errors(support)
        for cls, err in ((0, err0), (1, err1)):
            cost = Fraction(err, n) + lam
            if cost <= budget:
                out.append((("leaf", cls), cost, 1, afull if cls else 0))
        if depth >= 1:
            for j in range(nf):
                s_true = support & columns[j]
                s_false = support & ~columns[j]
                floor_false = min_cost(s_false, depth - 1)
                if min_cost(s_true, depth - 1) + floor_false > budget:
                    continue
                for t_struct, t_cost, t_leaves, t_mask in enum(
                    s_true, depth - 1, budget - floor_false
                ):
                    for f_struct, f_cost, f_leaves, f_mask in enum(
                        s_false, depth - 1, budget - t_cost
                    ):
                        if not config.trivial_extensions and t_mask == f_mask:
                            continue  # split whose subtrees predict identically
                        mask = (amasks[j] & t_mask) | (~amasks[j] & f_mask & afull)
                        out.append(
                            (
                                ("node", j, t_struct, f_struct),
                                t_cost + f_cost,
                                t_leaves + f_leaves,
                                mask,
                            )
                        )
        return out

    found = enum(full_rows, config.depth_budget, bound)
    seen = set()
    trees = []
    for structure, cost, leaves, _ in found:
        if structure in seen:
            continue
        seen.add(structure)
        trees.append(
            DecisionTree(
                structure=structure,
                n_leaves=leaves,
                depth=tree_depth(structure),
                train_loss=float(cost),
            )
        )
    trees.sort(key=lambda t: (Fraction(t.train_loss), t.n_leaves, structural_hash(t.structure)))
    return trees


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


def evaluate_models(
    trees: list[DecisionTree],
    train: tuple[np.ndarray, np.ndarray],
    test: tuple[np.ndarray, np.ndarray],
    regularization: float,
) -> ModelSet:
    """Accuracy/F1 on train and test, leaf count, and the training objective,
    one ModelSet row per tree with the fixed six-metric schema."""
    if not trees:
        raise EmptyInputError("no trees to evaluate")
    x_train, y_train = train
    x_test, y_test = test
    y_train = np.asarray(y_train, dtype=int)
    y_test = np.asarray(y_test, dtype=int)
    records = []
    for i, tree in enumerate(trees):
        metrics: dict[str, float | None] = {}
        for split_name, xb, yb in (("train", x_train, y_train), ("test", x_test, y_test)):
            if len(yb) == 0:
                metrics[f"{split_name}_acc"] = None
                metrics[f"{split_name}_f1"] = None
                continue
            pred = tree.predict(xb)
            acc = float(np.mean(pred == yb))
            tp = int(np.sum((pred == 1) & (yb == 1)))
            fp = int(np.sum((pred == 1) & (yb == 0)))
            fn = int(np.sum((pred == 0) & (yb == 1)))
            metrics[f"{split_name}_acc"] = acc
            metrics[f"{split_name}_f1"] = _f1(tp, fp, fn)
        train_err = 1.0 - metrics["train_acc"]
        ordered = {
            "train_acc": metrics["train_acc"],
            "test_acc": metrics["test_acc"],
            "train_f1": metrics["train_f1"],
            "test_f1": metrics["test_f1"],
            "n_leaves": float(tree.n_leaves),
            "train_loss": train_err + regularization * tree.n_leaves,
        }
        records.append(ModelRecord(id=i, metrics=ordered))
    return ModelSet(schema=METRIC_SCHEMA, records=tuple(records))


@dataclass(frozen=True)
class GenerationResult:
    model_set: ModelSet
    trees: list[DecisionTree]
    features: list[BinaryFeature]
    optimum: float
    bound: float
    config: RashomonConfig


def generate_rashomon(
    dataset: Dataset,
    config: RashomonConfig,
    test_fraction: float = 0.3,
    split_seed: int = 0,
) -> GenerationResult:
    """Full pipeline: guess thresholds on train, binarize nansafe, enumerate,
    evaluate on train and test."""
    train, test = split_dataset(dataset, test_fraction, split_seed)
    thresholds = guess_thresholds(train, n_est=config.n_est, stump_depth=config.stump_depth)
    if not thresholds:
        raise EmptyInputError("threshold guessing produced no cuts (constant features?)")
    x_train, features = binarize(train, thresholds, nansafe=True)
    x_test, _ = binarize(test, thresholds, nansafe=True)
    trees = enumerate_rashomon(x_train, train.labels, config)
    model_set = evaluate_models(
        trees,
        (x_train, np.array(train.labels)),
        (x_test, np.array(test.labels)),
        config.regularization,
    )
    losses = [t.train_loss for t in trees]
    optimum = min(losses)
    return GenerationResult(
        model_set=model_set,
        trees=trees,
        features=features,
        optimum=optimum,
        bound=optimum
        + config.rashomon_bound_adder
        + config.rashomon_bound_multiplier * optimum,
        config=config,
    )
