#!/usr/bin/env python3
"""Regenerate the bundled CSVs under data/ (fixed seeds; commit the output).

synthetic_risk.csv is shaped so the default pipeline run shows the headline
behavior: a stump and a deeper refinement both land in the Rashomon set, the
stump's test accuracy staying close to the set's best.
"""

import csv
import random
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "data"


def make_synthetic_risk(path: Path, n: int = 240, seed: int = 7) -> None:
    # Low-cardinality features keep the midpoint pool (and therefore any
    # guessed-threshold set) within the 12-binary-feature enumeration guard:
    # 4 + 2 + 2 + 2 = 10 candidate cuts in total.
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        util = float(rng.randint(1, 5) * 10)      # utilization band, strong signal
        inquiries = float(rng.randint(0, 2))      # refines part of the low band
        age_band = float(rng.choice((30, 45, 60)))  # weak
        balance = float(rng.randint(0, 2))        # weak, with missing cells
        high = util >= 40.0
        if high:
            y = 1 if rng.random() < 0.93 else 0
        elif inquiries >= 2.0:
            y = 1 if rng.random() < 0.72 else 0
        else:
            y = 1 if rng.random() < 0.06 else 0
        bal_cell = "" if rng.random() < 0.10 else f"{balance}"
        rows.append((f"{util}", f"{inquiries}", f"{age_band}", bal_cell, str(y)))
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["utilization", "inquiries", "age", "balance", "default"])
        w.writerows(rows)


def make_models_demo(path: Path, n: int = 20, seed: int = 13) -> None:
    rng = random.Random(seed)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["train_acc", "test_acc", "train_f1", "test_f1", "n_leaves", "train_loss"])
        for _ in range(n):
            leaves = rng.randint(2, 9)
            train_acc = round(0.80 + 0.018 * leaves + rng.uniform(-0.02, 0.02), 4)
            test_acc = round(train_acc - 0.015 * leaves / 4 + rng.uniform(-0.03, 0.03), 4)
            train_f1 = round(train_acc - rng.uniform(0.0, 0.04), 4)
            test_f1 = round(test_acc - rng.uniform(0.0, 0.05), 4)
            loss = round((1 - train_acc) + 0.02 * leaves, 4)
            w.writerow([train_acc, test_acc, train_f1, test_f1, leaves, loss])


def make_demo_points(path: Path, n: int = 12, seed: int = 5) -> None:
    rng = random.Random(seed)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["m1", "m2", "m3"])
        for _ in range(n):
            w.writerow([round(rng.uniform(0, 1), 3), round(rng.uniform(0, 1), 3),
                        round(rng.uniform(-1, 1), 3)])


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    make_synthetic_risk(DATA / "synthetic_risk.csv")
    make_models_demo(DATA / "models_demo.csv")
    make_demo_points(DATA / "demo_points.csv")
    print("wrote", sorted(p.name for p in DATA.glob("*.csv")))
