"""Stratified k-fold cross-validation and precision/recall/F reporting.

Predictions from all held-out folds are pooled into one confusion matrix
and metrics are computed once from that matrix. Per-class values are
averaged with true-class support as weights, giving one P/R/F row per
personality dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._io import csv_text
from .c45 import Dataset, TrainParams, TreeModel, predict_many, train
from .discretize import MID, THREE_CLASS, TWO_CLASS, compute_thresholds, discretize
from .errors import ValidationError

MODES = ("3class", "2class")
THRESHOLD_MODES = ("global", "per-fold")


def stratified_folds(labels: Sequence[str], k: int, seed: int = 0) -> list[int]:
    """Fold index (0..k-1) for every sample.

    Each class is shuffled with its own draw from one seeded generator, the
    shuffled classes are concatenated, and positions are dealt round-robin.
    Fold sizes and per-class counts per fold therefore differ by at most one.
    """
    n = len(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of samples ({n})")
    rng = np.random.default_rng(seed)
    order = []
    for c in sorted(set(labels)):
        members = np.array([i for i, lab in enumerate(labels) if lab == c], dtype=np.int64)
        order.extend(members[rng.permutation(len(members))].tolist())
    folds = [0] * n
    for pos, i in enumerate(order):
        folds[i] = pos % k
    return folds


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed by ``(true class, predicted class)``."""

    classes: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = len(self.classes)
        if len(self.counts) != m or any(len(r) != m for r in self.counts):
            raise ValueError(f"confusion matrix must be {m}x{m}")
        if any(c < 0 for r in self.counts for c in r):
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_pairs(cls, classes: Sequence[str], truth: Sequence[str], predicted: Sequence[str]) -> "ConfusionMatrix":
        index = {c: i for i, c in enumerate(classes)}
        table = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(truth, predicted, strict=True):
            table[index[t], index[p]] += 1
        return cls.from_array(classes, table)

    @classmethod
    def from_array(cls, classes: Sequence[str], table) -> "ConfusionMatrix":
        return cls(tuple(classes), tuple(tuple(int(c) for c in row) for row in np.asarray(table)))

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts))

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise ValueError("cannot add confusion matrices over different classes")
        return ConfusionMatrix.from_array(self.classes, np.add(self.counts, other.counts))

    def to_json(self) -> dict:
        return {"classes": list(self.classes), "counts": [list(r) for r in self.counts]}


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f: float
    support: int


@dataclass(frozen=True)
class MetricsRow:
    dimension: str
    per_class: tuple[ClassMetrics, ...]
    precision: float
    recall: float
    f: float


def harmonic_f(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def prf(cm: ConfusionMatrix, dimension: str = "") -> MetricsRow:
    """Per-class and support-weighted precision, recall and F.

    A zero denominator gives 0. The weighted F is the support-weighted mean
    of the per-class F values, as is conventional.
    """
    table = np.asarray(cm.counts, dtype=np.int64)
    total = int(table.sum())
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    per_class = []
    for i, label in enumerate(cm.classes):
        tp = int(table[i, i])
        col, row = int(table[:, i].sum()), int(table[i, :].sum())
        p = tp / col if col else 0.0
        r = tp / row if row else 0.0
        per_class.append(ClassMetrics(label, p, r, harmonic_f(p, r), row))
    w = [m.support / total for m in per_class]
    return MetricsRow(
        dimension,
        tuple(per_class),
        math.fsum(wi * m.precision for wi, m in zip(w, per_class)),
        math.fsum(wi * m.recall for wi, m in zip(w, per_class)),
        math.fsum(wi * m.f for wi, m in zip(w, per_class)),
    )


@dataclass
class CVResult:
    metrics: MetricsRow
    confusion: ConfusionMatrix
    trees: list[TreeModel] = field(default_factory=list)
    folds: list[int] = field(default_factory=list)


def _fold_labels(scores, train_idx, test_idx, dimension):
    t = compute_thresholds([scores[i] for i in train_idx], dimension)
    return discretize([scores[i] for i in train_idx], t)[0], discretize([scores[i] for i in test_idx], t)[0]


def cross_validate(
    data: Dataset,
    dimension: str = "",
    mode: str = "3class",
    k: int = 10,
    params: TrainParams = TrainParams(),
    seed: int = 0,
    scores: Sequence[float] | None = None,
    thresholds: str = "global",
    schema_version: str = "",
) -> CVResult:
    """k-fold cross-validation of C4.5 on one dimension.

    With ``thresholds="global"`` the labels in ``data`` are used as given;
    in 2-class mode they must already exclude ``mid``. With ``"per-fold"``
    each fold recomputes alpha/beta from its training scores (``scores`` is
    then required and aligned with the rows of ``data``), labels both sides
    with them and, in 2-class mode, drops the resulting ``mid`` samples.
    Folds are stratified on the labels of ``data`` in both cases.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if thresholds not in THRESHOLD_MODES:
        raise ValueError(f"thresholds must be one of {THRESHOLD_MODES}")
    classes = THREE_CLASS if mode == "3class" else TWO_CLASS
    labels = data.labels
    per_fold = thresholds == "per-fold"
    if per_fold:
        if scores is None or len(scores) != len(data):
            raise ValueError("per-fold thresholds need one score per sample")
    elif mode == "2class" and MID in labels:
        raise ValidationError("2-class mode needs mid samples removed first")
    folds = stratified_folds(labels, k, seed)
    fold_arr = np.asarray(folds)
    total = ConfusionMatrix.from_array(classes, np.zeros((len(classes), len(classes)), dtype=np.int64))
    trees = []
    for f in range(k):
        train_idx = np.flatnonzero(fold_arr != f)
        test_idx = np.flatnonzero(fold_arr == f)
        if per_fold:
            train_lab, test_lab = _fold_labels(scores, train_idx, test_idx, dimension)
            if mode == "2class":
                keep = [i for i, lab in enumerate(train_lab) if lab != MID]
                train_idx, train_lab = train_idx[keep], [train_lab[i] for i in keep]
                keep = [i for i, lab in enumerate(test_lab) if lab != MID]
                test_idx, test_lab = test_idx[keep], [test_lab[i] for i in keep]
        else:
            train_lab = [labels[i] for i in train_idx]
            test_lab = [labels[i] for i in test_idx]
        missing = [c for c in classes if c not in train_lab and (c in labels or per_fold)]
        if missing:
            raise ValidationError(f"training fold {f} has no {'/'.join(missing)} samples; use a smaller k")
        train_set = data.subset(train_idx, train_lab, classes)
        tree = train(train_set, params, schema_version, dimension)
        trees.append(tree)
        if len(test_idx):
            predicted = predict_many(tree, (data.row(i) for i in test_idx))
            total = total + ConfusionMatrix.from_pairs(classes, test_lab, predicted)
    return CVResult(prf(total, dimension), total, trees, folds)


# -- reporting --------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.3f}"


def metrics_csv(rows: Sequence[MetricsRow]) -> str:
    """One line per dimension: weighted P/R/F, then per-class P/R/F/support."""
    classes = [m.label for m in rows[0].per_class] if rows else []
    header = ["dimension", "precision", "recall", "f_value"]
    for c in classes:
        header += [f"{c}_precision", f"{c}_recall", f"{c}_f_value", f"{c}_support"]
    body = []
    for r in rows:
        line = [r.dimension, f"{r.precision:.6f}", f"{r.recall:.6f}", f"{r.f:.6f}"]
        for m in r.per_class:
            line += [f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f:.6f}", m.support]
        body.append(line)
    return csv_text(header, body)


def metrics_table(rows: Sequence[MetricsRow], title: str = "") -> str:
    """Aligned text table: ``DIMENSION  P  R  F-VALUE``."""
    lines = [title] if title else []
    lines.append(f"{'DIMENSION':<10}{'P':>8}{'R':>8}{'F-VALUE':>10}")
    for r in rows:
        lines.append(f"{r.dimension:<10}{_fmt(r.precision):>8}{_fmt(r.recall):>8}{_fmt(r.f):>10}")
    return "\n".join(lines) + "\n"
