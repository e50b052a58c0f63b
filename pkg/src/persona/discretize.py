"""Mean +/- sigma discretization of continuous trait scores.

For one dimension, ``alpha = mean - sigma`` and ``beta = mean + sigma``.
Scores below alpha are ``low``, above beta ``high``, and the closed
interval ``[alpha, beta]`` is ``mid``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, TypeVar

from ._io import csv_text
from .errors import ValidationError

LOW, MID, HIGH = "low", "mid", "high"
THREE_CLASS = (LOW, MID, HIGH)
TWO_CLASS = (LOW, HIGH)

T = TypeVar("T")


@dataclass(frozen=True)
class Thresholds:
    dimension: str
    mean: float
    sigma: float

    @property
    def alpha(self) -> float:
        return self.mean - self.sigma

    @property
    def beta(self) -> float:
        return self.mean + self.sigma

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "mean": self.mean, "sigma": self.sigma,
                "alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Thresholds":
        return cls(obj["dimension"], float(obj["mean"]), float(obj["sigma"]))


def compute_thresholds(scores: Sequence[float], dimension: str = "", ddof: int = 0) -> Thresholds:
    """Mean and standard deviation of ``scores``.

    ``ddof=0`` (default) is the population deviation; ``ddof=1`` the sample one.
    Accepts floats or Fractions; moments are accumulated with :func:`math.fsum`.
    """
    n = len(scores)
    if n == 0:
        raise ValueError("cannot compute thresholds of an empty score list")
    if n - ddof <= 0:
        raise ValueError(f"need more than {ddof} scores for ddof={ddof}")
    xs = [float(s) for s in scores]
    mean = math.fsum(xs) / n
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - ddof)
    return Thresholds(dimension, mean, math.sqrt(var))


def bin_score(score: float, t: Thresholds) -> str:
    s = float(score)
    if s < t.alpha:
        return LOW
    if s > t.beta:
        return HIGH
    return MID


def discretize(scores: Sequence[float], t: Thresholds | None = None, dimension: str = "") -> tuple[list[str], Thresholds]:
    t = t or compute_thresholds(scores, dimension)
    return [bin_score(s, t) for s in scores], t


def filter_two_class(labels: Sequence[str], vectors: Sequence[T]) -> tuple[list[str], list[T]]:
    """Drop ``mid`` samples, preserving order."""
    if len(labels) != len(vectors):
        raise ValueError(f"misaligned inputs: {len(labels)} labels vs {len(vectors)} vectors")
    keep = [i for i, lab in enumerate(labels) if lab != MID]
    return [labels[i] for i in keep], [vectors[i] for i in keep]


def class_counts(labels: Sequence[str], classes: Sequence[str] = THREE_CLASS) -> tuple[int, ...]:
    return tuple(sum(1 for lab in labels if lab == c) for c in classes)


# -- file formats -----------------------------------------------------------

def labels_csv(ids: Sequence[str], labels: Mapping[str, Sequence[str]]) -> str:
    dims = list(labels)
    return csv_text(["participant_id", *dims], ([pid, *(labels[d][i] for d in dims)] for i, pid in enumerate(ids)))


def read_labels(path) -> dict[str, dict[str, str]]:
    """participant id -> {dimension: label}; an empty cell means excluded."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or reader.fieldnames[0] != "participant_id":
            raise ValidationError("first column must be participant_id", f"{path} line 1")
        dims = reader.fieldnames[1:]
        for lineno, row in enumerate(reader, start=2):
            for d in dims:
                if row[d] not in ("", *THREE_CLASS):
                    raise ValidationError(f"{d}: unknown label {row[d]!r}", f"{path} line {lineno}")
            out[row["participant_id"]] = {d: row[d] for d in dims}
    return out
