"""Scoring of the 44-item Big Five Inventory (BFI-44).

Each item is answered on a 1-5 agreement scale. A dimension score is the
mean of its items after reverse-keyed answers are flipped (``6 - answer``),
so every score lies in [1, 5] and is a multiple of ``1/k`` for a dimension
with ``k`` items. Scores are kept as exact :class:`fractions.Fraction`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._io import csv_text, iter_jsonl
from .errors import ValidationError

DIMENSIONS = ("E", "A", "C", "N", "O")
N_ITEMS = 44
LIKERT = range(1, 6)


@dataclass(frozen=True)
class KeyEntry:
    dimension: str
    reversed: bool


@dataclass(frozen=True)
class InventoryResponse:
    """44 Likert answers from one participant, validated on construction."""

    answers: tuple[int, ...]
    participant_id: str = ""

    def __post_init__(self):
        answers = tuple(self.answers)
        if len(answers) != N_ITEMS:
            raise ValidationError(f"expected {N_ITEMS} answers, got {len(answers)}", self._where())
        for i, a in enumerate(answers):
            # bool is an int subclass; a stray True must not score as 1
            if isinstance(a, bool) or not isinstance(a, int) or a not in LIKERT:
                raise ValidationError(f"answer {a!r} is not an integer in 1..5", self._where(f"answers[{i}]"))
        object.__setattr__(self, "answers", answers)

    def _where(self, suffix=None):
        parts = [p for p in (f"participant {self.participant_id}" if self.participant_id else None, suffix) if p]
        return ", ".join(parts) or None


@dataclass(frozen=True)
class PersonalityScore:
    e: Fraction
    a: Fraction
    c: Fraction
    n: Fraction
    o: Fraction

    def __getitem__(self, dim: str) -> Fraction:
        return getattr(self, dim.lower())

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (self.e, self.a, self.c, self.n, self.o)

    def as_floats(self) -> dict[str, float]:
        return {d: float(self[d]) for d in DIMENSIONS}


@lru_cache(maxsize=1)
def _load_key() -> tuple[str, dict[int, KeyEntry]]:
    raw = json.loads(resources.files("persona").joinpath("data/bfi44_key.json").read_text())
    table = {int(it["item"]): KeyEntry(it["dimension"], bool(it["reversed"])) for it in raw["items"]}
    return raw["version"], table


def scoring_key() -> dict[int, KeyEntry]:
    """Item number (1..44) to ``KeyEntry(dimension, reversed)``."""
    return dict(_load_key()[1])


def key_version() -> str:
    return _load_key()[0]


def item_counts() -> dict[str, int]:
    counts = dict.fromkeys(DIMENSIONS, 0)
    for entry in _load_key()[1].values():
        counts[entry.dimension] += 1
    return counts


def score_bfi(resp: InventoryResponse | Sequence[int]) -> PersonalityScore:
    """Score one participant.

    Accepts an :class:`InventoryResponse` or a raw sequence of 44 answers
    (validated the same way).
    """
    if not isinstance(resp, InventoryResponse):
        resp = InventoryResponse(tuple(resp))
    key = _load_key()[1]
    sums = dict.fromkeys(DIMENSIONS, 0)
    counts = dict.fromkeys(DIMENSIONS, 0)
    for idx, answer in enumerate(resp.answers, start=1):
        entry = key[idx]
        sums[entry.dimension] += 6 - answer if entry.reversed else answer
        counts[entry.dimension] += 1
    return PersonalityScore(*(Fraction(sums[d], counts[d]) for d in DIMENSIONS))


# -- file formats -----------------------------------------------------------

def _parse_answers(raw, where):
    out = []
    for i, v in enumerate(raw):
        try:
            out.append(int(str(v).strip()))
        except ValueError:
            raise ValidationError(f"answers[{i}]: {v!r} is not an integer", where) from None
    return out


def read_inventories(path) -> list[InventoryResponse]:
    """Read a CSV or JSONL inventory file.

    CSV: header ``participant_id,q1..q44``. JSONL: ``{"participant_id", "answers": [44 ints]}``.
    Errors carry the line number.
    """
    path = Path(path)
    out = []
    if path.suffix == ".jsonl":
        for lineno, obj in iter_jsonl(path):
            where = f"{path} line {lineno}"
            if not isinstance(obj, dict) or "answers" not in obj:
                raise ValidationError("expected an object with 'answers'", where)
            pid = str(obj.get("participant_id", ""))
            try:
                out.append(InventoryResponse(tuple(_parse_answers(obj["answers"], where)), pid))
            except ValidationError as exc:
                raise ValidationError(str(exc), where) from None
        return out

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "participant_id" or len(header) != N_ITEMS + 1:
            raise ValidationError(f"header must be participant_id,q1..q{N_ITEMS}", f"{path} line 1")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            where = f"{path} line {lineno}"
            if len(row) != N_ITEMS + 1:
                raise ValidationError(f"expected {N_ITEMS + 1} cells, got {len(row)}", where)
            try:
                out.append(InventoryResponse(tuple(_parse_answers(row[1:], where)), row[0]))
            except ValidationError as exc:
                raise ValidationError(str(exc), where) from None
    return out


def inventories_csv(responses: Iterable[InventoryResponse]) -> str:
    header = ["participant_id"] + [f"q{i}" for i in range(1, N_ITEMS + 1)]
    return csv_text(header, ([r.participant_id, *r.answers] for r in responses))


def format_score(x: Fraction) -> str:
    # 6 decimals is exact enough: denominators are 8, 9 or 10
    return f"{float(x):.6f}"


def scores_csv(scores: Mapping[str, PersonalityScore]) -> str:
    return csv_text(
        ["participant_id", *DIMENSIONS],
        ([pid, *(format_score(s[d]) for d in DIMENSIONS)] for pid, s in scores.items()),
    )


def read_scores(path) -> dict[str, dict[str, float]]:
    """Read a scores CSV (``participant_id,E,A,C,N,O``) into float dicts."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"participant_id", *DIMENSIONS} - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"missing columns {sorted(missing)}", f"{path} line 1")
        for lineno, row in enumerate(reader, start=2):
            try:
                vals = {d: float(row[d]) for d in DIMENSIONS}
            except (TypeError, ValueError):
                raise ValidationError("non-numeric score", f"{path} line {lineno}") from None
            for d, v in vals.items():
                if not 1.0 <= v <= 5.0:
                    raise ValidationError(f"{d} score {v} outside [1, 5]", f"{path} line {lineno}")
            out[row["participant_id"]] = vals
    return out
