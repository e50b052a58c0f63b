"""Reader-emotion text classifier.

Multinomial Naive Bayes over four reader emotions where tokens from an
emotion lexicon are up-weighted while counting: each occurrence of a lexicon
token contributes ``boost`` to its class count, every other token 1.
Tokens never seen in training are ignored at classification time.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._io import iter_jsonl
from .errors import ValidationError

LABELS = ("angry", "funny", "surprised", "moving")
DEFAULT_BOOST = 2.0
DEFAULT_SMOOTHING = 1.0

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation. No stemming."""
    return _TOKEN_RE.findall(text.lower())


def _as_tokens(text) -> list[str]:
    return tokenize(text) if isinstance(text, str) else list(text)


def lexicon_hash(lexicon: Iterable[str]) -> str:
    joined = "\n".join(sorted(set(lexicon)))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EmotionModel:
    priors: tuple[float, ...]
    # per-class log P(token | class); every vocabulary token has an entry
    log_likelihood: Mapping[str, tuple[float, ...]]
    lexicon: frozenset[str]
    boost: float
    smoothing: float
    labels: tuple[str, ...] = field(default=LABELS)

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "priors": list(self.priors),
            "boost": self.boost,
            "smoothing": self.smoothing,
            "lexicon_sha256": lexicon_hash(self.lexicon),
            "lexicon": sorted(self.lexicon),
            "log_likelihood": {t: list(v) for t, v in sorted(self.log_likelihood.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EmotionModel":
        labels = tuple(obj["labels"])
        if labels != LABELS:
            raise ValidationError(f"unexpected label set {labels}")
        lexicon = frozenset(obj.get("lexicon", ()))
        if "lexicon_sha256" in obj and lexicon and lexicon_hash(lexicon) != obj["lexicon_sha256"]:
            raise ValidationError("lexicon hash does not match lexicon contents")
        return cls(
            priors=tuple(obj["priors"]),
            log_likelihood={t: tuple(v) for t, v in obj["log_likelihood"].items()},
            lexicon=lexicon,
            boost=float(obj["boost"]),
            smoothing=float(obj["smoothing"]),
            labels=labels,
        )


def train_emotion_model(
    corpus: Iterable[tuple[str | Sequence[str], str]],
    lexicon: Iterable[str] = (),
    boost: float = DEFAULT_BOOST,
    smoothing: float = DEFAULT_SMOOTHING,
) -> EmotionModel:
    """Fit the boosted multinomial NB model.

    ``corpus`` yields ``(text, label)`` pairs; ``text`` is a string (tokenized
    here) or an already tokenized sequence.
    """
    if boost < 1:
        raise ValueError(f"boost must be >= 1, got {boost}")
    if smoothing <= 0:
        raise ValueError(f"smoothing must be > 0, got {smoothing}")
    lexicon = frozenset(lexicon)
    doc_counts = Counter()
    token_weights = {lab: Counter() for lab in LABELS}
    for i, (text, label) in enumerate(corpus):
        if label not in token_weights:
            raise ValidationError(f"unknown emotion label {label!r}", f"document {i}")
        doc_counts[label] += 1
        for tok in _as_tokens(text):
            token_weights[label][tok] += boost if tok in lexicon else 1.0
    n_docs = sum(doc_counts.values())
    if n_docs == 0:
        raise ValidationError("empty training corpus")

    vocab = sorted(set().union(*token_weights.values()))
    v = len(vocab)
    totals = {lab: sum(token_weights[lab].values()) for lab in LABELS}
    table = {}
    for tok in vocab:
        table[tok] = tuple(
            math.log((token_weights[lab][tok] + smoothing) / (totals[lab] + smoothing * v)) for lab in LABELS
        )
    priors = tuple(doc_counts[lab] / n_docs for lab in LABELS)
    return EmotionModel(priors, table, lexicon, float(boost), float(smoothing))


def classify_emotion(model: EmotionModel, text) -> tuple[str, tuple[float, ...]]:
    """Return ``(label, posterior)``; ties go to the earlier label in ``LABELS``."""
    scores = [math.log(p) if p > 0 else -math.inf for p in model.priors]
    for tok in _as_tokens(text):
        row = model.log_likelihood.get(tok)
        if row is None:
            continue
        for j, ll in enumerate(row):
            scores[j] += ll
    top = max(scores)
    weights = [math.exp(s - top) if s > -math.inf else 0.0 for s in scores]
    z = math.fsum(weights)
    posterior = tuple(w / z for w in weights)
    # argmax on log scores: exact ties (e.g. empty text) keep label order
    best = max(range(len(LABELS)), key=lambda j: (scores[j], -j))
    return model.labels[best], posterior


def emotion_histogram(model: EmotionModel, texts) -> dict[str, int]:
    hist = dict.fromkeys(LABELS, 0)
    for text in texts:
        hist[classify_emotion(model, text)[0]] += 1
    return hist


def top_emotion(hist: Mapping[str, int]) -> str:
    """Most frequent label, ties by label order; caller handles the empty case."""
    return max(LABELS, key=lambda lab: (hist[lab], -LABELS.index(lab)))


# -- toy vocabularies used by the synthetic cohort and the default model ----

TOY_VOCABULARY = {
    "angry": (
        "furious", "outrage", "unfair", "hate", "disgusting", "scandal", "liar", "corrupt",
        "shameful", "annoying", "rage", "injustice",
    ),
    "funny": (
        "haha", "lol", "hilarious", "joke", "silly", "laugh", "prank", "comedy",
        "giggle", "ridiculous", "meme", "lmao",
    ),
    "surprised": (
        "wow", "unexpected", "shocking", "unbelievable", "suddenly", "amazing", "astonished",
        "whoa", "incredible", "sudden", "stunned", "mystery",
    ),
    "moving": (
        "tears", "touching", "grateful", "mother", "hope", "warm", "kindness", "love",
        "thankful", "memory", "farewell", "heart",
    ),
}
FILLER_VOCABULARY = (
    "today", "the", "a", "and", "of", "to", "in", "news", "friend", "class", "dinner",
    "campus", "weather", "phone", "movie", "game", "work", "exam", "library", "city",
    "bus", "week", "photo", "story",
)


def toy_corpus(docs_per_class: int = 40, seed: int = 7) -> list[tuple[list[str], str]]:
    """Deterministic labeled corpus drawn from the toy vocabularies."""
    import random

    rng = random.Random(seed)
    corpus = []
    for label in LABELS:
        for _ in range(docs_per_class):
            words = rng.choices(TOY_VOCABULARY[label], k=rng.randint(3, 6))
            words += rng.choices(FILLER_VOCABULARY, k=rng.randint(4, 10))
            rng.shuffle(words)
            corpus.append((words, label))
    return corpus


def toy_lexicon() -> frozenset[str]:
    return frozenset(t for words in TOY_VOCABULARY.values() for t in words)


_DEFAULT_MODEL: EmotionModel | None = None


def default_emotion_model() -> EmotionModel:
    """Model trained on :func:`toy_corpus` with the toy lexicon and default boost."""
    global _DEFAULT_MODEL
    if _DEFAULT_MODEL is None:
        _DEFAULT_MODEL = train_emotion_model(toy_corpus(), toy_lexicon())
    return _DEFAULT_MODEL


# -- file formats -----------------------------------------------------------

def read_corpus(path) -> list[tuple[str, str]]:
    out = []
    for lineno, obj in iter_jsonl(path):
        if not isinstance(obj, dict) or "text" not in obj or "label" not in obj:
            raise ValidationError("expected {text, label}", f"{path} line {lineno}")
        if obj["label"] not in LABELS:
            raise ValidationError(f"unknown emotion label {obj['label']!r}", f"{path} line {lineno}")
        out.append((obj["text"], obj["label"]))
    return out


def read_lexicon(path) -> frozenset[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(ln.strip().lower() for ln in lines if ln.strip() and not ln.startswith("#"))


def load_emotion_model(path) -> EmotionModel:
    return EmotionModel.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
