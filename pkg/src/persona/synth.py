"""Synthetic cohorts with planted trait-behavior links.

Each participant gets a latent Big-Five vector, an inventory whose scored
means sit close to it, and a behavior log in which a handful of features
depend monotonically on the standardized latent score ``z``:

* count features: ``rate = exp(a + b*z + noise)``, then Poisson sampling
* proportion features: ``p = logistic(a + b*z + noise)``, then binomial sampling

All randomness comes from per-participant streams seeded with
``(seed, participant index, purpose)``, so participants can be generated
independently and in any order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timedelta
from typing import Mapping, Sequence

import numpy as np

from ._io import dump_json
from .emotion import FILLER_VOCABULARY, LABELS, TOY_VOCABULARY, EmotionModel, default_emotion_model
from .errors import ValidationError
from .features import Blog, Comment, Status, UserRecord, extract_features, resolve_feature
from .inventory import DIMENSIONS, InventoryResponse, PersonalityScore, score_bfi, scoring_key

DEFAULT_MEANS = {"E": 2.95, "A": 3.71, "C": 3.29, "N": 3.02, "O": 3.39}
DEFAULT_SIGMAS = {"E": 0.64, "A": 0.47, "C": 0.55, "N": 0.61, "O": 0.61}
REFERENCE_DATE = datetime(2012, 3, 1)

# Largest allowed gap between a scored inventory mean and its latent score.
ITEM_BOUND = 0.35
_REPAIR_BOUND = 0.3

# Stream purposes.
_LATENT, _PROFILE, _PLANTED, _CONTENT = 0, 1, 2, 3

# Features a link may target: (link kind, intercept a).
# Count intercepts are log-rates; proportion intercepts are logits.
LINKABLE = {
    "zzstatus_proportion": ("proportion", math.log(0.3 / 0.7)),
    "angry_blog_proportion": ("proportion", math.log(0.25 / 0.75)),
    "usage": ("count", math.log(1.5)),  # logins per week
    "recent_status_count_30d": ("count", math.log(6.0)),
    "zidou": ("count", math.log(80.0)),
    "blog_emoticon_count": ("count", math.log(6.0)),
    "guestbook_count": ("count", math.log(5.0)),
    "friend_count": ("count", math.log(120.0)),
    "photo_count": ("count", math.log(40.0)),
    "gift_count": ("count", math.log(4.0)),
    "share_count": ("count", math.log(10.0)),
    "app_count": ("count", math.log(5.0)),
}
# record counter fed by each plain count feature
_COUNTER_OF = {
    "guestbook_count": "guestbook_entries",
    "photo_count": "photos",
    "gift_count": "gifts",
    "share_count": "shares",
    "app_count": "app_installs",
}


@dataclass(frozen=True)
class Link:
    dimension: str
    feature: str
    direction: int = 1
    strength: float = 1.0


DEFAULT_LINKS = (
    Link("E", "zzstatus_proportion", 1, 1.6),
    Link("N", "angry_blog_proportion", 1, 1.6),
    Link("O", "usage", 1, 0.8),
    Link("O", "recent_status_count_30d", 1, 0.8),
    Link("A", "zidou", 1, 0.8),
    Link("A", "blog_emoticon_count", 1, 0.8),
    Link("C", "guestbook_count", 1, 0.8),
)


@dataclass(frozen=True)
class CohortConfig:
    n: int = 500
    seed: int = 0
    means: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_MEANS))
    sigmas: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_SIGMAS))
    links: tuple[Link, ...] = DEFAULT_LINKS
    item_noise: float = 0.6  # sd of per-item answers around the latent score
    feature_noise: float = 0.3  # sd added to each planted linear predictor
    sampling_noise: bool = True  # Poisson/binomial draws; off means rounding
    reference_date: datetime = REFERENCE_DATE

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for d in DIMENSIONS:
            if d not in self.means or d not in self.sigmas:
                raise ValueError(f"missing mean or sigma for dimension {d}")
            if self.sigmas[d] < 0:
                raise ValueError(f"sigma for {d} must be >= 0")
        if self.item_noise < 0 or self.feature_noise < 0:
            raise ValueError("noise scales must be >= 0")
        links = []
        for link in self.links:
            if link.dimension not in DIMENSIONS:
                raise ValidationError(f"unknown dimension {link.dimension!r} in link table")
            try:
                name = resolve_feature(link.feature).name
            except KeyError:
                raise ValidationError(f"unknown feature {link.feature!r} in link table") from None
            if name not in LINKABLE:
                raise ValidationError(f"feature {name!r} cannot be planted; choose from {sorted(LINKABLE)}")
            if link.strength < 0:
                raise ValidationError(f"strength for {name!r} must be >= 0")
            if link.direction not in (1, -1):
                raise ValidationError(f"direction for {name!r} must be 1 or -1")
            links.append(replace(link, feature=name))
        object.__setattr__(self, "links", tuple(links))

    def to_json(self) -> dict:
        obj = asdict(self)
        obj["links"] = [asdict(link) for link in self.links]
        obj["means"], obj["sigmas"] = dict(self.means), dict(self.sigmas)
        obj["reference_date"] = self.reference_date.isoformat(timespec="seconds")
        return obj

    @classmethod
    def from_json(cls, obj: Mapping) -> "CohortConfig":
        kw = dict(obj)
        if "links" in kw:
            kw["links"] = tuple(Link(**link) for link in kw["links"])
        if "reference_date" in kw:
            kw["reference_date"] = datetime.fromisoformat(kw["reference_date"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ValidationError(f"bad cohort config: {exc}") from None


@dataclass(frozen=True)
class SyntheticParticipant:
    latent: PersonalityScore
    inventory: InventoryResponse
    record: UserRecord


# -- inventory --------------------------------------------------------------

def _keyed_items(latent: float, m: int, noise: float, rng: np.random.Generator) -> list[int]:
    """``m`` keyed item values in 1..5 whose mean is within the repair bound of ``latent``."""
    targets = latent + noise * rng.standard_normal(m)
    values, carry = [], 0.0
    for t in targets:  # error diffusion keeps the running sum on target
        v = t + carry
        r = min(5, max(1, int(math.floor(v + 0.5))))
        carry = v - r
        values.append(r)
    while True:
        gap = sum(values) / m - latent
        if abs(gap) <= _REPAIR_BOUND:
            return values
        step = -1 if gap > 0 else 1
        # move the item furthest in the offending direction
        i = max(range(m), key=lambda j: (values[j] * -step, -j))
        values[i] += step


def _inventory(latent: Mapping[str, float], noise: float, rng: np.random.Generator, pid: str) -> InventoryResponse:
    key = scoring_key()
    answers = [0] * len(key)
    for d in DIMENSIONS:
        items = sorted(i for i, e in key.items() if e.dimension == d)
        for item, v in zip(items, _keyed_items(latent[d], len(items), noise, rng)):
            answers[item - 1] = 6 - v if key[item].reversed else v
    return InventoryResponse(tuple(answers), pid)


# -- behavior ---------------------------------------------------------------

def _logistic(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


class _Draws:
    """Count/proportion draws that either sample or round."""

    def __init__(self, rng: np.random.Generator, sampling: bool):
        self.rng, self.sampling = rng, sampling

    def poisson(self, lam: float) -> int:
        return int(self.rng.poisson(lam)) if self.sampling else int(math.floor(lam + 0.5))

    def binomial(self, n: int, p: float) -> int:
        return int(self.rng.binomial(n, p)) if self.sampling else int(math.floor(n * p + 0.5))


_VOCAB = {lab: np.array(words) for lab, words in TOY_VOCABULARY.items()}
_FILLER = np.array(FILLER_VOCABULARY)


def _pick(rng: np.random.Generator, words: np.ndarray, k: int) -> list[str]:
    return words[rng.integers(len(words), size=k)].tolist()


def _words(rng: np.random.Generator, label: str, k_emotion: int, k_filler: int, extra=()) -> str:
    words = _pick(rng, _VOCAB[label], k_emotion) + _pick(rng, _FILLER, k_filler) + list(extra)
    rng.shuffle(words)
    return " ".join(words)


def _at(ref: datetime, seconds_before: float) -> datetime:
    return ref - timedelta(seconds=int(seconds_before))


_PRONOUNS = tuple(np.array(p) for p in (("I", "my", "me"), ("you", "your"), ("he", "she", "it", "they", "them")))


def _record(cfg: CohortConfig, i: int, z: Mapping[str, float], pid: str) -> UserRecord:
    ref = cfg.reference_date
    profile = np.random.default_rng([cfg.seed, i, _PROFILE])
    planted_rng = np.random.default_rng([cfg.seed, i, _PLANTED])
    content = np.random.default_rng([cfg.seed, i, _CONTENT])
    draw = _Draws(planted_rng, cfg.sampling_noise)
    base = _Draws(profile, cfg.sampling_noise)

    # one fixed-length block of predictor noise, drawn up front so the
    # number of consumed variates never depends on the latent scores
    noise = dict(zip(LINKABLE, cfg.feature_noise * planted_rng.standard_normal(len(LINKABLE))))
    eta = {f: a + noise[f] for f, (_, a) in LINKABLE.items()}
    for link in cfg.links:
        eta[link.feature] += link.direction * link.strength * z[link.dimension]

    def rate(f):
        return math.exp(eta[f])

    def prob(f):
        return _logistic(eta[f])

    tenure_days = int(profile.integers(365, 3 * 365))
    registration = ref - timedelta(days=tenure_days)
    tenure_s = tenure_days * 86400.0
    weeks = tenure_days / 7.0
    friend_count = draw.poisson(rate("friend_count"))

    counters = {field_: draw.poisson(rate(f)) for f, field_ in _COUNTER_OF.items()}
    counters.update(
        albums=base.poisson(3),
        checkins=base.poisson(2),
        page_follows=base.poisson(6),
        comments_given=base.poisson(25),
        photo_comments=base.poisson(12),
        reshared_blogs=base.poisson(1),
    )

    logins = draw.poisson(rate("usage") * weeks)
    login_events = tuple(sorted(_at(ref, s) for s in content.uniform(0, tenure_s, logins)))

    # statuses: a planted recent block plus an older block
    n_recent = draw.poisson(rate("recent_status_count_30d"))
    n_old = base.poisson(15)
    n_status = n_recent + n_old
    n_zz = draw.binomial(n_status, prob("zzstatus_proportion"))
    recent_s = content.uniform(0, 30 * 86400 - 1, n_recent)
    old_s = content.uniform(30 * 86400 + 1, tenure_s, n_old)
    republished = np.zeros(n_status, dtype=bool)
    republished[content.permutation(n_status)[:n_zz]] = True
    statuses = []
    for j, secs in enumerate(np.concatenate([recent_s, old_s])):
        label = LABELS[int(content.integers(4))]
        text = _words(content, label, int(content.integers(2, 4)), int(content.integers(2, 5)))
        if content.random() < 0.1:
            text += " :)"
        statuses.append(Status(_at(ref, secs), text, bool(republished[j])))
    statuses.sort(key=lambda s: s.timestamp)

    # blogs: angry share and emoticon total are planted
    n_blog = 1 + base.poisson(7)
    n_angry = draw.binomial(n_blog, prob("angry_blog_proportion"))
    emoticons = draw.poisson(rate("blog_emoticon_count"))
    angry = set(content.permutation(n_blog)[:n_angry].tolist())
    per_blog = content.multinomial(emoticons, [1 / n_blog] * n_blog)
    blogs = []
    for j in range(n_blog):
        label = "angry" if j in angry else LABELS[1 + int(content.integers(3))]
        person = _PRONOUNS[int(content.integers(3))]
        pronouns = _pick(content, person, int(content.integers(0, 4)))
        text = _words(content, label, int(content.integers(4, 7)), int(content.integers(6, 12)), pronouns)
        posted = content.uniform(0, tenure_s)
        comments = []
        for _ in range(int(content.poisson(2))):
            author = pid if content.random() < 0.2 else f"f{int(content.integers(max(friend_count, 1)))}"
            comments.append(Comment(author, _at(ref, content.uniform(0, posted))))
        comments.sort(key=lambda c: c.timestamp)
        blogs.append(Blog(_at(ref, posted), text, int(per_blog[j]), tuple(comments)))
    blogs.sort(key=lambda b: b.timestamp)

    age = int(profile.integers(19, 27))
    return UserRecord(
        user_id=pid,
        gender="f" if profile.random() < 0.5 else "m",
        birth_year=ref.year - age,
        hometown_code=int(profile.integers(0, 64)),
        zidou=draw.poisson(rate("zidou")),
        registration_date=registration,
        friend_count=friend_count,
        login_events=login_events,
        statuses=tuple(statuses),
        blogs=tuple(blogs),
        collected_at=ref,
        **counters,
    )


def _latent(cfg: CohortConfig, rng: np.random.Generator) -> dict[str, float]:
    out = {}
    for d in DIMENSIONS:
        v = cfg.means[d] + cfg.sigmas[d] * rng.standard_normal()
        for _ in range(100):  # truncate to [1, 5] by redrawing
            if 1.0 <= v <= 5.0:
                break
            v = cfg.means[d] + cfg.sigmas[d] * rng.standard_normal()
        out[d] = min(5.0, max(1.0, v))
    return out


def participant_id(i: int) -> str:
    return f"p{i:04d}"


def generate_participant(cfg: CohortConfig, i: int) -> SyntheticParticipant:
    pid = participant_id(i)
    rng = np.random.default_rng([cfg.seed, i, _LATENT])
    latent = _latent(cfg, rng)
    inventory = _inventory(latent, cfg.item_noise, rng, pid)
    z = {d: (latent[d] - cfg.means[d]) / cfg.sigmas[d] if cfg.sigmas[d] > 0 else 0.0 for d in DIMENSIONS}
    record = _record(cfg, i, z, pid)
    return SyntheticParticipant(PersonalityScore(*(latent[d] for d in DIMENSIONS)), inventory, record)


def generate_cohort(cfg: CohortConfig = CohortConfig()) -> list[SyntheticParticipant]:
    return [generate_participant(cfg, i) for i in range(cfg.n)]


# -- report -----------------------------------------------------------------

def _pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 2 or x.std() == 0 or y.std() == 0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def cohort_report(
    participants: Sequence[SyntheticParticipant],
    links: Sequence[Link] = DEFAULT_LINKS,
    emotion_model: EmotionModel | None = None,
) -> dict:
    """Score moments per dimension and the correlation of every planted pair.

    Moments use the scored inventories (population sigma); correlations pair
    scored inventories with extracted feature values. Values are rounded to
    six decimals.
    """
    if not participants:
        raise ValueError("empty cohort")
    model = emotion_model or default_emotion_model()
    scores = [score_bfi(p.inventory).as_floats() for p in participants]
    vectors = [extract_features(p.record, None, model).as_dict() for p in participants]
    dims = {}
    for d in DIMENSIONS:
        xs = np.array([s[d] for s in scores])
        dims[d] = {"mean": round(float(xs.mean()), 6), "sigma": round(float(xs.std()), 6)}
    pairs = []
    for link in links:
        name = resolve_feature(link.feature).name
        r = _pearson([s[link.dimension] for s in scores], [v[name] for v in vectors])
        pairs.append({"dimension": link.dimension, "feature": name, "direction": link.direction,
                      "strength": link.strength, "pearson_r": round(r, 6)})
    return {"n": len(participants), "dimensions": dims, "links": pairs}


def report_json(report: Mapping) -> str:
    return dump_json(report)

