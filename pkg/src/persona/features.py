"""Behavior-log records and the 41-slot feature vector built from them.

The slot order, groups and kinds come from ``data/feature_schema.json``;
:func:`extract_features` fills the slots in exactly that order. Any
proportion whose denominator is empty is 0 so vectors are always complete.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

from ._io import csv_text, iter_jsonl
from .emotion import LABELS, EmotionModel, classify_emotion, emotion_histogram, tokenize, top_emotion
from .errors import SchemaMismatchError, ValidationError

GROUPS = ("basic_info", "sns_usage", "time_related", "emotion_related", "time_emotion_related")
RECENT_WINDOW = timedelta(days=30)
MAX_HOMETOWN_CODES = 64
NO_EMOTION = "none"

FIRST_PERSON = frozenset("i me my mine myself we us our ours ourselves".split())
SECOND_PERSON = frozenset("you your yours yourself yourselves".split())
THIRD_PERSON = frozenset(
    "he him his himself she her hers herself it its itself they them their theirs themselves".split()
)
PERSONS = ("I", "you", "it")

_EMOTICON_RE = re.compile(r"[:;=8][-'^]?[)(DPpO3\]\[/\\|]|\^_\^|T_T|<3")


# -- schema -----------------------------------------------------------------

@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    group: str
    kind: str  # "numeric" | "categorical"
    unit: str
    definition: str
    provenance: str = "named"
    aliases: tuple[str, ...] = ()
    values: tuple[str, ...] | None = None


@lru_cache(maxsize=1)
def _load_schema() -> tuple[str, tuple[FeatureDescriptor, ...]]:
    raw = json.loads(resources.files("persona").joinpath("data/feature_schema.json").read_text())
    descs = tuple(
        FeatureDescriptor(
            name=f["name"],
            group=f["group"],
            kind=f["kind"],
            unit=f["unit"],
            definition=f["definition"],
            provenance=f.get("provenance", "named"),
            aliases=tuple(f.get("aliases", ())),
            values=tuple(f["values"]) if "values" in f else None,
        )
        for f in raw["features"]
    )
    return raw["schema_version"], descs


def feature_schema() -> list[FeatureDescriptor]:
    return list(_load_schema()[1])


def schema_version() -> str:
    return _load_schema()[0]


def feature_names() -> tuple[str, ...]:
    return tuple(d.name for d in _load_schema()[1])


def feature_kinds() -> tuple[str, ...]:
    return tuple(d.kind for d in _load_schema()[1])


def resolve_feature(name: str) -> FeatureDescriptor:
    """Look up a descriptor by canonical name or by one of its short aliases."""
    key = name.strip().lower()
    for d in _load_schema()[1]:
        if d.name.lower() == key or key in (a.lower() for a in d.aliases):
            return d
    raise KeyError(name)


# -- records ----------------------------------------------------------------

def parse_timestamp(value: Any, where: str | None = None) -> datetime:
    if isinstance(value, datetime):
        return value.replace(tzinfo=None)
    if isinstance(value, date):
        return datetime(value.year, value.month, value.day)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith("Z"):
            text = text[:-1]
        try:
            return datetime.fromisoformat(text).replace(tzinfo=None)
        except ValueError:
            pass
    raise ValidationError(f"invalid timestamp {value!r}", where)


def _format_ts(ts: datetime) -> str:
    return ts.isoformat(timespec="seconds")


@dataclass(frozen=True)
class Status:
    timestamp: datetime
    text: str
    is_republished: bool = False


@dataclass(frozen=True)
class Comment:
    author_id: str
    timestamp: datetime


@dataclass(frozen=True)
class Blog:
    timestamp: datetime
    text: str
    emoticon_count: int = 0
    comments: tuple[Comment, ...] = ()


COUNTER_FIELDS = (
    "photos",
    "albums",
    "shares",
    "gifts",
    "checkins",
    "guestbook_entries",
    "app_installs",
    "page_follows",
    "comments_given",
    "photo_comments",
    "reshared_blogs",
)


@dataclass(frozen=True)
class UserRecord:
    """One user's raw behavior log.

    ``collected_at`` is the crawl instant; it is the default reference date
    for feature extraction.
    """

    user_id: str
    gender: str
    birth_year: int
    hometown_code: int
    zidou: int
    registration_date: datetime
    friend_count: int
    login_events: tuple[datetime, ...] = ()
    statuses: tuple[Status, ...] = ()
    blogs: tuple[Blog, ...] = ()
    photos: int = 0
    albums: int = 0
    shares: int = 0
    gifts: int = 0
    checkins: int = 0
    guestbook_entries: int = 0
    app_installs: int = 0
    page_follows: int = 0
    comments_given: int = 0
    photo_comments: int = 0
    reshared_blogs: int = 0
    collected_at: datetime | None = None

    def validate(self, reference_date: datetime | None = None) -> None:
        where = f"user {self.user_id}"
        if self.gender not in ("m", "f"):
            raise ValidationError(f"gender must be 'm' or 'f', got {self.gender!r}", where)
        if not 0 <= self.hometown_code < MAX_HOMETOWN_CODES:
            raise ValidationError(f"hometown_code must be in 0..{MAX_HOMETOWN_CODES - 1}", where)
        for name in ("zidou", "friend_count", *COUNTER_FIELDS):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValidationError(f"field {name!r} must be a non-negative integer, got {v!r}", where)
        for i, b in enumerate(self.blogs):
            if b.emoticon_count < 0:
                raise ValidationError(f"field 'blogs[{i}].emoticon_count' must be >= 0", where)
        if reference_date is None:
            return
        if self.registration_date > reference_date:
            raise ValidationError("field 'registration_date' is after the reference date", where)
        if self.birth_year > reference_date.year:
            raise ValidationError("field 'birth_year' is after the reference date", where)
        stamps = [("login_events", t) for t in self.login_events]
        stamps += [("statuses", s.timestamp) for s in self.statuses]
        for b in self.blogs:
            stamps.append(("blogs", b.timestamp))
            stamps += [("blogs.comments", c.timestamp) for c in b.comments]
        for name, ts in stamps:
            if ts > reference_date:
                raise ValidationError(f"field {name!r} has a timestamp after the reference date", where)

    def to_json(self) -> dict:
        obj = {
            "user_id": self.user_id,
            "gender": self.gender,
            "birth_year": self.birth_year,
            "hometown_code": self.hometown_code,
            "zidou": self.zidou,
            "registration_date": _format_ts(self.registration_date),
            "friend_count": self.friend_count,
            "login_events": [_format_ts(t) for t in self.login_events],
            "statuses": [
                {"timestamp": _format_ts(s.timestamp), "text": s.text, "is_republished": s.is_republished}
                for s in self.statuses
            ],
            "blogs": [
                {
                    "timestamp": _format_ts(b.timestamp),
                    "text": b.text,
                    "emoticon_count": b.emoticon_count,
                    "comments": [{"author_id": c.author_id, "timestamp": _format_ts(c.timestamp)} for c in b.comments],
                }
                for b in self.blogs
            ],
        }
        for name in COUNTER_FIELDS:
            obj[name] = getattr(self, name)
        if self.collected_at is not None:
            obj["collected_at"] = _format_ts(self.collected_at)
        return obj

    @classmethod
    def from_json(cls, obj: dict, where: str | None = None) -> "UserRecord":
        if not isinstance(obj, dict):
            raise ValidationError("record must be a JSON object", where)

        def need(name):
            if name not in obj:
                raise ValidationError(f"missing field {name!r}", where)
            return obj[name]

        def as_int(name, value):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"field {name!r} must be an integer, got {value!r}", where)
            return value

        def as_list(name):
            value = obj.get(name, [])
            if not isinstance(value, list):
                raise ValidationError(f"field {name!r} must be a list", where)
            return value

        try:
            statuses = tuple(
                Status(
                    parse_timestamp(s["timestamp"], where),
                    str(s.get("text", "")),
                    bool(s.get("is_republished", False)),
                )
                for s in as_list("statuses")
            )
            blogs = tuple(
                Blog(
                    parse_timestamp(b["timestamp"], where),
                    str(b.get("text", "")),
                    as_int("blogs.emoticon_count", b.get("emoticon_count", 0)),
                    tuple(
                        Comment(str(c["author_id"]), parse_timestamp(c["timestamp"], where))
                        for c in b.get("comments", [])
                    ),
                )
                for b in as_list("blogs")
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed statuses/blogs entry ({exc})", where) from None

        collected = obj.get("collected_at")
        rec = cls(
            user_id=str(need("user_id")),
            gender=need("gender"),
            birth_year=as_int("birth_year", need("birth_year")),
            hometown_code=as_int("hometown_code", need("hometown_code")),
            zidou=as_int("zidou", need("zidou")),
            registration_date=parse_timestamp(need("registration_date"), where),
            friend_count=as_int("friend_count", need("friend_count")),
            login_events=tuple(parse_timestamp(t, where) for t in as_list("login_events")),
            statuses=statuses,
            blogs=blogs,
            collected_at=parse_timestamp(collected, where) if collected is not None else None,
            **{name: as_int(name, obj.get(name, 0)) for name in COUNTER_FIELDS},
        )
        try:
            rec.validate()
        except ValidationError as exc:
            raise ValidationError(str(exc), where) from None
        return rec


# -- helpers with their own contracts ---------------------------------------

def _pronoun_counts(texts: Iterable[str]) -> tuple[int, int, int]:
    first = second = third = 0
    for text in texts:
        for tok in tokenize(text):
            if tok in FIRST_PERSON:
                first += 1
            elif tok in SECOND_PERSON:
                second += 1
            elif tok in THIRD_PERSON:
                third += 1
    return first, second, third


def pronoun_profile(texts: Iterable[str]) -> str:
    """Dominant grammatical person over ``texts``: ``"I"``, ``"you"`` or ``"it"``.

    Ties resolve in that order, so text without pronouns yields ``"I"``.
    """
    counts = _pronoun_counts(texts)
    best = max(range(3), key=lambda j: (counts[j], -j))
    return PERSONS[best]


def _days(delta: timedelta) -> float:
    return delta.total_seconds() / 86400.0


def emotion_length(
    statuses: Sequence[Status], emotion_model: EmotionModel, reference_date: datetime, labels=None
) -> float:
    """Days from the start of the newest same-emotion run of statuses to ``reference_date``.

    The run is the longest suffix (by timestamp) whose statuses share the
    newest status's predicted emotion. ``labels`` may pass precomputed
    predictions aligned with ``statuses``.
    """
    if not statuses:
        return 0.0
    if labels is None:
        labels = [classify_emotion(emotion_model, s.text)[0] for s in statuses]
    order = sorted(range(len(statuses)), key=lambda i: statuses[i].timestamp)
    newest = labels[order[-1]]
    start = statuses[order[-1]].timestamp
    for i in reversed(order):
        if labels[i] != newest:
            break
        start = statuses[i].timestamp
    return _days(reference_date - start)


# -- extraction -------------------------------------------------------------

@dataclass(frozen=True)
class FeatureVector:
    values: tuple
    user_id: str = ""
    schema_version: str = field(default_factory=schema_version)

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict[str, Any]:
        return dict(zip(feature_names(), self.values))

    def __getitem__(self, name: str):
        return self.values[feature_names().index(name)]


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def extract_features(
    rec: UserRecord, reference_date: datetime | date | str | None, emotion_model: EmotionModel
) -> FeatureVector:
    """Build the 41-slot vector for one user.

    ``reference_date`` may be ``None`` when the record carries ``collected_at``.
    """
    if reference_date is None:
        if rec.collected_at is None:
            raise ValidationError("no reference date given and field 'collected_at' is missing", f"user {rec.user_id}")
        reference_date = rec.collected_at
    ref = parse_timestamp(reference_date)
    rec.validate(ref)
    recent_from = ref - RECENT_WINDOW

    tenure_days = _days(ref - rec.registration_date)
    weeks = tenure_days / 7.0

    statuses = sorted(rec.statuses, key=lambda s: s.timestamp)
    status_labels = [classify_emotion(emotion_model, s.text)[0] for s in statuses]
    blog_texts = [b.text for b in rec.blogs]
    blog_hist = emotion_histogram(emotion_model, blog_texts)

    comments = [c for b in rec.blogs for c in b.comments]
    self_comments = sum(1 for c in comments if c.author_id == rec.user_id)
    other_authors = {c.author_id for c in comments if c.author_id != rec.user_id}

    first, second, third = _pronoun_counts(blog_texts)
    n_pronouns = first + second + third

    recent_idx = [i for i, s in enumerate(statuses) if s.timestamp >= recent_from]
    recent_hist = dict.fromkeys(LABELS, 0)
    for i in recent_idx:
        recent_hist[status_labels[i]] += 1

    v = {
        "gender": rec.gender,
        "age": ref.year - rec.birth_year,
        "hometown_code": str(rec.hometown_code),
        "zidou": rec.zidou,
        "account_tenure_days": tenure_days,
        "friend_count": rec.friend_count,
        "usage": _ratio(len(rec.login_events), weeks),
        "guestbook_count": rec.guestbook_entries,
        "blog_emoticon_count": sum(b.emoticon_count for b in rec.blogs),
        "zzstatus_proportion": _ratio(sum(s.is_republished for s in statuses), len(statuses)),
        "self_comment_proportion": _ratio(self_comments, len(comments)),
        "friend_comment_proportion": min(1.0, _ratio(len(other_authors), rec.friend_count)),
        "blog_pronoun_profile": pronoun_profile(blog_texts),
        "status_count": len(statuses),
        "photo_count": rec.photos,
        "album_count": rec.albums,
        "share_count": rec.shares,
        "gift_count": rec.gifts,
        "checkin_count": rec.checkins,
        "comment_received_count": len(comments),
        "comment_given_count": rec.comments_given,
        "status_emoticon_count": sum(len(_EMOTICON_RE.findall(s.text)) for s in statuses),
        "zzblog_proportion": _ratio(rec.reshared_blogs, rec.reshared_blogs + len(rec.blogs)),
        "avg_blog_length": _mean([len(tokenize(t)) for t in blog_texts]),
        "avg_status_length": _mean([len(tokenize(s.text)) for s in statuses]),
        "blog_I_ratio": _ratio(first, n_pronouns),
        "blog_you_ratio": _ratio(second, n_pronouns),
        "blog_it_ratio": _ratio(third, n_pronouns),
        "statuses_per_week": _ratio(len(statuses), weeks),
        "blogs_per_week": _ratio(len(rec.blogs), weeks),
        "photo_comment_proportion": _ratio(rec.photo_comments, rec.photo_comments + len(comments)),
        "app_count": rec.app_installs,
        "page_follow_count": rec.page_follows,
        "recent_status_count_30d": len(recent_idx),
        "recent_blog_count_30d": sum(1 for b in rec.blogs if b.timestamp >= recent_from),
        "recent_comment_count_30d": sum(1 for c in comments if c.timestamp >= recent_from),
        "blog_top_emotion": top_emotion(blog_hist) if rec.blogs else NO_EMOTION,
        "angry_blog_proportion": _ratio(blog_hist["angry"], len(rec.blogs)),
        "recent_status_top_emotion_ratio": _ratio(max(recent_hist.values()), len(recent_idx)),
        "latest_status_emotion": status_labels[-1] if statuses else NO_EMOTION,
        "latest_emotion_length_days": emotion_length(statuses, emotion_model, ref, status_labels),
    }
    names = feature_names()
    assert set(v) == set(names)
    return FeatureVector(tuple(v[n] for n in names), rec.user_id)


# -- file formats -----------------------------------------------------------

def read_records(path) -> list[UserRecord]:
    return [UserRecord.from_json(obj, f"{path} line {lineno}") for lineno, obj in iter_jsonl(path)]


def records_jsonl(records: Iterable[UserRecord]) -> str:
    return "".join(json.dumps(r.to_json(), ensure_ascii=False, separators=(",", ":")) + "\n" for r in records)


def _format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, float):
        return repr(v)
    return str(int(v))


def features_csv(vectors: Iterable[FeatureVector]) -> str:
    return csv_text(["user_id", *feature_names()], ([fv.user_id, *map(_format_value, fv.values)] for fv in vectors))


def schema_stamp() -> dict:
    return {"schema_version": schema_version(), "features": list(feature_names())}


def stamp_path(features_path) -> Path:
    p = Path(features_path)
    return p.with_name(p.stem + ".schema.json")


def read_features(path, check_stamp: bool = True) -> list[FeatureVector]:
    """Read a features CSV; numeric cells come back as floats.

    When a ``<stem>.schema.json`` sidecar exists its version must match the
    installed schema.
    """
    path = Path(path)
    names = feature_names()
    kinds = feature_kinds()
    sidecar = stamp_path(path)
    if check_stamp and sidecar.exists():
        stamp = json.loads(sidecar.read_text(encoding="utf-8"))
        if stamp.get("schema_version") != schema_version():
            raise SchemaMismatchError(
                f"schema version {stamp.get('schema_version')!r} != installed {schema_version()!r}", str(sidecar)
            )
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["user_id", *names]:
            raise SchemaMismatchError("header does not match the feature schema order", f"{path} line 1")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise ValidationError(f"expected {len(names) + 1} cells, got {len(row)}", f"{path} line {lineno}")
            vals = []
            for name, kind, cell in zip(names, kinds, row[1:]):
                if kind == "categorical":
                    vals.append(cell)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValidationError(f"column {name!r}: {cell!r} is not numeric", f"{path} line {lineno}") from None
            out.append(FeatureVector(tuple(vals), row[0]))
    return out
