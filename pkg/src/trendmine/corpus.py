"""Post data model, file ingestion (JSONL/CSV), validation and imputation."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .errors import DataError, UsageError

log = logging.getLogger(__name__)

MAX_REJECT_SAMPLES = 10
ENGAGEMENT_FIELDS = ("likes", "comments", "shares", "saves")


class Platform(Enum):
    X = "X"
    FACEBOOK = "Facebook"
    INSTAGRAM = "Instagram"
    TIKTOK = "TikTok"
    GOOGLE_NEWS = "GoogleNews"
    REDDIT = "Reddit"
    OTHER = "Other"


_PLATFORM_ALIASES = {
    "x": Platform.X, "twitter": Platform.X,
    "facebook": Platform.FACEBOOK, "fb": Platform.FACEBOOK,
    "instagram": Platform.INSTAGRAM, "ig": Platform.INSTAGRAM,
    "tiktok": Platform.TIKTOK, "tik-tok": Platform.TIKTOK,
    "googlenews": Platform.GOOGLE_NEWS, "google news": Platform.GOOGLE_NEWS,
    "reddit": Platform.REDDIT,
}


def parse_platform(value: str | None) -> Platform:
    if not value:
        return Platform.OTHER
    return _PLATFORM_ALIASES.get(value.strip().lower(), Platform.OTHER)


@dataclass(frozen=True)
class EngagementMetrics:
    """Per-post interaction counts; ``None`` marks a missing (unimputed) field."""

    likes: int | None = None
    comments: int | None = None
    shares: int | None = None
    saves: int | None = None

    def total(self) -> int:
        """Sum of the four counts, missing fields contributing 0. Python ints
        are arbitrary precision, so no overflow."""
        return sum(v or 0 for v in (self.likes, self.comments, self.shares, self.saves))

    def get(self, name: str) -> int | None:
        return getattr(self, name)


@dataclass(frozen=True)
class RawPost:
    id: str
    platform: Platform
    timestamp: datetime            # tz-aware UTC, seconds precision
    text: str
    geo: str | None = None
    hashtags: tuple[str, ...] = ()
    engagement: EngagementMetrics | None = None
    lang_hint: str | None = None


@dataclass(frozen=True)
class Provenance:
    source_paths: tuple[str, ...]
    ingested_at: str
    reject_count: int = 0
    reject_samples: tuple[tuple[int, str], ...] = ()   # (line number, reason)
    imputed_counts: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Corpus:
    posts: tuple[RawPost, ...]
    provenance: Provenance
    counts: dict[int, int]         # year -> post count

    def __post_init__(self):
        if sum(self.counts.values()) != len(self.posts):
            raise DataError("corpus year counts do not sum to post count")

    def __len__(self) -> int:
        return len(self.posts)


def _parse_timestamp(value) -> datetime:
    if not isinstance(value, str) or not value.strip():
        raise ValueError("timestamp missing")
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def _parse_count(value, name: str) -> int | None:
    if value is None or value == "":
        return None
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ValueError(f"{name} must be an integer or null")
    n = int(value)
    if n < 0:
        raise ValueError(f"{name} must be non-negative")
    return n


def _parse_hashtags(value) -> tuple[str, ...]:
    if value is None or value == "":
        return ()
    if isinstance(value, str):
        parts = value.split("|")
    elif isinstance(value, list):
        parts = value
    else:
        raise ValueError("hashtags must be a list or '|'-separated string")
    out = []
    for p in parts:
        if not isinstance(p, str):
            raise ValueError("hashtags must be strings")
        p = p.strip().lstrip("#").lower()
        if p:
            out.append(p)
    return tuple(out)


def _record_to_post(rec: dict, corpus_range: tuple[datetime, datetime]) -> RawPost:
    post_id = rec.get("id")
    if not isinstance(post_id, str) or not post_id.strip():
        raise ValueError("missing id")
    ts = _parse_timestamp(rec.get("timestamp"))
    lo, hi = corpus_range
    if not (lo <= ts <= hi):
        raise ValueError(f"timestamp {ts.isoformat()} outside corpus range")
    counts = {name: _parse_count(rec.get(name), name) for name in ENGAGEMENT_FIELDS}
    engagement = None
    if any(v is not None for v in counts.values()):
        engagement = EngagementMetrics(**counts)
    geo = rec.get("geo")
    if geo is not None and not isinstance(geo, str):
        raise ValueError("geo must be a string or null")
    lang = rec.get("lang")
    text = rec.get("text")
    return RawPost(
        id=post_id.strip(),
        platform=parse_platform(rec.get("platform")),
        timestamp=ts,
        text=text if isinstance(text, str) else "",
        geo=geo.strip() if isinstance(geo, str) and geo.strip() else None,
        hashtags=_parse_hashtags(rec.get("hashtags")),
        engagement=engagement,
        lang_hint=lang.strip() if isinstance(lang, str) and lang.strip() else None,
    )


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, None, f"bad json: {exc.msg}"
                continue
            if not isinstance(rec, dict):
                yield lineno, None, "record is not an object"
                continue
            yield lineno, rec, None


def _iter_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            return
        if "id" not in reader.fieldnames:
            raise DataError(f"{path}: CSV header row missing 'id' column")
        for rec in reader:
            yield reader.line_num, {k: v for k, v in rec.items() if k is not None}, None


def default_corpus_range(start: str = "2018-01-01", end: str = "2024-12-31") -> tuple[datetime, datetime]:
    lo = datetime.fromisoformat(start).replace(tzinfo=timezone.utc)
    hi = datetime.fromisoformat(end).replace(hour=23, minute=59, second=59, tzinfo=timezone.utc)
    return lo, hi


def ingest(path: str | Path, format: str = "auto",
           corpus_range: tuple[datetime, datetime] | None = None) -> Corpus:
    """Parse a JSONL or CSV post file into a Corpus.

    Well-formed records become posts in input order; malformed records are
    counted and sampled, not fatal, unless they exceed half the file.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    if format == "auto":
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise UsageError(f"unknown ingest format {format!r}")
    if corpus_range is None:
        corpus_range = default_corpus_range()

    rows = _iter_csv(path) if format == "csv" else _iter_jsonl(path)
    posts: list[RawPost] = []
    seen_ids: set[str] = set()
    rejects: list[tuple[int, str]] = []
    total = 0
    for lineno, rec, err in rows:
        total += 1
        if err is not None:
            rejects.append((lineno, err))
            continue
        try:
            post = _record_to_post(rec, corpus_range)
        except (ValueError, TypeError) as exc:
            rejects.append((lineno, str(exc)))
            continue
        if post.id in seen_ids:
            rejects.append((lineno, f"duplicate id {post.id!r}"))
            continue
        seen_ids.add(post.id)
        posts.append(post)

    if total == 0:
        log.warning("ingested empty file %s", path)
    if total > 0 and len(rejects) * 2 > total:
        sample = "; ".join(f"line {ln}: {why}" for ln, why in rejects[:MAX_REJECT_SAMPLES])
        raise DataError(
            f"{path}: {len(rejects)}/{total} records malformed; sample offenders: {sample}")
    if rejects:
        log.warning("%s: rejected %d of %d records", path, len(rejects), total)

    counts = Counter(p.timestamp.year for p in posts)
    return Corpus(
        posts=tuple(posts),
        provenance=Provenance(
            source_paths=(str(path),),
            ingested_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            reject_count=len(rejects),
            reject_samples=tuple(rejects[:MAX_REJECT_SAMPLES]),
        ),
        counts=dict(sorted(counts.items())),
    )


def _mode(values) -> object | None:
    """Most frequent value; ties broken by the smallest value."""
    counter = Counter(values)
    if not counter:
        return None
    return min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def impute_missing(corpus: Corpus, fields: set[str]) -> Corpus:
    """Fill missing fields with the per-platform modal value, falling back to
    the global mode; engagement counts default to 0 and geo stays absent when
    nothing was ever observed. Present values are never changed."""
    if len(corpus) == 0:
        raise DataError("cannot impute on an empty corpus")
    bad = fields - set(ENGAGEMENT_FIELDS) - {"geo"}
    if bad:
        raise UsageError(f"unknown imputable fields: {sorted(bad)}")

    def observed(post: RawPost, name: str):
        if name == "geo":
            return post.geo
        if post.engagement is None:
            return None
        return post.engagement.get(name)

    per_platform: dict[str, dict[Platform, object]] = {}
    global_mode: dict[str, object] = {}
    for name in sorted(fields):
        by_platform: dict[Platform, list] = {}
        all_values: list = []
        for post in corpus.posts:
            v = observed(post, name)
            if v is not None:
                by_platform.setdefault(post.platform, []).append(v)
                all_values.append(v)
        per_platform[name] = {pl: _mode(vals) for pl, vals in by_platform.items()}
        global_mode[name] = _mode(all_values)

    imputed_counts = {name: 0 for name in sorted(fields)}

    def fill(post: RawPost, name: str):
        v = per_platform[name].get(post.platform)
        if v is None:
            v = global_mode[name]
        if v is None and name != "geo":
            v = 0
        return v

    new_posts = []
    for post in corpus.posts:
        changes: dict = {}
        eng_changes: dict = {}
        for name in sorted(fields):
            if observed(post, name) is not None:
                continue
            v = fill(post, name)
            if v is None:
                continue
            imputed_counts[name] += 1
            if name == "geo":
                changes["geo"] = v
            else:
                eng_changes[name] = v
        if eng_changes:
            base = post.engagement or EngagementMetrics()
            changes["engagement"] = replace(base, **eng_changes)
        new_posts.append(replace(post, **changes) if changes else post)

    for name, n in imputed_counts.items():
        if n:
            log.info("imputed %d missing %s values", n, name)
    return Corpus(
        posts=tuple(new_posts),
        provenance=replace(corpus.provenance, imputed_counts=dict(imputed_counts)),
        counts=corpus.counts,
    )


def yearly_counts(corpus: Corpus) -> dict[int, int]:
    """Exact post counts per calendar year (UTC)."""
    return dict(sorted(Counter(p.timestamp.year for p in corpus.posts).items()))
