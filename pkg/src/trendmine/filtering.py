"""Country and topic relevance filters over preprocessed posts."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

from .errors import DataError
from .textprep import CleanPost, PrepConfig, normalize

log = logging.getLogger(__name__)

DEFAULT_GEO_NAMES = ("saudi arabia", "ksa")
DEFAULT_HASHTAG_KEYS = ("ksa", "saudi")
DEFAULT_CITY_NAMES = ("riyadh", "jeddah", "dammam", "mecca", "medina", "neom")

LEXICON_NAME_PREFIX = "#lexicon-name:"


@dataclass(frozen=True)
class CountryFilterSpec:
    """Geo names, hashtag keys and city names that mark a post as in-country.
    All entries are normalized with the textprep normalizer on construction."""

    geo_names: frozenset[str] = frozenset(DEFAULT_GEO_NAMES)
    hashtag_keys: frozenset[str] = frozenset(DEFAULT_HASHTAG_KEYS)
    city_names: frozenset[str] = frozenset(DEFAULT_CITY_NAMES)

    @classmethod
    def create(cls, geo_names=None, hashtag_keys=None, city_names=None) -> "CountryFilterSpec":
        def norm(values, default):
            vals = default if values is None else values
            return frozenset(normalize(v) for v in vals)
        return cls(
            geo_names=norm(geo_names, DEFAULT_GEO_NAMES),
            hashtag_keys=norm(hashtag_keys, DEFAULT_HASHTAG_KEYS),
            city_names=norm(city_names, DEFAULT_CITY_NAMES),
        )


def _post_in_country(post: CleanPost, spec: CountryFilterSpec) -> bool:
    if post.geo is not None and normalize(post.geo) in spec.geo_names:
        return True
    tag_keys = spec.hashtag_keys | spec.city_names
    if any(normalize(h) in tag_keys for h in post.hashtags):
        return True
    for tok in post.tokens:
        if tok.lstrip("#") in spec.city_names:
            return True
    return any(ng in spec.city_names for ng in post.ngrams)


def country_filter(posts: list[CleanPost], spec: CountryFilterSpec) -> tuple[list[CleanPost], int]:
    """Keep posts with an in-country geo, hashtag, or city mention; return the
    kept posts and the discard count. Matching is exact on normalized strings."""
    kept = [p for p in posts if _post_in_country(p, spec)]
    return kept, len(posts) - len(kept)


@dataclass(frozen=True)
class TopicLexicon:
    """Keyword/phrase/hashtag set defining topical relevance.

    ``entries`` hold the folded forms posts are matched against; ``display``
    maps each folded form back to the original line for reporting.
    """

    name: str
    entries: frozenset[str]
    display: dict[str, str] = field(hash=False, default_factory=dict)

    def __post_init__(self):
        if not self.entries:
            raise DataError(f"topic lexicon {self.name!r} is empty")

    def shown(self, entry: str) -> str:
        return self.display.get(entry, entry)

    @classmethod
    def from_file(cls, path: str | Path, prep: PrepConfig) -> "TopicLexicon":
        path = Path(path)
        if not path.exists():
            raise DataError(f"lexicon file not found: {path}")
        return cls._parse(path.read_text(encoding="utf-8"), str(path), prep)

    @classmethod
    def bundled(cls, prep: PrepConfig) -> "TopicLexicon":
        text = (files("trendmine") / "data" / "sustainability_lexicon.txt").read_text(encoding="utf-8")
        return cls._parse(text, "bundled sustainability lexicon", prep)

    @classmethod
    def _parse(cls, text: str, source: str, prep: PrepConfig) -> "TopicLexicon":
        name = "topic"
        entries: set[str] = set()
        display: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith(LEXICON_NAME_PREFIX):
                name = line[len(LEXICON_NAME_PREFIX):].strip() or name
                continue
            if line.startswith("# "):
                continue       # comment; real hashtag entries have no space after '#'
            folded = fold_entry(line, prep)
            if folded is None:
                log.warning("%s: entry %r folds to nothing, skipped", source, line)
                continue
            entries.add(folded)
            display.setdefault(folded, line)
        if not entries:
            raise DataError(f"{source}: no usable lexicon entries")
        return cls(name=name, entries=frozenset(entries), display=display)


def fold_entry(entry: str, prep: PrepConfig) -> str | None:
    """Bring a lexicon line into the token space posts live in: hashtags are
    normalized atomically, phrases go through the full token chain and are
    re-joined in the same space-joined form n-grams use."""
    entry = entry.strip()
    if entry.startswith("#") and " " not in entry:
        return normalize(entry)
    from .textprep import fold_terms
    toks = fold_terms(entry, prep)
    if not toks:
        return None
    if len(toks) > 3:
        log.warning("lexicon entry %r folds to %d tokens; only 1-3 can match n-grams",
                    entry, len(toks))
    return " ".join(toks)


def match_entries(post: CleanPost, lexicon: TopicLexicon) -> set[str]:
    """Folded lexicon entries this post hits via tokens, n-grams, or hashtags."""
    terms = set(post.tokens) | set(post.ngrams)
    terms.update("#" + normalize(h) for h in post.hashtags)
    return terms & lexicon.entries


def topic_filter(posts: list[CleanPost], lexicon: TopicLexicon) -> tuple[list[CleanPost], dict[str, int]]:
    """Keep posts whose tokens, n-grams or hashtags intersect the lexicon.

    Returns the kept posts and per-entry hit counts (number of kept posts
    matching each entry, keyed by the entry's display form).
    """
    kept: list[CleanPost] = []
    hits: Counter[str] = Counter()
    for post in posts:
        matched = match_entries(post, lexicon)
        if matched:
            kept.append(post)
            for entry in matched:
                hits[lexicon.shown(entry)] += 1
    return kept, dict(sorted(hits.items()))


def sustainability_share(corpus_by_year: dict[int, int],
                         kept_by_year: dict[int, int]) -> dict[int, float]:
    """Percentage of topic-kept posts per year, to one decimal. Years with no
    posts at all are absent from the result."""
    shares: dict[int, float] = {}
    for year in sorted(corpus_by_year):
        total = corpus_by_year[year]
        kept = kept_by_year.get(year, 0)
        if kept > total:
            raise DataError(f"year {year}: kept {kept} exceeds total {total}")
        if total == 0:
            continue
        shares[year] = round(100.0 * kept / total, 1)
    return shares
