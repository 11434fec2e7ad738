"""Deterministic synthetic corpus generator.

Produces a labeled JSONL corpus whose aggregates are fixed by construction:
per-year totals and topic shares, a global positive/negative/neutral mix, and
four keyword-template clusters, together with gold sentiment and cluster
files. This is the acceptance-test fixture for the full pipeline.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

DEFAULT_TOTALS = {2018: 3000, 2019: 3500, 2020: 4000, 2021: 5000,
                  2022: 5500, 2023: 4500, 2024: 4500}
DEFAULT_SHARES = {2018: 0.08, 2019: 0.10, 2020: 0.12, 2021: 0.15,
                  2022: 0.18, 2023: 0.20, 2024: 0.22}
DEFAULT_SENTIMENT_MIX = (0.5, 0.3, 0.2)      # positive, negative, neutral

# Injected polarity words carry weight +/-1.0 in the bundled sentiment
# lexicon, so two of them on a <=14-token post always clear the 0.1 band.
# Each template draws its own pair (slice of two) so polarity vocabulary
# never links posts across templates.
POSITIVE_WORDS = ("great", "excellent", "amazing", "wonderful",
                  "brilliant", "superb", "outstanding", "magnificent")
NEGATIVE_WORDS = ("terrible", "awful", "horrible", "disaster",
                  "dreadful", "appalling", "atrocious", "abysmal")

PLATFORMS = ("X", "Facebook", "Instagram", "TikTok", "GoogleNews", "Reddit")
PLATFORM_WEIGHTS = (0.40, 0.20, 0.15, 0.10, 0.10, 0.05)

OTHER_GEOS = ("Egypt", "UAE", "Jordan", "Kuwait", "Qatar", "Bahrain", None)


@dataclass(frozen=True)
class ClusterTemplate:
    """One topic blob: an anchor phrase every post carries, a keyword pool
    (all bundled-lexicon entries), hashtags, and template-specific filler."""

    name: str
    anchor: str
    keywords: tuple[str, ...]
    hashtags: tuple[str, ...]
    filler: tuple[str, ...]


# Keyword pools are subsets of the bundled lexicon chosen so no token is
# shared between templates; shared tokens would bridge the blobs.
DEFAULT_TEMPLATES = (
    ClusterTemplate(
        name="renewable energy initiatives",
        anchor="renewable energy",
        keywords=("solar power", "wind farm", "clean energy"),
        hashtags=("renewableenergy", "cleanenergy", "solarpower",
                  "الطاقة_المتجددة", "الطاقة_الشمسية"),
        filler=("turbine", "panel", "grid", "sun", "desert", "megawatt", "module",
                "inverter", "battery", "electricity", "station", "installation",
                "capacity", "output", "sunlight", "photovoltaic", "kilowatt",
                "array", "rooftop", "cable", "voltage", "substation", "meter",
                "contractor", "engineers"),
    ),
    ClusterTemplate(
        name="vision 2030 and economic growth",
        anchor="vision 2030",
        keywords=("economic diversification", "national transformation",
                  "sustainable growth"),
        hashtags=("vision2030", "رؤية_2030", "نيوم"),
        filler=("investment", "sector", "tourism", "industry", "budget", "finance",
                "employment", "market", "business", "startup", "entrepreneur",
                "reform", "infrastructure", "banking", "trade", "export",
                "revenue", "innovation", "skills", "training", "ministry",
                "plan", "forum", "summit", "licensing"),
    ),
    ClusterTemplate(
        name="environmental protection",
        anchor="saudi green initiative",
        keywords=("afforestation", "tree planting", "desertification control"),
        hashtags=("saudigreeninitiative", "greensaudi", "sustainablesaudi",
                  "المبادرة_السعودية_الخضراء"),
        filler=("forest", "mangrove", "wildlife", "habitat", "coral", "reef",
                "nursery", "seedling", "park", "reserve", "vegetation", "soil",
                "coast", "beach", "cleanup", "volunteers", "rangers", "species",
                "dune", "oasis", "garden", "irrigation", "sapling", "greenery",
                "biodiversity"),
    ),
    ClusterTemplate(
        name="climate action and carbon reduction",
        anchor="climate action",
        keywords=("carbon capture", "net zero", "emissions reduction"),
        hashtags=("climateaction", "carboncapture", "netzero2060",
                  "الاقتصاد_الدائري_للكربون"),
        filler=("temperature", "heatwave", "cooling", "refinery", "pipeline",
                "hydrogen", "ammonia", "fuel", "methane", "flaring", "offset",
                "credits", "conference", "pledge", "target", "monitoring",
                "sensors", "industrial", "facility", "technology", "research",
                "scientists", "measurement", "atmosphere", "baseline"),
    ),
)

# Off-topic vocabulary for non-sustainability posts; none of these words fold
# into a lexicon entry or carry sentiment weight.
OFFTOPIC_WORDS = (
    "football", "match", "stadium", "league", "recipe", "coffee", "restaurant",
    "travel", "flight", "hotel", "movie", "series", "music", "concert",
    "fashion", "shopping", "mall", "traffic", "weather", "holiday", "weekend",
    "family", "friends", "school", "exam", "university", "phone", "gaming",
    "laptop", "camera", "dessert", "bakery", "gym", "workout", "novel",
    "painting", "museum", "festival", "parade", "wedding",
)
OFFTOPIC_TAGS = ("football", "travel", "foodie", "gaming", "fashion")


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 7
    totals: dict[int, int] = field(default_factory=lambda: dict(DEFAULT_TOTALS))
    shares: dict[int, float] = field(default_factory=lambda: dict(DEFAULT_SHARES))
    sentiment_mix: tuple[float, float, float] = DEFAULT_SENTIMENT_MIX
    templates: tuple[ClusterTemplate, ...] = DEFAULT_TEMPLATES
    noise_fraction: float = 0.0

    def __post_init__(self):
        for year, share in self.shares.items():
            if not (0.0 <= share <= 1.0):
                raise DataError(f"share for {year} outside [0, 1]: {share}")
        if set(self.shares) != set(self.totals):
            raise DataError("shares and totals must cover the same years")
        if abs(sum(self.sentiment_mix) - 1.0) > 1e-9:
            raise DataError("sentiment mix must sum to 1")
        if len(self.templates) < 2:
            raise DataError("need at least 2 cluster templates")
        if not (0.0 <= self.noise_fraction < 1.0):
            raise DataError("noise_fraction must be in [0, 1)")


@dataclass(frozen=True)
class SynthResult:
    corpus_path: Path
    gold_sentiment_path: Path
    gold_clusters_path: Path
    n_posts: int
    n_topical: int
    sentiment_counts: dict[str, int]


def _largest_remainder(n: int, ratios) -> list[int]:
    exact = [n * r for r in ratios]
    sizes = [math.floor(x) for x in exact]
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def _timestamp(rng: np.random.Generator, year: int) -> str:
    start = datetime(year, 1, 1, tzinfo=timezone.utc)
    days = (datetime(year + 1, 1, 1, tzinfo=timezone.utc) - start).days
    moment = start + timedelta(days=int(rng.integers(0, days)),
                               seconds=int(rng.integers(0, 86400)))
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def _engagement(rng: np.random.Generator, year: int) -> dict:
    lift = 1.0 + 0.3 * (year - min(DEFAULT_TOTALS))
    values = {
        "likes": int(rng.poisson(24.0 * lift)),
        "comments": int(rng.poisson(6.0 * lift)),
        "shares": int(rng.poisson(4.0 * lift)),
        "saves": int(rng.poisson(2.0 * lift)),
    }
    for name in list(values):
        if rng.random() < 0.04:
            values[name] = None
    return values


def _topical_text(rng: np.random.Generator, template: ClusterTemplate, template_idx: int,
                  polarity: str, mixin: ClusterTemplate | None = None) -> str:
    """Anchor phrase twice (repetition concentrates the template's shared
    weight), one keyword and two filler words in sorted order so shared draws
    produce shared n-grams, then the template's polarity pair."""
    kw_pool = template.keywords if mixin is None else template.keywords + mixin.keywords
    filler_pool = template.filler if mixin is None else template.filler + mixin.filler
    units = [str(rng.choice(kw_pool))]
    units += [str(w) for w in rng.choice(filler_pool, size=2, replace=False)]
    words = template.anchor.split()
    words += " ".join(sorted(units)).split()
    words += template.anchor.split()
    start = (2 * template_idx) % len(POSITIVE_WORDS)
    if polarity == "positive":
        words += sorted(POSITIVE_WORDS[start:start + 2])
    elif polarity == "negative":
        words += sorted(NEGATIVE_WORDS[start:start + 2])
    return " ".join(words)


def _offtopic_text(rng: np.random.Generator) -> str:
    n = int(rng.integers(4, 9))
    return " ".join(sorted(str(w) for w in rng.choice(OFFTOPIC_WORDS, size=n, replace=False)))


def generate(spec: SynthSpec, out_dir: str | Path) -> SynthResult:
    """Write ``posts.jsonl``, ``gold_sentiment.tsv`` and ``gold_clusters.tsv``.

    Topical posts always carry a Saudi geo or hashtag (so the country filter
    keeps them) and an anchor phrase from the bundled lexicon (so the topic
    filter keeps them); off-topic posts never touch the lexicon. Yearly topic
    shares therefore hold exactly by construction.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    records: list[dict] = []
    gold_sentiment: list[tuple[str, str]] = []
    gold_clusters: list[tuple[str, int]] = []
    sentiment_counts = {"positive": 0, "negative": 0, "neutral": 0}
    counter = 0
    n_topical = 0

    for year in sorted(spec.totals):
        total = spec.totals[year]
        topical = round(total * spec.shares[year])
        n_topical += topical
        n_pos, n_neg, n_neu = _largest_remainder(topical, spec.sentiment_mix)
        polarities = (["positive"] * n_pos + ["negative"] * n_neg + ["neutral"] * n_neu)
        rng.shuffle(polarities)
        n_noise = int(topical * spec.noise_fraction)

        year_records = []
        for i in range(topical):
            counter += 1
            post_id = f"p{counter:06d}"
            is_noise = i >= topical - n_noise
            template_idx = int(i % len(spec.templates))
            template = spec.templates[template_idx]
            mixin = None
            if is_noise:
                mixin = spec.templates[(template_idx + 1) % len(spec.templates)]
            polarity = polarities[i]
            sentiment_counts[polarity] += 1

            geo_draw = rng.random()
            geo = "Saudi Arabia" if geo_draw < 0.7 else ("KSA" if geo_draw < 0.9 else None)
            tags = [str(t) for t in rng.choice(template.hashtags,
                                               size=int(rng.integers(1, 3)), replace=False)]
            if geo is None:
                tags.append("ksa")

            rec = {
                "id": post_id,
                "platform": str(rng.choice(PLATFORMS, p=PLATFORM_WEIGHTS)),
                "timestamp": _timestamp(rng, year),
                "text": _topical_text(rng, template, template_idx, polarity, mixin),
                "geo": geo,
                "hashtags": tags,
                "lang": "en",
            }
            rec.update(_engagement(rng, year))
            year_records.append(rec)
            gold_sentiment.append((post_id, polarity))
            gold_clusters.append((post_id, -1 if is_noise else template_idx))

        for _ in range(total - topical):
            counter += 1
            geo = str(rng.choice([g for g in OTHER_GEOS if g]) if rng.random() < 0.4
                      else "Saudi Arabia")
            rec = {
                "id": f"p{counter:06d}",
                "platform": str(rng.choice(PLATFORMS, p=PLATFORM_WEIGHTS)),
                "timestamp": _timestamp(rng, year),
                "text": _offtopic_text(rng),
                "geo": geo if rng.random() < 0.9 else None,
                "hashtags": ([str(rng.choice(OFFTOPIC_TAGS))] if rng.random() < 0.5 else []),
                "lang": "en",
            }
            rec.update(_engagement(rng, year))
            year_records.append(rec)

        order = rng.permutation(len(year_records))
        records.extend(year_records[int(j)] for j in order)

    corpus_path = out_dir / "posts.jsonl"
    with open(corpus_path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    gold_sent_path = out_dir / "gold_sentiment.tsv"
    with open(gold_sent_path, "w", encoding="utf-8", newline="\n") as f:
        for post_id, polarity in gold_sentiment:
            f.write(f"{post_id}\t{polarity}\n")
    gold_clusters_path = out_dir / "gold_clusters.tsv"
    with open(gold_clusters_path, "w", encoding="utf-8", newline="\n") as f:
        for post_id, template_idx in gold_clusters:
            f.write(f"{post_id}\t{template_idx}\n")

    log.info("generated %d posts (%d topical) into %s", len(records), n_topical, out_dir)
    return SynthResult(
        corpus_path=corpus_path,
        gold_sentiment_path=gold_sent_path,
        gold_clusters_path=gold_clusters_path,
        n_posts=len(records),
        n_topical=n_topical,
        sentiment_counts=sentiment_counts,
    )
