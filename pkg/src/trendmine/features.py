"""Fixed-dimension post vectors: deterministic signed feature hashing with
TF-IDF weighting, plus a loader for externally produced embeddings."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .textprep import CleanPost

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    post_id: str
    norm: float

    def __post_init__(self):
        actual = float(np.linalg.norm(self.values))
        if abs(actual - self.norm) > 1e-9:
            raise DataError(f"vector {self.post_id}: stored norm {self.norm} != {actual}")


@dataclass(frozen=True)
class VocabularyStats:
    """Document frequencies over tokens and n-grams."""

    df: dict[str, int]
    n_docs: int


def _terms(post: CleanPost):
    return list(post.tokens) + list(post.ngrams)


def fit_vocabulary(posts: list[CleanPost]) -> VocabularyStats:
    """Document frequency of every token and n-gram across the posts."""
    if not posts:
        raise DataError("cannot fit vocabulary on an empty post list")
    df: Counter[str] = Counter()
    for post in posts:
        df.update(set(_terms(post)))
    return VocabularyStats(df=dict(df), n_docs=len(posts))


# The hash function is a fixed constant of the artifact: blake2b keyed only by
# the term bytes, so vectors are bit-reproducible across runs and platforms.
def _hash_term(term: str, dim: int) -> tuple[int, float]:
    h = hashlib.blake2b(term.encode("utf-8"), digest_size=10).digest()
    index = int.from_bytes(h[:8], "little") % dim
    sign = 1.0 if h[9] & 1 else -1.0
    return index, sign


def embed_hashed_tfidf(post: CleanPost, stats: VocabularyStats, dim: int = 256,
                       _cache: dict | None = None) -> FeatureVector:
    """Signed feature hashing of TF-IDF weights, L2-normalized.

    Each term contributes tf * (1 + ln(N/df)) at its hashed index with a
    hashed sign; unseen terms get df = 1 (maximum idf). An all-zero raw
    vector stays all-zero with norm 0.
    """
    if dim < 2:
        raise DataError("embedding dimension must be >= 2")
    values = np.zeros(dim, dtype=np.float64)
    tf = Counter(_terms(post))
    for term in sorted(tf):
        if _cache is not None and term in _cache:
            index, sign = _cache[term]
        else:
            index, sign = _hash_term(term, dim)
            if _cache is not None:
                _cache[term] = (index, sign)
        df = stats.df.get(term, 1)
        weight = tf[term] * (1.0 + math.log(stats.n_docs / df))
        values[index] += sign * weight
    norm = float(np.linalg.norm(values))
    if norm > 0.0:
        values = values / norm
        norm = 1.0
    return FeatureVector(values=values, post_id=post.id, norm=float(np.linalg.norm(values)))


def embed_posts(posts: list[CleanPost], stats: VocabularyStats, dim: int = 256) -> dict[str, FeatureVector]:
    cache: dict = {}
    return {p.id: embed_hashed_tfidf(p, stats, dim, _cache=cache) for p in posts}


def _parse_vec(raw: str) -> list[float]:
    return [float(x) for x in raw.split(",") if x.strip()]


def load_external_vectors(path: str | Path, expected_ids: list[str],
                          on_missing: str = "warn") -> dict[str, FeatureVector]:
    """Load externally produced vectors from TSV (``id<TAB>v1,v2,...``) or
    JSONL (``{"id":..., "vec":[...]}``), auto-detected by extension.

    All rows must share one dimension. Ids outside ``expected_ids`` are
    ignored with a warning; missing expected ids warn or fail per
    ``on_missing``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"vector file not found: {path}")
    expected = set(expected_ids)
    out: dict[str, FeatureVector] = {}
    dim: int | None = None
    extra = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                if path.suffix.lower() == ".jsonl":
                    rec = json.loads(line)
                    post_id, vec = str(rec["id"]), [float(x) for x in rec["vec"]]
                else:
                    post_id, _, raw = line.partition("\t")
                    vec = _parse_vec(raw)
            except (ValueError, KeyError, json.JSONDecodeError) as exc:
                raise DataError(f"{path}:{lineno}: bad vector row: {exc}") from exc
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise DataError(
                    f"{path}:{lineno}: dimension {len(vec)} != {dim} of earlier rows")
            if post_id not in expected:
                extra += 1
                continue
            arr = np.asarray(vec, dtype=np.float64)
            out[post_id] = FeatureVector(values=arr, post_id=post_id,
                                         norm=float(np.linalg.norm(arr)))
    if extra:
        log.warning("%s: ignored %d vectors for unexpected ids", path, extra)
    missing = sorted(expected - set(out))
    if missing:
        msg = f"{path}: missing vectors for {len(missing)} expected ids (e.g. {missing[:5]})"
        if on_missing == "fail":
            raise DataError(msg)
        log.warning(msg)
    return out
