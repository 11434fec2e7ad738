"""Pipeline configuration: one flat key=value document covering every tunable."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import UsageError

IMPUTABLE_FIELDS = ("geo", "likes", "comments", "shares", "saves")


@dataclass
class PipelineConfig:
    # ingestion
    input_path: str | None = None
    input_format: str = "auto"            # jsonl | csv | auto (by extension)
    out_dir: str = "out"
    seed: int = 7
    corpus_start: str = "2018-01-01"
    corpus_end: str = "2024-12-31"
    impute_fields: tuple[str, ...] = IMPUTABLE_FIELDS
    # text preprocessing
    default_lang: str = "en"
    lemma_table_path: str | None = None   # None = bundled table
    # filtering
    lexicon_path: str | None = None       # None = bundled sustainability lexicon
    geo_names: tuple[str, ...] | None = None
    hashtag_keys: tuple[str, ...] | None = None
    city_names: tuple[str, ...] | None = None
    # features
    embedding_backend: str = "hashed_tfidf"   # hashed_tfidf | external
    vectors_path: str | None = None
    dimension: int = 256
    external_missing: str = "warn"        # warn | fail on incomplete id coverage
    # sentiment
    sentiment_backend: str = "lexicon"    # lexicon | external
    scores_path: str | None = None
    sentiment_lexicon_path: str | None = None
    tau: float = 0.1                      # neutral band half-width
    gold_sentiment_path: str | None = None
    split_ratios: tuple[float, ...] = (0.8, 0.1, 0.1)
    # clustering
    min_cluster_size: int = 15
    min_samples: int | None = None        # None = min_cluster_size
    metric: str = "euclidean"             # euclidean | cosine
    lambda_eps: float = 1e-12             # zero-distance cap: lambda_max = 1/lambda_eps
    top_terms: int = 10
    # trends
    bucket: str = "year"                  # year | month
    horizon: int = 3
    forecast_model: str = "ols"           # ols | lstm
    lstm_window: int = 4
    lstm_hidden: int = 16
    lstm_lr: float = 0.05
    lstm_epochs: int = 500
    lstm_clip: float = 1.0

    def __post_init__(self):
        if self.input_format not in ("auto", "jsonl", "csv"):
            raise UsageError(f"input_format must be jsonl, csv or auto, got {self.input_format!r}")
        if self.embedding_backend not in ("hashed_tfidf", "external"):
            raise UsageError(f"unknown embedding_backend {self.embedding_backend!r}")
        if self.sentiment_backend not in ("lexicon", "external"):
            raise UsageError(f"unknown sentiment_backend {self.sentiment_backend!r}")
        if self.metric not in ("euclidean", "cosine"):
            raise UsageError(f"unknown metric {self.metric!r}")
        if self.bucket not in ("year", "month"):
            raise UsageError(f"bucket must be year or month, got {self.bucket!r}")
        if self.forecast_model not in ("ols", "lstm"):
            raise UsageError(f"forecast_model must be ols or lstm, got {self.forecast_model!r}")
        if self.external_missing not in ("warn", "fail"):
            raise UsageError(f"external_missing must be warn or fail, got {self.external_missing!r}")
        unknown = set(self.impute_fields) - set(IMPUTABLE_FIELDS)
        if unknown:
            raise UsageError(f"impute_fields contains unknown fields: {sorted(unknown)}")
        if self.dimension < 2:
            raise UsageError("dimension must be >= 2")
        if self.min_cluster_size < 2:
            raise UsageError("min_cluster_size must be >= 2")
        if len(self.split_ratios) != 3 or abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise UsageError("split_ratios must be three values summing to 1.0")

    @property
    def effective_min_samples(self) -> int:
        return self.min_samples if self.min_samples is not None else self.min_cluster_size

    def snapshot(self) -> dict:
        """Serializable copy of every setting, for the run report."""
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _coerce(name: str, raw: str):
    f = _FIELD_TYPES[name]
    t = f.type
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if "tuple" in t:
        parts = tuple(p.strip() for p in raw.split(",") if p.strip())
        if name == "split_ratios":
            return tuple(float(p) for p in parts)
        return parts
    if t.startswith("int"):
        return int(raw)
    if t.startswith("float"):
        return float(raw)
    return raw


def load_config(path: str | Path | None, overrides: dict | None = None) -> PipelineConfig:
    """Build a config from a flat ``key = value`` file plus explicit overrides.

    Lines starting with ``#`` and blank lines are ignored. Unknown keys are a
    usage error so typos never silently fall back to defaults.
    """
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise UsageError(f"config file not found: {p}")
        for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{p}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise UsageError(f"{p}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _FIELD_TYPES:
            raise UsageError(f"unknown config key {key!r}")
        values[key] = val
    try:
        return PipelineConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
