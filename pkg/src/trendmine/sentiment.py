"""Lexicon sentiment scoring, external score ingestion, the train/validation/
test split harness, and evaluation metrics."""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

from .errors import DataError
from .textprep import CleanPost, PrepConfig, fold_terms

log = logging.getLogger(__name__)

LABELS = ("positive", "negative", "neutral")
DEFAULT_TAU = 0.1


def label_for_score(score: float, tau: float = DEFAULT_TAU) -> str:
    """positive above the neutral band, negative below, neutral inside."""
    if score > tau:
        return "positive"
    if score < -tau:
        return "negative"
    return "neutral"


@dataclass(frozen=True)
class SentimentResult:
    post_id: str
    label: str
    score: float

    def __post_init__(self):
        if not (-1.0 <= self.score <= 1.0):
            raise DataError(f"score {self.score} for {self.post_id} outside [-1, 1]")
        if self.label not in LABELS:
            raise DataError(f"unknown label {self.label!r}")


@dataclass
class SentimentLexicon:
    """Term -> polarity weight in [-1, 1], language-keyed. Terms are folded
    through the same chain post tokens get so lookups stay consistent."""

    by_lang: dict[str, dict[str, float]]
    _merged: dict[str, float] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for lang in sorted(self.by_lang):
            for term, w in self.by_lang[lang].items():
                if not (-1.0 <= w <= 1.0):
                    raise DataError(f"weight {w} for {term!r} outside [-1, 1]")
                self._merged[term] = w

    def weight(self, term: str) -> float | None:
        return self._merged.get(term)

    @staticmethod
    def _parse(text: str, source: str, prep: PrepConfig, lang: str) -> dict[str, float]:
        table: dict[str, float] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{source}:{lineno}: expected 'term<TAB>weight'")
            toks = fold_terms(parts[0], prep, lang=lang)
            if not toks:
                log.warning("%s:%d: term %r folds to nothing, skipped", source, lineno, parts[0])
                continue
            try:
                table[" ".join(toks)] = float(parts[1])
            except ValueError as exc:
                raise DataError(f"{source}:{lineno}: bad weight {parts[1]!r}") from exc
        return table

    @classmethod
    def bundled(cls, prep: PrepConfig) -> "SentimentLexicon":
        data = files("trendmine") / "data"
        return cls(by_lang={
            "en": cls._parse((data / "sentiment_en.tsv").read_text(encoding="utf-8"),
                             "sentiment_en.tsv", prep, "en"),
            "ar": cls._parse((data / "sentiment_ar.tsv").read_text(encoding="utf-8"),
                             "sentiment_ar.tsv", prep, "ar"),
        })

    @classmethod
    def from_file(cls, path: str | Path, prep: PrepConfig, lang: str = "en") -> "SentimentLexicon":
        path = Path(path)
        if not path.exists():
            raise DataError(f"sentiment lexicon not found: {path}")
        return cls(by_lang={lang: cls._parse(path.read_text(encoding="utf-8"), str(path), prep, lang)})


def score_lexicon(post: CleanPost, lexicon: SentimentLexicon,
                  tau: float = DEFAULT_TAU) -> SentimentResult:
    """Sum of matched token/n-gram weights divided by the token count, clamped
    to [-1, 1]. Pure bag-of-terms: token order never matters."""
    total = 0.0
    for term in list(post.tokens) + list(post.ngrams):
        w = lexicon.weight(term)
        if w is not None:
            total += w
    score = total / max(1, post.token_count)
    score = max(-1.0, min(1.0, score))
    return SentimentResult(post_id=post.id, label=label_for_score(score, tau), score=score)


def load_external_scores(path: str | Path, expected_ids: list[str],
                         tau: float = DEFAULT_TAU) -> list[SentimentResult]:
    """Read TSV ``post_id<TAB>score`` rows. Scores outside [-1, 1] are fatal
    with their row number; labels are recomputed from the neutral-band rule."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"score file not found: {path}")
    expected = set(expected_ids)
    results: list[SentimentResult] = []
    seen: set[str] = set()
    extra = 0
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        post_id, _, raw = line.partition("\t")
        try:
            score = float(raw)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad score {raw!r}") from exc
        if not (-1.0 <= score <= 1.0):
            raise DataError(f"{path}:{lineno}: score {score} outside [-1, 1]")
        if post_id not in expected:
            extra += 1
            continue
        results.append(SentimentResult(post_id=post_id, label=label_for_score(score, tau),
                                       score=score))
        seen.add(post_id)
    if extra:
        log.warning("%s: ignored %d scores for unexpected ids", path, extra)
    missing = sorted(expected - seen)
    if missing:
        log.warning("%s: missing scores for %d expected ids (e.g. %s)",
                    path, len(missing), missing[:5])
    return results


@dataclass(frozen=True)
class EvalSplit:
    train_ids: frozenset[str]
    validation_ids: frozenset[str]
    test_ids: frozenset[str]


def _largest_remainder(n: int, ratios: tuple[float, ...]) -> list[int]:
    exact = [n * r for r in ratios]
    sizes = [math.floor(x) for x in exact]
    short = n - sum(sizes)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[:short]:
        sizes[i] += 1
    return sizes


def _shuffle_key(seed: int, post_id: str) -> bytes:
    return hashlib.blake2b(f"{seed}:{post_id}".encode("utf-8"), digest_size=16).digest()


def make_split(labeled_ids: list[str], ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
               seed: int = 0) -> EvalSplit:
    """Deterministic 80/10/10 partition (largest-remainder sizes).

    The shuffle is keyed on a hash of (seed, id), not on input order, so
    corpora with nondeterministic file ordering still split identically.
    """
    ids = list(dict.fromkeys(labeled_ids))
    if len(ids) < 10:
        raise DataError(f"need at least 10 labeled ids to split, got {len(ids)}")
    n_train, n_val, n_test = _largest_remainder(len(ids), ratios)
    ordered = sorted(ids, key=lambda pid: (_shuffle_key(seed, pid), pid))
    return EvalSplit(
        train_ids=frozenset(ordered[:n_train]),
        validation_ids=frozenset(ordered[n_train:n_train + n_val]),
        test_ids=frozenset(ordered[n_train + n_val:]),
    )


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    precision: dict[str, float]
    recall: dict[str, float]
    f1: dict[str, float]
    confusion: dict[str, dict[str, int]]   # rows = gold, cols = predicted
    n_test: int


def evaluate(results: list[SentimentResult], gold_labels: dict[str, str],
             split: EvalSplit) -> EvalMetrics:
    """Accuracy, per-class precision/recall/F1 and the confusion matrix, on
    the test partition only."""
    predicted = {r.post_id: r.label for r in results}
    confusion = {g: {p: 0 for p in LABELS} for g in LABELS}
    correct = 0
    test_ids = sorted(split.test_ids)
    for pid in test_ids:
        if pid not in gold_labels:
            raise DataError(f"no gold label for test id {pid!r}")
        if pid not in predicted:
            raise DataError(f"no prediction for test id {pid!r}")
        gold, pred = gold_labels[pid], predicted[pid]
        if gold not in LABELS:
            raise DataError(f"unknown gold label {gold!r} for {pid!r}")
        confusion[gold][pred] += 1
        correct += gold == pred
    n = len(test_ids)
    precision, recall, f1 = {}, {}, {}
    for lab in LABELS:
        tp = confusion[lab][lab]
        pred_total = sum(confusion[g][lab] for g in LABELS)
        gold_total = sum(confusion[lab].values())
        p = tp / pred_total if pred_total else 0.0
        r = tp / gold_total if gold_total else 0.0
        precision[lab], recall[lab] = p, r
        f1[lab] = 2 * p * r / (p + r) if (p + r) else 0.0
    return EvalMetrics(accuracy=correct / n if n else 0.0, precision=precision,
                       recall=recall, f1=f1, confusion=confusion, n_test=n)


def sentiment_distribution(results: list[SentimentResult]) -> dict[str, float]:
    """Label shares over all results; sums to 1.0 and ignores ordering."""
    if not results:
        raise DataError("cannot compute sentiment distribution of no results")
    n = len(results)
    return {lab: sum(1 for r in results if r.label == lab) / n for lab in LABELS}


def load_gold_labels(path: str | Path) -> dict[str, str]:
    """TSV ``post_id<TAB>{positive|negative|neutral}``."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"gold label file not found: {path}")
    gold: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        pid, _, lab = line.partition("\t")
        lab = lab.strip()
        if lab not in LABELS:
            raise DataError(f"{path}:{lineno}: unknown label {lab!r}")
        gold[pid] = lab
    return gold
