"""Pipeline orchestration and report emission: keyword frequencies, the yearly
totals table, sentiment distribution, cluster table, and trend/forecast CSV.

Artifacts are written with a ``.partial`` suffix while the run is in flight
and renamed on success, so a failed run never leaves files that look final.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import features, filtering, sentiment as sentiment_mod, trends as trends_mod
from .clustering import (HdbscanParams, cluster_model_to_dict, label_clusters, run_hdbscan)
from .config import PipelineConfig
from .errors import DataError, StageError
from .lstm import LstmConfig
from .textprep import PrepConfig, preprocess

log = logging.getLogger(__name__)

STAGES = ("ingest", "preprocess", "filter", "embed", "sentiment",
          "cluster", "trends", "report")


@dataclass
class RunReport:
    config: dict
    stage_counts: dict[str, int] = field(default_factory=dict)
    yearly_rows: list[dict] = field(default_factory=list)
    sentiment_shares: dict[str, float] = field(default_factory=dict)
    cluster_summaries: list[dict] = field(default_factory=list)
    sentiment_eval: dict | None = None
    artifacts: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "stage_counts": self.stage_counts,
            "yearly_table": self.yearly_rows,
            "sentiment_shares": self.sentiment_shares,
            "cluster_summaries": self.cluster_summaries,
            "sentiment_eval": self.sentiment_eval,
            "artifacts": self.artifacts,
        }


class Emitter:
    """Writes artifacts as ``<name>.partial`` and renames them on success."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.pending: list[Path] = []

    def write_text(self, name: str, text: str) -> Path:
        final = self.out_dir / name
        partial = self.out_dir / (name + ".partial")
        partial.write_text(text, encoding="utf-8")
        self.pending.append(final)
        return final

    def write_json(self, name: str, payload) -> Path:
        return self.write_text(name, json.dumps(payload, ensure_ascii=False,
                                                sort_keys=True, indent=2) + "\n")

    def finalize(self) -> list[str]:
        for final in self.pending:
            partial = final.with_name(final.name + ".partial")
            partial.replace(final)
        return [str(p) for p in self.pending]


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_keyword_frequency(hits_by_keyword_year: dict[str, dict[int, int]],
                           years: list[int], emitter: Emitter) -> None:
    """Long-format keyword frequency (keyword, year, count), keywords ordered
    by total count descending; zero-hit keywords keep 0 rows for every year."""
    totals = {kw: sum(by_year.values()) for kw, by_year in hits_by_keyword_year.items()}
    ordered = sorted(hits_by_keyword_year, key=lambda kw: (-totals[kw], kw))
    rows = []
    payload = []
    for kw in ordered:
        by_year = hits_by_keyword_year[kw]
        for year in years:
            rows.append([kw, year, by_year.get(year, 0)])
        payload.append({"keyword": kw, "total": totals[kw],
                        "by_year": {str(y): by_year.get(y, 0) for y in years}})
    emitter.write_text("keyword_frequency.csv", _csv_text(["keyword", "year", "count"], rows))
    emitter.write_json("keyword_frequency.json", payload)


def emit_yearly_table(corpus_counts: dict[int, int], kept_counts: dict[int, int],
                      emitter: Emitter) -> list[dict]:
    """Yearly totals, topic-kept counts and one-decimal percentages, with a
    footer row carrying the overall share."""
    years = sorted(set(corpus_counts) | set(kept_counts))
    rows, dict_rows = [], []
    for year in years:
        total = corpus_counts.get(year, 0)
        kept = kept_counts.get(year, 0)
        pct = round(100.0 * kept / total, 1) if total else 0.0
        rows.append([year, total, f"{pct:.1f}", kept])
        dict_rows.append({"year": year, "total": total, "pct": pct, "kept": kept})
    grand_total = sum(corpus_counts.values())
    grand_kept = sum(kept_counts.values())
    overall = round(100.0 * grand_kept / grand_total, 1) if grand_total else 0.0
    rows.append(["total", grand_total, f"{overall:.1f}", grand_kept])
    dict_rows.append({"year": "total", "total": grand_total, "pct": overall, "kept": grand_kept})
    emitter.write_text("yearly_table.csv", _csv_text(["year", "total", "pct", "kept"], rows))
    return dict_rows


def _emit_trends_csv(series_list, forecasts, emitter: Emitter) -> None:
    rows = []
    for series in series_list:
        for p in series.points:
            sent = "" if p.mean_sentiment is None else repr(p.mean_sentiment)
            rows.append([series.cluster_id, p.period, "sentiment", sent, "history", ""])
            rows.append([series.cluster_id, p.period, "engagement_total",
                         p.engagement_total, "history", ""])
            rows.append([series.cluster_id, p.period, "engagement_mean",
                         repr(p.engagement_mean), "history", ""])
            rows.append([series.cluster_id, p.period, "post_count",
                         p.post_count, "history", ""])
    for fc in forecasts:
        for period, value in zip(fc.periods, fc.values):
            rows.append([fc.cluster_id, period, fc.metric, repr(value), "forecast", fc.model])
    emitter.write_text("trends.csv", _csv_text(
        ["cluster_id", "period", "metric", "value", "kind", "model"], rows))


def run_pipeline(config: PipelineConfig, until: str = "report") -> RunReport:
    """Execute ingest -> impute -> preprocess -> country filter -> topic filter
    -> embed -> sentiment -> cluster -> label -> trends -> emissions, stopping
    after ``until``. Any stage failure aborts with the stage name attached."""
    if until not in STAGES:
        raise DataError(f"unknown stage {until!r}")
    stop_at = STAGES.index(until)
    emitter = Emitter(config.out_dir)
    report = RunReport(config=config.snapshot())

    def reached(stage: str) -> bool:
        return STAGES.index(stage) <= stop_at

    # ingest + impute
    try:
        if config.input_path is None:
            raise DataError("no input_path configured")
        corpus_range = corpus_mod.default_corpus_range(config.corpus_start, config.corpus_end)
        corpus = corpus_mod.ingest(config.input_path, config.input_format, corpus_range)
        if len(corpus) > 0 and config.impute_fields:
            corpus = corpus_mod.impute_missing(corpus, set(config.impute_fields))
        by_year = corpus_mod.yearly_counts(corpus)
    except Exception as exc:
        raise StageError("ingest", exc) from exc
    report.stage_counts["ingested"] = len(corpus)
    report.stage_counts["rejected"] = corpus.provenance.reject_count
    emitter.write_json("corpus_summary.json", {
        "source": list(corpus.provenance.source_paths),
        "counts_by_year": {str(y): n for y, n in by_year.items()},
        "rejects": {"count": corpus.provenance.reject_count,
                    "samples": [list(s) for s in corpus.provenance.reject_samples]},
        "imputed": corpus.provenance.imputed_counts,
    })
    if not reached("preprocess"):
        report.artifacts = emitter.finalize()
        return report

    # preprocess
    try:
        prep = PrepConfig.bundled(default_lang=config.default_lang,
                                  lemma_table_path=config.lemma_table_path)
        clean = [preprocess(p, prep) for p in corpus.posts]
    except Exception as exc:
        raise StageError("preprocess", exc) from exc
    emitter.write_text("tokens.jsonl", "".join(
        json.dumps({"id": p.id, "lang": p.lang, "tokens": list(p.tokens)},
                   ensure_ascii=False, sort_keys=True) + "\n" for p in clean))
    if not reached("filter"):
        report.artifacts = emitter.finalize()
        return report

    # country + topic filters
    try:
        spec = filtering.CountryFilterSpec.create(config.geo_names, config.hashtag_keys,
                                                  config.city_names)
        in_country, discarded = filtering.country_filter(clean, spec)
        lexicon = (filtering.TopicLexicon.from_file(config.lexicon_path, prep)
                   if config.lexicon_path else filtering.TopicLexicon.bundled(prep))
        kept, hits = filtering.topic_filter(in_country, lexicon)
        kept_by_year = {}
        for p in kept:
            kept_by_year[p.timestamp.year] = kept_by_year.get(p.timestamp.year, 0) + 1
        shares = filtering.sustainability_share(by_year, kept_by_year)
        hits_by_kw_year: dict[str, dict[int, int]] = {
            lexicon.shown(e): {} for e in lexicon.entries}
        for p in kept:
            for entry in filtering.match_entries(p, lexicon):
                kw = lexicon.shown(entry)
                year = p.timestamp.year
                hits_by_kw_year[kw][year] = hits_by_kw_year[kw].get(year, 0) + 1
    except Exception as exc:
        raise StageError("filter", exc) from exc
    report.stage_counts["country_kept"] = len(in_country)
    report.stage_counts["topic_kept"] = len(kept)
    emitter.write_json("filter_counts.json", {
        "country_kept": len(in_country),
        "country_discarded": discarded,
        "topic_kept": len(kept),
        "topic_kept_by_year": {str(y): n for y, n in sorted(kept_by_year.items())},
        "shares_by_year": {str(y): s for y, s in shares.items()},
        "keyword_hits": hits,
        "kept_ids": [p.id for p in kept],
    })
    emit_keyword_frequency(hits_by_kw_year, sorted(by_year), emitter)
    report.yearly_rows = emit_yearly_table(by_year, kept_by_year, emitter)
    if not reached("embed"):
        report.artifacts = emitter.finalize()
        return report
    if not kept:
        raise StageError("embed", DataError("no posts survived filtering"))

    # embeddings
    try:
        if config.embedding_backend == "external":
            if not config.vectors_path:
                raise DataError("embedding_backend=external needs vectors_path")
            vectors = features.load_external_vectors(
                config.vectors_path, [p.id for p in kept], on_missing=config.external_missing)
        else:
            stats = features.fit_vocabulary(kept)
            vectors = features.embed_posts(kept, stats, config.dimension)
    except Exception as exc:
        raise StageError("embed", exc) from exc
    dropped = [p.id for p in kept if p.id not in vectors]
    if dropped:
        log.warning("dropping %d posts with no vector", len(dropped))
        kept = [p for p in kept if p.id in vectors]
    emitter.write_text("vectors.tsv", "".join(
        p.id + "\t" + ",".join(repr(float(x)) for x in vectors[p.id].values) + "\n"
        for p in kept))
    if not reached("sentiment"):
        report.artifacts = emitter.finalize()
        return report

    # sentiment
    try:
        if config.sentiment_backend == "external":
            if not config.scores_path:
                raise DataError("sentiment_backend=external needs scores_path")
            results = sentiment_mod.load_external_scores(
                config.scores_path, [p.id for p in kept], tau=config.tau)
        else:
            lex = (sentiment_mod.SentimentLexicon.from_file(config.sentiment_lexicon_path, prep)
                   if config.sentiment_lexicon_path
                   else sentiment_mod.SentimentLexicon.bundled(prep))
            results = [sentiment_mod.score_lexicon(p, lex, tau=config.tau) for p in kept]
        scores = {r.post_id: r for r in results}
        shares3 = sentiment_mod.sentiment_distribution(results)
        eval_payload = None
        if config.gold_sentiment_path:
            gold = sentiment_mod.load_gold_labels(config.gold_sentiment_path)
            labeled_ids = [p.id for p in kept if p.id in gold]
            split = sentiment_mod.make_split(labeled_ids, config.split_ratios, config.seed)
            metrics = sentiment_mod.evaluate(results, gold, split)
            eval_payload = {
                "split_sizes": {"train": len(split.train_ids),
                                "validation": len(split.validation_ids),
                                "test": len(split.test_ids)},
                "accuracy": metrics.accuracy,
                "precision": metrics.precision,
                "recall": metrics.recall,
                "f1": metrics.f1,
                "confusion": metrics.confusion,
            }
    except Exception as exc:
        raise StageError("sentiment", exc) from exc
    missing_scores = [p.id for p in kept if p.id not in scores]
    if missing_scores:
        log.warning("dropping %d posts with no sentiment score", len(missing_scores))
        kept = [p for p in kept if p.id in scores]
    report.sentiment_shares = shares3
    report.sentiment_eval = eval_payload
    emitter.write_text("sentiment_scores.tsv", "".join(
        f"{p.id}\t{scores[p.id].score!r}\n" for p in kept))
    emitter.write_json("sentiment_distribution.json", {
        "shares": shares3,
        "counts": {lab: sum(1 for r in results if r.label == lab)
                   for lab in sentiment_mod.LABELS},
    })
    if eval_payload is not None:
        emitter.write_json("sentiment_eval.json", eval_payload)
    if not reached("cluster"):
        report.artifacts = emitter.finalize()
        return report

    # clustering + labeling
    try:
        params = HdbscanParams(min_cluster_size=config.min_cluster_size,
                               min_samples=config.min_samples, metric=config.metric,
                               lambda_eps=config.lambda_eps)
        matrix = np.stack([vectors[p.id].values for p in kept])
        model = run_hdbscan(matrix, params)
        summaries = label_clusters(kept, model.labels, config.top_terms)
    except Exception as exc:
        raise StageError("cluster", exc) from exc
    noise = int(np.sum(model.labels == -1))
    report.stage_counts["clustered"] = len(kept) - noise
    report.stage_counts["noise"] = noise
    report.cluster_summaries = [{
        "cluster_id": s.cluster_id, "name": s.name, "size": s.size,
        "top_terms": [[t, v] for t, v in s.top_terms],
    } for s in summaries]
    doc = cluster_model_to_dict(model, summaries)
    doc["post_ids"] = [p.id for p in kept]
    emitter.write_json("clusters.json", doc)
    emitter.write_text("cluster_table.csv", _csv_text(
        ["cluster_id", "name", "size", "top_terms"],
        [[s.cluster_id, s.name, s.size, "; ".join(t for t, _ in s.top_terms)]
         for s in summaries]))
    if not reached("trends"):
        report.artifacts = emitter.finalize()
        return report

    # trends + forecasts
    try:
        series_list = trends_mod.build_series(kept, scores, model.labels, config.bucket)
        lstm_cfg = LstmConfig(window=config.lstm_window, hidden=config.lstm_hidden,
                              lr=config.lstm_lr, epochs=config.lstm_epochs,
                              clip_norm=config.lstm_clip)
        forecasts = []
        for series in series_list:
            for metric in ("sentiment", "engagement_total", "engagement_mean"):
                fc = trends_mod.forecast_series(series, metric, config.horizon,
                                                model=config.forecast_model,
                                                lstm_config=lstm_cfg, seed=config.seed)
                if fc is not None:
                    forecasts.append(fc)
    except Exception as exc:
        raise StageError("trends", exc) from exc
    _emit_trends_csv(series_list, forecasts, emitter)

    # the report itself is the last artifact; list it before serializing
    report.artifacts = [str(p) for p in emitter.pending]
    report.artifacts.append(str(emitter.out_dir / "runreport.json"))
    emitter.write_json("runreport.json", report.to_dict())
    emitter.finalize()
    return report
