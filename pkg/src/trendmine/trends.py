"""Per-cluster time series of sentiment and engagement, with closed-form OLS
and LSTM forecasting."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .lstm import (LstmConfig, LstmModel, lstm_gradient_check, minmax_invert,  # noqa: F401
                   minmax_scale, rollout, train_lstm)
from .sentiment import SentimentResult
from .textprep import CleanPost

log = logging.getLogger(__name__)

SENTIMENT_RANGE = (-1.0, 1.0)


@dataclass(frozen=True)
class TrendPoint:
    period: str                    # "2018" or "2018-03"
    index: int                     # calendar position; gaps keep their width
    mean_sentiment: float | None   # None for empty buckets
    post_count: int
    engagement_total: int
    engagement_mean: float


@dataclass(frozen=True)
class TrendSeries:
    cluster_id: int
    bucket: str                    # year | month
    points: tuple[TrendPoint, ...]

    def values(self, metric: str) -> list[tuple[int, float]]:
        """(index, value) pairs for fitting; empty buckets are skipped so no
        fabricated neutrality enters the fit, but x positions keep their
        calendar spacing."""
        out = []
        for p in self.points:
            if p.post_count == 0:
                continue
            if metric == "sentiment":
                out.append((p.index, float(p.mean_sentiment)))
            elif metric == "engagement_total":
                out.append((p.index, float(p.engagement_total)))
            elif metric == "engagement_mean":
                out.append((p.index, float(p.engagement_mean)))
            else:
                raise DataError(f"unknown metric {metric!r}")
        return out


def _period_index(ts, bucket: str) -> int:
    if bucket == "year":
        return ts.year
    return ts.year * 12 + (ts.month - 1)


def _period_label(index: int, bucket: str) -> str:
    if bucket == "year":
        return str(index)
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


def build_series(posts: list[CleanPost], sentiments: dict[str, SentimentResult],
                 labels, bucket: str = "year") -> list[TrendSeries]:
    """Bucket posts per cluster per period; noise (-1) is excluded and gap
    periods between the first and last occupied one are emitted with count 0."""
    if bucket not in ("year", "month"):
        raise DataError(f"bucket must be year or month, got {bucket!r}")
    grouped: dict[int, dict[int, list[CleanPost]]] = {}
    for post, lab in zip(posts, labels):
        lab = int(lab)
        if lab == -1:
            continue
        if post.id not in sentiments:
            raise DataError(f"post {post.id!r} has no sentiment score")
        grouped.setdefault(lab, {}).setdefault(_period_index(post.timestamp, bucket), []).append(post)
    if not grouped:
        log.warning("no non-noise posts; trend series are empty")
        return []

    series: list[TrendSeries] = []
    for cluster_id in sorted(grouped):
        buckets = grouped[cluster_id]
        lo, hi = min(buckets), max(buckets)
        points = []
        for idx in range(lo, hi + 1):
            members = buckets.get(idx, [])
            if members:
                scores = [sentiments[p.id].score for p in members]
                totals = [p.engagement.total() if p.engagement else 0 for p in members]
                points.append(TrendPoint(
                    period=_period_label(idx, bucket),
                    index=idx,
                    mean_sentiment=sum(scores) / len(scores),
                    post_count=len(members),
                    engagement_total=sum(totals),
                    engagement_mean=sum(totals) / len(members),
                ))
            else:
                points.append(TrendPoint(period=_period_label(idx, bucket), index=idx,
                                         mean_sentiment=None, post_count=0,
                                         engagement_total=0, engagement_mean=0.0))
        series.append(TrendSeries(cluster_id=cluster_id, bucket=bucket, points=tuple(points)))
    return series


@dataclass(frozen=True)
class OlsFit:
    slope: float
    intercept: float
    r_squared: float
    n: int


def fit_ols(points: list[tuple[float, float]]) -> OlsFit:
    """Closed-form least squares: slope = sum((x-X)(y-Y)) / sum((x-X)^2)."""
    if len(points) < 2:
        raise DataError(f"OLS needs at least 2 points, got {len(points)}")
    x = np.asarray([p[0] for p in points], dtype=np.float64)
    y = np.asarray([p[1] for p in points], dtype=np.float64)
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise DataError("degenerate fit: all x values are equal")
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    ss_res = float(np.sum(residuals ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-300 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return OlsFit(slope=slope, intercept=intercept, r_squared=min(max(r2, 0.0), 1.0), n=len(points))


@dataclass(frozen=True)
class Forecast:
    cluster_id: int
    metric: str
    model: str                      # ols | lstm
    periods: tuple[str, ...]
    values: tuple[float, ...]
    history_periods: tuple[str, ...]

    def __post_init__(self):
        if any(not np.isfinite(v) for v in self.values):
            raise DataError(f"non-finite forecast for cluster {self.cluster_id}")


def forecast_ols(fit: OlsFit, last_index: int, horizon: int, bucket: str = "year",
                 cluster_id: int = -1, metric: str = "sentiment",
                 history_periods: tuple[str, ...] = (),
                 clamp: tuple[float, float] | None = None) -> Forecast:
    """Extrapolate the fitted line over the next ``horizon`` period indices;
    sentiment forecasts are clamped to [-1, 1]."""
    if clamp is None and metric == "sentiment":
        clamp = SENTIMENT_RANGE
    indices = range(last_index + 1, last_index + 1 + horizon)
    values = []
    for idx in indices:
        v = fit.intercept + fit.slope * idx
        if clamp is not None:
            v = max(clamp[0], min(clamp[1], v))
        values.append(v)
    return Forecast(cluster_id=cluster_id, metric=metric, model="ols",
                    periods=tuple(_period_label(i, bucket) for i in indices),
                    values=tuple(values), history_periods=history_periods)


def forecast_lstm(model: LstmModel, history: list[float], last_index: int, horizon: int,
                  bucket: str = "year", cluster_id: int = -1, metric: str = "sentiment",
                  history_periods: tuple[str, ...] = (),
                  scale: tuple[float, float] | None = None,
                  clamp: tuple[float, float] | None = None) -> Forecast:
    """Autoregressive rollout of a trained model; predictions are un-scaled
    back to original units and sentiment is clamped to [-1, 1]."""
    if clamp is None and metric == "sentiment":
        clamp = SENTIMENT_RANGE
    hist = np.asarray(history, dtype=np.float64)
    if scale is None:
        scaled, scale = minmax_scale(hist)
    else:
        scaled = hist
    if horizon == 0:
        preds = np.empty(0)
    else:
        preds = minmax_invert(rollout(model, scaled, horizon), scale)
    values = []
    for v in preds:
        v = float(v)
        if clamp is not None:
            v = max(clamp[0], min(clamp[1], v))
        values.append(v)
    indices = range(last_index + 1, last_index + 1 + horizon)
    return Forecast(cluster_id=cluster_id, metric=metric, model="lstm",
                    periods=tuple(_period_label(i, bucket) for i in indices),
                    values=tuple(values), history_periods=history_periods)


def forecast_series(series: TrendSeries, metric: str, horizon: int, model: str = "ols",
                    lstm_config: LstmConfig | None = None, seed: int = 0) -> Forecast | None:
    """Fit-and-forecast one metric of one series, falling back from LSTM to
    OLS (with a warning, forecast tagged ols) when the history is too short."""
    pts = series.values(metric)
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        log.warning("cluster %d %s: too few points to forecast", series.cluster_id, metric)
        return None
    last_index = series.points[-1].index
    history_periods = tuple(p.period for p in series.points)
    if model == "lstm":
        cfg = lstm_config or LstmConfig()
        values = [v for _, v in pts]
        if len(values) >= cfg.window + 2:
            scaled, scale = minmax_scale(np.asarray(values))
            trained = train_lstm(scaled, cfg, seed)
            return forecast_lstm(trained, list(scaled), last_index, horizon,
                                 bucket=series.bucket, cluster_id=series.cluster_id,
                                 metric=metric, history_periods=history_periods, scale=scale)
        log.warning("cluster %d %s: series of %d points too short for the LSTM "
                    "window %d, falling back to OLS", series.cluster_id, metric,
                    len(values), cfg.window)
    fit = fit_ols([(float(x), v) for x, v in pts])
    return forecast_ols(fit, last_index, horizon, bucket=series.bucket,
                        cluster_id=series.cluster_id, metric=metric,
                        history_periods=history_periods)
