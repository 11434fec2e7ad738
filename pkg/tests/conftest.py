import json
from datetime import datetime, timezone

import pytest

from trendmine.corpus import EngagementMetrics, Platform, RawPost
from trendmine.textprep import PrepConfig, preprocess


@pytest.fixture(scope="session")
def prep() -> PrepConfig:
    return PrepConfig.bundled()


def make_post(post_id="p1", text="", year=2022, month=6, day=1, geo=None,
              hashtags=(), platform=Platform.X, engagement=None, lang=None) -> RawPost:
    return RawPost(
        id=post_id,
        platform=platform,
        timestamp=datetime(year, month, day, 12, 0, 0, tzinfo=timezone.utc),
        text=text,
        geo=geo,
        hashtags=tuple(hashtags),
        engagement=engagement,
        lang_hint=lang,
    )


def clean(prep, **kwargs):
    return preprocess(make_post(**kwargs), prep)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return path


def record(post_id="p1", year=2022, text="hello world", **overrides):
    rec = {
        "id": post_id,
        "platform": "X",
        "timestamp": f"{year}-06-01T10:00:00Z",
        "text": text,
        "geo": None,
        "hashtags": [],
        "likes": 1, "comments": 0, "shares": 0, "saves": 0,
        "lang": "en",
    }
    rec.update(overrides)
    return rec
