"""Text preprocessing: noise removal, normalization, tokenization, stop word
filtering, lemmatization with stemmer fallback, and n-gram generation.

Every operation here is a pure function over immutable inputs, so posts can be
preprocessed in parallel with no shared state. The full chain is idempotent at
the token level: re-running noise removal + normalization + tokenization on a
post's ``cleaned_text`` reproduces the pre-stopword token stream.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

from .corpus import RawPost
from .errors import DataError
from .stemming import stem

log = logging.getLogger(__name__)

_URL_RE = re.compile(r"(?:[a-zA-Z][a-zA-Z0-9+.\-]*://\S+|www\.\S+)")

# Emoji matched by codepoint ranges (misc symbols, pictographs, transport,
# supplemental symbols, flags, variation selectors), not by an allowlist.
_EMOJI_RE = re.compile(
    "["
    "\U0001F000-\U0001FAFF"
    "\U00002600-\U000027BF"
    "\U0001F1E6-\U0001F1FF"
    "\U00002190-\U000021FF"
    "\U00002B00-\U00002BFF"
    "︀-️"
    "‍"
    "]+"
)

_KEEP_PUNCT = frozenset("#_'’")
_DANGLING_HASH_RE = re.compile(r"#+(?!\w)")
_MULTI_HASH_RE = re.compile(r"#{2,}(\w)")

# Arabic folding: strip tashkeel + tatweel, fold alef variants to bare alef,
# ta marbuta to ha, alef maqsura to ya, and Arabic-Indic digits to ASCII.
_AR_STRIP = dict.fromkeys(
    list(range(0x064B, 0x0660)) + [0x0670, 0x0640] + list(range(0x06D6, 0x06ED))
)
_AR_FOLD = {
    0x0622: 0x0627, 0x0623: 0x0627, 0x0625: 0x0627,  # alef madda/hamza -> alef
    0x0629: 0x0647,                                   # ta marbuta -> ha
    0x0649: 0x064A,                                   # alef maqsura -> ya
}
_DIGIT_FOLD = {0x0660 + i: ord("0") + i for i in range(10)}
_DIGIT_FOLD.update({0x06F0 + i: ord("0") + i for i in range(10)})
_NORMALIZE_TABLE = {**_AR_STRIP, **_AR_FOLD, **_DIGIT_FOLD}

_ARABIC_LETTER_RE = re.compile(r"[ء-يٱ-ۓ]")
_LATIN_LETTER_RE = re.compile(r"[a-zA-Z]")


def remove_noise(text: str) -> str:
    """Strip URLs, emoji and special characters, keeping letters, digits,
    whitespace, '#', '_' and apostrophes; '#' survives only as a hashtag
    marker. Whitespace collapses to single spaces."""
    text = _URL_RE.sub(" ", text)
    text = _EMOJI_RE.sub(" ", text)
    kept = [ch if (ch.isalnum() or ch.isspace() or ch in _KEEP_PUNCT) else "" for ch in text]
    text = "".join(kept)
    text = _MULTI_HASH_RE.sub(r"#\1", text)
    text = _DANGLING_HASH_RE.sub("", text)
    return " ".join(text.split())


def normalize(text: str, lang: str | None = None) -> str:
    """Unicode NFC, lowercase, Arabic diacritic/variant folding, ASCII digits.

    The Arabic folds are applied unconditionally; they are identity on
    non-Arabic text, which keeps the function free of locale dependence.
    """
    text = unicodedata.normalize("NFC", text)
    return text.lower().translate(_NORMALIZE_TABLE)


def tokenize(text: str) -> list[str]:
    """Whitespace split of noise-removed, normalized text. Hashtag tokens keep
    their leading '#' and are never segmented."""
    return [t for t in text.split() if t]


def detect_lang(text: str) -> str:
    """'ar' when Arabic letters outnumber Latin ones, else 'en'."""
    n_ar = len(_ARABIC_LETTER_RE.findall(text))
    n_lat = len(_LATIN_LETTER_RE.findall(text))
    return "ar" if n_ar > n_lat else "en"


def primary_subtag(lang: str | None) -> str | None:
    if not lang:
        return None
    return lang.split("-")[0].lower()


def _read_wordlist(path) -> set[str]:
    words = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(normalize(line))
    return words


@dataclass
class StopWordList:
    """Language-keyed stop word sets, all entries pre-normalized."""

    by_lang: dict[str, frozenset[str]]

    @classmethod
    def bundled(cls) -> "StopWordList":
        data = files("trendmine") / "data"
        return cls(by_lang={
            "en": frozenset(_read_wordlist(data / "stopwords_en.txt")),
            "ar": frozenset(_read_wordlist(data / "stopwords_ar.txt")),
        })

    def with_extra(self, lang: str, path: str | Path) -> "StopWordList":
        extra = _read_wordlist(Path(path))
        merged = dict(self.by_lang)
        merged[lang] = frozenset(merged.get(lang, frozenset()) | extra)
        return StopWordList(by_lang=merged)

    def words(self, lang: str) -> frozenset[str]:
        if lang not in self.by_lang:
            log.warning("no stop list for language %r, using English", lang)
            return self.by_lang["en"]
        return self.by_lang[lang]


def filter_stopwords(tokens: list[str], stoplist: StopWordList, lang: str) -> list[str]:
    """Drop stop words for the language; hashtag tokens are always kept."""
    stops = stoplist.words(lang)
    return [t for t in tokens if t.startswith("#") or t not in stops]


@dataclass
class LemmaTable:
    """Surface-form to lemma mappings, language-keyed, loaded from TSV files."""

    by_lang: dict[str, dict[str, str]] = field(default_factory=dict)

    @classmethod
    def bundled(cls) -> "LemmaTable":
        data = files("trendmine") / "data"
        return cls(by_lang={"en": cls._parse(data / "lemmas_en.tsv")})

    @classmethod
    def from_file(cls, path: str | Path, lang: str = "en") -> "LemmaTable":
        return cls(by_lang={lang: cls._parse(Path(path))})

    @staticmethod
    def _parse(path) -> dict[str, str]:
        table: dict[str, str] = {}
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'surface<TAB>lemma'")
            surface, lemma = normalize(parts[0]), normalize(parts[1])
            table[surface] = lemma
        for surface, lemma in table.items():
            if table.get(lemma, lemma) != lemma:
                raise DataError(f"lemma table has a chain: {surface} -> {lemma} -> {table[lemma]}")
        return table

    def lookup(self, token: str, lang: str) -> str | None:
        return self.by_lang.get(lang, {}).get(token)


def lemmatize(token: str, table: LemmaTable, lang: str) -> str:
    """Table lookup with stemmer fallback on miss. Applied once per token;
    stemming a lemma hit again would double-strip Arabic suffixes."""
    hit = table.lookup(token, lang)
    if hit is not None:
        return hit
    return stem(token, lang)


def ngrams(tokens: list[str]) -> list[str]:
    """All contiguous bigrams, then all contiguous trigrams, space-joined."""
    out = [" ".join(tokens[i:i + 2]) for i in range(len(tokens) - 1)]
    out += [" ".join(tokens[i:i + 3]) for i in range(len(tokens) - 2)]
    return out


@dataclass
class PrepConfig:
    """Resources the preprocessing chain needs; bundled defaults unless overridden."""

    stopwords: StopWordList
    lemmas: LemmaTable
    default_lang: str = "en"

    @classmethod
    def bundled(cls, default_lang: str = "en", lemma_table_path: str | None = None) -> "PrepConfig":
        lemmas = (LemmaTable.from_file(lemma_table_path)
                  if lemma_table_path else LemmaTable.bundled())
        return cls(stopwords=StopWordList.bundled(), lemmas=lemmas, default_lang=default_lang)


@dataclass(frozen=True)
class CleanPost:
    """A post after the full preprocessing chain. ``cleaned_text`` is the
    noise-removed, normalized text; ``tokens`` are post-stopword, post-lemma."""

    raw: RawPost
    cleaned_text: str
    tokens: tuple[str, ...]
    ngrams: tuple[str, ...]
    lang: str

    @property
    def id(self) -> str:
        return self.raw.id

    @property
    def timestamp(self):
        return self.raw.timestamp

    @property
    def geo(self) -> str | None:
        return self.raw.geo

    @property
    def hashtags(self) -> tuple[str, ...]:
        return self.raw.hashtags

    @property
    def engagement(self):
        return self.raw.engagement

    @property
    def token_count(self) -> int:
        return len(self.tokens)


def fold_token(token: str, lang: str, lemmas: LemmaTable) -> str:
    """Per-token folding used on posts and on lexicon entries alike: hashtags
    stay atomic, everything else goes through lemma lookup / stem fallback."""
    if token.startswith("#"):
        return token
    return lemmatize(token, lemmas, lang)


def fold_terms(text: str, prep: PrepConfig, lang: str | None = None) -> list[str]:
    """Run a free-text phrase through the same chain posts get; used to bring
    lexicon entries into the token space posts are matched in."""
    cleaned = normalize(remove_noise(text))
    if lang is None:
        lang = primary_subtag(None) or detect_lang(cleaned)
    toks = filter_stopwords(tokenize(cleaned), prep.stopwords, lang)
    return [fold_token(t, lang, prep.lemmas) for t in toks]


def preprocess(post: RawPost, prep: PrepConfig) -> CleanPost:
    """Full chain: remove_noise -> normalize -> tokenize -> filter_stopwords
    -> lemmatize per token -> ngrams. Engagement and metadata pass through."""
    cleaned = normalize(remove_noise(post.text))
    lang = primary_subtag(post.lang_hint)
    if lang is None:
        lang = detect_lang(cleaned) if cleaned else prep.default_lang
    raw_tokens = tokenize(cleaned)
    kept = filter_stopwords(raw_tokens, prep.stopwords, lang)
    folded = tuple(fold_token(t, lang, prep.lemmas) for t in kept)
    return CleanPost(
        raw=post,
        cleaned_text=cleaned,
        tokens=folded,
        ngrams=tuple(ngrams(list(folded))),
        lang=lang,
    )
