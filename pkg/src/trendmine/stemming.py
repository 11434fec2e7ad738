"""Suffix-stripping stemmers: classic Porter for English, light stemmer for Arabic.

Both leave tokens shorter than three letters untouched. The Arabic stemmer
strips common conjunction/preposition prefixes and plural/feminine suffixes
without reducing words to triliteral roots.
"""

from __future__ import annotations

_VOWELS = "aeiou"


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Count of vowel->consonant transitions: the m in [C](VC)^m[V]."""
    m = 0
    prev_cons = True
    started = False
    for i in range(len(stem)):
        cons = _is_cons(stem, i)
        if not cons:
            started = True
        if started and cons and not prev_cons:
            m += 1
        prev_cons = cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_cons(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (_is_cons(word, len(word) - 3)
            and not _is_cons(word, len(word) - 2)
            and _is_cons(word, len(word) - 1)):
        return False
    return word[-1] not in "wxy"


def _apply_rules(word: str, rules: list[tuple[str, str, int]]) -> str:
    """Apply the first rule whose suffix matches; the measure condition gates
    the replacement but a failed condition still ends the step (Porter
    longest-match semantics, rules pre-sorted longest first)."""
    for suffix, repl, min_m in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > min_m:
                return stem + repl
            return word
    return word


_STEP2 = [
    ("ational", "ate", 0), ("ization", "ize", 0), ("iveness", "ive", 0),
    ("fulness", "ful", 0), ("ousness", "ous", 0), ("biliti", "ble", 0),
    ("tional", "tion", 0), ("entli", "ent", 0), ("ousli", "ous", 0),
    ("ation", "ate", 0), ("alism", "al", 0), ("aliti", "al", 0),
    ("iviti", "ive", 0), ("enci", "ence", 0), ("anci", "ance", 0),
    ("izer", "ize", 0), ("abli", "able", 0), ("alli", "al", 0),
    ("ator", "ate", 0), ("logi", "log", 0), ("eli", "e", 0),
]

_STEP3 = [
    ("icate", "ic", 0), ("ative", "", 0), ("alize", "al", 0),
    ("iciti", "ic", 0), ("ical", "ic", 0), ("ness", "", 0), ("ful", "", 0),
]

_STEP4 = [
    ("ement", "", 1), ("ance", "", 1), ("ence", "", 1), ("able", "", 1),
    ("ible", "", 1), ("ment", "", 1), ("ant", "", 1), ("ent", "", 1),
    ("ism", "", 1), ("ate", "", 1), ("iti", "", 1), ("ous", "", 1),
    ("ive", "", 1), ("ize", "", 1), ("al", "", 1), ("er", "", 1),
    ("ic", "", 1), ("ou", "", 1),
]


def porter_stem(word: str) -> str:
    """Porter (1980) stemmer; expects a lowercase ASCII-letter token."""
    if len(word) < 3:
        return word

    # step 1a: plurals
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif not word.endswith("ss") and word.endswith("s"):
        word = word[:-1]

    # step 1b: -ed / -ing
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        stripped = None
        if word.endswith("ed") and _has_vowel(word[:-2]):
            stripped = word[:-2]
        elif word.endswith("ing") and _has_vowel(word[:-3]):
            stripped = word[:-3]
        if stripped is not None:
            word = stripped
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_cons(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # step 1c: terminal y
    if word.endswith("y") and _has_vowel(word[:-1]):
        word = word[:-1] + "i"

    word = _apply_rules(word, _STEP2)
    word = _apply_rules(word, _STEP3)

    # step 4, with the (s|t)ion special case
    matched = False
    for suffix, repl, min_m in _STEP4:
        if word.endswith(suffix):
            matched = True
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > min_m:
                word = stem + repl
            break
    if not matched and word.endswith("ion") and len(word) > 3 and word[-4] in "st":
        if _measure(word[:-3]) > 1:
            word = word[:-3]

    # step 5a: terminal e
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # step 5b: -ll
    if _measure(word) > 1 and _ends_double_cons(word) and word.endswith("l"):
        word = word[:-1]

    return word


# Arabic light stemming: single-letter conjunctions/prepositions, definite
# articles, then common suffixes. All forms are post-normalization (bare alef,
# ta marbuta already folded to ha).
_AR_SINGLE_PREFIXES = ("و", "ف", "ب", "ك", "ل")  # w f b k l
_AR_ARTICLE_PREFIXES = ("ال", "لل")                  # al, ll
_AR_SUFFIXES = (
    "ها",  # ha
    "ان",  # an
    "ات",  # at
    "ون",  # wn
    "ين",  # yn
    "ه",        # h
    "ة",        # ta marbuta (unnormalized input)
)
_MIN_STEM = 3


def arabic_light_stem(word: str) -> str:
    """Light stemmer: strip at most one conjunction/preposition letter, then a
    definite article, then suffixes repeatedly while >= 3 letters remain."""
    if len(word) < _MIN_STEM:
        return word
    for p in _AR_SINGLE_PREFIXES:
        if word.startswith(p) and len(word) - len(p) >= _MIN_STEM:
            word = word[len(p):]
            break
    for p in _AR_ARTICLE_PREFIXES:
        if word.startswith(p) and len(word) - len(p) >= _MIN_STEM:
            word = word[len(p):]
            break
    stripped = True
    while stripped:
        stripped = False
        for s in _AR_SUFFIXES:
            if word.endswith(s) and len(word) - len(s) >= _MIN_STEM:
                word = word[: len(word) - len(s)]
                stripped = True
                break
    return word


def stem(token: str, lang: str = "en") -> str:
    """Stem one normalized token; tokens shorter than 3 letters pass through."""
    if len(token) < 3:
        return token
    if lang == "ar":
        return arabic_light_stem(token)
    return porter_stem(token)
