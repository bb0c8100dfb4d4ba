"""English Snowball (Porter2) stemmer, current revision of the algorithm.

Words are expected lowercase. Regions R1/R2 are computed once after the
prelude; every step works on suffixes of the (mutating) word.
"""

from __future__ import annotations

from functools import lru_cache

VOWELS = frozenset("aeiouy")
# letters that may not end a short syllable
_NOT_SHORT_END = VOWELS | frozenset("wxY")
_VALID_LI = frozenset("cdeghkmnrt")
_REGION_PREFIXES = ("arsen", "commun", "emerg", "gener", "inter", "later", "organ",
                    "past", "univers")

_EXCEPTIONS = {
    "skis": "ski", "skies": "sky", "idly": "idl", "gently": "gentl", "ugly": "ugli",
    "early": "earli", "only": "onli", "singly": "singl",
    "sky": "sky", "news": "news", "howe": "howe", "atlas": "atlas", "cosmos": "cosmos",
    "bias": "bias", "andes": "andes",
}

_STEP1B_KEEP_ING = frozenset({"even", "cann", "inn", "earr", "herr", "out"})
_DOUBLES = ("bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt")

_STEP2 = {
    "tional": "tion", "enci": "ence", "anci": "ance", "abli": "able", "entli": "ent",
    "izer": "ize", "ization": "ize", "ational": "ate", "ation": "ate", "ator": "ate",
    "alism": "al", "aliti": "al", "alli": "al", "fulness": "ful", "fulli": "ful",
    "ousli": "ous", "ousness": "ous", "iveness": "ive", "iviti": "ive", "biliti": "ble",
    "bli": "ble", "ogist": "og", "lessli": "less",
    # conditional entries, resolved in _step2
    "ogi": None, "li": None,
}
_STEP3 = {
    "tional": "tion", "ational": "ate", "alize": "al", "icate": "ic", "iciti": "ic",
    "ical": "ic", "ful": "", "ness": "", "ative": None,
}
_STEP4 = ("ic", "ance", "ence", "able", "ible", "ate", "ive", "ize", "iti", "al", "ism",
          "ion", "er", "ous", "ant", "ent", "ment", "ement")


def _by_length(suffixes):
    return tuple(sorted(suffixes, key=len, reverse=True))


_STEP1A_ORDER = _by_length(("ied", "s", "ies", "sses", "ss", "us"))
_STEP1B_ORDER = _by_length(("ed", "eed", "ing", "edly", "eedly", "ingly"))
_STEP2_ORDER = _by_length(_STEP2)
_STEP3_ORDER = _by_length(_STEP3)
_STEP4_ORDER = _by_length(_STEP4)


def _longest_suffix(word: str, ordered: tuple[str, ...]) -> str | None:
    for suffix in ordered:
        if word.endswith(suffix):
            return suffix
    return None


def _has_vowel(s: str) -> bool:
    return any(ch in VOWELS for ch in s)


def _short_syllable_end(w: str) -> bool:
    """Does ``w`` end in a short syllable (or in "past")?"""
    n = len(w)
    if n >= 3 and w[-1] not in _NOT_SHORT_END and w[-2] in VOWELS and w[-3] not in VOWELS:
        return True
    if n == 2 and w[1] not in VOWELS and w[0] in VOWELS:
        return True
    return w.endswith("past")


def _regions(w: str) -> tuple[int, int]:
    def after_vc(start: int) -> int:
        i = start
        n = len(w)
        while i < n and w[i] not in VOWELS:
            i += 1
        while i < n and w[i] in VOWELS:
            i += 1
        return i + 1 if i < n else n

    p1 = None
    for prefix in _REGION_PREFIXES:
        if w.startswith(prefix):
            p1 = len(prefix)
            break
    if p1 is None:
        p1 = after_vc(0)
    p2 = after_vc(p1) if p1 < len(w) else len(w)
    return p1, p2


def _prelude(w: str) -> str:
    if w.startswith("'"):
        w = w[1:]
    chars = list(w)
    if chars and chars[0] == "y":
        chars[0] = "Y"
    for i in range(1, len(chars)):
        if chars[i] == "y" and chars[i - 1] in VOWELS:
            chars[i] = "Y"
    return "".join(chars)


def _step1a(w: str) -> str:
    for apos in ("'s'", "'s", "'"):
        if w.endswith(apos):
            w = w[: -len(apos)]
            break
    suffix = _longest_suffix(w, _STEP1A_ORDER)
    if suffix in (None, "ss", "us"):
        return w
    stem = w[: -len(suffix)]
    if suffix == "sses":
        return stem + "ss"
    if suffix in ("ied", "ies"):
        return stem + ("i" if len(stem) >= 2 else "ie")
    # plain "s": needs a vowel somewhere before the letter preceding it
    if len(stem) >= 2 and _has_vowel(stem[:-1]):
        return stem
    return w


def _step1b(w: str, p1: int) -> str:
    suffix = _longest_suffix(w, _STEP1B_ORDER)
    if suffix is None:
        return w
    stem = w[: -len(suffix)]
    if suffix in ("eed", "eedly"):
        if len(stem) >= p1 and stem not in ("succ", "proc", "exc"):
            return stem + "ee"
        return w
    if suffix == "ing":
        if len(stem) == 2 and stem[1] == "y" and stem[0] not in VOWELS:
            return stem[0] + "ie"
        if stem in _STEP1B_KEEP_ING:
            return w
    if not _has_vowel(stem):
        return w
    w = stem
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if w.endswith(_DOUBLES):
        if len(w) == 3 and w[0] in "aeo":
            return w
        return w[:-1]
    if len(w) == p1 and _short_syllable_end(w):
        return w + "e"
    return w


def _step1c(w: str) -> str:
    if len(w) > 2 and w[-1] in "yY" and w[-2] not in VOWELS:
        return w[:-1] + "i"
    return w


def _step2(w: str, p1: int) -> str:
    suffix = _longest_suffix(w, _STEP2_ORDER)
    if suffix is None or len(w) - len(suffix) < p1:
        return w
    stem = w[: -len(suffix)]
    if suffix == "ogi":
        return stem + "og" if stem.endswith("l") else w
    if suffix == "li":
        return stem if stem and stem[-1] in _VALID_LI else w
    return stem + _STEP2[suffix]


def _step3(w: str, p1: int, p2: int) -> str:
    suffix = _longest_suffix(w, _STEP3_ORDER)
    if suffix is None or len(w) - len(suffix) < p1:
        return w
    stem = w[: -len(suffix)]
    if suffix == "ative":
        return stem if len(stem) >= p2 else w
    return stem + _STEP3[suffix]


def _step4(w: str, p2: int) -> str:
    suffix = _longest_suffix(w, _STEP4_ORDER)
    if suffix is None or len(w) - len(suffix) < p2:
        return w
    stem = w[: -len(suffix)]
    if suffix == "ion" and not stem.endswith(("s", "t")):
        return w
    return stem


def _step5(w: str, p1: int, p2: int) -> str:
    start = len(w) - 1
    if w.endswith("e"):
        if start >= p2 or (start >= p1 and not _short_syllable_end(w[:-1])):
            return w[:-1]
    elif w.endswith("l"):
        if start >= p2 and w[:-1].endswith("l"):
            return w[:-1]
    return w


@lru_cache(maxsize=65536)
def stem_word(word: str) -> str:
    if word in _EXCEPTIONS:
        return _EXCEPTIONS[word]
    if len(word) < 3:
        return word
    w = _prelude(word)
    p1, p2 = _regions(w)
    w = _step1a(w)
    w = _step1b(w, p1)
    w = _step1c(w)
    w = _step2(w, p1)
    w = _step3(w, p1, p2)
    w = _step4(w, p2)
    w = _step5(w, p1, p2)
    return w.replace("Y", "y")
