"""Text pipeline: markup stripping, tokenization, stopword removal, stemming."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from .stemmer import stem_word

__all__ = [
    "STOPWORDS_VERSION",
    "load_stopwords",
    "preprocess",
    "remove_stopwords",
    "settle",
    "stem",
    "stem_word",
    "strip_markup",
    "tokenize",
]

_TAG = re.compile(r"</?([A-Za-z][A-Za-z0-9-]*|!)[^<>\n]*>")
_BLOCK_TAGS = frozenset({"br", "p", "div", "li", "ul", "ol", "tr", "td", "th", "table",
                         "h1", "h2", "h3", "h4", "h5", "h6", "pre", "hr", "blockquote"})
_ENTITIES = {"&amp;": "&", "&lt;": "<", "&gt;": ">", "&quot;": '"', "&#39;": "'"}
_ENTITY = re.compile("|".join(map(re.escape, _ENTITIES)))
_SPLIT = re.compile(r"[^a-z0-9]+")

STOPWORDS_VERSION = 1


def _drop_tag(match: re.Match) -> str:
    return "\n" if match.group(1).lower() in _BLOCK_TAGS else ""


def strip_markup(text: str) -> str:
    """Remove HTML tags and decode the five standard entities.

    Runs to a fixed point, so decoded ``&lt;b&gt;`` does not survive as a
    tag and the function is idempotent. Code blocks are left as text.
    """
    while True:
        out = _ENTITY.sub(lambda m: _ENTITIES[m.group(0)], _TAG.sub(_drop_tag, text))
        if out == text:
            return out
        text = out


def tokenize(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text.lower()) if len(t) >= 2 and not t.isdigit()]


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    raw = resources.files(__package__).joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in raw.splitlines()
                     if line.strip() and not line.startswith("#"))


@lru_cache(maxsize=200_000)
def settle(token: str) -> str:
    """Apply the stemmer until the token stops changing.

    Porter2 is not idempotent ("please" -> "pleas" -> "plea"); settling makes
    the pipeline's output a fixed point of the pipeline. Two or three rounds
    always suffice on the Snowball vocabulary.
    """
    while True:
        nxt = stem_word(token)
        if nxt == token:
            return token
        token = nxt


@lru_cache(maxsize=1)
def _stemmed_stopwords() -> frozenset[str]:
    return frozenset(settle(w) for w in load_stopwords())


def remove_stopwords(tokens: list[str]) -> list[str]:
    stop = load_stopwords()
    return [t for t in tokens if t not in stop]


def stem(tokens: list[str]) -> list[str]:
    return [stem_word(t) for t in tokens]


def preprocess(title: str, body: str) -> list[str]:
    """Title and body to one stemmed token stream."""
    tokens = [settle(t) for t in remove_stopwords(tokenize(strip_markup(f"{title} {body}")))]
    closure = _stemmed_stopwords()
    return [t for t in tokens if len(t) >= 2 and not t.isdigit() and t not in closure]
