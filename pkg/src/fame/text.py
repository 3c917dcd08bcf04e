"""Text normalization, tokenization, and sentence segmentation.

Every piece of text that feeds keyword matching goes through the same
normalization: Unicode NFC, then case folding. Tokens are maximal runs
of letters/digits, so "mindia" never matches "india" and multi-word
keywords are compared as contiguous token sequences. Sentence
segmentation is a deliberately simple, bit-reproducible rule: split
after `.`, `!`, `?` or `…` when followed by whitespace and an uppercase
letter or opening quote, unless the word before a period is a known
abbreviation for the language.
"""

from __future__ import annotations

import re
import unicodedata
from functools import lru_cache
from importlib import resources

TOKEN_RE = re.compile(r"[^\W_]+")

_TERMINATORS = ".!?…"
_TRAILERS = ".!?…\"'”’»)]"
_OPENERS = "\"'“‘«¿¡("

_WORD_BEFORE_RE = re.compile(r"([^\W\d_]+)$")


def nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


def collapse_ws(s: str) -> str:
    return " ".join(s.split())


def normalize(s: str) -> str:
    """NFC + whitespace collapse; keeps original casing (used for heads)."""
    return collapse_ws(nfc(s))


def fold(s: str) -> str:
    """NFC + casefold; the canonical form for keyword matching."""
    return nfc(s).casefold()


def tokenize(s: str) -> list[str]:
    """Split into maximal letter/digit runs. Does not normalize."""
    return TOKEN_RE.findall(s)


def fold_tokens(s: str) -> list[str]:
    return TOKEN_RE.findall(fold(s))


@lru_cache(maxsize=None)
def abbreviations_for(language: str) -> frozenset[str]:
    """Packaged abbreviation exceptions for a primary language tag.

    Unknown languages fall back to the English list.
    """
    lang = language.split("-")[0].lower() or "en"
    try:
        raw = resources.files("fame.data").joinpath(f"abbreviations_{lang}.txt").read_text("utf-8")
    except FileNotFoundError:
        raw = resources.files("fame.data").joinpath("abbreviations_en.txt").read_text("utf-8")
    words = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.casefold())
    return frozenset(words)


def split_sentences(text: str, abbreviations: frozenset[str] | set[str] = frozenset()) -> list[str]:
    """Segment normalized text into sentences by the documented rule.

    `text` is expected to be NFC + whitespace-collapsed. A split happens
    after a terminator run when the next character (past one space) is
    uppercase or an opening quote, and the word preceding a `.` is not in
    `abbreviations`. Decimal numbers never split because the terminator
    is not followed by whitespace.
    """
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch not in _TERMINATORS:
            i += 1
            continue
        j = i + 1
        while j < n and text[j] in _TRAILERS:
            j += 1
        if j < n and text[j] == " " and j + 1 < n:
            nxt = text[j + 1]
            if nxt.isupper() or nxt in _OPENERS:
                blocked = False
                if ch == ".":
                    # No abbreviation is longer than 40 chars; a bounded
                    # lookback keeps segmentation linear in text length.
                    m = _WORD_BEFORE_RE.search(text, max(0, i - 40), i)
                    if m and m.group(1).casefold() in abbreviations:
                        blocked = True
                if not blocked:
                    sentences.append(text[start:j])
                    start = j + 1
                    i = j + 1
                    continue
        i = j
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
