"""Rule-based sentence segmentation with exact, testable behavior.

Boundary rules:

* a sentence ends after terminal punctuation (``.``, ``!``, ``?``),
  optionally followed by closing quotes/brackets, when the next character
  is whitespace or end of text;
* a period does not end a sentence when the preceding token is on the
  abbreviation list, or when the next non-space character is lowercase;
* a paragraph break (a whitespace run containing two or more newlines)
  always ends a sentence.

Spans are byte offsets into the UTF-8 input, trimmed to the sentence's
non-whitespace extent, so every non-whitespace byte of the input falls in
exactly one span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .types import Sentence, count_tokens, normalize_ws

TERMINALS = ".!?"
CLOSERS = "\"'”’»)]}"
OPENING_QUOTES = "\"'“‘«"

_PARAGRAPH_GAP = re.compile(r"[^\S\n]*\n[^\S\n]*\n\s*")


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Read an abbreviation file: one lowercase entry per line, ``#`` comments."""
    entries = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            entries.add(line.lower())
    return frozenset(entries)


def default_abbreviations() -> frozenset[str]:
    ref = resources.files("mgtloc").joinpath("data/abbreviations.txt")
    entries = set()
    for raw in ref.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            entries.add(line.lower())
    return frozenset(entries)


@dataclass(frozen=True)
class SegmenterConfig:
    abbreviation_list: frozenset[str] = field(default_factory=default_abbreviations)
    min_sentence_chars: int = 2


DEFAULT_CONFIG = SegmenterConfig()


def segment(text: str, config: SegmenterConfig = DEFAULT_CONFIG) -> list[Sentence]:
    """Split ``text`` into sentences with byte spans.

    Empty or whitespace-only input yields an empty list.
    """
    if not text.strip():
        return []

    cuts = _boundary_positions(text, config.abbreviation_list)
    fragments = _fragments(text, cuts)
    fragments = _merge_short(text, fragments, config.min_sentence_chars)

    to_bytes = _byte_offset_fn(text)
    sentences = []
    for start, end in fragments:
        raw = text[start:end]
        sentences.append(
            Sentence(
                text=normalize_ws(raw),
                start=to_bytes(start),
                end=to_bytes(end),
                tokens=count_tokens(raw),
            )
        )
    return sentences


def well_formed(sentence: Sentence) -> bool:
    """Whether a sentence looks like a complete, publishable sentence.

    Requires an uppercase letter, digit, or opening quote at the start, a
    terminal punctuation mark at the end (closing quotes/brackets allowed
    after it), and at least 3 tokens.
    """
    text = sentence.text
    if not text or sentence.tokens < 3:
        return False
    first = text[0]
    if not (first.isupper() or first.isdigit() or first in OPENING_QUOTES):
        return False
    tail = text.rstrip(CLOSERS)
    return bool(tail) and tail[-1] in TERMINALS


def _boundary_positions(text: str, abbreviations: frozenset[str]) -> list[int]:
    """Character positions where one sentence ends and the next may begin."""
    n = len(text)
    cuts: set[int] = set()

    for match in _PARAGRAPH_GAP.finditer(text):
        cuts.add(match.end())

    i = 0
    while i < n:
        ch = text[i]
        if ch not in TERMINALS:
            i += 1
            continue
        run_start = i
        while i + 1 < n and text[i + 1] in TERMINALS:
            i += 1
        end = i
        while end + 1 < n and text[end + 1] in CLOSERS:
            end += 1
        i += 1
        if end + 1 < n and not text[end + 1].isspace():
            continue  # mid-token punctuation, e.g. "3.5" or "U.S."
        if text[run_start] == "." and text[i - 1] == ".":
            if _is_abbreviation(text, run_start, abbreviations):
                continue
            if _next_visible_is_lower(text, end + 1):
                continue
        cuts.add(end + 1)

    return sorted(cuts)


def _is_abbreviation(text: str, period_pos: int, abbreviations: frozenset[str]) -> bool:
    j = period_pos - 1
    while j >= 0 and (text[j].isalnum() or text[j] in ".&'"):
        j -= 1
    token = text[j + 1 : period_pos].rstrip(".").lower()
    return bool(token) and token in abbreviations


def _next_visible_is_lower(text: str, pos: int) -> bool:
    for ch in text[pos:]:
        if ch.isspace():
            continue
        return ch.islower()
    return False


def _fragments(text: str, cuts: list[int]) -> list[tuple[int, int]]:
    """Trimmed (start, end) character ranges between consecutive cut points."""
    fragments = []
    prev = 0
    for cut in [*cuts, len(text)]:
        piece = text[prev:cut]
        if piece.strip():
            start = prev + (len(piece) - len(piece.lstrip()))
            end = prev + len(piece.rstrip())
            fragments.append((start, end))
        prev = cut
    return fragments


def _merge_short(
    text: str, fragments: list[tuple[int, int]], min_chars: int
) -> list[tuple[int, int]]:
    """Fold fragments shorter than ``min_chars`` into their neighbor."""
    merged: list[tuple[int, int]] = []
    carry: tuple[int, int] | None = None
    for start, end in fragments:
        if carry is not None:
            start = carry[0]
            carry = None
        if end - start < min_chars:
            carry = (start, end)
        else:
            merged.append((start, end))
    if carry is not None:
        if merged:
            merged[-1] = (merged[-1][0], carry[1])
        else:
            merged.append(carry)
    return merged


def _byte_offset_fn(text: str):
    if text.isascii():
        return lambda i: i
    cumulative = [0]
    for ch in text:
        cumulative.append(cumulative[-1] + len(ch.encode("utf-8")))
    return lambda i: cumulative[i]
