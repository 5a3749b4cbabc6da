"""Shared domain model: articles, sentences, splice metadata, predictions.

All types are immutable after construction and safe to share across
threads.  Spans are half-open ``[start, end)`` byte offsets into the
UTF-8 encoding of the owning article body.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

# Hidden width of the chunk-feature backbone.  Carried as a constant so a
# different backbone (reporting another width in its handshake) can be
# swapped in without touching call sites.
FEATURE_DIM = 1024

# Hard cap on chunk length, in whitespace tokens.
MAX_CHUNK_TOKENS = 512

# Bounds on the token count of a single machine-generated segment.
MIN_SEGMENT_TOKENS = 40
MAX_SEGMENT_TOKENS = 300

SAMPLING_METHODS = ("top_k", "top_p", "external")


def count_tokens(text: str) -> int:
    """Number of whitespace-delimited tokens in ``text``."""
    return len(text.split())


def normalize_ws(text: str) -> str:
    """Collapse every whitespace run to a single space and strip the ends."""
    return " ".join(text.split())


@dataclass(frozen=True, slots=True)
class Sentence:
    """One sentence of an article.

    ``start``/``end`` are byte offsets into the UTF-8 body; ``text`` is the
    whitespace-normalized slice at that span.
    """

    text: str
    start: int
    end: int
    tokens: int

    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True, slots=True)
class SamplingSpec:
    """How the generator sampled: top-k, top-p, or an external/unknown scheme."""

    method: str
    k: int | None = None
    p: float | None = None

    def to_dict(self) -> dict:
        d: dict = {"method": self.method}
        if self.k is not None:
            d["k"] = self.k
        if self.p is not None:
            d["p"] = self.p
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingSpec":
        return cls(method=d["method"], k=d.get("k"), p=d.get("p"))


@dataclass(frozen=True, slots=True)
class SpliceSegment:
    """A contiguous run of machine sentences, as sentence indices (inclusive)."""

    sent_start: int
    sent_end: int
    tokens: int

    def to_dict(self) -> dict:
        return {"sent_start": self.sent_start, "sent_end": self.sent_end, "tokens": self.tokens}

    @classmethod
    def from_dict(cls, d: dict) -> "SpliceSegment":
        return cls(sent_start=d["sent_start"], sent_end=d["sent_end"], tokens=d["tokens"])


@dataclass(frozen=True, slots=True)
class SpliceMetadata:
    """Provenance of the machine-generated segments spliced into an article."""

    generator_name: str
    sampling: SamplingSpec
    segments: tuple[SpliceSegment, ...]

    @property
    def num_segments(self) -> int:
        return len(self.segments)

    def to_dict(self) -> dict:
        return {
            "generator": self.generator_name,
            "sampling": self.sampling.to_dict(),
            "segments": [s.to_dict() for s in self.segments],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpliceMetadata":
        return cls(
            generator_name=d["generator"],
            sampling=SamplingSpec.from_dict(d["sampling"]),
            segments=tuple(SpliceSegment.from_dict(s) for s in d["segments"]),
        )


@dataclass(frozen=True, slots=True)
class Article:
    """An ordered sequence of sentences with optional per-sentence labels.

    ``labels``, when present, holds one value per sentence: 1 marks a
    machine-generated sentence (the positive class), 0 a human-written one.
    """

    id: str
    title: str
    body: str
    sentences: tuple[Sentence, ...]
    labels: tuple[int, ...] | None = None
    meta: SpliceMetadata | None = None

    def body_bytes(self) -> bytes:
        return self.body.encode("utf-8")

    def slice(self, start: int, end: int) -> str:
        """Decode the body byte range ``[start, end)``."""
        return self.body_bytes()[start:end].decode("utf-8")

    def to_dict(self) -> dict:
        d: dict = {
            "id": self.id,
            "title": self.title,
            "body": self.body,
            "sentences": [
                {"text": s.text, "start": s.start, "end": s.end, "tokens": s.tokens}
                for s in self.sentences
            ],
        }
        if self.labels is not None:
            d["labels"] = list(self.labels)
        if self.meta is not None:
            d["meta"] = self.meta.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Article":
        return cls(
            id=d["id"],
            title=d.get("title", ""),
            body=d["body"],
            sentences=tuple(
                Sentence(text=s["text"], start=s["start"], end=s["end"], tokens=s["tokens"])
                for s in d["sentences"]
            ),
            labels=tuple(d["labels"]) if d.get("labels") is not None else None,
            meta=SpliceMetadata.from_dict(d["meta"]) if d.get("meta") is not None else None,
        )


@dataclass(frozen=True, slots=True)
class SentencePrediction:
    """Model output for one sentence: a ranking score, a hard label, and the
    window votes that produced the label (empty for non-vote strategies)."""

    sentence_idx: int
    score: float
    label: int
    votes: tuple[int, ...] = ()


def validate_article(article: Article) -> list[str]:
    """Return a description of every invariant violation (empty = valid).

    Violations are data, not errors: the function never raises on bad
    content and never mutates its input.
    """
    problems: list[str] = []
    body_bytes = article.body_bytes()

    for i, s in enumerate(article.sentences):
        where = f"sentence {i}"
        if not (0 <= s.start < s.end <= len(body_bytes)):
            problems.append(f"{where}: span [{s.start},{s.end}) out of order or outside body")
            continue
        if not s.text.strip():
            problems.append(f"{where}: text empty after trimming")
        if s.tokens < 1:
            problems.append(f"{where}: token count {s.tokens} < 1")
        elif s.tokens != count_tokens(s.text):
            problems.append(
                f"{where}: stored token count {s.tokens} != {count_tokens(s.text)} counted"
            )
        sliced = normalize_ws(body_bytes[s.start : s.end].decode("utf-8", errors="replace"))
        if s.text != sliced:
            problems.append(f"{where}: text does not match body slice at [{s.start},{s.end})")

    for i in range(1, len(article.sentences)):
        prev, cur = article.sentences[i - 1], article.sentences[i]
        if cur.start < prev.start:
            problems.append(f"sentence {i}: spans not ordered by start")
        elif cur.start < prev.end:
            problems.append(f"sentence {i}: span overlaps sentence {i - 1}")

    if article.labels is not None:
        if len(article.labels) != len(article.sentences):
            problems.append(
                f"labels length {len(article.labels)} != sentence count {len(article.sentences)}"
            )
        bad = sorted({v for v in article.labels if v not in (0, 1)})
        if bad:
            problems.append(f"labels contain non-binary values {bad}")

    if article.meta is not None:
        problems.extend(_validate_meta(article))

    return problems


def _validate_meta(article: Article) -> list[str]:
    problems: list[str] = []
    meta = article.meta
    assert meta is not None

    if not (1 <= meta.num_segments <= 3):
        problems.append(f"meta: num_segments {meta.num_segments} outside [1,3]")
    if meta.sampling.method not in SAMPLING_METHODS:
        problems.append(f"meta: unknown sampling method {meta.sampling.method!r}")

    n = len(article.sentences)
    prev_end = -1
    for j, seg in enumerate(meta.segments):
        where = f"meta segment {j}"
        if not (0 <= seg.sent_start <= seg.sent_end < n):
            problems.append(f"{where}: sentence range [{seg.sent_start},{seg.sent_end}] outside article")
        if seg.sent_start <= prev_end:
            problems.append(f"{where}: sentence ranges not disjoint/ordered")
        prev_end = max(prev_end, seg.sent_end)
        if not (MIN_SEGMENT_TOKENS <= seg.tokens <= MAX_SEGMENT_TOKENS):
            problems.append(
                f"{where}: token count {seg.tokens} outside "
                f"[{MIN_SEGMENT_TOKENS},{MAX_SEGMENT_TOKENS}]"
            )

    if article.labels is not None and len(article.labels) == n:
        runs = count_label_runs(article.labels)
        if runs != meta.num_segments:
            problems.append(
                f"meta: {meta.num_segments} segments but labels contain {runs} runs of 1s"
            )
        for j, seg in enumerate(meta.segments):
            if 0 <= seg.sent_start <= seg.sent_end < n:
                span = article.labels[seg.sent_start : seg.sent_end + 1]
                if not all(v == 1 for v in span):
                    problems.append(f"meta segment {j}: covers sentences not labeled 1")

    return problems


def count_label_runs(labels: Iterable[int]) -> int:
    """Number of maximal runs of 1s in a label sequence."""
    runs = 0
    prev = 0
    for v in labels:
        if v == 1 and prev != 1:
            runs += 1
        prev = v
    return runs


# ---------------------------------------------------------------------------
# JSONL I/O
# ---------------------------------------------------------------------------


def article_to_json(article: Article) -> str:
    return json.dumps(article.to_dict(), ensure_ascii=False, sort_keys=True)


def article_from_json(line: str) -> Article:
    return Article.from_dict(json.loads(line))


def write_articles_jsonl(articles: Iterable[Article], fp: IO[str]) -> int:
    """Write one article per line; returns the number written."""
    n = 0
    for a in articles:
        fp.write(article_to_json(a))
        fp.write("\n")
        n += 1
    return n


def read_articles_jsonl(fp: IO[str]) -> Iterator[Article]:
    """Yield articles from a JSONL stream, skipping blank lines."""
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            yield article_from_json(line)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"line {lineno}: malformed article record: {exc}") from exc
