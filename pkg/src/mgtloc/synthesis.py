"""Build labeled mixed human/machine articles by splicing pre-generated
machine text into human documents.

Each output replaces 1-3 disjoint, non-adjacent runs of human sentences
with runs of well-formed machine sentences.  A per-article token budget is
drawn first and divided across the segments, so articles with more
segments get shorter ones.  The first sentence of an article is never
replaced (generation is conditioned on the opening, so manipulations start
later), and at least one human sentence separates consecutive segments so
the segment count is unambiguous in the labels.

All randomness flows from one seed through per-(article, generator)
substreams, so datasets are reproducible and order-independent.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Iterable, Sequence

import numpy as np

from .segmenter import DEFAULT_CONFIG, segment, well_formed
from .types import (
    MAX_SEGMENT_TOKENS,
    MIN_SEGMENT_TOKENS,
    Article,
    SamplingSpec,
    Sentence,
    SpliceMetadata,
    SpliceSegment,
)

logger = logging.getLogger(__name__)


class SpliceSkip(Exception):
    """This (article, pool) pair cannot be manipulated; skip and move on."""

    def __init__(self, article_id: str, reason: str):
        super().__init__(f"article {article_id}: {reason}")
        self.article_id = article_id
        self.reason = reason


@dataclass(frozen=True, slots=True)
class PoolEntry:
    source_article_id: str
    text: str


@dataclass(frozen=True, slots=True)
class GenerationPool:
    """Pre-generated machine text for one generator + sampling setup."""

    generator_name: str
    sampling: SamplingSpec
    entries: tuple[PoolEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError(f"pool {self.generator_name}: no entries")


@dataclass(frozen=True, slots=True)
class SynthesisConfig:
    num_segments: int | str = "uniform_1_3"
    min_segment_tokens: int = MIN_SEGMENT_TOKENS
    max_segment_tokens: int = MAX_SEGMENT_TOKENS
    rng_seed: int = 0

    def __post_init__(self):
        if isinstance(self.num_segments, str):
            if self.num_segments != "uniform_1_3":
                raise ValueError(f"unknown num_segments spec {self.num_segments!r}")
        elif not 1 <= self.num_segments <= 3:
            raise ValueError(f"num_segments {self.num_segments} outside [1,3]")
        if not (
            MIN_SEGMENT_TOKENS
            <= self.min_segment_tokens
            <= self.max_segment_tokens
            <= MAX_SEGMENT_TOKENS
        ):
            raise ValueError(
                f"segment token bounds [{self.min_segment_tokens},{self.max_segment_tokens}] "
                f"must satisfy {MIN_SEGMENT_TOKENS} <= min <= max <= {MAX_SEGMENT_TOKENS}"
            )


def article_rng(seed: int, article_id: str, generator_name: str = "") -> np.random.Generator:
    """Independent, portable RNG substream for one (article, generator) pair."""
    digest = hashlib.blake2b(
        f"{article_id}\x1f{generator_name}".encode("utf-8"), digest_size=16
    ).digest()
    words = [int.from_bytes(digest[i : i + 4], "big") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), *words]))


@lru_cache(maxsize=4096)
def _well_formed_sentences(text: str) -> tuple[Sentence, ...]:
    return tuple(s for s in segment(text, DEFAULT_CONFIG) if well_formed(s))


def splice(
    human: Article,
    pool: GenerationPool,
    config: SynthesisConfig,
    rng: np.random.Generator,
) -> Article:
    """Replace 1-3 human sentence ranges with machine runs; label everything.

    Raises :class:`SpliceSkip` when the article is too short to host the
    requested segments or the pool cannot supply a run inside the token
    bounds.
    """
    n = len(human.sentences)
    if isinstance(config.num_segments, str):
        k = int(rng.integers(1, 4))
    else:
        k = config.num_segments
    if n < k + 2:
        raise SpliceSkip(human.id, f"{n} sentences cannot host {k} segments")

    targets = _segment_targets(k, config, rng)
    runs = _pick_machine_runs(human.id, pool, targets, config, rng)
    ranges = _choose_replacement_ranges(
        human, k, [sum(s.tokens for s in run) for run in runs], rng
    )
    return _assemble(human, pool, ranges, runs)


def _segment_targets(k: int, config: SynthesisConfig, rng: np.random.Generator) -> list[int]:
    """Token targets per segment: one article budget divided across segments."""
    low = config.min_segment_tokens * k
    high = max(config.max_segment_tokens, low)
    total = int(rng.integers(low, high + 1))
    weights = rng.uniform(0.8, 1.2, size=k)
    raw = total * weights / weights.sum()
    return [
        int(np.clip(round(t), config.min_segment_tokens, config.max_segment_tokens))
        for t in raw
    ]


def _ordered_entries(
    article_id: str, pool: GenerationPool, rng: np.random.Generator
) -> list[PoolEntry]:
    matching = [e for e in pool.entries if e.source_article_id == article_id]
    generic = [e for e in pool.entries if e.source_article_id != article_id]
    rng.shuffle(matching)
    rng.shuffle(generic)
    return matching + generic


def _pick_machine_runs(
    article_id: str,
    pool: GenerationPool,
    targets: Sequence[int],
    config: SynthesisConfig,
    rng: np.random.Generator,
) -> list[list[Sentence]]:
    """Find one run of consecutive well-formed machine sentences per target."""
    entries = _ordered_entries(article_id, pool, rng)
    used: set[tuple[int, int]] = set()
    runs = []
    for target in targets:
        run = _find_run(entries, used, target, target, config, rng)
        if run is None:
            # Relax to the global minimum when the pool is too sparse to hit
            # the drawn target exactly.
            run = _find_run(entries, used, target, config.min_segment_tokens, config, rng)
        if run is None:
            raise SpliceSkip(
                article_id,
                f"pool {pool.generator_name} has no sentence run near {target} tokens",
            )
        runs.append(run)
    return runs


def _find_run(
    entries: Sequence[PoolEntry],
    used: set[tuple[int, int]],
    target: int,
    floor: int,
    config: SynthesisConfig,
    rng: np.random.Generator,
) -> list[Sentence] | None:
    for entry_idx, entry in enumerate(entries):
        sentences = _well_formed_sentences(entry.text)
        if not sentences:
            continue
        starts = list(range(len(sentences)))
        rng.shuffle(starts)
        for start in starts:
            run: list[Sentence] = []
            tokens = 0
            i = start
            while i < len(sentences) and tokens < target:
                if (entry_idx, i) in used:
                    break
                if tokens + sentences[i].tokens > config.max_segment_tokens:
                    break
                run.append(sentences[i])
                tokens += sentences[i].tokens
                i += 1
            if tokens >= floor:
                used.update((entry_idx, j) for j in range(start, i))
                return run
    return None


def _choose_replacement_ranges(
    human: Article, k: int, machine_tokens: Sequence[int], rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Pick k disjoint, non-adjacent human sentence ranges to replace.

    Ranges never include sentence 0, keep >= 1 human sentence between each
    other, and aim for a token count within +-50% of the machine run that
    will replace them so document length stays stable.
    """
    n = len(human.sentences)
    tokens = [s.tokens for s in human.sentences]
    if n < 2 * k:  # sentence 0 + k ranges + k-1 gaps
        raise SpliceSkip(human.id, f"{n} sentences cannot host {k} separated segments")

    for _ in range(200):
        ranges: list[tuple[int, int]] = []
        cursor = 1
        ok = True
        for i, mtok in enumerate(machine_tokens):
            remaining = k - i - 1
            limit = n - 1 - 2 * remaining  # last index this range may touch
            if cursor > limit:
                ok = False
                break
            start = int(cursor + rng.integers(0, limit - cursor + 1))
            end = start
            count = tokens[start]
            while end < limit and count < mtok and count + tokens[end + 1] <= 1.5 * mtok:
                end += 1
                count += tokens[end]
            if not (0.5 * mtok <= count <= 1.5 * mtok):
                ok = False
                break
            ranges.append((start, end))
            cursor = end + 2
        if ok:
            return ranges

    # Token matching failed everywhere; fall back to minimal spaced ranges.
    return [(1 + 2 * i, 1 + 2 * i) for i in range(k)]


def _assemble(
    human: Article,
    pool: GenerationPool,
    ranges: Sequence[tuple[int, int]],
    runs: Sequence[Sequence[Sentence]],
) -> Article:
    src = human.body_bytes()
    out = bytearray()
    new_sentences: list[Sentence] = []
    labels: list[int] = []
    segments: list[SpliceSegment] = []

    range_at = {r[0]: idx for idx, r in enumerate(ranges)}
    copied_upto = 0
    shift = 0  # out position minus src position for the block being copied
    i = 0
    n = len(human.sentences)
    while i < n:
        if i in range_at:
            ridx = range_at[i]
            start_idx, end_idx = ranges[ridx]
            a = human.sentences[start_idx].start
            out += src[copied_upto:a]
            seg_first = len(new_sentences)
            for j, ms in enumerate(runs[ridx]):
                if j > 0:
                    out += b" "
                m_start = len(out)
                m_bytes = ms.text.encode("utf-8")
                out += m_bytes
                new_sentences.append(
                    Sentence(text=ms.text, start=m_start, end=m_start + len(m_bytes), tokens=ms.tokens)
                )
                labels.append(1)
            segments.append(
                SpliceSegment(
                    sent_start=seg_first,
                    sent_end=len(new_sentences) - 1,
                    tokens=sum(ms.tokens for ms in runs[ridx]),
                )
            )
            copied_upto = human.sentences[end_idx].end
            shift = len(out) - copied_upto
            i = end_idx + 1
        else:
            s = human.sentences[i]
            if copied_upto <= s.start:
                shift = len(out) - copied_upto
            new_sentences.append(
                Sentence(text=s.text, start=s.start + shift, end=s.end + shift, tokens=s.tokens)
            )
            labels.append(0)
            i += 1
    out += src[copied_upto:]

    return Article(
        id=f"{human.id}__{pool.generator_name}",
        title=human.title,
        body=out.decode("utf-8"),
        sentences=tuple(new_sentences),
        labels=tuple(labels),
        meta=SpliceMetadata(
            generator_name=pool.generator_name,
            sampling=pool.sampling,
            segments=tuple(segments),
        ),
    )


# ---------------------------------------------------------------------------
# Corpus-level pipeline
# ---------------------------------------------------------------------------


@dataclass
class DatasetStats:
    per_pool_counts: dict[str, int] = field(default_factory=dict)
    per_pool_skips: dict[str, int] = field(default_factory=dict)
    segment_count_hist: dict[int, int] = field(default_factory=dict)
    segment_length_hist: dict[str, int] = field(default_factory=dict)
    machine_sentences: int = 0
    total_sentences: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def positive_prevalence(self) -> float:
        return self.machine_sentences / self.total_sentences if self.total_sentences else 0.0

    @property
    def total_articles(self) -> int:
        return sum(self.per_pool_counts.values())

    def to_dict(self) -> dict:
        return {
            "per_pool_counts": dict(sorted(self.per_pool_counts.items())),
            "per_pool_skips": dict(sorted(self.per_pool_skips.items())),
            "segment_count_hist": {str(k): v for k, v in sorted(self.segment_count_hist.items())},
            "segment_length_hist": dict(sorted(self.segment_length_hist.items())),
            "positive_prevalence": self.positive_prevalence,
            "machine_sentences": self.machine_sentences,
            "total_sentences": self.total_sentences,
            "total_articles": self.total_articles,
            "warnings": list(self.warnings),
        }


def _length_bucket(tokens: int) -> str:
    lo = (tokens // 20) * 20
    return f"{lo}-{lo + 19}"


def build_dataset(
    human_corpus: Iterable[Article],
    pools: Sequence[GenerationPool],
    config: SynthesisConfig,
) -> tuple[list[Article], DatasetStats]:
    """One manipulated article per (human article, pool); skips are logged.

    Output is sorted by article id so parallel callers and reruns agree
    byte for byte.
    """
    humans = list(human_corpus)
    if not humans:
        raise ValueError("human corpus is empty")
    if not pools:
        raise ValueError("no generation pools supplied")

    stats = DatasetStats()
    outputs: list[Article] = []
    for pool in pools:
        stats.per_pool_counts.setdefault(pool.generator_name, 0)
        stats.per_pool_skips.setdefault(pool.generator_name, 0)
        for human in humans:
            rng = article_rng(config.rng_seed, human.id, pool.generator_name)
            try:
                article = splice(human, pool, config, rng)
            except SpliceSkip as skip:
                logger.info("skipped: %s", skip)
                stats.per_pool_skips[pool.generator_name] += 1
                continue
            outputs.append(article)
            stats.per_pool_counts[pool.generator_name] += 1
            stats.segment_count_hist[article.meta.num_segments] = (
                stats.segment_count_hist.get(article.meta.num_segments, 0) + 1
            )
            for seg in article.meta.segments:
                bucket = _length_bucket(seg.tokens)
                stats.segment_length_hist[bucket] = stats.segment_length_hist.get(bucket, 0) + 1
            stats.machine_sentences += sum(article.labels)
            stats.total_sentences += len(article.sentences)

    for pool in pools:
        if stats.per_pool_counts[pool.generator_name] == 0:
            stats.warnings.append(f"pool {pool.generator_name} produced no articles")

    outputs.sort(key=lambda a: a.id)
    return outputs, stats


# ---------------------------------------------------------------------------
# Pool file I/O: JSONL of {generator, sampling, source_article_id, text}
# ---------------------------------------------------------------------------


def write_pools_jsonl(pools: Iterable[GenerationPool], fp: IO[str]) -> int:
    n = 0
    for pool in pools:
        for entry in pool.entries:
            fp.write(
                json.dumps(
                    {
                        "generator": pool.generator_name,
                        "sampling": pool.sampling.to_dict(),
                        "source_article_id": entry.source_article_id,
                        "text": entry.text,
                    },
                    ensure_ascii=False,
                )
            )
            fp.write("\n")
            n += 1
    return n


def read_pools_jsonl(fp: IO[str]) -> list[GenerationPool]:
    """Group pool-entry lines by generator, preserving first-seen order."""
    grouped: dict[str, tuple[SamplingSpec, list[PoolEntry]]] = {}
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            d = json.loads(line)
            name = d["generator"]
            sampling = SamplingSpec.from_dict(d["sampling"])
            entry = PoolEntry(source_article_id=d.get("source_article_id", ""), text=d["text"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"line {lineno}: malformed pool entry: {exc}") from exc
        if name not in grouped:
            grouped[name] = (sampling, [])
        grouped[name][1].append(entry)
    return [
        GenerationPool(generator_name=name, sampling=sampling, entries=tuple(entries))
        for name, (sampling, entries) in grouped.items()
    ]
