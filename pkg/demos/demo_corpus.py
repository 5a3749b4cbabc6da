"""Tiny deterministic corpus generators shared by the demo scripts.

Human text and machine text draw words from partially overlapping syllable
inventories, so character n-grams separate the classes noisily, like a
real detector facing unfamiliar generator output.
"""

from __future__ import annotations

import numpy as np

from mgtloc import Article, GenerationPool, PoolEntry, SamplingSpec, segment


def _words(seed: int, n: int, onsets: str, codas: tuple[str, ...]) -> list[str]:
    rng = np.random.default_rng(seed)
    vowels = "aeiou"
    out: list[str] = []
    seen = set()
    while len(out) < n:
        word = ""
        for _ in range(rng.integers(1, 4)):
            word += onsets[rng.integers(len(onsets))] + vowels[rng.integers(5)]
        if rng.random() < 0.5:
            word += codas[rng.integers(len(codas))]
        if word not in seen and len(word) >= 3:
            seen.add(word)
            out.append(word)
    return out


HUMAN_WORDS = _words(101, 220, onsets="bcdfglmnprst", codas=("n", "r", "s", "t", "l"))
MACHINE_WORDS = _words(202, 120, onsets="kvwyzjqxh", codas=("x", "z", "k", "w", "ck"))


def sentence(rng: np.random.Generator, machine_blend: float = 0.0) -> str:
    n = int(rng.integers(8, 19))
    words = []
    for _ in range(n):
        if rng.random() < machine_blend:
            words.append(MACHINE_WORDS[rng.integers(len(MACHINE_WORDS))])
        else:
            words.append(HUMAN_WORDS[rng.integers(len(HUMAN_WORDS))])
    return words[0].capitalize() + " " + " ".join(words[1:]) + "."


def human_articles(n: int, seed: int, sentences_per_article: int = 40) -> list[Article]:
    rng = np.random.default_rng(seed)
    articles = []
    for i in range(n):
        parts = []
        for k in range(sentences_per_article):
            parts.append(sentence(rng))
            parts.append("\n\n" if (k + 1) % 6 == 0 else " ")
        body = "".join(parts).strip()
        articles.append(
            Article(
                id=f"demo-{i:03d}",
                title=f"Demo article {i}",
                body=body,
                sentences=tuple(segment(body)),
            )
        )
    return articles


def machine_pool(name: str, seed: int, blend: float = 0.08, entries: int = 25) -> GenerationPool:
    rng = np.random.default_rng(seed)
    pool_entries = []
    for _ in range(entries):
        text = " ".join(sentence(rng, machine_blend=blend) for _ in range(50))
        pool_entries.append(PoolEntry(source_article_id="", text=text))
    return GenerationPool(
        generator_name=name,
        sampling=SamplingSpec(method="top_p", p=0.96),
        entries=tuple(pool_entries),
    )
