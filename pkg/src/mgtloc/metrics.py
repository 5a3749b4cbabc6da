"""Average precision over pooled sentence predictions, per generator and
overall.

AP here is the information-retrieval form: the mean, over positives in
rank order, of precision at that rank.  Ties are broken by a deterministic
shuffle seeded from the label sequence (not the scores, so any strictly
monotone rescoring ranks identically), then a stable sort; the expectation
over tie orders is also available for bias baselines.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .types import Article
from .localizer import LocalizationResult

Pair = tuple[float, int]


@dataclass(frozen=True)
class ScoredLabelSet:
    """Pooled (score, label) pairs for one generator's documents."""

    generator_name: str
    pairs: tuple[Pair, ...]


@dataclass
class EvalReport:
    per_generator_ap: dict[str, float]
    map_mean: float
    all_ap: float
    precision: float
    recall: float
    positives: int
    negatives: int
    threshold: float
    precision_undefined: bool = False
    skipped_generators: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_generator_ap": dict(sorted(self.per_generator_ap.items())),
            "map": self.map_mean,
            "all_ap": self.all_ap,
            "precision": self.precision,
            "recall": self.recall,
            "positives": self.positives,
            "negatives": self.negatives,
            "threshold": self.threshold,
            "precision_undefined": self.precision_undefined,
            "skipped_generators": sorted(self.skipped_generators),
        }


def _tie_seed(labels: np.ndarray) -> int:
    digest = hashlib.blake2b(labels.astype(np.int8).tobytes(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _ranked_labels(scores: np.ndarray, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    perm = rng.permutation(len(scores))
    order = np.argsort(-scores[perm], kind="stable")
    return labels[perm][order]


def _ap_of_ranking(ranked_labels: np.ndarray) -> float:
    positives = np.flatnonzero(ranked_labels == 1)
    cum = np.cumsum(ranked_labels)
    precisions = cum[positives] / (positives + 1)
    return float(precisions.mean())


def average_precision(pairs: Sequence[Pair]) -> float:
    """AP of a pooled set of (score, label) pairs; needs >= 1 positive."""
    if not pairs:
        raise ValueError("average precision of an empty set is undefined")
    scores = np.array([s for s, _ in pairs], dtype=np.float64)
    labels = np.array([y for _, y in pairs], dtype=np.int64)
    if not np.any(labels == 1):
        raise ValueError("average precision needs at least one positive")
    rng = np.random.default_rng(_tie_seed(labels))
    return _ap_of_ranking(_ranked_labels(scores, labels, rng))


def expected_average_precision(pairs: Sequence[Pair], draws: int = 200, seed: int = 0) -> float:
    """Expectation of AP over tie-shuffle draws (Monte Carlo, seeded)."""
    if draws < 1:
        raise ValueError("need at least one draw")
    scores = np.array([s for s, _ in pairs], dtype=np.float64)
    labels = np.array([y for _, y in pairs], dtype=np.int64)
    if not np.any(labels == 1):
        raise ValueError("average precision needs at least one positive")
    rng = np.random.default_rng(seed)
    return float(
        np.mean([_ap_of_ranking(_ranked_labels(scores, labels, rng)) for _ in range(draws)])
    )


def pooled_label_sets(
    articles: Iterable[Article], results: dict[str, LocalizationResult]
) -> list[ScoredLabelSet]:
    """Pool (score, truth-label) pairs per generator, in generator order."""
    groups: dict[str, list[Pair]] = {}
    for article in articles:
        if article.labels is None:
            raise ValueError(f"article {article.id}: evaluation needs ground-truth labels")
        result = results[article.id]
        if len(result.predictions) != len(article.sentences):
            raise ValueError(
                f"article {article.id}: {len(result.predictions)} predictions for "
                f"{len(article.sentences)} sentences"
            )
        name = article.meta.generator_name if article.meta is not None else "unknown"
        bucket = groups.setdefault(name, [])
        for pred, label in zip(result.predictions, article.labels):
            bucket.append((pred.score, label))
    return [
        ScoredLabelSet(generator_name=name, pairs=tuple(pairs))
        for name, pairs in groups.items()
    ]


def localization_map(
    articles: Sequence[Article], results: Sequence[LocalizationResult]
) -> float:
    """Mean AP across generators for a batch of localization results."""
    by_id = {r.article_id: r for r in results}
    aps = [
        average_precision(group.pairs)
        for group in pooled_label_sets(articles, by_id)
        if any(y == 1 for _, y in group.pairs)
    ]
    if not aps:
        raise ValueError("no generator group contains a positive sentence")
    return float(np.mean(aps))


def evaluate(
    truth: Sequence[Article],
    results: Sequence[LocalizationResult],
    threshold: float = 0.5,
) -> EvalReport:
    """Per-generator AP, their mean, pooled AP, and precision/recall.

    Every prediction must match a ground-truth article (and vice versa);
    mismatched ids raise with the full list of offenders.
    """
    truth_ids = {a.id for a in truth}
    result_ids = {r.article_id for r in results}
    missing = sorted(truth_ids - result_ids)
    extra = sorted(result_ids - truth_ids)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"articles without predictions: {missing}")
        if extra:
            parts.append(f"predictions without articles: {extra}")
        raise ValueError("; ".join(parts))

    by_id = {r.article_id: r for r in results}
    groups = pooled_label_sets(truth, by_id)

    per_generator: dict[str, float] = {}
    skipped: list[str] = []
    pooled: list[Pair] = []
    for group in sorted(groups, key=lambda g: g.generator_name):
        pooled.extend(group.pairs)
        if any(y == 1 for _, y in group.pairs):
            per_generator[group.generator_name] = average_precision(group.pairs)
        else:
            skipped.append(group.generator_name)

    if not per_generator:
        raise ValueError("no generator group contains a positive sentence")
    map_mean = float(np.mean(list(per_generator.values())))
    all_ap = average_precision(pooled)

    tp = fp = fn = 0
    positives = negatives = 0
    for article in truth:
        result = by_id[article.id]
        for pred, label in zip(result.predictions, article.labels):
            positives += label == 1
            negatives += label == 0
            if pred.label == 1 and label == 1:
                tp += 1
            elif pred.label == 1 and label == 0:
                fp += 1
            elif pred.label == 0 and label == 1:
                fn += 1

    precision_undefined = (tp + fp) == 0
    precision = 0.0 if precision_undefined else tp / (tp + fp)
    recall = 0.0 if (tp + fn) == 0 else tp / (tp + fn)

    return EvalReport(
        per_generator_ap=per_generator,
        map_mean=map_mean,
        all_ap=all_ap,
        precision=precision,
        recall=recall,
        positives=int(positives),
        negatives=int(negatives),
        threshold=threshold,
        precision_undefined=precision_undefined,
        skipped_generators=skipped,
    )


def csv_table(named_reports: Sequence[tuple[str, EvalReport]]) -> str:
    """One row per method, columns per generator plus mAP and All."""
    generators = sorted({g for _, r in named_reports for g in r.per_generator_ap})
    lines = [",".join(["method", *generators, "mAP", "All"])]
    for name, report in named_reports:
        cells = [name]
        for g in generators:
            ap = report.per_generator_ap.get(g)
            cells.append("" if ap is None else f"{100 * ap:.2f}")
        cells.append(f"{100 * report.map_mean:.2f}")
        cells.append(f"{100 * report.all_ap:.2f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
