"""Turn chunk scores or per-position adaptor outputs into sentence labels.

Strategies:

* ``single``   — score each sentence alone (window size 1);
* ``vote``     — score overlapping windows of ``m`` sentences, binarize each
  window, and give every sentence the majority label of the windows that
  cover it;
* ``adaloc_*`` — run the per-position adaptor on window features.  ``vote``
  aggregates overlapping per-position outputs, ``skip`` tiles the article
  with disjoint windows, ``middle`` keeps only each window's center output.

Ties between an equal number of 0/1 votes resolve by comparing the mean
raw score of the covering windows against the threshold, so results stay
deterministic without discarding information already computed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, TYPE_CHECKING, Iterable

import numpy as np

from .scorers import ChunkRequest, ScorerError, WindowRef, chunk_text, score_chunks
from .types import Article, SentencePrediction

if TYPE_CHECKING:
    from .adaloc import AdaLocModel

STRATEGIES = ("single", "vote", "adaloc_vote", "adaloc_skip", "adaloc_middle")
AGGREGATIONS = ("vote", "skip", "middle")

DEFAULT_WINDOW = 3
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True, slots=True)
class WindowPlan:
    m: int
    step: int
    windows: tuple[tuple[int, int], ...]  # (start, end) inclusive


@dataclass(frozen=True, slots=True)
class LocalizationResult:
    article_id: str
    strategy: str
    m: int
    predictions: tuple[SentencePrediction, ...]

    def to_dict(self) -> dict:
        return {
            "article_id": self.article_id,
            "strategy": self.strategy,
            "m": self.m,
            "predictions": [
                {"idx": p.sentence_idx, "score": p.score, "label": p.label}
                for p in self.predictions
            ],
        }


def write_results_jsonl(results: Iterable[LocalizationResult], fp: IO[str]) -> int:
    n = 0
    for r in results:
        fp.write(json.dumps(r.to_dict(), ensure_ascii=False))
        fp.write("\n")
        n += 1
    return n


def read_results_jsonl(fp: IO[str]) -> list[LocalizationResult]:
    out = []
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            d = json.loads(line)
            predictions = tuple(
                SentencePrediction(
                    sentence_idx=p["idx"], score=float(p["score"]), label=int(p["label"])
                )
                for p in d["predictions"]
            )
            out.append(
                LocalizationResult(
                    article_id=d["article_id"],
                    strategy=d["strategy"],
                    m=int(d["m"]),
                    predictions=predictions,
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"line {lineno}: malformed prediction record: {exc}") from exc
    return out


def plan_windows(n_sentences: int, m: int, step: int) -> WindowPlan:
    """Enumerate sentence windows covering ``0..n_sentences-1``.

    With ``step=1`` windows slide one sentence at a time and all have width
    ``m``; with larger steps windows tile the article and the last one may
    be short.  An article shorter than ``m`` yields the single window
    ``[0, n-1]``.
    """
    if m < 1:
        raise ValueError(f"window size m={m} must be >= 1")
    if step < 1:
        raise ValueError(f"window step {step} must be >= 1")
    if n_sentences < 1:
        raise ValueError("cannot plan windows over an empty article")

    if n_sentences <= m:
        windows = [(0, n_sentences - 1)]
    elif step == 1:
        windows = [(i, i + m - 1) for i in range(n_sentences - m + 1)]
    else:
        windows = [
            (start, min(start + m - 1, n_sentences - 1))
            for start in range(0, n_sentences, step)
        ]
    return WindowPlan(m=m, step=step, windows=tuple(windows))


def _score_windows(article: Article, scorer, plan: WindowPlan, mode: str):
    request = ChunkRequest(
        request_id=f"{article.id}:{plan.m}:{plan.step}:{mode}",
        texts=tuple(chunk_text(article, s, e) for s, e in plan.windows),
        mode=mode,
        window_refs=tuple(WindowRef(article.id, s, e) for s, e in plan.windows),
    )
    try:
        return score_chunks(scorer, request)
    except ScorerError as exc:
        raise type(exc)(f"article {article.id}: {exc}") from exc


def _majority(votes: list[int], mean_score: float, threshold: float) -> int:
    ones = sum(votes)
    zeros = len(votes) - ones
    if ones > zeros:
        return 1
    if ones < zeros:
        return 0
    return 1 if mean_score >= threshold else 0


def localize_single(
    article: Article, scorer, threshold: float = DEFAULT_THRESHOLD
) -> LocalizationResult:
    """Score every sentence independently (window size 1, no votes)."""
    plan = plan_windows(len(article.sentences), 1, 1)
    result = _score_windows(article, scorer, plan, "score")
    predictions = tuple(
        SentencePrediction(
            sentence_idx=i,
            score=float(s),
            label=int(s >= threshold),
            votes=(),
        )
        for i, s in enumerate(result.scores)
    )
    return LocalizationResult(article.id, "single", 1, predictions)


def localize_vote(
    article: Article, scorer, m: int = DEFAULT_WINDOW, threshold: float = DEFAULT_THRESHOLD
) -> LocalizationResult:
    """Majority vote over overlapping windows of ``m`` sentences.

    Every window's binarized label is assigned to each sentence it covers;
    boundary sentences simply collect fewer votes.  The reported score is
    the mean raw window score, which supplies the ranking AP needs.
    """
    n = len(article.sentences)
    plan = plan_windows(n, m, 1)
    result = _score_windows(article, scorer, plan, "score")

    votes: list[list[int]] = [[] for _ in range(n)]
    raw: list[list[float]] = [[] for _ in range(n)]
    for (start, end), score in zip(plan.windows, result.scores):
        label = int(score >= threshold)
        for j in range(start, end + 1):
            votes[j].append(label)
            raw[j].append(float(score))

    predictions = []
    for j in range(n):
        mean_score = sum(raw[j]) / len(raw[j])
        predictions.append(
            SentencePrediction(
                sentence_idx=j,
                score=mean_score,
                label=_majority(votes[j], mean_score, threshold),
                votes=tuple(votes[j]),
            )
        )
    return LocalizationResult(article.id, "vote", m, tuple(predictions))


def localize_adaloc(
    article: Article,
    feature_scorer,
    model: "AdaLocModel",
    m: int = DEFAULT_WINDOW,
    aggregation: str = "vote",
    threshold: float = DEFAULT_THRESHOLD,
) -> LocalizationResult:
    """Per-sentence probabilities from the adaptor, aggregated three ways.

    ``vote``: overlapping windows, each sentence collects the probability
    at its own position from every covering window and takes the majority
    of their binarizations.  ``skip``: disjoint windows, one probability
    per sentence.  ``middle``: overlapping windows, only the center
    position labels its sentence; edge sentences fall back to the nearest
    position of the first/last window.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation {aggregation!r}")
    if model.m != m:
        raise ValueError(f"model predicts {model.m} positions per window, asked for m={m}")

    n = len(article.sentences)
    step = m if aggregation == "skip" else 1
    plan = plan_windows(n, m, step)
    result = _score_windows(article, feature_scorer, plan, "feature")

    features = np.asarray(result.features, dtype=np.float64)
    if features.shape[1] != model.feature_dim:
        raise ValueError(
            f"feature width {features.shape[1]} does not match model "
            f"feature_dim {model.feature_dim}"
        )
    probs = model.predict(features)  # (n_windows, m)

    collected: list[list[float]] = [[] for _ in range(n)]
    if aggregation in ("vote", "skip"):
        for w, (start, end) in enumerate(plan.windows):
            for j in range(start, end + 1):
                collected[j].append(float(probs[w, j - start]))
    else:  # middle
        center = m // 2
        last = len(plan.windows) - 1
        for j in range(n):
            if n <= m:
                w, pos = 0, j
            elif j < center:
                w, pos = 0, j
            elif j > plan.windows[last][0] + center:
                w, pos = last, j - plan.windows[last][0]
            else:
                w, pos = j - center, center
            collected[j].append(float(probs[w, pos]))

    predictions = []
    for j in range(n):
        mean_score = sum(collected[j]) / len(collected[j])
        votes = tuple(int(p >= threshold) for p in collected[j])
        predictions.append(
            SentencePrediction(
                sentence_idx=j,
                score=mean_score,
                label=_majority(list(votes), mean_score, threshold),
                votes=votes,
            )
        )
    return LocalizationResult(article.id, f"adaloc_{aggregation}", m, tuple(predictions))
