"""Human-readable annotated documents: per-sentence labels and scores.

The plain-text form prefixes each sentence with its predicted label and
score (plus the ground truth when available); the HTML form highlights
predicted machine sentences and outlines disagreements with the truth.
"""

from __future__ import annotations

import html
from typing import Sequence

from .localizer import LocalizationResult
from .types import Article


def render_text(article: Article, result: LocalizationResult) -> str:
    lines = [f"# article {article.id} — strategy {result.strategy} (m={result.m})"]
    if article.title:
        lines.append(f"# title: {article.title}")
    for i, sentence in enumerate(article.sentences):
        pred = result.predictions[i]
        mark = "MACHINE" if pred.label == 1 else "human  "
        truth = ""
        if article.labels is not None:
            agree = "ok" if pred.label == article.labels[i] else "MISS"
            truth = f" truth={article.labels[i]} {agree}"
        lines.append(f"[{mark} {pred.score:5.3f}{truth}] {sentence.text}")
    return "\n".join(lines) + "\n"


_PAGE = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>localization report</title>
<style>
body {{ font-family: Georgia, serif; max-width: 52em; margin: 2em auto; line-height: 1.6; }}
.machine {{ background: #fff3b0; }}
.miss {{ outline: 2px dashed #c0392b; }}
.score {{ color: #888; font-size: 0.75em; vertical-align: super; }}
h2 {{ border-bottom: 1px solid #ddd; }}
</style></head><body>
<h1>Sentence-level localization report</h1>
<p>Highlighted sentences are predicted machine-generated; dashed outlines
mark disagreements with the ground truth (when provided).</p>
{articles}
</body></html>
"""


def render_html(pairs: Sequence[tuple[Article, LocalizationResult]]) -> str:
    sections = []
    for article, result in pairs:
        spans = []
        for i, sentence in enumerate(article.sentences):
            pred = result.predictions[i]
            classes = []
            if pred.label == 1:
                classes.append("machine")
            if article.labels is not None and pred.label != article.labels[i]:
                classes.append("miss")
            cls = f' class="{" ".join(classes)}"' if classes else ""
            spans.append(
                f"<span{cls}>{html.escape(sentence.text)}"
                f'<span class="score">{pred.score:.2f}</span></span>'
            )
        title = html.escape(article.title or article.id)
        sections.append(
            f"<h2>{title}</h2>\n<p><em>{article.id} — {result.strategy}, m={result.m}"
            f"</em></p>\n<p>{' '.join(spans)}</p>"
        )
    return _PAGE.format(articles="\n".join(sections))
