"""Command-line pipeline: synth -> score/localize -> train-adaloc -> eval.

Stages compose through JSONL files only, so external detectors can
interpose anywhere.  Exit codes: 0 success, 1 usage error, 2 data error,
3 scorer/sidecar transport or protocol error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import contextlib
import json
import logging
import os
import sys
from pathlib import Path

from . import adaloc, metrics, render, scorers, synthesis
from .localizer import (
    DEFAULT_THRESHOLD,
    localize_adaloc,
    localize_single,
    localize_vote,
    plan_windows,
    read_results_jsonl,
    write_results_jsonl,
)
from .types import Article, read_articles_jsonl, write_articles_jsonl

logger = logging.getLogger("mgtloc")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRANSPORT = 3

SIDECAR_ENV = "MGT_SIDECAR_CMD"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage to 1
        raise UsageError(message)


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"{value} is not a positive integer")
    return n


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    parser.add_argument("--threads", type=_positive_int, default=1,
                        help="article-level parallelism (results are identical at any value)")
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    parser.add_argument("--config", default=None,
                        help="JSON or key=value file of defaults for this subcommand")


def build_parser() -> _Parser:
    parser = _Parser(prog="mgtloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="splice machine text into human articles")
    _add_common(p)
    p.add_argument("--human", required=True, help="human articles JSONL")
    p.add_argument("--pool", required=True, action="append",
                   help="pool JSONL of machine text (repeatable)")
    p.add_argument("--segments", default="uniform",
                   help="segments per article: 1, 2, 3, or 'uniform' for 1-3")
    p.add_argument("--min-tokens", type=_positive_int, default=synthesis.MIN_SEGMENT_TOKENS)
    p.add_argument("--max-tokens", type=_positive_int, default=synthesis.MAX_SEGMENT_TOKENS)
    p.add_argument("--out", required=True)
    p.add_argument("--stats", default=None, help="write dataset statistics JSON here")

    p = sub.add_parser("score", help="bulk chunk scoring to a file")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--scorer", required=True)
    p.add_argument("--m", type=_positive_int, default=3)
    p.add_argument("--step", type=_positive_int, default=1)
    p.add_argument("--mode", choices=["score", "feature"], default="score")
    p.add_argument("--out", required=True)

    p = sub.add_parser("localize", help="label every sentence of every article")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--strategy", choices=["single", "vote", "adaloc"], required=True)
    p.add_argument("--agg", choices=["vote", "skip", "middle"], default="vote",
                   help="aggregation for the adaloc strategy")
    p.add_argument("--m", type=_positive_int, default=3)
    p.add_argument("--scorer", required=True,
                   help="oracle | ngram:<file> | hash | constant:<v> | random:<seed> | "
                        "scores:<file> | extern:<cmd>")
    p.add_argument("--model", default=None,
                   help="adaptor model file, or 'oracle' for the hand-built readout")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None,
                   help="also render an annotated document (.html or .txt)")

    p = sub.add_parser("train-adaloc", help="train the localization adaptor")
    _add_common(p)
    p.add_argument("--train", required=True, help="chunk examples JSONL")
    p.add_argument("--val", required=True, help="labeled validation articles JSONL")
    p.add_argument("--scorer", required=True, help="feature scorer for validation inference")
    p.add_argument("--m", type=_positive_int, default=3)
    p.add_argument("--lr", type=float, default=1e-5)
    p.add_argument("--batch-size", type=_positive_int, default=16)
    p.add_argument("--epochs", type=_positive_int, default=3)
    p.add_argument("--patience", type=int, default=1)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-ngram", help="fit the built-in n-gram scorer")
    _add_common(p)
    p.add_argument("--train", required=True, help="labeled articles JSONL")
    p.add_argument("--order", type=_positive_int, default=4)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="AP per generator, mAP, pooled AP, precision/recall")
    _add_common(p)
    p.add_argument("--truth", required=True, help="labeled articles JSONL")
    p.add_argument("--preds", required=True, action="append", help="predictions JSONL (repeatable)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--csv", default=None, help="also write a one-row CSV table")
    p.add_argument("--method-name", default="method", help="row label for the CSV table")

    p = sub.add_parser("report", help="render an annotated document from predictions")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True, help="articles JSONL")
    p.add_argument("--preds", required=True, help="predictions JSONL")
    p.add_argument("--out", required=True, help=".html or .txt output")

    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _read_articles(path: str) -> list[Article]:
    with open(path, encoding="utf-8") as fp:
        try:
            return list(read_articles_jsonl(fp))
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from exc


def _apply_config_file(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill unset flags from a config file; reject keys the subcommand lacks."""
    if not args.config:
        return
    text = Path(args.config).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        values = json.loads(text)
    else:
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{args.config}: line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    explicit = set()
    for token in argv:
        if token.startswith("--"):
            explicit.add(token[2:].split("=", 1)[0].replace("-", "_"))
    for key, value in values.items():
        dest = str(key).replace("-", "_")
        if not hasattr(args, dest) or dest == "command":
            raise UsageError(f"{args.config}: unknown config key {key!r}")
        if dest in explicit:
            continue
        current = getattr(args, dest)
        if isinstance(current, bool):
            value = str(value).lower() in ("1", "true", "yes")
        elif isinstance(current, int) and not isinstance(current, bool):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        setattr(args, dest, value)


def _make_scorer(spec: str, mode: str, articles: list[Article], seed: int, stack):
    """Instantiate a scorer from its CLI spec string."""
    name, _, arg = spec.partition(":")
    if name == "oracle":
        if mode == "feature":
            return scorers.OracleFeatureScorer(articles)
        return scorers.OracleScorer(articles)
    if name == "ngram":
        if not arg:
            raise UsageError("ngram scorer needs a model file: ngram:<path>")
        return scorers.load_ngram_scorer(arg)
    if name == "hash":
        dim = int(arg) if arg else scorers.FEATURE_DIM
        return scorers.HashFeatureScorer(dim=dim)
    if name == "constant":
        return scorers.ConstantScorer(float(arg) if arg else 0.5)
    if name == "random":
        return scorers.RandomScorer(int(arg) if arg else seed)
    if name == "scores":
        if not arg:
            raise UsageError("precomputed scorer needs a file: scores:<path>")
        return scorers.PrecomputedScorer.from_file(arg)
    if name == "extern":
        command = arg or os.environ.get(SIDECAR_ENV, "")
        if not command:
            raise UsageError(
                f"extern scorer needs a command (extern:<cmd> or ${SIDECAR_ENV})"
            )
        sidecar = scorers.SidecarScorer(command)
        stack.callback(sidecar.close)
        return sidecar
    raise UsageError(f"unknown scorer spec {spec!r}")


def _parallel_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_synth(args) -> int:
    humans = _read_articles(args.human)
    pools = []
    for path in args.pool:
        with open(path, encoding="utf-8") as fp:
            try:
                pools.extend(synthesis.read_pools_jsonl(fp))
            except ValueError as exc:
                raise ValueError(f"{path}: {exc}") from exc
    if args.segments == "uniform":
        num_segments: int | str = "uniform_1_3"
    else:
        num_segments = int(args.segments)
    config = synthesis.SynthesisConfig(
        num_segments=num_segments,
        min_segment_tokens=args.min_tokens,
        max_segment_tokens=args.max_tokens,
        rng_seed=args.seed,
    )
    articles, stats = synthesis.build_dataset(humans, pools, config)
    with open(args.out, "w", encoding="utf-8") as fp:
        write_articles_jsonl(articles, fp)
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fp:
            json.dump(stats.to_dict(), fp, indent=2, sort_keys=True)
            fp.write("\n")
    for warning in stats.warnings:
        logger.warning(warning)
    logger.info("synthesized %d articles (%d skips)",
                stats.total_articles, sum(stats.per_pool_skips.values()))
    return EXIT_OK


def _cmd_score(args) -> int:
    articles = _read_articles(args.infile)
    with contextlib.ExitStack() as stack:
        scorer = _make_scorer(args.scorer, args.mode, articles, args.seed, stack)

        def score_article(article: Article):
            plan = plan_windows(len(article.sentences), args.m, args.step)
            request = scorers.ChunkRequest(
                request_id=article.id,
                texts=tuple(
                    scorers.chunk_text(article, s, e) for s, e in plan.windows
                ),
                mode=args.mode,
                window_refs=tuple(
                    scorers.WindowRef(article.id, s, e) for s, e in plan.windows
                ),
            )
            result = scorers.score_chunks(scorer, request)
            rows = []
            for idx, (s, e) in enumerate(plan.windows):
                row = {"article_id": article.id, "start": s, "end": e, "m": args.m}
                if args.mode == "score":
                    row["score"] = result.scores[idx]
                else:
                    row["feature"] = list(result.features[idx])
                rows.append(row)
            return rows

        per_article = _parallel_map(score_article, articles, args.threads)
    with open(args.out, "w", encoding="utf-8") as fp:
        for rows in per_article:
            for row in rows:
                fp.write(json.dumps(row))
                fp.write("\n")
    return EXIT_OK


def _cmd_localize(args) -> int:
    articles = _read_articles(args.infile)
    mode = "feature" if args.strategy == "adaloc" else "score"
    with contextlib.ExitStack() as stack:
        scorer = _make_scorer(args.scorer, mode, articles, args.seed, stack)
        model = None
        if args.strategy == "adaloc":
            if not args.model:
                raise UsageError("the adaloc strategy needs --model")
            if args.model == "oracle":
                dim = getattr(scorer, "dim", None) or scorers.FEATURE_DIM
                model = adaloc.make_oracle_model(args.m, feature_dim=dim)
            else:
                model = adaloc.load_model(args.model)

        def run(article: Article):
            if args.strategy == "single":
                return localize_single(article, scorer, threshold=args.threshold)
            if args.strategy == "vote":
                return localize_vote(article, scorer, m=args.m, threshold=args.threshold)
            return localize_adaloc(
                article, scorer, model, m=args.m,
                aggregation=args.agg, threshold=args.threshold,
            )

        results = _parallel_map(run, articles, args.threads)

    order = sorted(range(len(articles)), key=lambda i: articles[i].id)
    results = [results[i] for i in order]
    articles = [articles[i] for i in order]
    with open(args.out, "w", encoding="utf-8") as fp:
        write_results_jsonl(results, fp)
    if args.report:
        _write_report(args.report, list(zip(articles, results)))
    return EXIT_OK


def _write_report(path: str, pairs) -> None:
    if path.endswith(".html"):
        content = render.render_html(pairs)
    else:
        content = "\n".join(render.render_text(a, r) for a, r in pairs)
    Path(path).write_text(content, encoding="utf-8")


def _cmd_train_adaloc(args) -> int:
    with open(args.train, encoding="utf-8") as fp:
        try:
            dataset = adaloc.read_chunk_examples(fp)
        except ValueError as exc:
            raise ValueError(f"{args.train}: {exc}") from exc
    val_articles = _read_articles(args.val)
    config = adaloc.TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        patience=args.patience,
        seed=args.seed,
        dropout_rate=args.dropout,
    )
    with contextlib.ExitStack() as stack:
        scorer = _make_scorer(args.scorer, "feature", val_articles, args.seed, stack)
        model, log = adaloc.train(dataset, val_articles, scorer, config)
    adaloc.save_model(model, args.out)
    for epoch, (loss, val_map) in enumerate(zip(log.epoch_loss, log.epoch_val_map)):
        logger.info("epoch %d: loss %.4f, val mAP %.4f", epoch, loss, val_map)
    logger.info("best epoch %d%s", log.best_epoch,
                " (stopped early)" if log.stopped_early else "")
    return EXIT_OK


def _cmd_train_ngram(args) -> int:
    articles = _read_articles(args.train)
    labeled = []
    for article in articles:
        if article.labels is None:
            raise ValueError(f"article {article.id}: n-gram training needs labels")
        for sentence, label in zip(article.sentences, article.labels):
            labeled.append((sentence.text, label))
    model = scorers.train_ngram_scorer(labeled, order=args.order)
    scorers.save_ngram_scorer(model, args.out)
    return EXIT_OK


def _cmd_eval(args) -> int:
    truth = _read_articles(args.truth)
    results = []
    for path in args.preds:
        with open(path, encoding="utf-8") as fp:
            try:
                results.extend(read_results_jsonl(fp))
            except ValueError as exc:
                raise ValueError(f"{path}: {exc}") from exc
    report = metrics.evaluate(truth, results, threshold=args.threshold)
    with open(args.out, "w", encoding="utf-8") as fp:
        json.dump(report.to_dict(), fp, indent=2, sort_keys=True)
        fp.write("\n")
    if args.csv:
        Path(args.csv).write_text(
            metrics.csv_table([(args.method_name, report)]), encoding="utf-8"
        )
    return EXIT_OK


def _cmd_report(args) -> int:
    articles = {a.id: a for a in _read_articles(args.infile)}
    with open(args.preds, encoding="utf-8") as fp:
        try:
            results = read_results_jsonl(fp)
        except ValueError as exc:
            raise ValueError(f"{args.preds}: {exc}") from exc
    pairs = []
    for result in results:
        if result.article_id not in articles:
            raise ValueError(f"prediction for unknown article {result.article_id}")
        pairs.append((articles[result.article_id], result))
    _write_report(args.out, pairs)
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "score": _cmd_score,
    "localize": _cmd_localize,
    "train-adaloc": _cmd_train_adaloc,
    "train-ngram": _cmd_train_ngram,
    "eval": _cmd_eval,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args, argv)
        logging.basicConfig(level=args.log_level.upper())
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except scorers.ScorerTransportError as exc:
        print(f"scorer transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except scorers.ScorerProtocolError as exc:
        print(f"scorer protocol error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"data error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
