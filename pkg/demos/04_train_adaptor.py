"""Train the localization adaptor and compare its aggregation modes.

The adaptor is a 1024-1024-m two-layer network over frozen chunk features;
each output position predicts one sentence of the window.  Training uses
masked binary cross entropy with adaptive-moment updates and early
stopping on validation mAP.  Inference aggregates overlapping windows by
majority vote, disjoint tiling (skip), or center-sentence-only (middle).
"""

from pathlib import Path

from demo_corpus import human_articles, machine_pool
from mgtloc import (
    NgramFeatureScorer,
    SynthesisConfig,
    TrainConfig,
    build_chunk_examples,
    build_dataset,
    evaluate,
    load_model,
    localize_adaloc,
    localize_vote,
    save_model,
    train,
    train_ngram_scorer,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# short articles carrying three short segments: boundary-dense, the regime
# where uniform window labels pay and per-position outputs shine
def split(n_articles, hseed, pseed, rseed):
    return build_dataset(
        human_articles(n_articles, seed=hseed, sentences_per_article=24),
        [machine_pool("gpt-demo", seed=pseed, blend=0.10)],
        SynthesisConfig(num_segments=3, rng_seed=rseed),
    )[0]


train_articles = split(100, 51, 52, 53)
val_articles = split(20, 54, 55, 56)
eval_articles = split(50, 57, 58, 59)

backbone = train_ngram_scorer(
    [(s.text, y) for a in train_articles for s, y in zip(a.sentences, a.labels)]
)
features = NgramFeatureScorer(backbone)

examples = build_chunk_examples(train_articles, features, m=3)
print(f"training on {len(examples)} chunk examples (window of 3 sentences)")

config = TrainConfig(learning_rate=3e-3, batch_size=16, max_epochs=4, patience=2, seed=5)
model, log = train(examples, val_articles, features, config)
for epoch, (loss, val_map) in enumerate(zip(log.epoch_loss, log.epoch_val_map)):
    print(f"  epoch {epoch}: loss {loss:.4f}  val mAP {val_map:.4f}")
print(f"  best epoch {log.best_epoch}" + ("  (stopped early)" if log.stopped_early else ""))

path = OUT / "adaptor.bin"
save_model(model, path)
model = load_model(path)
print(f"saved and reloaded {path}")

vote_baseline = evaluate(eval_articles, [localize_vote(a, backbone, m=3) for a in eval_articles])
print(f"\nplain vote (m=3):   mAP {vote_baseline.map_mean:.4f}   (uniform label per window)")
for aggregation in ("skip", "middle", "vote"):
    report = evaluate(
        eval_articles,
        [localize_adaloc(a, features, model, m=3, aggregation=aggregation) for a in eval_articles],
    )
    print(f"adaptor + {aggregation:6s}:   mAP {report.map_mean:.4f}")
print("\nwith three short segments per article, per-position outputs resolve the")
print("segment boundaries that uniform window labels blur, and overlapping")
print("votes beat disjoint tiling")
