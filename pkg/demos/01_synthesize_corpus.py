"""Build a labeled mixed human/machine corpus and inspect its statistics.

Splices 1-3 runs of machine sentences into each human article, records
which sentences were replaced, and prints the dataset statistics the
pipeline tracks: per-pool counts, segment histograms, and the fraction of
machine sentences (the floor any detector must beat).
"""

import json
from pathlib import Path

from demo_corpus import human_articles, machine_pool
from mgtloc import SynthesisConfig, build_dataset, validate_article
from mgtloc.types import write_articles_jsonl

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

humans = human_articles(40, seed=1)
pools = [machine_pool("gpt-demo-small", seed=2), machine_pool("gpt-demo-large", seed=3, blend=0.05)]

articles, stats = build_dataset(humans, pools, SynthesisConfig(rng_seed=7))

print(f"synthesized {len(articles)} articles from {len(humans)} human articles x {len(pools)} pools")
print(json.dumps(stats.to_dict(), indent=2))

bad = [a.id for a in articles if validate_article(a)]
print(f"articles failing validation: {bad or 'none'}")

sample = articles[0]
print(f"\nsample: {sample.id}  segments={[(s.sent_start, s.sent_end, s.tokens) for s in sample.meta.segments]}")
for i, (sent, label) in enumerate(zip(sample.sentences, sample.labels)):
    mark = "M" if label else " "
    print(f"  [{mark}] {i:2d} {sent.text[:72]}")
    if i > 14:
        print(f"  ... ({len(sample.sentences) - i - 1} more sentences)")
        break

path = OUT / "corpus.jsonl"
with path.open("w", encoding="utf-8") as fp:
    write_articles_jsonl(articles, fp)
print(f"\nwrote {path}")
