import io

import numpy as np
import pytest

from corpus import make_human_article, make_humans, make_pool
from mgtloc.segmenter import well_formed
from mgtloc.synthesis import (
    GenerationPool,
    PoolEntry,
    SpliceSkip,
    SynthesisConfig,
    article_rng,
    build_dataset,
    read_pools_jsonl,
    splice,
    write_pools_jsonl,
)
from mgtloc.types import (
    SamplingSpec,
    count_label_runs,
    validate_article,
)


def rng_for(article_id="art-0000", seed=42, generator="gen-a"):
    return article_rng(seed, article_id, generator)


@pytest.fixture(scope="module")
def pool():
    return make_pool("gen-a", seed=11, n_entries=30)


@pytest.fixture(scope="module")
def humans():
    return make_humans(12, seed=7)


def test_splice_produces_valid_labeled_article(humans, pool):
    config = SynthesisConfig(num_segments=1, rng_seed=42)
    out = splice(humans[0], pool, config, rng_for(humans[0].id))
    assert validate_article(out) == []
    assert out.meta.num_segments == 1
    assert count_label_runs(out.labels) == 1
    assert out.id == f"{humans[0].id}__gen-a"
    seg = out.meta.segments[0]
    run_tokens = sum(out.sentences[i].tokens for i in range(seg.sent_start, seg.sent_end + 1))
    assert run_tokens == seg.tokens
    assert 40 <= seg.tokens <= 300


def test_splice_never_replaces_first_sentence(humans, pool):
    config = SynthesisConfig(rng_seed=1)
    for human in humans:
        out = splice(human, pool, config, rng_for(human.id, seed=1))
        assert out.labels[0] == 0
        assert out.sentences[0].text == human.sentences[0].text


def test_splice_keeps_untouched_human_sentences_byte_identical(humans, pool):
    config = SynthesisConfig(num_segments=2, rng_seed=9)
    human = humans[3]
    out = splice(human, pool, config, rng_for(human.id, seed=9))
    human_texts = [s.text for s in human.sentences]
    kept = [s.text for s, y in zip(out.sentences, out.labels) if y == 0]
    # every kept sentence appears in the source, in order
    it = iter(human_texts)
    for text in kept:
        for candidate in it:
            if candidate == text:
                break
        else:
            raise AssertionError(f"kept sentence not found in source order: {text!r}")
    # spans slice the new body exactly
    assert validate_article(out) == []


def test_splice_machine_sentences_are_well_formed(humans, pool):
    config = SynthesisConfig(rng_seed=3)
    for human in humans[:6]:
        out = splice(human, pool, config, rng_for(human.id, seed=3))
        for sentence, label in zip(out.sentences, out.labels):
            if label == 1:
                assert well_formed(sentence)


def test_splice_segments_disjoint_and_non_adjacent(humans, pool):
    config = SynthesisConfig(num_segments=3, rng_seed=5)
    for human in humans:
        out = splice(human, pool, config, rng_for(human.id, seed=5))
        segs = out.meta.segments
        assert len(segs) == 3
        for a, b in zip(segs, segs[1:]):
            assert b.sent_start > a.sent_end + 1  # >= 1 human sentence between


def test_splice_too_short_article_skips(pool):
    rng = np.random.default_rng(0)
    tiny = make_human_article(999, rng, n_sentences=3)
    config = SynthesisConfig(num_segments=3, rng_seed=0)
    with pytest.raises(SpliceSkip):
        splice(tiny, pool, config, rng_for(tiny.id))


def test_splice_unreachable_token_bound_skips():
    # the only well-formed sentence has more tokens than max allows
    text = "Word " * 44 + "end."
    entry_pool = GenerationPool(
        generator_name="g",
        sampling=SamplingSpec(method="external"),
        entries=(PoolEntry(source_article_id="", text=text.strip()),),
    )
    rng = np.random.default_rng(1)
    human = make_human_article(0, rng, n_sentences=12)
    config = SynthesisConfig(num_segments=1, min_segment_tokens=40, max_segment_tokens=40, rng_seed=0)
    with pytest.raises(SpliceSkip):
        splice(human, entry_pool, config, rng_for(human.id))


def test_splice_determinism(humans, pool):
    config = SynthesisConfig(rng_seed=123)
    human = humans[1]
    first = splice(human, pool, config, rng_for(human.id, seed=123))
    second = splice(human, pool, config, rng_for(human.id, seed=123))
    assert first == second


def test_config_validation():
    with pytest.raises(ValueError):
        SynthesisConfig(num_segments=4)
    with pytest.raises(ValueError):
        SynthesisConfig(num_segments="sometimes")
    with pytest.raises(ValueError):
        SynthesisConfig(min_segment_tokens=10)
    with pytest.raises(ValueError):
        SynthesisConfig(min_segment_tokens=200, max_segment_tokens=100)


def test_build_dataset_counts_and_stats(humans, pool):
    config = SynthesisConfig(rng_seed=42)
    articles, stats = build_dataset(humans, [pool], config)
    assert len(articles) == len(humans)  # no skips expected at these sizes
    assert stats.per_pool_counts == {"gen-a": len(humans)}
    assert sum(stats.segment_count_hist.values()) == len(articles)
    assert sum(stats.segment_length_hist.values()) == sum(
        a.meta.num_segments for a in articles
    )
    assert 0.0 < stats.positive_prevalence < 1.0
    assert stats.machine_sentences == sum(sum(a.labels) for a in articles)
    assert [a.id for a in articles] == sorted(a.id for a in articles)


def test_build_dataset_label_runs_match_segment_counts(humans, pool):
    articles, _ = build_dataset(humans, [pool], SynthesisConfig(rng_seed=4))
    for article in articles:
        assert count_label_runs(article.labels) == article.meta.num_segments


def test_build_dataset_deterministic(humans, pool):
    config = SynthesisConfig(rng_seed=31)
    a1, s1 = build_dataset(humans, [pool], config)
    a2, s2 = build_dataset(humans, [pool], config)
    assert a1 == a2
    assert s1.to_dict() == s2.to_dict()


def test_build_dataset_empty_corpus_errors(pool):
    with pytest.raises(ValueError):
        build_dataset([], [pool], SynthesisConfig())


def test_build_dataset_all_skip_pool_warns(humans):
    bad_pool = GenerationPool(
        generator_name="sparse",
        sampling=SamplingSpec(method="external"),
        entries=(PoolEntry(source_article_id="", text="Too tiny."),),
    )
    articles, stats = build_dataset(humans, [bad_pool], SynthesisConfig(rng_seed=0))
    assert articles == []
    assert any("sparse" in w for w in stats.warnings)


def test_pool_jsonl_round_trip(pool):
    buf = io.StringIO()
    write_pools_jsonl([pool], buf)
    buf.seek(0)
    restored = read_pools_jsonl(buf)
    assert restored == [pool]


def test_article_rng_substreams_differ():
    a = article_rng(1, "x", "g").random(4).tolist()
    b = article_rng(1, "y", "g").random(4).tolist()
    c = article_rng(2, "x", "g").random(4).tolist()
    d = article_rng(1, "x", "h").random(4).tolist()
    assert len({tuple(a), tuple(b), tuple(c), tuple(d)}) == 4
