import io

from mgtloc.segmenter import segment
from mgtloc.types import (
    Article,
    SamplingSpec,
    SpliceMetadata,
    SpliceSegment,
    count_label_runs,
    read_articles_jsonl,
    validate_article,
    write_articles_jsonl,
)


def build_article(body: str, labels=None, meta=None, article_id="a-1") -> Article:
    return Article(
        id=article_id,
        title="t",
        body=body,
        sentences=tuple(segment(body)),
        labels=labels,
        meta=meta,
    )


THREE = "Alpha beta gamma delta. Epsilon zeta eta theta. Iota kappa lambda mu."


def test_well_formed_article_has_no_violations():
    article = build_article(THREE, labels=(0, 1, 0))
    assert validate_article(article) == []


def test_label_length_mismatch_is_reported():
    article = build_article(THREE, labels=(0, 1))
    violations = validate_article(article)
    assert len(violations) == 1
    assert "labels length 2" in violations[0]
    assert "3" in violations[0]


def test_segment_token_bounds_violation_cites_limits():
    meta = SpliceMetadata(
        generator_name="g",
        sampling=SamplingSpec(method="top_k", k=40),
        segments=(SpliceSegment(sent_start=1, sent_end=1, tokens=30),),
    )
    article = build_article(THREE, labels=(0, 1, 0), meta=meta)
    violations = validate_article(article)
    assert any("30" in v and "[40,300]" in v for v in violations)


def test_non_binary_labels_reported():
    article = build_article(THREE, labels=(0, 2, 0))
    assert any("non-binary" in v for v in violations_of(article))


def violations_of(article):
    return validate_article(article)


def test_overlapping_spans_reported():
    good = build_article(THREE)
    s = list(good.sentences)
    s[1] = type(s[1])(text=s[1].text, start=s[0].start + 1, end=s[1].end, tokens=s[1].tokens)
    bad = Article(id=good.id, title=good.title, body=good.body, sentences=tuple(s))
    assert any("overlap" in v or "not ordered" in v for v in validate_article(bad))


def test_text_must_match_body_slice():
    good = build_article(THREE)
    s = list(good.sentences)
    s[0] = type(s[0])(text="Wrong text entirely.", start=s[0].start, end=s[0].end, tokens=3)
    bad = Article(id=good.id, title=good.title, body=good.body, sentences=tuple(s))
    assert any("does not match body slice" in v for v in validate_article(bad))


def test_meta_label_run_consistency_checked():
    meta = SpliceMetadata(
        generator_name="g",
        sampling=SamplingSpec(method="top_p", p=0.95),
        segments=(SpliceSegment(sent_start=1, sent_end=1, tokens=50),),
    )
    ok = build_article(THREE, labels=(0, 1, 0), meta=meta)
    assert validate_article(ok) == []
    # labels claim two runs while meta records one segment
    bad = build_article(THREE, labels=(1, 0, 1), meta=meta)
    assert any("runs" in v for v in validate_article(bad))


def test_validate_is_pure_and_deterministic():
    article = build_article(THREE, labels=(0, 1))
    first = validate_article(article)
    second = validate_article(article)
    assert first == second
    assert article.labels == (0, 1)


def test_count_label_runs():
    assert count_label_runs([]) == 0
    assert count_label_runs([0, 0, 0]) == 0
    assert count_label_runs([1, 1, 0, 1]) == 2
    assert count_label_runs([0, 1, 1, 1, 0, 0, 1]) == 2


def test_jsonl_round_trip_identity():
    meta = SpliceMetadata(
        generator_name="g",
        sampling=SamplingSpec(method="top_p", p=0.96),
        segments=(SpliceSegment(sent_start=1, sent_end=1, tokens=55),),
    )
    original = build_article(THREE, labels=(0, 1, 0), meta=meta)
    buf = io.StringIO()
    write_articles_jsonl([original], buf)
    buf.seek(0)
    restored = list(read_articles_jsonl(buf))
    assert restored == [original]


def test_round_trip_without_optionals():
    original = build_article("Unicode café test. Second sentence here.")
    buf = io.StringIO()
    write_articles_jsonl([original], buf)
    buf.seek(0)
    assert list(read_articles_jsonl(buf)) == [original]
    assert validate_article(original) == []


def test_malformed_jsonl_names_line():
    buf = io.StringIO('{"id": "x"}\n')
    try:
        list(read_articles_jsonl(buf))
    except ValueError as exc:
        assert "line 1" in str(exc)
    else:
        raise AssertionError("expected ValueError")
