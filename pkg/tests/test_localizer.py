import numpy as np
import pytest

from corpus import make_humans, make_pool
from reference import brute_force_vote
from mgtloc.adaloc import init_weights, make_oracle_model
from mgtloc.localizer import (
    localize_adaloc,
    localize_single,
    localize_vote,
    plan_windows,
)
from mgtloc.scorers import ChunkRequest, ChunkResult, OracleFeatureScorer, OracleScorer
from mgtloc.synthesis import SynthesisConfig, build_dataset


@pytest.fixture(scope="module")
def articles():
    humans = make_humans(6, seed=2)
    pool = make_pool("gen-a", seed=13)
    arts, _ = build_dataset(humans, [pool], SynthesisConfig(rng_seed=8))
    return arts


class StubScorer:
    """Serves fixed window scores keyed by (start, end)."""

    def __init__(self, table):
        self.table = table
        self.calls = 0

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        self.calls += 1
        scores = tuple(self.table[(r.start, r.end)] for r in request.window_refs)
        return ChunkResult(request.request_id, scores=scores)


class StubFeatureScorer:
    """Returns label-style one-hot features from a fixed per-sentence table."""

    def __init__(self, sentence_values, dim=16):
        self.values = sentence_values
        self.dim = dim

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        rows = []
        for ref in request.window_refs:
            vec = [0.0] * self.dim
            for j in range(ref.end - ref.start + 1):
                vec[j] = float(self.values[ref.start + j])
            rows.append(tuple(vec))
        return ChunkResult(request.request_id, features=tuple(rows))


def fake_article(n):
    from mgtloc.segmenter import segment
    from mgtloc.types import Article

    body = " ".join(f"Sentence number {i} is right here." for i in range(n))
    return Article(id=f"fake-{n}", title="", body=body, sentences=tuple(segment(body)))


# plan_windows ----------------------------------------------------------------


def test_plan_windows_sliding():
    plan = plan_windows(5, 3, 1)
    assert plan.windows == ((0, 2), (1, 3), (2, 4))


def test_plan_windows_disjoint():
    plan = plan_windows(5, 3, 3)
    assert plan.windows == ((0, 2), (3, 4))


def test_plan_windows_short_article():
    assert plan_windows(2, 3, 1).windows == ((0, 1),)
    assert plan_windows(1, 5, 5).windows == ((0, 0),)


def test_plan_windows_m1():
    assert plan_windows(3, 1, 1).windows == ((0, 0), (1, 1), (2, 2))


def test_plan_windows_invalid():
    with pytest.raises(ValueError):
        plan_windows(5, 0, 1)
    with pytest.raises(ValueError):
        plan_windows(5, 3, 0)
    with pytest.raises(ValueError):
        plan_windows(0, 3, 1)


def test_plan_windows_coverage_property():
    rng = np.random.default_rng(4)
    for _ in range(300):
        n = int(rng.integers(1, 40))
        m = int(rng.integers(1, 8))
        step = 1 if rng.random() < 0.5 else m
        plan = plan_windows(n, m, step)
        covered = set()
        for s, e in plan.windows:
            assert 0 <= s <= e <= n - 1
            covered.update(range(s, e + 1))
        assert covered == set(range(n))
        if step == 1 and n > m:
            assert all(e - s + 1 == m for s, e in plan.windows)
        if step > 1:
            flat = [i for s, e in plan.windows for i in range(s, e + 1)]
            assert len(flat) == len(set(flat))  # disjoint


# single ----------------------------------------------------------------------


def test_single_oracle_recovers_ground_truth(articles):
    scorer = OracleScorer(articles)
    for article in articles:
        result = localize_single(article, scorer)
        assert tuple(p.label for p in result.predictions) == article.labels
        assert all(p.votes == () for p in result.predictions)


def test_single_constant_half_all_ones():
    article = fake_article(4)
    scorer = StubScorer({(i, i): 0.5 for i in range(4)})
    result = localize_single(article, scorer)
    assert all(p.label == 1 for p in result.predictions)  # >= threshold rule


def test_single_batches_once(articles):
    article = articles[0]
    scorer = StubScorer({(i, i): 0.0 for i in range(len(article.sentences))})
    localize_single(article, scorer)
    assert scorer.calls == 1


# vote ------------------------------------------------------------------------


def test_vote_majority_example():
    # n=5, m=3: sentence 2 covered by windows (0,2),(1,3),(2,4) scoring 1,1,0
    article = fake_article(5)
    scorer = StubScorer({(0, 2): 0.9, (1, 3): 0.8, (2, 4): 0.2})
    result = localize_vote(article, scorer, m=3)
    pred = result.predictions[2]
    assert pred.votes == (1, 1, 0)
    assert pred.label == 1
    assert pred.score == pytest.approx((0.9 + 0.8 + 0.2) / 3)


def test_vote_tie_breaks_on_mean_score():
    # n=4, m=2: sentence 1 covered by (0,1) and (1,2)
    article = fake_article(4)
    scorer = StubScorer({(0, 1): 0.9, (1, 2): 0.3, (2, 3): 0.3})
    result = localize_vote(article, scorer, m=2)
    pred = result.predictions[1]
    assert pred.votes == (1, 0)
    assert pred.score == pytest.approx(0.6)
    assert pred.label == 1  # mean 0.6 >= 0.5

    scorer = StubScorer({(0, 1): 0.6, (1, 2): 0.2, (2, 3): 0.2})
    pred = localize_vote(article, scorer, m=2).predictions[1]
    assert pred.votes == (1, 0)
    assert pred.label == 0  # mean 0.4 < 0.5


def test_vote_m1_reduces_to_single(articles):
    scorer = OracleScorer(articles)
    for article in articles:
        single = localize_single(article, scorer)
        vote = localize_vote(article, scorer, m=1)
        assert [(p.sentence_idx, p.score, p.label) for p in single.predictions] == [
            (p.sentence_idx, p.score, p.label) for p in vote.predictions
        ]


def test_vote_monotone_consistency():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(3, 15))
        m = int(rng.integers(1, 5))
        article = fake_article(n)
        plan = plan_windows(n, m, 1)
        table = {w: float(rng.random()) for w in plan.windows}
        result = localize_vote(article, StubScorer(table), m=m)
        for j, pred in enumerate(result.predictions):
            covering = [table[w] for w in plan.windows if w[0] <= j <= w[1]]
            if all(s >= 0.5 for s in covering):
                assert pred.label == 1
            if all(s < 0.5 for s in covering):
                assert pred.label == 0


def test_vote_equals_brute_force_reference():
    rng = np.random.default_rng(21)
    for _ in range(500):
        n = int(rng.integers(1, 13))
        m = int(rng.integers(1, 6))
        article = fake_article(n)
        plan = plan_windows(n, m, 1)
        window_scores = [float(rng.random()) for _ in plan.windows]
        table = dict(zip(plan.windows, window_scores))
        result = localize_vote(article, StubScorer(table), m=m)
        ref_labels, ref_scores = brute_force_vote(n, m, window_scores)
        assert [p.label for p in result.predictions] == ref_labels
        assert [p.score for p in result.predictions] == pytest.approx(ref_scores)


def test_vote_coverage_every_sentence_has_votes(articles):
    scorer = OracleScorer(articles)
    for m in (1, 2, 3, 5):
        result = localize_vote(articles[0], scorer, m=m)
        assert all(len(p.votes) >= 1 for p in result.predictions)
        assert len(result.predictions) == len(articles[0].sentences)


# adaloc ----------------------------------------------------------------------


def test_adaloc_zero_model_all_half_labels_one():
    article = fake_article(6)
    model = init_weights(3, seed=0, feature_dim=16)
    model.W1[:] = 0.0
    model.W2[:] = 0.0
    scorer = StubFeatureScorer([0, 1, 0, 1, 0, 1], dim=16)
    result = localize_adaloc(article, scorer, model, m=3, aggregation="vote")
    for pred in result.predictions:
        assert pred.score == pytest.approx(0.5)
        assert pred.label == 1  # tie rule at threshold


def test_adaloc_skip_one_vote_each():
    article = fake_article(6)
    model = make_oracle_model(3, feature_dim=16)
    scorer = StubFeatureScorer([0, 1, 1, 0, 0, 1], dim=16)
    result = localize_adaloc(article, scorer, model, m=3, aggregation="skip")
    assert all(len(p.votes) == 1 for p in result.predictions)
    assert [p.label for p in result.predictions] == [0, 1, 1, 0, 0, 1]


def test_adaloc_oracle_model_recovers_labels_all_aggregations(articles):
    scorer = OracleFeatureScorer(articles, dim=32)
    model = make_oracle_model(3, feature_dim=32)
    for aggregation in ("vote", "skip", "middle"):
        for article in articles:
            result = localize_adaloc(article, scorer, model, m=3, aggregation=aggregation)
            assert tuple(p.label for p in result.predictions) == article.labels


def test_adaloc_middle_uses_center_positions():
    article = fake_article(7)
    values = [1, 0, 1, 0, 0, 1, 0]
    scorer = StubFeatureScorer(values, dim=16)
    model = make_oracle_model(3, feature_dim=16)
    result = localize_adaloc(article, scorer, model, m=3, aggregation="middle")
    assert [p.label for p in result.predictions] == values
    assert all(len(p.votes) == 1 for p in result.predictions)


def test_adaloc_short_article_single_window():
    article = fake_article(2)
    scorer = StubFeatureScorer([1, 0], dim=16)
    model = make_oracle_model(3, feature_dim=16)
    for aggregation in ("vote", "skip", "middle"):
        result = localize_adaloc(article, scorer, model, m=3, aggregation=aggregation)
        assert [p.label for p in result.predictions] == [1, 0]


def test_adaloc_m_mismatch_errors():
    article = fake_article(5)
    scorer = StubFeatureScorer([0] * 5, dim=16)
    model = make_oracle_model(3, feature_dim=16)
    with pytest.raises(ValueError, match="m="):
        localize_adaloc(article, scorer, model, m=4)


def test_adaloc_feature_dim_mismatch_errors():
    article = fake_article(5)
    scorer = StubFeatureScorer([0] * 5, dim=8)
    model = make_oracle_model(3, feature_dim=16)
    with pytest.raises(ValueError, match="feature"):
        localize_adaloc(article, scorer, model, m=3)


def test_adaloc_unknown_aggregation_errors():
    article = fake_article(5)
    scorer = StubFeatureScorer([0] * 5, dim=16)
    model = make_oracle_model(3, feature_dim=16)
    with pytest.raises(ValueError, match="aggregation"):
        localize_adaloc(article, scorer, model, m=3, aggregation="mean")


def test_rerun_determinism(articles):
    scorer = OracleScorer(articles)
    feature_scorer = OracleFeatureScorer(articles, dim=32)
    model = make_oracle_model(3, feature_dim=32)
    article = articles[0]
    assert localize_vote(article, scorer, m=3) == localize_vote(article, scorer, m=3)
    assert localize_adaloc(article, feature_scorer, model, m=3) == localize_adaloc(
        article, feature_scorer, model, m=3
    )
