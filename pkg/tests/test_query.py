import numpy as np
import pytest

from semsplat.bank import build_bank, label_image
from semsplat.query import (
    QuerySpec,
    RelevancyMap,
    localize,
    relevancy,
    relevancy_map,
    segment,
    segment_multiclass,
)
from semsplat.scene import Embedding, FeatureMap, LabelMap


def emb(*values):
    return Embedding(np.asarray(values, dtype=np.float64))


def spec(query, canon, threshold=0.5):
    return QuerySpec(
        query_embedding=query, canonical_embeddings=tuple(canon), threshold=threshold
    )


class TestQuerySpec:
    def test_sentinel_query_rejected(self):
        with pytest.raises(ValueError):
            spec(emb(0, 0), [emb(1, 0)])

    def test_sentinel_canonical_rejected(self):
        with pytest.raises(ValueError):
            spec(emb(1, 0), [emb(0, 0)])

    def test_empty_canonical_rejected(self):
        with pytest.raises(ValueError):
            spec(emb(1, 0), [])

    @pytest.mark.parametrize("t", [0.0, 1.0, -0.2])
    def test_threshold_range(self, t):
        with pytest.raises(ValueError):
            spec(emb(1, 0), [emb(0, 1)], threshold=t)


class TestRelevancy:
    def test_equal_logits_give_half(self):
        # view embedding orthogonal to both query and canon: a = b = 0
        q = spec(emb(1, 0, 0), [emb(0, 1, 0)])
        assert relevancy([emb(0, 0, 1)], q) == pytest.approx(0.5, abs=1e-15)

    def test_hand_computed_logistic(self):
        # a = 1.0, canon logits {0.0, 0.5}: min term uses b = 0.5
        view = emb(1, 0, 0)
        q = spec(emb(1, 0, 0), [emb(0, 1, 0), Embedding(np.array([0.5, 0, 0]) + np.array([0, np.sqrt(0.75), 0]))])
        want = 1.0 / (1.0 + np.exp(0.5 - 1.0))
        assert relevancy([view], q) == pytest.approx(want, abs=1e-12)
        assert want == pytest.approx(0.62246, abs=1e-5)

    def test_min_over_canonicals(self):
        view = emb(1, 0, 0)
        # canon logits 0.0 and 0.9: the harder canon (0.9) decides the score
        hard = Embedding(np.array([0.9, np.sqrt(1 - 0.81), 0.0]))
        q = spec(emb(1, 0, 0), [emb(0, 1, 0), hard])
        assert relevancy([view], q) == pytest.approx(1.0 / (1.0 + np.exp(0.9 - 1.0)), rel=1e-12)

    def test_max_over_views(self):
        good, bad = emb(1, 0, 0), emb(0, 1, 0)
        q = spec(emb(1, 0, 0), [emb(0, 0, 1)])
        both = relevancy([bad, good], q)
        assert both == pytest.approx(relevancy([good], q), abs=1e-15)
        assert both > relevancy([bad], q)

    def test_sentinel_views_excluded(self):
        q = spec(emb(1, 0, 0), [emb(0, 1, 0)])
        with_sentinel = relevancy([emb(0, 0, 0), emb(1, 0, 0)], q)
        assert with_sentinel == pytest.approx(relevancy([emb(1, 0, 0)], q), abs=1e-15)

    def test_all_sentinel_scores_zero(self):
        q = spec(emb(1, 0, 0), [emb(0, 1, 0)])
        assert relevancy([emb(0, 0, 0), emb(0, 0, 0)], q) == 0.0

    def test_shift_invariance_of_pairwise_softmax(self):
        # adding a common component along the view to query and canon shifts
        # both logits equally and must not change the score
        rng = np.random.default_rng(0)
        for _ in range(20):
            view = rng.normal(size=4)
            view /= np.linalg.norm(view)
            qv, cv = rng.normal(size=4), rng.normal(size=4)
            base = relevancy([Embedding(view)], spec(Embedding(qv), [Embedding(cv)]))
            shift = rng.uniform(-2, 2) * view
            shifted = relevancy(
                [Embedding(view)], spec(Embedding(qv + shift), [Embedding(cv + shift)])
            )
            assert shifted == pytest.approx(base, abs=1e-12)

    def test_score_in_open_unit_interval(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            views = [Embedding(rng.normal(size=3)) for _ in range(3)]
            q = spec(Embedding(rng.normal(size=3)), [Embedding(rng.normal(size=3))])
            s = relevancy(views, q)
            assert 0.0 < s < 1.0


def two_object_fixture():
    maps = [LabelMap(np.array([[1, 1, 0], [2, 2, 0]], dtype=np.uint16))]
    e1, e2 = emb(1, 0, 0, 0), emb(0, 1, 0, 0)
    bank = build_bank(maps, {(0, 1): e1, (0, 2): e2}, seed=0, dim=4)
    fm = label_image(maps[0], bank)
    canon = [emb(0, 0, 1, 0), emb(0, 0, 0, 1)]
    return fm, bank, e1, e2, canon


class TestRelevancyMap:
    def test_matches_per_pixel_brute_force(self):
        fm, bank, e1, e2, canon = two_object_fixture()
        q = spec(e1, canon)
        rm = relevancy_map(fm, bank, q, backend="numpy")
        for y in range(2):
            for x in range(3):
                label = [[1, 1, 0], [2, 2, 0]][y][x]
                want = 0.0 if label == 0 else relevancy(bank.entries[label - 1].views, q)
                assert rm.scores[y, x] == pytest.approx(want, abs=1e-12)

    def test_background_scores_zero(self):
        fm, bank, e1, _, canon = two_object_fixture()
        rm = relevancy_map(fm, bank, spec(e1, canon), backend="numpy")
        assert rm.scores[0, 2] == 0.0 and rm.scores[1, 2] == 0.0

    def test_matching_object_outscores_other(self):
        fm, bank, e1, _, canon = two_object_fixture()
        rm = relevancy_map(fm, bank, spec(e1, canon), backend="numpy")
        assert rm.scores[0, 0] > rm.scores[1, 0]


class TestLocalize:
    def test_unique_max(self):
        rm = RelevancyMap(np.array([[0.1, 0.2], [0.9, 0.3]]))
        assert localize(rm) == (0, 1)

    def test_row_major_tie_break(self):
        rm = RelevancyMap(np.array([[0.5, 0.9], [0.9, 0.9]]))
        assert localize(rm) == (1, 0)


class TestSegment:
    def test_strictly_above_threshold(self):
        rm = RelevancyMap(np.array([[0.5, 0.50001], [0.2, 0.9]]))
        mask = segment(rm, threshold=0.5)
        assert mask.tolist() == [[False, True], [False, True]]

    def test_bad_threshold_rejected(self):
        with pytest.raises(ValueError):
            segment(RelevancyMap(np.zeros((1, 1))), threshold=1.0)


class TestSegmentMulticlass:
    def test_orthogonal_queries_recover_labels(self):
        fm, bank, e1, e2, canon = two_object_fixture()
        classes = segment_multiclass(
            fm, bank, [spec(e1, canon), spec(e2, canon)], backend="numpy"
        )
        assert classes.tolist() == [[1, 1, 0], [2, 2, 0]]

    def test_tie_goes_to_smallest_query_index(self):
        fm, bank, e1, _, canon = two_object_fixture()
        classes = segment_multiclass(fm, bank, [spec(e1, canon), spec(e1, canon)], backend="numpy")
        assert set(classes[0].tolist()) == {1, 0}

    def test_empty_query_list_rejected(self):
        fm, bank, *_ = two_object_fixture()
        with pytest.raises(ValueError):
            segment_multiclass(fm, bank, [], backend="numpy")


class TestFastPathEquivalence:
    def test_random_triples_match_brute_force(self):
        rng = np.random.default_rng(7)
        for trial in range(20):
            n = int(rng.integers(1, 12))
            labels = rng.integers(0, n + 1, size=(9, 11)).astype(np.uint16)
            labels.flat[: n + 1] = np.arange(n + 1)  # ensure contiguity
            maps = [LabelMap(labels)]
            embeddings = {}
            for label in range(1, n + 1):
                for v in range(2):
                    if rng.random() < 0.8:
                        embeddings[(v, label)] = Embedding(rng.normal(size=8))
            bank = build_bank(maps, embeddings, seed=trial, dim=8, num_views=2)
            fm = label_image(maps[0], bank)
            q = spec(
                Embedding(rng.normal(size=8)),
                [Embedding(rng.normal(size=8)) for _ in range(3)],
            )
            rm = relevancy_map(fm, bank, q, backend="numpy")
            for y in range(9):
                for x in range(11):
                    label = int(labels[y, x])
                    want = 0.0 if label == 0 else relevancy(bank.entries[label - 1].views, q)
                    assert abs(rm.scores[y, x] - want) <= 1e-6
