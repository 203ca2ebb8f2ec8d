import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semsplat.association import (
    ReplicatedSequence,
    compact_labels,
    consistency_report,
    vote,
)
from semsplat.scene import LabelMap


def lm(arr):
    return LabelMap(np.asarray(arr, dtype=np.uint16))


def seq_from_pixel_lists(*views):
    """Each view is a list of replicate label values for a single pixel."""
    return ReplicatedSequence(
        maps=tuple(tuple(lm([[v]]) for v in view) for view in views)
    )


class TestVote:
    def test_strict_majority(self):
        out = vote(seq_from_pixel_lists([3, 3, 3, 7, 7]))
        assert out[0].labels[0, 0] == 3

    def test_tie_goes_to_smallest_label(self):
        out = vote(seq_from_pixel_lists([7, 7, 3, 3]))
        assert out[0].labels[0, 0] == 3

    def test_unanimity_identity(self):
        m = lm([[5, 5], [5, 0]])
        seq = ReplicatedSequence(maps=((m, m, m, m, m),))
        out = vote(seq)
        assert np.array_equal(out[0].labels, m.labels)

    def test_replicate_permutation_invariance(self):
        rng = np.random.default_rng(0)
        maps = [lm(rng.integers(0, 5, (8, 8))) for _ in range(5)]
        base = vote(ReplicatedSequence(maps=(tuple(maps),)))[0]
        for _ in range(5):
            perm = rng.permutation(5)
            shuffled = vote(ReplicatedSequence(maps=(tuple(maps[i] for i in perm),)))[0]
            assert np.array_equal(shuffled.labels, base.labels)

    def test_no_invented_labels(self):
        rng = np.random.default_rng(1)
        maps = [lm(rng.integers(0, 9, (6, 6))) for _ in range(5)]
        out = vote(ReplicatedSequence(maps=(tuple(maps),)))[0]
        stack = np.stack([m.labels for m in maps])
        assert np.all((out.labels[None] == stack).any(axis=0))

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=9))
    @settings(max_examples=100, deadline=None)
    def test_pixel_mode_matches_counting_oracle(self, values):
        out = vote(seq_from_pixel_lists(values))[0].labels[0, 0]
        counts = {v: values.count(v) for v in set(values)}
        best = max(counts.values())
        assert out == min(v for v, c in counts.items() if c == best)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ValueError):
            ReplicatedSequence(maps=((lm([[1]]), lm([[1, 2]])),))


class TestCompactLabels:
    def test_first_appearance_order(self):
        maps = [lm([[0, 7], [42, 7]])]
        remapped, table = compact_labels(maps)
        assert table == {7: 1, 42: 2}
        assert np.array_equal(remapped[0].labels, [[0, 1], [2, 1]])

    def test_already_contiguous_identity(self):
        maps = [lm([[0, 1], [2, 1]])]
        remapped, table = compact_labels(maps)
        assert table == {1: 1, 2: 2}
        assert np.array_equal(remapped[0].labels, maps[0].labels)

    def test_disjoint_views(self):
        maps = [lm([[5]]), lm([[9]])]
        remapped, table = compact_labels(maps)
        assert table == {5: 1, 9: 2}
        assert remapped[0].labels[0, 0] == 1 and remapped[1].labels[0, 0] == 2

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        maps = [lm(rng.choice([0, 3, 11, 40], size=(5, 5))) for _ in range(2)]
        once, _ = compact_labels(maps)
        twice, table = compact_labels(once)
        for a, b in zip(once, twice):
            assert np.array_equal(a.labels, b.labels)
        assert all(old == new for old, new in table.items())

    def test_zero_preserved(self):
        remapped, table = compact_labels([lm([[0, 0]])])
        assert table == {}
        assert not remapped[0].labels.any()


class TestConsistencyReport:
    def test_single_view_counts(self):
        report = consistency_report([lm([[1, 1], [1, 0]])])
        assert report == {1: [3]}

    def test_presence_across_views(self):
        report = consistency_report([lm([[2]]), lm([[0]])])
        assert report[2] == [1, 0]

    def test_matches_histogram_oracle(self):
        rng = np.random.default_rng(3)
        maps = [lm(rng.integers(0, 6, (10, 10))) for _ in range(3)]
        report = consistency_report(maps)
        for label, counts in report.items():
            for v, m in enumerate(maps):
                assert counts[v] == int((m.labels == label).sum())
        # every used non-zero label is present in the report
        used = set()
        for m in maps:
            used |= set(np.unique(m.labels).tolist())
        assert set(report) == used - {0}
