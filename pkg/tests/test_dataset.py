import numpy as np
import pytest

from dtmbo import (
    FeatureMatrix,
    LabelPartition,
    ParseError,
    class_stats,
    load_features,
    load_labels,
    load_seeds,
    make_partition,
    standardize,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadFeatures:
    def test_plain_csv(self, tmp_path):
        fm = load_features(write(tmp_path, "a.csv", "1,2\n3,4\n5,6\n"))
        assert (fm.n_samples, fm.n_features) == (3, 2)
        np.testing.assert_array_equal(fm.values, [[1, 2], [3, 4], [5, 6]])

    def test_header_skipped(self, tmp_path):
        fm = load_features(write(tmp_path, "a.csv", "f1,f2\n1,2\n3,4\n"))
        assert (fm.n_samples, fm.n_features) == (2, 2)

    def test_ragged_row_reports_index(self, tmp_path):
        with pytest.raises(ParseError, match="row 2"):
            load_features(write(tmp_path, "a.csv", "1,2\n3\n"))

    def test_non_numeric_cell_reports_coordinates(self, tmp_path):
        with pytest.raises(ParseError, match="row 2, column 2"):
            load_features(write(tmp_path, "a.csv", "1,2\n3,oops\n"))

    def test_nan_cell_rejected(self, tmp_path):
        with pytest.raises(ParseError, match="row 2, column 1"):
            load_features(write(tmp_path, "a.csv", "1,2\nnan,4\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError, match="empty"):
            load_features(write(tmp_path, "a.csv", ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(ParseError, match="no data rows"):
            load_features(write(tmp_path, "a.csv", "f1,f2\n"))

    def test_tsv(self, tmp_path):
        fm = load_features(write(tmp_path, "a.tsv", "1\t2\n3\t4\n"), fmt="tsv")
        assert fm.n_samples == 2

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError, match="format"):
            load_features(write(tmp_path, "a.csv", "1\n"), fmt="psv")

    def test_row_order_preserved(self, tmp_path):
        fm = load_features(write(tmp_path, "a.csv", "9\n1\n5\n"))
        np.testing.assert_array_equal(fm.values.ravel(), [9, 1, 5])


class TestLoadLabels:
    def test_integer_labels_used_directly(self, tmp_path):
        labels, names = load_labels(write(tmp_path, "l.csv", "0\n1\n0\n"))
        np.testing.assert_array_equal(labels, [0, 1, 0])
        assert names == ["0", "1"]

    def test_names_mapped_by_first_appearance(self, tmp_path):
        labels, names = load_labels(write(tmp_path, "l.csv", "Inactive\nActive\nInactive\n"))
        np.testing.assert_array_equal(labels, [0, 1, 0])
        assert names == ["Inactive", "Active"]

    def test_noncontiguous_integers_remapped(self, tmp_path):
        labels, names = load_labels(write(tmp_path, "l.csv", "5\n7\n5\n"))
        np.testing.assert_array_equal(labels, [0, 1, 0])
        assert names == ["5", "7"]

    def test_empty(self, tmp_path):
        with pytest.raises(ParseError, match="empty"):
            load_labels(write(tmp_path, "l.csv", "\n\n"))


class TestLoadSeeds:
    def test_roundtrip(self, tmp_path):
        assert load_seeds(write(tmp_path, "s.txt", "3\n1\n4\n")) == [3, 1, 4]

    def test_junk_line(self, tmp_path):
        with pytest.raises(ParseError, match="line 2"):
            load_seeds(write(tmp_path, "s.txt", "3\nx\n"))

    def test_negative_rejected(self, tmp_path):
        with pytest.raises(ParseError, match="nonnegative"):
            load_seeds(write(tmp_path, "s.txt", "-1\n"))


class TestStandardize:
    def test_two_point_column(self):
        out = standardize(FeatureMatrix([[1.0], [3.0]]))
        np.testing.assert_allclose(out.values.ravel(), [-1 / np.sqrt(2), 1 / np.sqrt(2)],
                                   atol=1e-12)

    def test_constant_column_zeroed(self):
        out = standardize(FeatureMatrix([[5.0], [5.0], [5.0]]))
        np.testing.assert_array_equal(out.values, np.zeros((3, 1)))

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        fm = FeatureMatrix(rng.normal(size=(40, 6)) * 3 + 1)
        once = standardize(fm)
        twice = standardize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-9)

    def test_column_invariants(self):
        rng = np.random.default_rng(1)
        out = standardize(FeatureMatrix(rng.normal(size=(100, 5)) * 10 - 4))
        assert np.abs(out.values.mean(axis=0)).max() < 1e-9
        assert np.abs(out.values.std(axis=0, ddof=1) - 1).max() < 1e-6

    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="at least 2"):
            standardize(FeatureMatrix([[1.0, 2.0]]))


class TestFeatureMatrix:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN or Inf"):
            FeatureMatrix([[1.0, np.nan]])

    def test_immutable(self):
        fm = FeatureMatrix([[1.0, 2.0]])
        with pytest.raises(ValueError):
            fm.values[0, 0] = 9


class TestMakePartition:
    def test_counts_and_determinism(self):
        labels = [0] * 5 + [1] * 5
        part = make_partition(labels, 0.8, seed=7)
        assert part.n_labeled == 8
        again = make_partition(labels, 0.8, seed=7)
        np.testing.assert_array_equal(part.labeled_mask, again.labeled_mask)

    def test_coverage_of_rare_class(self):
        labels = [0] * 19 + [1]
        part = make_partition(labels, 0.8, seed=3)
        assert part.labeled_mask[19]

    def test_round_half_up_on_842(self):
        labels = [0] * 795 + [1] * 47
        part = make_partition(labels, 0.8, seed=0)
        assert part.n_labeled == 674  # round(673.6)

    def test_distinct_masks_across_seeds(self):
        labels = [0] * 30 + [1] * 10
        masks = {make_partition(labels, 0.8, seed=s).labeled_mask.tobytes() for s in range(50)}
        assert len(masks) >= 2

    def test_missing_class_error_names_class(self):
        labels = [0] * 50 + [1]
        with pytest.raises(ValueError, match="class 1"):
            # seed 0's first draw misses the single class-1 point
            make_partition(labels, 0.5, seed=0, max_attempts=1)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="2 classes"):
            make_partition([0, 0, 0], 0.5, seed=0)

    def test_fraction_bounds(self):
        with pytest.raises(ValueError, match="labeled_fraction"):
            make_partition([0, 1], 1.0, seed=0)

    def test_fraction_too_small_for_classes(self):
        with pytest.raises(ValueError, match="fewer than"):
            make_partition([0, 1, 2, 3] * 5, 0.05, seed=0)


class TestClassStats:
    @staticmethod
    def partition_for(counts):
        labels = np.repeat(np.arange(len(counts)), counts)
        mask = np.ones(labels.size, dtype=bool)
        mask[-1] = False
        return LabelPartition(labels, mask, seed=0, n_classes=len(counts))

    def test_imbalance_twenty(self):
        stats = class_stats(self.partition_for([2000, 100]))
        assert stats.imbalance_ratio == 20.0
        assert stats.minority_index == 1

    def test_balanced_tie_break(self):
        stats = class_stats(self.partition_for([5, 5]))
        assert stats.imbalance_ratio == 1.0
        assert stats.minority_index == 0

    def test_drugmatrix_shape(self):
        stats = class_stats(self.partition_for([795, 47]))
        assert round(stats.imbalance_ratio, 1) == 16.9

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 4, size=200)
        labels[:4] = [0, 1, 2, 3]
        mask = np.ones(200, dtype=bool)
        base = class_stats(LabelPartition(labels, mask, seed=0, n_classes=4))
        perm = np.array([2, 0, 3, 1])
        permuted = class_stats(LabelPartition(perm[labels], mask, seed=0, n_classes=4))
        assert permuted.imbalance_ratio == base.imbalance_ratio
