"""Tests for benchmark summaries, bins, subsets, and correlations."""
from __future__ import annotations

import numpy as np
import pytest

from irtbench.analysis import (
    AGGREGATE_COLUMNS,
    BIN_KEYS,
    DISCRIMINATION_NOTE,
    SUBSET_STRATEGIES,
    BenchmarkTable,
    DatasetSummary,
    benchmark_percentages,
    bin_probability,
    correlate_metadata,
    load_fixture,
    load_fixture_rows,
    make_bins,
    pearson,
    subset_strategy,
    summarize_dataset,
)
from irtbench.errors import DomainError, EmptyInput, NotFound
from irtbench.irt import FitReport, IrtModel, ItemParams
from irtbench.responses import DatasetMeta


def summary(dataset_id, mean_b=0.0, mean_a=1.0, std_b=0.0, std_a=0.0, **kw) -> DatasetSummary:
    return DatasetSummary(
        dataset_id=dataset_id, mean_a=mean_a, mean_b=mean_b, mean_c=kw.get("mean_c", 0.1),
        std_a=std_a, std_b=std_b, std_c=kw.get("std_c", 0.0),
        pct_negative_a=kw.get("pct_negative_a", 0.0),
    )


def meta_for(dataset_id, **overrides) -> DatasetMeta:
    values = {
        "number_of_classes": 2,
        "number_of_instances": 100,
        "number_of_features": 10,
        "class_entropy": 1.0,
        "dimensionality": 0.1,
        "pct_missing_instances": 0.0,
        "majority_class_pct": 60.0,
        "minority_class_pct": 40.0,
    }
    values.update(overrides)
    return DatasetMeta(dataset_id=dataset_id, **values)


class TestSummarizeDataset:
    def test_population_statistics(self):
        """Means and population (not sample) standard deviations."""
        model = IrtModel(
            dataset_id="d",
            items=[ItemParams(2.0, 1.0, 0.1), ItemParams(-1.0, 3.0, 0.3)],
            abilities={"r": 0.0},
            fit_report=FitReport(1, -1.0, True, ()),
        )
        s = summarize_dataset(model)
        assert s.mean_a == pytest.approx(0.5)
        assert s.mean_b == pytest.approx(2.0)
        assert s.std_b == pytest.approx(1.0)  # population std of {1, 3}
        assert s.std_a == pytest.approx(1.5)
        assert s.pct_negative_a == pytest.approx(0.5)


class TestBenchmarkTable:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(DomainError):
            BenchmarkTable([summary("d"), summary("d")])

    def test_metadata_must_reference_known_datasets(self):
        with pytest.raises(DomainError):
            BenchmarkTable([summary("d")], metadata={"other": meta_for("other")})


class TestMakeBins:
    """Contiguous chunks after a stable descending sort on the key."""

    def test_identical_values_give_identical_bins(self):
        """Twelve identical datasets split into bins with equal means."""
        table = BenchmarkTable([summary(f"d{i:02d}", mean_b=0.5) for i in range(12)])
        bins = make_bins(table, key="mean_b", n_bins=4)
        assert [len(b.dataset_ids) for b in bins] == [3, 3, 3, 3]
        assert all(b.mean_difficulty == pytest.approx(0.5) for b in bins)

    def test_descending_order_with_stable_ties(self):
        """The sort is descending and ties keep table order."""
        table = BenchmarkTable(
            [
                summary("first_tie", mean_b=1.0),
                summary("top", mean_b=2.0),
                summary("second_tie", mean_b=1.0),
                summary("bottom", mean_b=0.0),
            ]
        )
        bins = make_bins(table, key="mean_b", n_bins=2)
        assert bins[0].dataset_ids == ("top", "first_tie")
        assert bins[1].dataset_ids == ("second_tie", "bottom")

    def test_remainder_goes_to_final_bins(self):
        """10 datasets in 4 bins chunk as 2, 2, 3, 3."""
        table = BenchmarkTable([summary(f"d{i:02d}", mean_b=float(-i)) for i in range(10)])
        bins = make_bins(table, key="mean_b", n_bins=4)
        assert [len(b.dataset_ids) for b in bins] == [2, 2, 3, 3]
        assert bins[0].dataset_ids == ("d00", "d01")

    def test_bin_means_cover_all_three_parameters(self):
        table = BenchmarkTable(
            [summary("x", mean_b=1.0, mean_a=2.0, mean_c=0.2),
             summary("y", mean_b=0.0, mean_a=4.0, mean_c=0.4)]
        )
        bins = make_bins(table, key="mean_b", n_bins=1)
        assert bins[0].mean_difficulty == pytest.approx(0.5)
        assert bins[0].mean_discrimination == pytest.approx(3.0)
        assert bins[0].mean_guessing == pytest.approx(0.3)

    def test_validation(self):
        table = BenchmarkTable([summary("d")])
        with pytest.raises(DomainError):
            make_bins(table, key="nope", n_bins=1)
        with pytest.raises(DomainError):
            make_bins(table, key="mean_b", n_bins=0)
        with pytest.raises(DomainError):
            make_bins(table, key="mean_b", n_bins=2)
        with pytest.raises(EmptyInput):
            make_bins(BenchmarkTable([]), key="mean_b", n_bins=1)
        assert set(BIN_KEYS) == {"mean_b", "mean_a", "std_b", "std_a"}


class TestBenchmarkPercentages:
    def test_inequalities_are_strict(self):
        """A dataset sitting exactly on a threshold does not count."""
        table = BenchmarkTable(
            [
                summary("at_zero", mean_b=0.0, mean_a=0.0),
                summary("above", mean_b=1.5, mean_a=1.0),
                summary("below", mean_b=-1.0, mean_a=-0.5),
            ]
        )
        pct = benchmark_percentages(table)
        assert pct["pct_b_above_0"] == pytest.approx(1 / 3)
        assert pct["pct_b_above_1"] == pytest.approx(1 / 3)
        assert pct["pct_positive_a"] == pytest.approx(1 / 3)

    def test_empty_table_rejected(self):
        with pytest.raises(EmptyInput):
            benchmark_percentages(BenchmarkTable([]))


class TestSubsetStrategy:
    def test_difficulty_ascending_orders_whole_table(self):
        table = BenchmarkTable(
            [summary("hard", mean_b=2.0), summary("easy", mean_b=-2.0),
             summary("mid", mean_b=0.0)]
        )
        assert subset_strategy(table, "difficulty_asc") == ["easy", "mid", "hard"]

    def test_low_std_half_takes_smallest(self):
        """Four datasets: the low-spread half is the two smallest std_b,
        ascending."""
        table = BenchmarkTable(
            [summary("w", std_b=0.9), summary("x", std_b=0.1),
             summary("y", std_b=0.5), summary("z", std_b=0.7)]
        )
        assert subset_strategy(table, "low_std_b") == ["x", "y"]
        assert subset_strategy(table, "high_std_b") == ["z", "w"]

    def test_odd_count_low_half_takes_extra(self):
        table = BenchmarkTable(
            [summary(f"d{i}", std_a=float(i)) for i in range(5)]
        )
        assert subset_strategy(table, "low_std_a") == ["d0", "d1", "d2"]
        assert subset_strategy(table, "high_std_a") == ["d3", "d4"]

    def test_ties_break_by_dataset_id(self):
        table = BenchmarkTable(
            [summary("b_name", mean_b=1.0), summary("a_name", mean_b=1.0)]
        )
        assert subset_strategy(table, "difficulty_asc") == ["a_name", "b_name"]

    def test_unknown_strategy_rejected(self):
        with pytest.raises(DomainError):
            subset_strategy(BenchmarkTable([summary("d")]), "alphabetical")
        assert len(SUBSET_STRATEGIES) == 6


class TestPearson:
    def test_affine_relations_are_perfect(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert pearson(x, [3.0 * v + 1.0 for v in x]) == pytest.approx(1.0)
        assert pearson(x, [-2.0 * v + 5.0 for v in x]) == pytest.approx(-1.0)

    def test_constant_column_is_undefined(self):
        assert pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) is None

    def test_independent_noise_stays_moderate(self):
        """Independent draws over 200 points keep |r| well below 0.8."""
        rng = np.random.default_rng(71)
        for _ in range(20):
            x = rng.standard_normal(200)
            y = rng.standard_normal(200)
            r = pearson(x, y)
            assert abs(r) < 0.8


class TestCorrelateMetadata:
    def test_needs_three_datasets_with_metadata(self):
        table = BenchmarkTable(
            [summary("a"), summary("b"), summary("c")],
            metadata={"a": meta_for("a"), "b": meta_for("b")},
        )
        with pytest.raises(DomainError):
            correlate_metadata(table)

    def test_constant_columns_flagged_and_none(self):
        table = BenchmarkTable(
            [
                summary("a", mean_b=0.1, mean_a=1.0),
                summary("b", mean_b=0.5, mean_a=2.0),
                summary("c", mean_b=0.9, mean_a=3.0),
            ],
            metadata={
                "a": meta_for("a", number_of_instances=10),
                "b": meta_for("b", number_of_instances=20),
                "c": meta_for("c", number_of_instances=30),
            },
        )
        result = correlate_metadata(table)
        # every dataset used the same defaults for features: constant
        assert "number_of_features" in result.constant_columns
        assert result.entries["number_of_features"]["mean_b"] is None
        # std_b is zero-filled in all summaries: also constant
        assert "std_b" in result.constant_columns
        assert result.n_datasets == 3
        # instances grow with difficulty here: perfect correlation
        assert result.entries["number_of_instances"]["mean_b"] == pytest.approx(1.0)
        assert set(result.entries["number_of_instances"]) == set(AGGREGATE_COLUMNS)


class TestBinProbability:
    @staticmethod
    def flat_model(dataset_id, p_correct):
        """One-item model whose flat curve pins the mean probability."""
        c = 2 * p_correct - 1  # (1 + c) / 2 == p_correct for a == 0
        return IrtModel(
            dataset_id=dataset_id,
            items=[ItemParams(0.0, 0.0, c)],
            abilities={"clf": 0.0},
            fit_report=FitReport(1, -1.0, True, ()),
        )

    def test_orders_by_metadata_and_averages(self):
        """Datasets are binned ascending by the metadata key, and each
        bin's value is the mean correct probability inside it."""
        models = {
            "small": self.flat_model("small", 0.60),
            "large": self.flat_model("large", 0.70),
        }
        table = BenchmarkTable(
            [summarize_dataset(models["small"]), summarize_dataset(models["large"])],
            metadata={
                "small": meta_for("small", number_of_instances=10),
                "large": meta_for("large", number_of_instances=1000),
            },
        )
        bins = bin_probability(table, models, "number_of_instances", 2, ["clf"])
        assert bins[0].dataset_ids == ("small",)
        assert bins[1].dataset_ids == ("large",)
        assert bins[0].probabilities["clf"] == pytest.approx(0.60)
        assert bins[1].probabilities["clf"] == pytest.approx(0.70)

    def test_missing_pieces_are_named(self):
        models = {"d": self.flat_model("d", 0.6)}
        table = BenchmarkTable(
            [summarize_dataset(models["d"])], metadata={"d": meta_for("d")}
        )
        with pytest.raises(DomainError):
            bin_probability(table, models, "not_a_field", 1, ["clf"])
        with pytest.raises(NotFound):
            bin_probability(table, {}, "number_of_instances", 1, ["clf"])
        with pytest.raises(NotFound):
            bin_probability(table, models, "number_of_instances", 1, ["ghost"])


class TestBundledFixture:
    """The packaged 60-dataset parameter table."""

    def test_row_count_and_unique_ids(self):
        rows = load_fixture_rows()
        assert len(rows) == 60
        ids = [r["dataset"] for r in rows]
        assert len(set(ids)) == 60

    def test_published_bin_column_matches_recomputed_bins(self):
        """Re-binning the table by difficulty reproduces the stored bin
        labels exactly."""
        rows = load_fixture_rows()
        table = load_fixture()
        bins = make_bins(table, key="mean_b", n_bins=6)
        recomputed = {
            dataset_id: b.index for b in bins for dataset_id in b.dataset_ids
        }
        stored = {r["dataset"]: r["bin"] for r in rows}
        assert recomputed == stored

    def test_difficulty_ordering_endpoints(self):
        """Ascending difficulty starts at the easiest dataset and ends at
        the hardest."""
        order = subset_strategy(load_fixture(), "difficulty_asc")
        assert order[0] == "PhishingWebsites"
        assert order[-1] == "mfeat-morphological"

    def test_composition_fractions(self):
        pct = benchmark_percentages(load_fixture())
        assert pct["pct_b_above_0"] == pytest.approx(10 / 60)
        assert pct["pct_b_above_1"] == pytest.approx(2 / 60)
        assert pct["pct_positive_a"] == pytest.approx(55 / 60)

    def test_discrimination_note_carries_both_sets_of_figures(self):
        for fragment in ("-0.634", "12.81", "-2.44", "20.09"):
            assert fragment in DISCRIMINATION_NOTE
