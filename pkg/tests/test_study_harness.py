"""Tests for the training-set-size study."""

import io

import numpy as np
import pandas as pd
import pytest

from biped_hflc.config import SweepConfig, TrainConfig
from biped_hflc.errors import InvalidArgumentError
from biped_hflc.fuzzy_core import eval_fis
from biped_hflc.hflc_hierarchy import rule_count_report
from biped_hflc.report_generator import render_study_report
from biped_hflc.study_harness import (
    ERROR_COLUMNS,
    SweepEntry,
    SweepResult,
    best_sizes,
    export_error_table,
    export_surface,
    format_error_table,
    run_sweep,
)


@pytest.fixture(scope="module")
def small_sweep():
    """Two-size sweep with short training."""
    config = SweepConfig(sizes=[10, 20], test_size=25, train_config=TrainConfig(epochs=2))
    return run_sweep(config)


class TestRunSweep:
    """Test sweep execution."""

    def test_entry_completeness(self, small_sweep):
        """Test one entry per (model, size) pair."""
        assert len(small_sweep.entries) == 16
        assert small_sweep.sizes == [10, 20]
        assert ("HFLC3", 1, 20) in small_sweep.entries

    def test_errors_finite_and_non_negative(self, small_sweep):
        """Test every recorded error is a finite non-negative number."""
        for entry in small_sweep.entries.values():
            assert all(np.isfinite(v) and v >= 0 for v in entry)

    def test_rmse_consistent_with_cumulative(self, small_sweep):
        """Test RMSE derives from cumulative SE over the shared test set."""
        for entry in small_sweep.entries.values():
            assert entry.rmse == pytest.approx(np.sqrt(entry.cumulative_se / 25))

    def test_metadata(self, small_sweep):
        """Test seeds are recorded and kept apart."""
        assert small_sweep.metadata["train_seeds"] == {"10": 10, "20": 20}
        assert small_sweep.metadata["test_seed"] == 1
        assert "timestamp" in small_sweep.metadata

    def test_deterministic(self, small_sweep):
        """Test rerunning gives identical entries."""
        config = SweepConfig(sizes=[10, 20], test_size=25, train_config=TrainConfig(epochs=2))

        assert run_sweep(config).entries == small_sweep.entries

    def test_parallel_matches_sequential(self, small_sweep):
        """Test parallel training reproduces the sequential result."""
        config = SweepConfig(sizes=[10, 20], test_size=25, train_config=TrainConfig(epochs=2), max_workers=3)

        assert export_error_table(run_sweep(config)) == export_error_table(small_sweep)

    @pytest.mark.slow
    def test_thirty_samples_beat_ten(self):
        """Test size 30 is no worse than size 10 and accurate for the left-leg controllers."""
        result = run_sweep(SweepConfig())

        assert len(result.entries) == 40
        for controller, output in (("HFLC1", 0), ("HFLC3", 0), ("HFLC3", 1), ("HFLC5", 0)):
            series = result.series(controller, output)
            assert series[30].cumulative_se <= series[10].cumulative_se
            assert series[30].rmse < 1e-2


class TestErrorTable:
    """Test error table export."""

    def test_header_and_rows(self, small_sweep):
        """Test header and one line per entry."""
        text = export_error_table(small_sweep)
        lines = text.split("\n")

        assert lines[0] == "controller,output,size,cumulative_se,rmse,train_se"
        assert len(text.splitlines()) == 17
        assert text.endswith("\n") and "\r" not in text

    def test_sorted(self, small_sweep):
        """Test rows sort by controller, output, size."""
        frame = pd.read_csv(io.StringIO(export_error_table(small_sweep)))
        keys = list(zip(frame["controller"], frame["output"], frame["size"]))

        assert keys == sorted(keys)

    def test_byte_identical(self, small_sweep):
        """Test re-export gives the same text."""
        assert export_error_table(small_sweep) == export_error_table(small_sweep)

    def test_parse_back(self, small_sweep):
        """Test numbers survive the printed precision."""
        frame = pd.read_csv(io.StringIO(export_error_table(small_sweep)))

        assert list(frame.columns) == list(ERROR_COLUMNS)
        for row in frame.itertuples(index=False):
            entry = small_sweep.entries[(row.controller, row.output, row.size)]
            assert row.cumulative_se == pytest.approx(entry.cumulative_se, rel=1e-11, abs=1e-300)
            assert row.rmse == pytest.approx(entry.rmse, rel=1e-11, abs=1e-300)

    def test_empty(self):
        """Test an empty table is refused."""
        with pytest.raises(InvalidArgumentError):
            format_error_table({})


class TestSurface:
    """Test response-surface export."""

    def test_minimal_grid(self, constant_fis_factory):
        """Test resolution 2 gives header plus four rows."""
        text = export_surface(constant_fis_factory(["a", "b"], "y", 0.5), 0, 1, {}, 2)

        assert text.splitlines()[0] == "xi,xj,y"
        assert len(text.splitlines()) == 5

    def test_constant_column(self, constant_fis_factory):
        """Test a constant FIS gives a constant y column."""
        text = export_surface(constant_fis_factory(["a", "b", "c"], "y", 0.5), 0, 2, {1: 0.0}, 4)
        frame = pd.read_csv(io.StringIO(text))

        np.testing.assert_allclose(frame["y"], 0.5, atol=1e-15)

    def test_rows_match_evaluation(self, fis_factory):
        """Test each exported row matches a direct evaluation."""
        fis = fis_factory([3, 2, 2], seed=6)
        frame = pd.read_csv(io.StringIO(export_surface(fis, 0, 1, {2: 0.3}, 7)), float_precision="round_trip")

        for row in frame.itertuples(index=False):
            assert row.y == eval_fis(fis, [row.xi, row.xj, 0.3])


class TestBestSizes:
    """Test best-size selection."""

    def test_lowest_error_wins(self):
        """Test the size with the lowest test error is chosen."""
        result = SweepResult(entries={
            ("HFLC1", 0, 10): SweepEntry(2.0, 0.1, 0.0),
            ("HFLC1", 0, 30): SweepEntry(0.5, 0.05, 0.0),
            ("HFLC1", 0, 40): SweepEntry(25.0, 0.9, 0.0),
        })

        assert best_sizes(result) == {("HFLC1", 0): 30}

    def test_tie_goes_to_smaller(self):
        """Test ties resolve to the smaller size."""
        result = SweepResult(entries={
            ("HFLC5", 0, 60): SweepEntry(1.0, 0.1, 0.0),
            ("HFLC5", 0, 30): SweepEntry(1.0, 0.1, 0.0),
        })

        assert best_sizes(result) == {("HFLC5", 0): 30}


class TestStudyReport:
    """Test study report rendering."""

    def test_markdown(self, small_sweep):
        """Test the markdown report lists each controller and the rule economy."""
        rules = rule_count_report(small_sweep.hierarchies[10])

        text = render_study_report(small_sweep, rules)

        assert text.startswith("# Training-set-size study")
        assert "### HFLC1 → gamma_left" in text
        assert "### HFLC4 → ycr" in text
        assert "| 2 | 32 | 128 |" in text
        assert "≈25" in text

    def test_html(self, small_sweep):
        """Test HTML output renders the tables."""
        text = render_study_report(small_sweep, output_format="html")

        assert text.startswith("<!DOCTYPE html>")
        assert "<table>" in text
        assert "<h3>HFLC5 → beta_left</h3>" in text

    def test_unknown_format(self, small_sweep):
        """Test unsupported formats are rejected."""
        with pytest.raises(InvalidArgumentError, match="Unsupported"):
            render_study_report(small_sweep, output_format="confluence")
