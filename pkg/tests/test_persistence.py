"""Tests for dataset, model and walk-log files."""

import io
import json

import pandas as pd
import pytest

from biped_hflc.errors import DatasetFormatError, ModelFileError, PersistenceIOError
from biped_hflc.fuzzy_core import eval_fis
from biped_hflc.hflc_hierarchy import closed_loop_walk
from biped_hflc.models import GAIT_COLUMNS
from biped_hflc.persistence import (
    WALK_COLUMNS,
    gait_csv_text,
    load_model,
    load_model_file,
    model_file_text,
    read_gait_csv,
    save_model,
    write_gait_csv,
    write_walk_log,
)


class TestGaitCsv:
    """Test gait dataset CSV files."""

    def test_round_trip_exact(self, gait_samples, tmp_path):
        """Test samples read back bit-exactly."""
        path = tmp_path / "gait.csv"
        write_gait_csv(gait_samples, str(path))

        assert read_gait_csv(str(path)) == gait_samples

    def test_header(self, gait_samples):
        """Test the column order."""
        assert gait_csv_text(gait_samples).splitlines()[0] == ",".join(GAIT_COLUMNS)

    def test_deterministic_bytes(self, gait_samples, tmp_path):
        """Test writing twice gives identical files."""
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        write_gait_csv(gait_samples, str(first))
        write_gait_csv(gait_samples, str(second))

        assert first.read_bytes() == second.read_bytes()
        assert b"\r" not in first.read_bytes()

    def test_missing_column(self, gait_samples, tmp_path):
        """Test a missing column is named."""
        path = tmp_path / "gait.csv"
        frame = pd.read_csv(io.StringIO(gait_csv_text(gait_samples)))
        frame.drop(columns=["gamma_left"]).to_csv(path, index=False)

        with pytest.raises(DatasetFormatError, match="gamma_left"):
            read_gait_csv(str(path))

    def test_bad_value(self, gait_samples, tmp_path):
        """Test a non-numeric cell names its row and column."""
        lines = gait_csv_text(gait_samples[:3]).splitlines()
        cells = lines[2].split(",")
        cells[GAIT_COLUMNS.index("ycl")] = "oops"
        lines[2] = ",".join(cells)
        path = tmp_path / "gait.csv"
        path.write_text("\n".join(lines) + "\n")

        with pytest.raises(DatasetFormatError, match="row 2, column ycl"):
            read_gait_csv(str(path))

    def test_empty_file(self, tmp_path):
        """Test an empty file is a format error."""
        path = tmp_path / "gait.csv"
        path.write_text("")

        with pytest.raises(DatasetFormatError):
            read_gait_csv(str(path))

    def test_header_only(self, tmp_path):
        """Test a header-only file holds no samples."""
        path = tmp_path / "gait.csv"
        path.write_text(",".join(GAIT_COLUMNS) + "\n")

        assert read_gait_csv(str(path)) == []

    def test_missing_file(self, tmp_path):
        """Test a missing dataset is an I/O error."""
        with pytest.raises(PersistenceIOError):
            read_gait_csv(str(tmp_path / "absent.csv"))


class TestModelFile:
    """Test model file persistence."""

    def test_round_trip_bytes(self, trained_hierarchy, tmp_path):
        """Test save, load, save gives identical bytes."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        save_model(trained_hierarchy, str(first), data_seed=0)
        save_model(load_model(str(first)), str(second), data_seed=0)

        assert first.read_bytes() == second.read_bytes()

    def test_parameters_exact(self, trained_hierarchy, tmp_path):
        """Test every parameter reloads bit-exactly."""
        path = tmp_path / "model.json"
        save_model(trained_hierarchy, str(path))

        loaded = load_model(str(path))

        for (_, _, original), (_, _, restored) in zip(trained_hierarchy.models(), loaded.models()):
            assert original == restored
        x = [0.1, 0.9, -0.05]
        assert eval_fis(loaded.node("HFLC1").models[0], x) == eval_fis(trained_hierarchy.node("HFLC1").models[0], x)

    def test_contents(self, trained_hierarchy, tmp_path):
        """Test schema version, controllers and seeds are stored."""
        path = tmp_path / "model.json"
        model_file = save_model(trained_hierarchy, str(path), data_seed=7)

        data = json.loads(path.read_text())
        assert data["schema_version"] == 1
        assert len(data["controllers"]) == 8
        assert data["seeds"]["data_seed"] == 7
        assert model_file_text(model_file) == path.read_text()

    def test_missing_file(self, tmp_path):
        """Test a missing model file."""
        with pytest.raises(ModelFileError, match="not found"):
            load_model(str(tmp_path / "absent.json"))

    def test_invalid_json(self, tmp_path):
        """Test a corrupt model file."""
        path = tmp_path / "model.json"
        path.write_text("{not json")

        with pytest.raises(ModelFileError):
            load_model_file(str(path))

    def test_wrong_schema_version(self, trained_hierarchy, tmp_path):
        """Test an unknown schema version is refused."""
        path = tmp_path / "model.json"
        save_model(trained_hierarchy, str(path))
        data = json.loads(path.read_text())
        data["schema_version"] = 2
        path.write_text(json.dumps(data))

        with pytest.raises(ModelFileError, match="schema_version"):
            load_model(str(path))

    def test_missing_controller(self, trained_hierarchy, tmp_path):
        """Test a file lacking a model is refused."""
        path = tmp_path / "model.json"
        save_model(trained_hierarchy, str(path))
        data = json.loads(path.read_text())
        data["controllers"] = [c for c in data["controllers"] if c["id"] != "HFLC4"]
        path.write_text(json.dumps(data))

        with pytest.raises(ModelFileError, match="HFLC4"):
            load_model(str(path))

    def test_unwritable_path(self, trained_hierarchy, tmp_path):
        """Test write failures are I/O errors."""
        blocker = tmp_path / "file"
        blocker.write_text("x")

        with pytest.raises(PersistenceIOError):
            save_model(trained_hierarchy, str(blocker / "model.json"))


class TestWalkLog:
    """Test walk log CSV."""

    def test_columns_and_rows(self, constant_hierarchy, gait, tmp_path):
        """Test header and one row per phase."""
        log = closed_loop_walk(constant_hierarchy, gait, 4)
        path = tmp_path / "walk.csv"

        write_walk_log(log, str(path))

        frame = pd.read_csv(path)
        assert tuple(frame.columns) == WALK_COLUMNS
        assert len(frame) == 4
        assert frame["iters"].tolist() == [r.iterations for r in log]
        assert frame["x0_ref"].tolist() == pytest.approx([r.com_ref.x for r in log])
