"""File formats: gait dataset CSV, model file and walk log CSV."""

import logging
import math
import os
from typing import Dict, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from .anfis_train import TrainReport
from .config import BipedParams, TrainConfig
from .errors import DatasetFormatError, ModelFileError, PersistenceIOError, WiringError
from .fuzzy_core import TsFis
from .hflc_hierarchy import HflcNode, Hierarchy, WalkRecord, build_specs
from .models import GAIT_COLUMNS, GaitSample, Leg, PlanarPoint

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

WALK_COLUMNS = (
    "t", "x0_ref", "y0_ref", "x0_est", "y0_est",
    "beta_left", "gamma_left", "xcl", "ycl",
    "beta_right", "gamma_right", "xcr", "ycr",
    "iters", "converged", "residual",
)

# enough digits for every float64 to read back bit-exactly
FLOAT_FORMAT = "%.17g"


def write_text(path: str, text: str) -> None:
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise PersistenceIOError(f"Cannot write {path}: {e}") from e


def gait_csv_text(samples: Sequence[GaitSample]) -> str:
    rows = [[s.t] + [s.signals()[name] for name in GAIT_COLUMNS[1:]] for s in samples]
    frame = pd.DataFrame(rows, columns=list(GAIT_COLUMNS))
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_gait_csv(samples: Sequence[GaitSample], path: str) -> None:
    write_text(path, gait_csv_text(samples))
    logger.info(f"Wrote {len(samples)} gait samples to {path}")


def read_gait_csv(path: str) -> List[GaitSample]:
    """Load a gait dataset; every malformed row or column is reported by name."""
    if not os.path.exists(path):
        raise PersistenceIOError(f"Dataset not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise DatasetFormatError(f"{path}: empty file, expected header {','.join(GAIT_COLUMNS)}") from e
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"{path}: {e}") from e
    except OSError as e:
        raise PersistenceIOError(f"Cannot read {path}: {e}") from e

    missing = [column for column in GAIT_COLUMNS if column not in frame.columns]
    if missing:
        raise DatasetFormatError(f"{path}: missing column(s) {', '.join(missing)}")

    samples = []
    for row_number, (_, row) in enumerate(frame.iterrows(), start=1):
        values: Dict[str, float] = {}
        for column in GAIT_COLUMNS:
            # short rows leave NaN in the trailing cells
            raw = row[column].strip() if isinstance(row[column], str) else ""
            try:
                value = float(raw)
            except ValueError:
                raise DatasetFormatError(f"{path}: row {row_number}, column {column}: not a number: {raw!r}")
            if not math.isfinite(value):
                raise DatasetFormatError(f"{path}: row {row_number}, column {column}: non-finite value")
            values[column] = value
        try:
            samples.append(GaitSample(
                t=values["t"],
                com=PlanarPoint(x=values["x0"], y=values["y0"]),
                beta_left=values["beta_left"],
                gamma_left=values["gamma_left"],
                ankle_left=PlanarPoint(x=values["xcl"], y=values["ycl"]),
                beta_right=values["beta_right"],
                gamma_right=values["gamma_right"],
                ankle_right=PlanarPoint(x=values["xcr"], y=values["ycr"]),
            ))
        except ValidationError as e:
            raise DatasetFormatError(f"{path}: row {row_number}: {e}") from e
    logger.debug(f"Read {len(samples)} gait samples from {path}")
    return samples


class ControllerModel(BaseModel):
    """One trained (controller, output) model."""

    id: str
    output_index: int = Field(..., ge=0)
    output_name: str
    fis: TsFis
    train_se: float
    report: TrainReport


class ModelFile(BaseModel):
    """Serialized hierarchy."""

    schema_version: int = SCHEMA_VERSION
    controllers: List[ControllerModel]
    biped: BipedParams = Field(default_factory=BipedParams)
    train: TrainConfig = Field(default_factory=TrainConfig)
    seeds: Dict[str, int] = Field(default_factory=dict, description="Data and per-model training seeds")


def to_model_file(h: Hierarchy, data_seed: Optional[int] = None) -> ModelFile:
    controllers = []
    seeds: Dict[str, int] = {"train_seed": h.train_config.seed}
    if data_seed is not None:
        seeds["data_seed"] = data_seed
    for node_id, node in h.nodes.items():
        for index, (name, model) in enumerate(zip(node.spec.output_signals, node.models)):
            report = node.reports[index]
            controllers.append(ControllerModel(
                id=node_id,
                output_index=index,
                output_name=name,
                fis=model,
                train_se=report.final_cumulative_se,
                report=report,
            ))
            seeds[f"{node_id}:{index}"] = report.seed
    return ModelFile(controllers=controllers, biped=h.params, train=h.train_config, seeds=seeds)


def from_model_file(model_file: ModelFile) -> Hierarchy:
    """Rebuild a hierarchy, checking the stored models against the controller wiring."""
    if model_file.schema_version != SCHEMA_VERSION:
        raise ModelFileError(
            f"unsupported schema_version {model_file.schema_version}, expected {SCHEMA_VERSION}"
        )
    stored = {(c.id, c.output_index): c for c in model_file.controllers}
    nodes: Dict[str, HflcNode] = {}
    for spec in build_specs():
        entries = []
        for index, name in enumerate(spec.output_signals):
            entry = stored.get((spec.id, index))
            if entry is None:
                raise ModelFileError(f"model file lacks {spec.id} output {index} ({name})")
            if entry.output_name != name or entry.fis.input_names != list(spec.input_signals):
                raise ModelFileError(f"{spec.id} output {index}: stored signals do not match the wiring")
            entries.append(entry)
        try:
            nodes[spec.id] = HflcNode(
                spec=spec,
                models=[e.fis for e in entries],
                reports=[e.report for e in entries],
            )
        except WiringError as e:
            raise ModelFileError(f"{spec.id}: {e}") from e
    return Hierarchy(nodes=nodes, params=model_file.biped, train_config=model_file.train)


def model_file_text(model_file: ModelFile) -> str:
    return model_file.model_dump_json(indent=2) + "\n"


def save_model(h: Hierarchy, path: str, data_seed: Optional[int] = None) -> ModelFile:
    model_file = to_model_file(h, data_seed)
    write_text(path, model_file_text(model_file))
    logger.info(f"Saved {len(model_file.controllers)} models to {path}")
    return model_file


def load_model_file(path: str) -> ModelFile:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except FileNotFoundError as e:
        raise ModelFileError(f"Model file not found: {path}") from e
    except OSError as e:
        raise PersistenceIOError(f"Cannot read {path}: {e}") from e
    try:
        return ModelFile.model_validate_json(text)
    except ValidationError as e:
        raise ModelFileError(f"{path}: invalid model file: {e}") from e


def load_model(path: str) -> Hierarchy:
    return from_model_file(load_model_file(path))


def walk_log_text(log: Sequence[WalkRecord]) -> str:
    rows = []
    for record in log:
        left, right = record.legs[Leg.LEFT], record.legs[Leg.RIGHT]
        rows.append([
            record.t, record.com_ref.x, record.com_ref.y, record.com_est.x, record.com_est.y,
            left.beta, left.gamma, left.ankle.x, left.ankle.y,
            right.beta, right.gamma, right.ankle.x, right.ankle.y,
            record.iterations, "true" if record.converged else "false", record.residual,
        ])
    frame = pd.DataFrame(rows, columns=list(WALK_COLUMNS))
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_walk_log(log: Sequence[WalkRecord], path: str) -> None:
    write_text(path, walk_log_text(log))
