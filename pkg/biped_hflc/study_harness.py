"""Training-set-size study and response-surface export."""

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Mapping, NamedTuple, Sequence, Tuple

import pandas as pd

from .anfis_train import evaluate
from .biped_model import generate_dataset
from .config import SweepConfig
from .errors import HflcError, InvalidArgumentError
from .fuzzy_core import TsFis, response_surface
from .hflc_hierarchy import Hierarchy, project_dataset, train_hierarchy
from .models import GaitSample

logger = logging.getLogger(__name__)

ERROR_COLUMNS = ("controller", "output", "size", "cumulative_se", "rmse", "train_se")
SURFACE_COLUMNS = ("xi", "xj", "y")

# (controller id, output index, training size)
EntryKey = Tuple[str, int, int]


class SweepEntry(NamedTuple):
    """Test error of one model trained at one size."""
    cumulative_se: float
    rmse: float
    train_se: float


@dataclass
class SweepResult:
    """Errors of every (model, size) pair plus run metadata."""
    entries: Dict[EntryKey, SweepEntry]
    metadata: Dict[str, Any] = field(default_factory=dict)
    # trained hierarchy per size; kept out of the error table
    hierarchies: Dict[int, Hierarchy] = field(default_factory=dict)

    @property
    def sizes(self) -> List[int]:
        return sorted({size for _, _, size in self.entries})

    def series(self, controller: str, output_index: int) -> Dict[int, SweepEntry]:
        """Entries of one model keyed by training size."""
        return {
            size: entry
            for (c, o, size), entry in sorted(self.entries.items())
            if c == controller and o == output_index
        }


def evaluate_hierarchy(
    h: Hierarchy,
    samples: Sequence[GaitSample],
    size: int,
    seed: int = 0,
) -> Dict[EntryKey, SweepEntry]:
    """Test error of every model of ``h`` on its projection of ``samples``."""
    entries: Dict[EntryKey, SweepEntry] = {}
    for node_id, index, model in h.models():
        node = h.node(node_id)
        try:
            result = evaluate(model, project_dataset(samples, node.spec, index, seed=seed))
        except HflcError as e:
            raise e.with_context(f"{node_id} output {index}") from e
        train_se = node.reports[index].final_cumulative_se if node.reports else float("nan")
        entries[(node_id, index, size)] = SweepEntry(result.cumulative_se, result.rmse, train_se)
    return entries


def run_sweep(config: SweepConfig) -> SweepResult:
    """Train the hierarchy at every configured size and evaluate it on one shared test set."""
    train_seeds = config.train_seeds()
    test_seed = config.resolved_test_seed
    if test_seed in train_seeds.values():
        raise InvalidArgumentError(f"test seed {test_seed} collides with a training seed")

    test_samples = generate_dataset(config.params, config.gait, n=config.test_size, seed=test_seed)
    logger.info(f"Sweep over sizes {config.sizes}; {len(test_samples)} test samples (seed={test_seed})")

    entries: Dict[EntryKey, SweepEntry] = {}
    hierarchies: Dict[int, Hierarchy] = {}
    for size in config.sizes:
        try:
            train_samples = generate_dataset(config.params, config.gait, n=size, seed=train_seeds[size])
            h = train_hierarchy(
                train_samples,
                config.train_config,
                params=config.params,
                max_workers=config.max_workers,
                data_seed=train_seeds[size],
            )
            entries.update(evaluate_hierarchy(h, test_samples, size, seed=test_seed))
        except HflcError as e:
            raise e.with_context(f"size {size}") from e
        hierarchies[size] = h
        logger.info(f"Size {size} done")

    metadata = {
        "train_seeds": {str(size): seed for size, seed in train_seeds.items()},
        "test_seed": test_seed,
        "config": config.model_dump(mode="json"),
        "timestamp": datetime.now().isoformat(),
    }
    return SweepResult(entries=entries, metadata=metadata, hierarchies=hierarchies)


def format_error_table(entries: Mapping[EntryKey, SweepEntry]) -> str:
    """CSV error table sorted by (controller, output, size)."""
    if not entries:
        raise InvalidArgumentError("no entries to export")
    rows = [
        (controller, output, size, entry.cumulative_se, entry.rmse, entry.train_se)
        for (controller, output, size), entry in sorted(entries.items())
    ]
    frame = pd.DataFrame(rows, columns=list(ERROR_COLUMNS))
    return frame.to_csv(index=False, float_format="%.12g", lineterminator="\n")


def export_error_table(result: SweepResult) -> str:
    return format_error_table(result.entries)


def export_surface(
    fis: TsFis,
    axis_i: int,
    axis_j: int,
    fixed: Mapping[int, float],
    resolution: int,
) -> str:
    """Response surface of ``fis`` as CSV, grid order as in ``response_surface``."""
    grid = response_surface(fis, axis_i, axis_j, fixed, resolution)
    frame = pd.DataFrame(grid, columns=list(SURFACE_COLUMNS))
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


def best_sizes(result: SweepResult) -> Dict[Tuple[str, int], int]:
    """Training size with the lowest test cumulative SE per model; ties go to the smaller size."""
    best: Dict[Tuple[str, int], Tuple[float, int]] = {}
    for (controller, output, size), entry in result.entries.items():
        key = (controller, output)
        candidate = (entry.cumulative_se, size)
        if key not in best or candidate < best[key]:
            best[key] = candidate
    return {key: size for key, (_, size) in sorted(best.items())}
