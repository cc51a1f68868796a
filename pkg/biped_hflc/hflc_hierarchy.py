"""Hierarchical fuzzy controller centered on the COM position.

Per leg, three nodes close a cycle around the COM reference:
HFLC1 (x0, y0, beta) -> gamma, HFLC3 (x0, y0, gamma) -> ankle (xc, yc),
HFLC5 (x0, y0, xc, yc) -> beta. The right leg (HFLC2/4/6) mirrors the left.
HFLC7 and HFLC8 are named placeholders with no wiring.
"""

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .anfis_train import TrainReport, train_hybrid
from .biped_model import STANCE_ANKLE, com_trajectory, gait_sample_at
from .config import BipedParams, GaitSpec, TrainConfig
from .errors import DivergenceError, HflcError, InvalidArgumentError, WiringError
from .fuzzy_core import TsFis, eval_fis
from .models import Dataset, GaitSample, Leg, LegPose, PlanarPoint, Sample

logger = logging.getLogger(__name__)

COM_SIGNALS = ("x0", "y0")


class ControllerSpec(BaseModel):
    """One HFLC node and the signals it consumes and produces."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., pattern=r"^HFLC[1-8]$")
    leg: Leg
    input_signals: Tuple[str, ...] = ()
    output_signals: Tuple[str, ...] = ()

    @property
    def is_placeholder(self) -> bool:
        return not self.input_signals and not self.output_signals


class LegSignals(BaseModel):
    """Resolved joint and ankle signals of one leg."""

    model_config = ConfigDict(frozen=True)

    beta: float
    gamma: float
    ankle: PlanarPoint

    @classmethod
    def from_sample(cls, sample: GaitSample, leg: Leg) -> "LegSignals":
        pose = sample.pose(leg)
        return cls(beta=pose.beta, gamma=pose.gamma, ankle=sample.ankle(leg))

    def pose(self) -> LegPose:
        return LegPose(beta=self.beta, gamma=self.gamma)


class ChainResult(BaseModel):
    """Outcome of resolving the cyclic wiring at one COM reference."""

    legs: Dict[Leg, LegSignals]
    iterations: int
    converged: bool
    residual: float


def mirror_signal(name: str) -> str:
    """Right-leg counterpart of a left-leg signal name."""
    if name.endswith("_left"):
        return name[: -len("_left")] + "_right"
    if name in ("xcl", "ycl"):
        return name[:-1] + "r"
    return name


def leg_signal_names(leg: Leg) -> Tuple[str, str, str, str]:
    """(beta, gamma, ankle x, ankle y) signal names of ``leg``."""
    if leg == Leg.LEFT:
        return ("beta_left", "gamma_left", "xcl", "ycl")
    return ("beta_right", "gamma_right", "xcr", "ycr")


_LEFT_WIRING = (
    ("HFLC1", ("x0", "y0", "beta_left"), ("gamma_left",)),
    ("HFLC3", ("x0", "y0", "gamma_left"), ("xcl", "ycl")),
    ("HFLC5", ("x0", "y0", "xcl", "ycl"), ("beta_left",)),
)

# chain sweep order per leg
LEG_NODES: Dict[Leg, Tuple[str, str, str]] = {
    Leg.LEFT: ("HFLC1", "HFLC3", "HFLC5"),
    Leg.RIGHT: ("HFLC2", "HFLC4", "HFLC6"),
}


def build_specs() -> List[ControllerSpec]:
    """The six wired controllers, HFLC1..HFLC6."""
    specs = []
    for node_id, inputs, outputs in _LEFT_WIRING:
        left = ControllerSpec(id=node_id, leg=Leg.LEFT, input_signals=inputs, output_signals=outputs)
        right = ControllerSpec(
            id=f"HFLC{int(node_id[4:]) + 1}",
            leg=Leg.RIGHT,
            input_signals=tuple(mirror_signal(s) for s in inputs),
            output_signals=tuple(mirror_signal(s) for s in outputs),
        )
        specs.extend([left, right])
    return specs


def placeholder_specs() -> List[ControllerSpec]:
    """HFLC7/HFLC8: named by the hierarchy, no defined inputs or outputs."""
    return [ControllerSpec(id="HFLC7", leg=Leg.LEFT), ControllerSpec(id="HFLC8", leg=Leg.RIGHT)]


def check_wiring(specs: Sequence[ControllerSpec]) -> None:
    """Every input must be a COM coordinate or some node's output."""
    produced = set(COM_SIGNALS)
    for spec in specs:
        produced.update(spec.output_signals)
    for spec in specs:
        dangling = [s for s in spec.input_signals if s not in produced]
        if dangling:
            raise WiringError(f"{spec.id} consumes signals no node produces: {dangling}")


def project_dataset(
    samples: Sequence[GaitSample],
    spec: ControllerSpec,
    output_index: int,
    seed: int = 0,
) -> Dataset:
    """Training pairs for one output of ``spec``: inputs and target read straight from each record.

    ``seed`` records which generator seed produced ``samples``.
    """
    if not 0 <= output_index < len(spec.output_signals):
        raise InvalidArgumentError(
            f"{spec.id} has {len(spec.output_signals)} outputs, got output_index {output_index}"
        )
    target = spec.output_signals[output_index]
    rows = []
    for sample in samples:
        signals = sample.signals()
        unknown = [s for s in spec.input_signals + (target,) if s not in signals]
        if unknown:
            raise WiringError(f"{spec.id} references unknown signals {unknown}")
        rows.append(Sample(x=tuple(signals[s] for s in spec.input_signals), y=signals[target]))
    return Dataset(samples=rows, name=f"{spec.id}:{target}", seed=seed)


def model_seed(base_seed: int, node_id: str, output_index: int) -> int:
    """Per-model seed: base seed plus a stable hash of (node, output)."""
    digest = hashlib.sha256(f"{node_id}:{output_index}".encode("utf-8")).hexdigest()
    return base_seed + int(digest[:8], 16) % (2 ** 31)


@dataclass
class HflcNode:
    """A trained controller: one TS system per output signal."""
    spec: ControllerSpec
    models: List[TsFis]
    reports: List[TrainReport] = field(default_factory=list)

    def __post_init__(self):
        if len(self.models) != len(self.spec.output_signals):
            raise WiringError(
                f"{self.spec.id}: {len(self.models)} models for {len(self.spec.output_signals)} outputs"
            )
        for model in self.models:
            if model.n_inputs != len(self.spec.input_signals):
                raise WiringError(f"{self.spec.id}: model input dimension {model.n_inputs} != spec")

    def evaluate(self, signals: Mapping[str, float]) -> Dict[str, float]:
        """Outputs of this node given a signal map containing its inputs."""
        x = [signals[name] for name in self.spec.input_signals]
        return {
            name: eval_fis(model, x)
            for name, model in zip(self.spec.output_signals, self.models)
        }


@dataclass
class Hierarchy:
    """The wired, trained controllers plus the geometry used for COM supervision."""
    nodes: Dict[str, HflcNode]
    params: BipedParams = field(default_factory=BipedParams)
    train_config: TrainConfig = field(default_factory=TrainConfig)
    placeholders: List[ControllerSpec] = field(default_factory=placeholder_specs)

    def __post_init__(self):
        check_wiring([node.spec for node in self.nodes.values()])
        for leg, node_ids in LEG_NODES.items():
            missing = [node_id for node_id in node_ids if node_id not in self.nodes]
            if missing:
                raise WiringError(f"{leg.value} leg is missing nodes {missing}")

    def node(self, node_id: str) -> HflcNode:
        if node_id not in self.nodes:
            raise InvalidArgumentError(f"unknown controller {node_id!r}; known: {sorted(self.nodes)}")
        return self.nodes[node_id]

    def models(self) -> List[Tuple[str, int, TsFis]]:
        """(node id, output index, model) for every trained model, in node order."""
        return [
            (node_id, index, model)
            for node_id, node in self.nodes.items()
            for index, model in enumerate(node.models)
        ]


def _train_model(
    spec: ControllerSpec,
    output_index: int,
    samples: Sequence[GaitSample],
    config: TrainConfig,
    data_seed: int = 0,
) -> Tuple[TsFis, TrainReport]:
    output = spec.output_signals[output_index]
    try:
        dataset = project_dataset(samples, spec, output_index, seed=data_seed)
        model_config = config.model_copy(update={"seed": model_seed(config.seed, spec.id, output_index)})
        return train_hybrid(dataset, model_config, input_names=spec.input_signals, output_name=output)
    except HflcError as e:
        raise e.with_context(f"{spec.id} output {output!r}") from e


def train_hierarchy(
    train_samples: Sequence[GaitSample],
    config: TrainConfig,
    params: Optional[BipedParams] = None,
    max_workers: int = 1,
    data_seed: int = 0,
) -> Hierarchy:
    """Train every (node, output) model independently on its projection of the samples."""
    if not train_samples:
        raise InvalidArgumentError("cannot train a hierarchy on zero samples")
    specs = build_specs()
    jobs = [(spec, index) for spec in specs for index in range(len(spec.output_signals))]
    logger.info(f"Training {len(jobs)} models on {len(train_samples)} samples")

    def run(job):
        spec, index = job
        return _train_model(spec, index, train_samples, config, data_seed)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    nodes: Dict[str, HflcNode] = {}
    trained = dict(zip(jobs, results))
    for spec in specs:
        pairs = [trained[(spec, index)] for index in range(len(spec.output_signals))]
        nodes[spec.id] = HflcNode(
            spec=spec,
            models=[model for model, _ in pairs],
            reports=[report for _, report in pairs],
        )
    return Hierarchy(nodes=nodes, params=params or BipedParams(), train_config=config)


def _leg_env(com_ref: PlanarPoint, leg: Leg, signals: LegSignals) -> Dict[str, float]:
    beta, gamma, xc, yc = leg_signal_names(leg)
    return {"x0": com_ref.x, "y0": com_ref.y, beta: signals.beta, gamma: signals.gamma,
            xc: signals.ankle.x, yc: signals.ankle.y}


def _env_signals(env: Mapping[str, float], leg: Leg) -> LegSignals:
    beta, gamma, xc, yc = leg_signal_names(leg)
    return LegSignals(beta=env[beta], gamma=env[gamma], ankle=PlanarPoint(x=env[xc], y=env[yc]))


def run_chain(
    h: Hierarchy,
    com_ref: PlanarPoint,
    warm_start: Mapping[Leg, LegSignals],
    max_iter: int = 10,
    tol: float = 1e-6,
) -> ChainResult:
    """Resolve each leg's HFLC cycle by repeated sequential sweeps until signals settle."""
    if max_iter < 1:
        raise InvalidArgumentError(f"max_iter must be >= 1, got {max_iter}")
    missing = [leg.value for leg in Leg if leg not in warm_start]
    if missing:
        raise InvalidArgumentError(f"warm start lacks legs {missing}")

    envs = {leg: _leg_env(com_ref, leg, warm_start[leg]) for leg in Leg}
    residual = math.inf
    iterations = 0
    for iteration in range(1, max_iter + 1):
        iterations = iteration
        residual = 0.0
        for leg, node_ids in LEG_NODES.items():
            env = envs[leg]
            for node_id in node_ids:
                for name, value in h.node(node_id).evaluate(env).items():
                    if not math.isfinite(value):
                        raise DivergenceError(
                            f"{node_id} produced non-finite {name} at iteration {iteration}"
                        )
                    residual = max(residual, abs(value - env[name]))
                    env[name] = value
        if residual <= tol:
            break

    return ChainResult(
        legs={leg: _env_signals(envs[leg], leg) for leg in Leg},
        iterations=iterations,
        converged=residual <= tol,
        residual=residual,
    )


def supervise_com(params: BipedParams, stance_ankle: PlanarPoint, pose: LegPose) -> PlanarPoint:
    """Estimated COM (hip) position from the stance ankle and stance-leg angles."""
    shank_angle = pose.beta + pose.gamma
    return PlanarPoint(
        x=stance_ankle.x - params.l_shank * math.sin(shank_angle) - params.l_thigh * math.sin(pose.beta),
        y=stance_ankle.y + params.l_shank * math.cos(shank_angle) + params.l_thigh * math.cos(pose.beta),
    )


class WalkRecord(BaseModel):
    """One phase of a closed-loop walk."""

    t: float
    com_ref: PlanarPoint
    com_est: PlanarPoint
    legs: Dict[Leg, LegSignals]
    iterations: int
    converged: bool
    residual: float

    @property
    def com_error(self) -> float:
        return self.com_est.distance_to(self.com_ref)


class WalkSummary(NamedTuple):
    """Aggregate COM tracking and convergence over a walk."""
    mean_com_error: float
    max_com_error: float
    convergence_rate: float
    mean_iterations: float


def extrapolate_signals(
    last: Mapping[Leg, LegSignals],
    before: Mapping[Leg, LegSignals],
) -> Dict[Leg, LegSignals]:
    """Linear prediction of the next phase's signals from two equally spaced resolved phases."""
    def ahead(a: float, b: float) -> float:
        return 2.0 * a - b

    return {
        leg: LegSignals(
            beta=ahead(last[leg].beta, before[leg].beta),
            gamma=ahead(last[leg].gamma, before[leg].gamma),
            ankle=PlanarPoint(
                x=ahead(last[leg].ankle.x, before[leg].ankle.x),
                y=ahead(last[leg].ankle.y, before[leg].ankle.y),
            ),
        )
        for leg in Leg
    }


def closed_loop_walk(
    h: Hierarchy,
    gait: GaitSpec,
    n_steps: int,
    max_iter: int = 10,
    tol: float = 1e-6,
) -> List[WalkRecord]:
    """Drive the hierarchy along the reference COM path and re-estimate the COM at each phase.

    Phase 0 starts from the analytic gait, phase 1 from phase 0's result, and every
    later phase from a linear extrapolation of the two phases before it.
    """
    if n_steps < 1:
        raise InvalidArgumentError(f"n_steps must be >= 1, got {n_steps}")
    phases = [0.0] if n_steps == 1 else [j / (n_steps - 1) for j in range(n_steps)]

    initial = gait_sample_at(h.params, gait, phases[0])
    warm: Dict[Leg, LegSignals] = {leg: LegSignals.from_sample(initial, leg) for leg in Leg}
    log: List[WalkRecord] = []
    for j, t in enumerate(phases):
        com_ref = com_trajectory(gait, t)
        try:
            result = run_chain(h, com_ref, warm, max_iter=max_iter, tol=tol)
        except HflcError as e:
            raise e.with_context(f"walk phase {j} (t={t:.4f})") from e
        if not result.converged:
            logger.warning(f"Chain did not converge at phase {j}: residual={result.residual:.3g}")
        com_est = supervise_com(h.params, STANCE_ANKLE, result.legs[Leg.LEFT].pose())
        log.append(WalkRecord(
            t=t,
            com_ref=com_ref,
            com_est=com_est,
            legs=result.legs,
            iterations=result.iterations,
            converged=result.converged,
            residual=result.residual,
        ))
        warm = result.legs if len(log) < 2 else extrapolate_signals(result.legs, log[-2].legs)
    return log


def summarize_walk(log: Sequence[WalkRecord]) -> WalkSummary:
    if not log:
        raise InvalidArgumentError("walk log is empty")
    errors = [record.com_error for record in log]
    return WalkSummary(
        mean_com_error=sum(errors) / len(errors),
        max_com_error=max(errors),
        convergence_rate=sum(record.converged for record in log) / len(log),
        mean_iterations=sum(record.iterations for record in log) / len(log),
    )


class RuleCountReport(BaseModel):
    """Rule counts of the hierarchy against a flat single-controller baseline."""

    per_node: Dict[str, int]
    per_model: Dict[str, int]
    leg_total_per_node: Dict[Leg, int]
    leg_total_per_model: Dict[Leg, int]
    flat_signals: Dict[Leg, int]
    # uniform MF count M -> rules, left leg
    flat_baseline: Dict[int, int]
    uniform_hierarchical: Dict[int, int]

    @property
    def hierarchical_saves(self) -> bool:
        return all(self.uniform_hierarchical[m] < self.flat_baseline[m] for m in self.flat_baseline)


def _leg_specs(specs: Sequence[ControllerSpec], leg: Leg) -> List[ControllerSpec]:
    return [spec for spec in specs if spec.leg == leg]


def flat_signal_count(specs: Sequence[ControllerSpec], placeholders: Sequence[ControllerSpec], leg: Leg) -> int:
    """Distinct signals a flat controller for ``leg`` would consume; one opaque slot per placeholder node."""
    signals = set()
    for spec in _leg_specs(specs, leg):
        signals.update(spec.input_signals)
        signals.update(spec.output_signals)
    return len(signals) + len(_leg_specs(placeholders, leg))


def rule_count_report(h: Hierarchy, uniform_mfs: Sequence[int] = (2, 3)) -> RuleCountReport:
    """Per-node and per-model grid-partition rule counts plus the flat-controller comparison."""
    per_node: Dict[str, int] = {}
    per_model: Dict[str, int] = {}
    leg_node = {leg: 0 for leg in Leg}
    leg_model = {leg: 0 for leg in Leg}
    for node_id, node in h.nodes.items():
        count = math.prod(node.models[0].mf_counts)
        per_node[node_id] = count
        leg_node[node.spec.leg] += count
        for name, model in zip(node.spec.output_signals, node.models):
            per_model[f"{node_id}:{name}"] = math.prod(model.mf_counts)
            leg_model[node.spec.leg] += per_model[f"{node_id}:{name}"]

    specs = [node.spec for node in h.nodes.values()]
    flat = {leg: flat_signal_count(specs, h.placeholders, leg) for leg in Leg}
    left = _leg_specs(specs, Leg.LEFT)
    report = RuleCountReport(
        per_node=per_node,
        per_model=per_model,
        leg_total_per_node=leg_node,
        leg_total_per_model=leg_model,
        flat_signals=flat,
        flat_baseline={m: m ** flat[Leg.LEFT] for m in uniform_mfs},
        uniform_hierarchical={m: sum(m ** len(spec.input_signals) for spec in left) for m in uniform_mfs},
    )
    if not report.hierarchical_saves:
        logger.warning("Hierarchical rule total does not undercut the flat baseline")
    return report
