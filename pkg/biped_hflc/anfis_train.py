"""Hybrid ANFIS learning.

Each epoch solves the consequent coefficients exactly by ridge-regularized
least squares, then takes one full-batch gradient step on the Gaussian
premise parameters (centers and sigmas).
"""

import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .config import TrainConfig
from .errors import DivergenceError, InvalidArgumentError, NumericalError, RankDeficiencyError
from .fuzzy_core import GaussianMf, InputSpec, TsFis, eval_batch, forward_batch, grid_partition
from .models import Dataset, Sample

logger = logging.getLogger(__name__)

# sigma floor, relative to the input's operating span
SIGMA_FLOOR_RATIO = 1e-6


class TrainReport(BaseModel):
    """Outcome of one hybrid training run."""

    rmse_history: List[float] = Field(default_factory=list, description="Training RMSE after each LSE half-step")
    final_cumulative_se: float = Field(..., description="Cumulative square error of the returned model on the training set")
    epochs_run: int
    seed: int = 0


class EvaluationResult(NamedTuple):
    """Error of a model on a dataset."""
    cumulative_se: float
    rmse: float


class PremiseGradient(NamedTuple):
    """Gradient per input, one entry per MF."""
    centers: List[np.ndarray]
    sigmas: List[np.ndarray]


def dataset_arrays(dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """Sample matrix X (N, n) and target vector y (N,)."""
    X = np.array([s.x for s in dataset.samples], dtype=float)
    y = np.array([s.y for s in dataset.samples], dtype=float)
    return X, y


def _check_dataset(fis: TsFis, dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    if len(dataset) == 0:
        raise InvalidArgumentError(f"dataset {dataset.name!r} is empty")
    if dataset.n_inputs != fis.n_inputs:
        raise InvalidArgumentError(
            f"dataset {dataset.name!r} has {dataset.n_inputs} inputs, FIS expects {fis.n_inputs}"
        )
    return dataset_arrays(dataset)


def init_premises(
    dataset: Dataset,
    mfs_per_input: int,
    input_names: Optional[Sequence[str]] = None,
) -> List[InputSpec]:
    """Evenly spaced Gaussian MFs over each input's observed range, widened by 10%."""
    if len(dataset) == 0:
        raise InvalidArgumentError(f"cannot initialize premises from empty dataset {dataset.name!r}")
    if mfs_per_input < 2:
        raise InvalidArgumentError(f"mfs_per_input must be >= 2, got {mfs_per_input}")
    X, _ = dataset_arrays(dataset)
    names = list(input_names) if input_names is not None else [f"x{k}" for k in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise InvalidArgumentError(f"{len(names)} input names for {X.shape[1]} inputs")

    specs = []
    for k, name in enumerate(names):
        lo, hi = float(X[:, k].min()), float(X[:, k].max())
        span = hi - lo
        if span == 0:
            lo, hi = lo - 1.0, hi + 1.0
        else:
            lo, hi = lo - 0.1 * span, hi + 0.1 * span
        sigma = (hi - lo) / (2 * (mfs_per_input - 1))
        centers = np.linspace(lo, hi, mfs_per_input)
        specs.append(InputSpec(
            name=name,
            lo=lo,
            hi=hi,
            mfs=[GaussianMf(center=float(c), sigma=sigma) for c in centers],
        ))
    return specs


def design_matrix(normalized: np.ndarray, X: np.ndarray) -> np.ndarray:
    """LSE design matrix; the row for sample s holds w_bar_i(x_s) * [1, x_s] for each rule i."""
    N = X.shape[0]
    x_bar = np.hstack([np.ones((N, 1)), X])
    return (normalized[:, :, None] * x_bar[:, None, :]).reshape(N, -1)


def lse_consequents(fis: TsFis, dataset: Dataset, ridge_lambda: float) -> TsFis:
    """Copy of ``fis`` whose consequents minimize training SE + ridge_lambda * ||coeffs||^2."""
    if ridge_lambda < 0:
        raise InvalidArgumentError(f"ridge_lambda must be >= 0, got {ridge_lambda}")
    X, y = _check_dataset(fis, dataset)
    centers, sigmas = fis.premise_arrays()
    normalized = forward_batch(centers, sigmas, fis.consequent_array(), X).normalized
    A = design_matrix(normalized, X)
    if not np.all(np.isfinite(A)):
        raise NumericalError(f"non-finite LSE design matrix for {fis.output_name!r}")

    n_coeffs = A.shape[1]
    if ridge_lambda > 0:
        # ridge as an augmented least-squares problem, avoiding the squared condition number
        A_aug = np.vstack([A, math.sqrt(ridge_lambda) * np.eye(n_coeffs)])
        y_aug = np.concatenate([y, np.zeros(n_coeffs)])
        theta, _, _, _ = np.linalg.lstsq(A_aug, y_aug, rcond=None)
    else:
        theta, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
        if rank < n_coeffs:
            raise RankDeficiencyError(
                f"LSE system for {fis.output_name!r} has rank {rank} < {n_coeffs} unknowns; "
                f"set ridge_lambda > 0"
            )
    if not np.all(np.isfinite(theta)):
        raise NumericalError(f"non-finite consequents for {fis.output_name!r}")
    return fis.with_consequents(theta.reshape(fis.n_rules, fis.n_inputs + 1))


def _premise_gradients_batch(fis: TsFis, X: np.ndarray, y: np.ndarray, scale: float) -> PremiseGradient:
    centers, sigmas = fis.premise_arrays()
    fp = forward_batch(centers, sigmas, fis.consequent_array(), X)

    d_out = 2.0 * (fp.output - y) * scale
    # dE/dw_i = dE/dF * (f_i - F) / sum(w)
    d_firing = d_out[:, None] * (fp.rule_out - fp.output[:, None]) / fp.firing_sum[:, None]
    coef = d_firing * fp.firing
    d_centers = np.einsum('nr,nrk->rk', coef, fp.diff / sigmas[None] ** 2)
    d_sigmas = np.einsum('nr,nrk->rk', coef, fp.diff ** 2 / sigmas[None] ** 3)

    antecedents = fis.antecedent_array()
    grad_c, grad_s = [], []
    for k, m_count in enumerate(fis.mf_counts):
        gc = np.zeros(m_count)
        gs = np.zeros(m_count)
        np.add.at(gc, antecedents[:, k], d_centers[:, k])
        np.add.at(gs, antecedents[:, k], d_sigmas[:, k])
        grad_c.append(gc)
        grad_s.append(gs)
    return PremiseGradient(grad_c, grad_s)


def premise_gradients(fis: TsFis, sample: Sample) -> PremiseGradient:
    """Analytic gradient of (eval_fis(x) - y)^2 with respect to every MF center and sigma."""
    if len(sample.x) != fis.n_inputs:
        raise InvalidArgumentError(f"sample has {len(sample.x)} inputs, FIS expects {fis.n_inputs}")
    X = np.array([sample.x], dtype=float)
    y = np.array([sample.y], dtype=float)
    return _premise_gradients_batch(fis, X, y, scale=1.0)


def _descend_premises(fis: TsFis, grad: PremiseGradient, learn_rate: float) -> TsFis:
    centers, sigmas = [], []
    for spec, gc, gs in zip(fis.inputs, grad.centers, grad.sigmas):
        c = np.array([mf.center for mf in spec.mfs]) - learn_rate * gc
        s = np.array([mf.sigma for mf in spec.mfs]) - learn_rate * gs
        # MF order is part of the rule semantics; keep centers non-decreasing
        centers.append(np.maximum.accumulate(c))
        sigmas.append(np.maximum(s, SIGMA_FLOOR_RATIO * spec.span))
    return fis.with_premises(centers, sigmas)


def train_hybrid(
    dataset: Dataset,
    config: TrainConfig,
    input_names: Optional[Sequence[str]] = None,
    output_name: str = "y",
) -> Tuple[TsFis, TrainReport]:
    """Train a grid-partitioned first-order TS system with the hybrid rule."""
    if len(dataset) == 0:
        raise InvalidArgumentError(f"cannot train on empty dataset {dataset.name!r}")
    mfs = config.mfs_for(dataset.n_inputs)
    fis = grid_partition(init_premises(dataset, mfs, input_names), output_name)
    X, y = dataset_arrays(dataset)
    n = len(dataset)

    logger.info(
        f"Training {output_name!r} on {dataset.name!r}: {n} samples, "
        f"{fis.n_rules} rules, {config.epochs} epochs"
    )
    history: List[float] = []
    for epoch in range(1, config.epochs + 1):
        fis = lse_consequents(fis, dataset, config.ridge_lambda)
        residual = eval_batch(fis, X) - y
        rmse = math.sqrt(float(np.mean(residual ** 2)))
        if not math.isfinite(rmse):
            raise DivergenceError(f"training {output_name!r} diverged at epoch {epoch}: non-finite loss")
        history.append(rmse)
        logger.debug(f"{output_name} epoch {epoch}: rmse={rmse:.6g}")

        grad = _premise_gradients_batch(fis, X, y, scale=1.0 / n)
        if not all(np.all(np.isfinite(g)) for g in grad.centers + grad.sigmas):
            raise DivergenceError(f"training {output_name!r} diverged at epoch {epoch}: non-finite gradient")
        fis = _descend_premises(fis, grad, config.learn_rate)

    final = evaluate(fis, dataset)
    if not math.isfinite(final.cumulative_se):
        raise DivergenceError(f"training {output_name!r} diverged after epoch {config.epochs}")
    report = TrainReport(
        rmse_history=history,
        final_cumulative_se=final.cumulative_se,
        epochs_run=config.epochs,
        seed=config.seed,
    )
    logger.info(f"Trained {output_name!r}: final rmse={final.rmse:.6g}")
    return fis, report


def evaluate(fis: TsFis, dataset: Dataset) -> EvaluationResult:
    """Cumulative square error and RMSE of ``fis`` on ``dataset``."""
    X, y = _check_dataset(fis, dataset)
    residual = eval_batch(fis, X) - y
    cumulative_se = float(np.sum(residual ** 2))
    return EvaluationResult(cumulative_se=cumulative_se, rmse=math.sqrt(cumulative_se / len(y)))
