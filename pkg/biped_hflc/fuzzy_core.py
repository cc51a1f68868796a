"""First-order Takagi-Sugeno fuzzy inference.

Gaussian membership functions, product t-norm, normalized firing and
weighted-average defuzzification of affine rule consequents. Every function
here is pure; a ``TsFis`` is immutable and may be evaluated from any thread.
"""

import itertools
import math
from typing import List, Mapping, NamedTuple, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import DegenerateFiringError, InvalidArgumentError


class GaussianMf(BaseModel):
    """Gaussian membership function exp(-(x - center)^2 / (2 sigma^2))."""

    model_config = ConfigDict(frozen=True)

    center: float
    sigma: float = Field(..., gt=0)


class InputSpec(BaseModel):
    """One input variable: its signal name, operating range and MF partition."""

    model_config = ConfigDict(frozen=True)

    name: str
    lo: float
    hi: float
    mfs: List[GaussianMf] = Field(..., min_length=2)

    @model_validator(mode='after')
    def validate_range(self):
        if not self.lo < self.hi:
            raise ValueError(f"input {self.name!r}: lo must be < hi")
        centers = [mf.center for mf in self.mfs]
        if any(b < a for a, b in zip(centers, centers[1:])):
            raise ValueError(f"input {self.name!r}: MF centers must be sorted ascending")
        return self

    @property
    def span(self) -> float:
        return self.hi - self.lo


class Rule(BaseModel):
    """Rule with one MF index per input and affine consequent p[0] + sum p[k] x[k]."""

    model_config = ConfigDict(frozen=True)

    antecedent: Tuple[int, ...]
    consequent: Tuple[float, ...]

    @model_validator(mode='after')
    def validate_lengths(self):
        if len(self.consequent) != len(self.antecedent) + 1:
            raise ValueError("consequent length must be number of inputs + 1")
        return self


class TsFis(BaseModel):
    """Single-output first-order Takagi-Sugeno fuzzy inference system."""

    model_config = ConfigDict(frozen=True)

    inputs: List[InputSpec] = Field(..., min_length=1)
    output_name: str
    rules: List[Rule] = Field(..., min_length=1)

    @model_validator(mode='after')
    def validate_rules(self):
        counts = self.mf_counts
        for i, rule in enumerate(self.rules):
            if len(rule.antecedent) != len(counts):
                raise ValueError(f"rule {i}: antecedent length {len(rule.antecedent)} != {len(counts)} inputs")
            for k, m in enumerate(rule.antecedent):
                if not 0 <= m < counts[k]:
                    raise ValueError(f"rule {i}: MF index {m} invalid for input {self.inputs[k].name!r}")
        return self

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    @property
    def mf_counts(self) -> List[int]:
        return [len(spec.mfs) for spec in self.inputs]

    @property
    def input_names(self) -> List[str]:
        return [spec.name for spec in self.inputs]

    def antecedent_array(self) -> np.ndarray:
        return np.array([rule.antecedent for rule in self.rules], dtype=int)

    def consequent_array(self) -> np.ndarray:
        return np.array([rule.consequent for rule in self.rules], dtype=float)

    def premise_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per-rule, per-input MF centers and sigmas, each shaped (rules, inputs)."""
        centers = np.empty((self.n_rules, self.n_inputs))
        sigmas = np.empty((self.n_rules, self.n_inputs))
        for i, rule in enumerate(self.rules):
            for k, m in enumerate(rule.antecedent):
                mf = self.inputs[k].mfs[m]
                centers[i, k] = mf.center
                sigmas[i, k] = mf.sigma
        return centers, sigmas

    def with_consequents(self, consequents: np.ndarray) -> "TsFis":
        """Copy of this FIS with the consequent matrix (rules, inputs + 1) replaced."""
        consequents = np.asarray(consequents, dtype=float)
        rules = [
            Rule(antecedent=rule.antecedent, consequent=tuple(float(v) for v in row))
            for rule, row in zip(self.rules, consequents)
        ]
        return self.model_copy(update={"rules": rules})

    def with_premises(self, centers: Sequence[np.ndarray], sigmas: Sequence[np.ndarray]) -> "TsFis":
        """Copy of this FIS with per-input MF centers and sigmas replaced."""
        inputs = [
            InputSpec(
                name=spec.name,
                lo=spec.lo,
                hi=spec.hi,
                mfs=[GaussianMf(center=float(c), sigma=float(s)) for c, s in zip(cs, ss)],
            )
            for spec, cs, ss in zip(self.inputs, centers, sigmas)
        ]
        return self.model_copy(update={"inputs": inputs})


class ForwardPass(NamedTuple):
    """Intermediate layer outputs of a batch evaluation."""
    diff: np.ndarray       # (N, R, n) x - center
    firing: np.ndarray     # (N, R)
    firing_sum: np.ndarray  # (N,)
    normalized: np.ndarray  # (N, R)
    rule_out: np.ndarray   # (N, R)
    output: np.ndarray     # (N,)


def eval_mf(mf: GaussianMf, x: float) -> float:
    """Membership degree of ``x`` in ``mf``, in (0, 1]."""
    if not math.isfinite(x):
        raise InvalidArgumentError(f"input must be finite, got {x}")
    if not mf.sigma > 0:
        raise InvalidArgumentError(f"sigma must be > 0, got {mf.sigma}")
    return math.exp(-((x - mf.center) ** 2) / (2.0 * mf.sigma ** 2))


def _check_input(fis: TsFis, x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != fis.n_inputs:
        raise InvalidArgumentError(
            f"expected {fis.n_inputs} inputs {fis.input_names}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"inputs must be finite, got {arr.tolist()}")
    return arr


def firing_strengths(fis: TsFis, x: Sequence[float]) -> np.ndarray:
    """Product t-norm firing strength of every rule."""
    arr = _check_input(fis, x)
    w = np.ones(fis.n_rules)
    for i, rule in enumerate(fis.rules):
        for k, m in enumerate(rule.antecedent):
            w[i] *= eval_mf(fis.inputs[k].mfs[m], float(arr[k]))
    return w


def normalize(w: Sequence[float]) -> np.ndarray:
    """Scale firing strengths to sum to one."""
    arr = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DegenerateFiringError(f"non-finite firing strengths: {arr.tolist()}")
    if np.any(arr < 0):
        raise InvalidArgumentError("firing strengths must be non-negative")
    total = arr.sum()
    if total <= 0:
        raise DegenerateFiringError("no rule fires: all firing strengths are zero")
    return arr / total


def eval_fis(fis: TsFis, x: Sequence[float]) -> float:
    """Crisp output: normalized-firing-weighted average of rule consequents."""
    arr = _check_input(fis, x)
    w_bar = normalize(firing_strengths(fis, arr))
    p = fis.consequent_array()
    rule_out = p[:, 0] + p[:, 1:] @ arr
    return float(np.dot(w_bar, rule_out))


def forward_batch(
    centers: np.ndarray,
    sigmas: np.ndarray,
    consequents: np.ndarray,
    X: np.ndarray,
) -> ForwardPass:
    """Vectorized layer-by-layer evaluation over a sample matrix X (N, n)."""
    diff = X[:, None, :] - centers[None, :, :]
    degrees = np.exp(-(diff ** 2) / (2.0 * sigmas[None, :, :] ** 2))
    firing = np.prod(degrees, axis=2)
    firing_sum = firing.sum(axis=1)
    if not np.all(np.isfinite(firing_sum)) or np.any(firing_sum <= 0):
        bad = int(np.argmax(~np.isfinite(firing_sum) | (firing_sum <= 0)))
        raise DegenerateFiringError(f"no rule fires for sample {bad}: {X[bad].tolist()}")
    normalized = firing / firing_sum[:, None]
    rule_out = consequents[:, 0][None, :] + X @ consequents[:, 1:].T
    output = np.sum(normalized * rule_out, axis=1)
    return ForwardPass(diff, firing, firing_sum, normalized, rule_out, output)


def eval_batch(fis: TsFis, X: np.ndarray) -> np.ndarray:
    """Evaluate ``fis`` on every row of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != fis.n_inputs:
        raise InvalidArgumentError(f"expected (N, {fis.n_inputs}) inputs, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("inputs must be finite")
    centers, sigmas = fis.premise_arrays()
    return forward_batch(centers, sigmas, fis.consequent_array(), X).output


def grid_partition(input_specs: Sequence[InputSpec], output_name: str = "y") -> TsFis:
    """Rule base over the full Cartesian product of MF indices, consequents zeroed."""
    if not input_specs:
        raise InvalidArgumentError("grid partition needs at least one input")
    counts = [len(spec.mfs) for spec in input_specs]
    if any(m < 2 for m in counts):
        raise InvalidArgumentError(f"every input needs >= 2 MFs, got {counts}")
    zeros = (0.0,) * (len(input_specs) + 1)
    rules = [
        Rule(antecedent=antecedent, consequent=zeros)
        for antecedent in itertools.product(*(range(m) for m in counts))
    ]
    return TsFis(inputs=list(input_specs), output_name=output_name, rules=rules)


def response_surface(
    fis: TsFis,
    axis_i: int,
    axis_j: int,
    fixed: Mapping[int, float],
    resolution: int,
) -> np.ndarray:
    """Output over a uniform grid of two inputs, other inputs held at ``fixed``.

    Returns (resolution**2, 3) rows of (x_i, x_j, y), row-major with x_i varying fastest.
    """
    n = fis.n_inputs
    if not (0 <= axis_i < n and 0 <= axis_j < n) or axis_i == axis_j:
        raise InvalidArgumentError(f"invalid surface axes ({axis_i}, {axis_j}) for {n} inputs")
    if resolution < 2:
        raise InvalidArgumentError(f"resolution must be >= 2, got {resolution}")
    missing = [k for k in range(n) if k not in (axis_i, axis_j) and k not in fixed]
    if missing:
        names = [fis.inputs[k].name for k in missing]
        raise InvalidArgumentError(f"no fixed value for inputs {names}")

    base = np.zeros(n)
    for k, value in fixed.items():
        if k not in (axis_i, axis_j):
            base[k] = value
    grid_i = np.linspace(fis.inputs[axis_i].lo, fis.inputs[axis_i].hi, resolution)
    grid_j = np.linspace(fis.inputs[axis_j].lo, fis.inputs[axis_j].hi, resolution)

    rows = []
    for xj in grid_j:
        for xi in grid_i:
            x = base.copy()
            x[axis_i] = xi
            x[axis_j] = xj
            rows.append((xi, xj, eval_fis(fis, x)))
    return np.array(rows, dtype=float)
