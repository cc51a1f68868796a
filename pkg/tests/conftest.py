"""Pytest configuration and shared fixtures."""

import numpy as np
import pytest

from biped_hflc.anfis_train import TrainReport
from biped_hflc.biped_model import generate_dataset
from biped_hflc.config import BipedParams, GaitSpec, TrainConfig
from biped_hflc.fuzzy_core import GaussianMf, InputSpec, grid_partition
from biped_hflc.hflc_hierarchy import Hierarchy, HflcNode, build_specs, train_hierarchy


def make_fis(mf_counts, seed=0, lo=-1.0, hi=1.0, output_name="y"):
    """Grid-partitioned FIS over [lo, hi] per input with random consequents."""
    rng = np.random.default_rng(seed)
    specs = []
    for k, m in enumerate(mf_counts):
        centers = np.linspace(lo, hi, m)
        sigma = (hi - lo) / (2 * (m - 1))
        specs.append(InputSpec(
            name=f"x{k}",
            lo=lo,
            hi=hi,
            mfs=[GaussianMf(center=float(c), sigma=sigma) for c in centers],
        ))
    fis = grid_partition(specs, output_name)
    return fis.with_consequents(rng.normal(size=(fis.n_rules, fis.n_inputs + 1)))


def constant_fis(input_names, output_name, value):
    """FIS whose output is ``value`` for every input."""
    specs = [
        InputSpec(
            name=name,
            lo=-2.0,
            hi=2.0,
            mfs=[GaussianMf(center=-2.0, sigma=2.0), GaussianMf(center=2.0, sigma=2.0)],
        )
        for name in input_names
    ]
    fis = grid_partition(specs, output_name)
    consequents = np.zeros((fis.n_rules, fis.n_inputs + 1))
    consequents[:, 0] = value
    return fis.with_consequents(consequents)


# constant controller outputs; the stance leg reads straight down
CONSTANT_SIGNALS = {
    "gamma_left": 0.2,
    "xcl": 0.0,
    "ycl": 0.0,
    "beta_left": -0.1,
    "gamma_right": 0.4,
    "xcr": -0.15,
    "ycr": 0.02,
    "beta_right": -0.3,
}


def make_constant_hierarchy(signals=None):
    """Hierarchy of constant-output controllers: its chain settles in one sweep."""
    signals = signals or CONSTANT_SIGNALS
    nodes = {}
    for spec in build_specs():
        nodes[spec.id] = HflcNode(
            spec=spec,
            models=[constant_fis(spec.input_signals, name, signals[name]) for name in spec.output_signals],
            reports=[
                TrainReport(rmse_history=[0.0], final_cumulative_se=0.0, epochs_run=1)
                for _ in spec.output_signals
            ],
        )
    return Hierarchy(nodes=nodes)


@pytest.fixture
def biped_params():
    """Default leg geometry."""
    return BipedParams()


@pytest.fixture
def gait():
    """Default reference gait."""
    return GaitSpec()


@pytest.fixture
def fast_train_config():
    """Short training run."""
    return TrainConfig(epochs=3)


@pytest.fixture
def gait_samples(biped_params, gait):
    """30-sample gait dataset."""
    return generate_dataset(biped_params, gait, n=30, seed=0)


@pytest.fixture
def fis_factory():
    """Factory for random grid-partitioned FIS."""
    return make_fis


@pytest.fixture
def constant_hierarchy():
    """Hierarchy with constant controller outputs."""
    return make_constant_hierarchy()


@pytest.fixture(scope="session")
def trained_hierarchy():
    """Hierarchy trained on 30 default gait samples."""
    samples = generate_dataset(BipedParams(), GaitSpec(), n=30, seed=0)
    return train_hierarchy(samples, TrainConfig(epochs=10))


@pytest.fixture
def random_points():
    """Deterministic stream of uniform samples in [-1, 1]."""
    rng = np.random.default_rng(1234)

    def draw(*shape):
        return rng.uniform(-1.0, 1.0, size=shape)

    return draw


@pytest.fixture
def constant_fis_factory():
    """Factory for constant-output FIS."""
    return constant_fis
