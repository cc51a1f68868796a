"""Configuration management for biped-hflc."""

import os
from typing import Any, Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

load_dotenv()


class BipedParams(BaseModel):
    """Planar two-link leg geometry."""

    l_thigh: float = Field(default=0.5, gt=0, description="Thigh length (m)")
    l_shank: float = Field(default=0.5, gt=0, description="Shank length (m)")


class GaitSpec(BaseModel):
    """Reference gait used to synthesize training and test data."""

    step_length: float = Field(default=0.3, gt=0, description="Step length (m)")
    step_height: float = Field(default=0.05, ge=0, description="Swing apex height (m)")
    com_height: float = Field(default=0.9, gt=0, description="Mean COM height (m)")
    com_bob: float = Field(default=0.02, ge=0, description="COM vertical oscillation amplitude (m)")
    n_samples: int = Field(default=30, ge=2, description="Default dataset size")
    seed: int = Field(default=0, description="Default dataset seed")
    phase_jitter: float = Field(default=0.1, ge=0, lt=0.5, description="Stratified phase jitter")


class TrainConfig(BaseModel):
    """Hybrid ANFIS training hyperparameters."""

    epochs: int = Field(default=50, ge=1, description="Hybrid learning epochs")
    learn_rate: float = Field(default=0.01, gt=0, description="Premise gradient step size")
    ridge_lambda: float = Field(default=1e-6, ge=0, description="Consequent ridge penalty")
    mfs_per_input: Optional[int] = Field(
        default=None,
        ge=2,
        description="MFs per input; None selects 3 for <=3 inputs and 2 otherwise",
    )
    seed: int = Field(default=0, description="Base training seed")

    def mfs_for(self, n_inputs: int) -> int:
        """MF count used for a controller with ``n_inputs`` inputs."""
        if self.mfs_per_input is not None:
            return self.mfs_per_input
        return 3 if n_inputs <= 3 else 2


class WalkConfig(BaseModel):
    """Closed-loop walk and controller chain settings."""

    steps: int = Field(default=50, ge=1, description="Number of walk phases")
    max_iter: int = Field(default=10, ge=1, description="Chain sweep budget per phase")
    tol: float = Field(default=1e-6, gt=0, description="Chain convergence tolerance")


class SweepConfig(BaseModel):
    """Training-set-size study configuration."""

    sizes: List[int] = Field(default_factory=lambda: [10, 30, 40, 60, 120], description="Training set sizes")
    test_size: int = Field(default=200, ge=2, description="Shared test set size")
    base_seed: int = Field(default=0, description="Training seed for size s is base_seed + s")
    test_seed: Optional[int] = Field(default=None, description="Test set seed (default base_seed + 1)")
    max_workers: int = Field(default=1, ge=1, description="Parallel training workers")
    train_config: TrainConfig = Field(default_factory=TrainConfig)
    gait: GaitSpec = Field(default_factory=GaitSpec)
    params: BipedParams = Field(default_factory=BipedParams)

    @field_validator('sizes')
    @classmethod
    def validate_sizes(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError('sizes must not be empty')
        if any(s < 2 for s in v):
            raise ValueError('every training size must be >= 2')
        return v

    @model_validator(mode='after')
    def validate_seed_separation(self):
        """Training and test data must never share a seed."""
        if self.resolved_test_seed in self.train_seeds().values():
            raise ValueError(
                f"test seed {self.resolved_test_seed} collides with a training seed"
            )
        return self

    @property
    def resolved_test_seed(self) -> int:
        return self.base_seed + 1 if self.test_seed is None else self.test_seed

    def train_seeds(self) -> Dict[int, int]:
        """Training dataset seed per size."""
        return {size: self.base_seed + size for size in self.sizes}


class RunConfig(BaseModel):
    """Main application configuration."""

    model_config = {"extra": "forbid"}

    biped: BipedParams = Field(default_factory=BipedParams)
    gait: GaitSpec = Field(default_factory=GaitSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    walk: WalkConfig = Field(default_factory=WalkConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)

    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[str] = Field(default=None, description="Log file path")

    @classmethod
    def from_flat(cls, values: Mapping[str, Any], base: Optional["RunConfig"] = None) -> "RunConfig":
        """Build a configuration from flat keys layered over ``base``."""
        data = (base or cls()).model_dump(exclude={"sweep": {"train_config", "gait", "params"}})
        for key, raw in values.items():
            if key not in FLAT_KEYS:
                raise ConfigError(f"Unknown configuration key: {key!r}")
            section, field = FLAT_KEYS[key]
            value = _coerce_flat_value(key, raw)
            if section is None:
                data[field] = value
            else:
                data[section][field] = value
        try:
            config = cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
        return config.with_synced_sweep()

    @classmethod
    def from_env(cls) -> "RunConfig":
        """Create configuration from environment variables."""
        flat: Dict[str, Any] = {}
        if os.getenv("LOG_LEVEL"):
            flat["log_level"] = os.getenv("LOG_LEVEL")
        if os.getenv("LOG_FILE"):
            flat["log_file"] = os.getenv("LOG_FILE")
        return cls.from_flat(flat)

    @classmethod
    def from_file(cls, path: str, base: Optional["RunConfig"] = None) -> "RunConfig":
        """Load a flat KEY=VALUE configuration file."""
        if not os.path.exists(path):
            raise ConfigError(f"Configuration file not found: {path}")
        values = dotenv_values(path)
        missing = [key for key, value in values.items() if value is None]
        if missing:
            raise ConfigError(f"Configuration keys without a value: {', '.join(missing)}")
        return cls.from_flat(values, base=base)

    def with_synced_sweep(self) -> "RunConfig":
        """Point the sweep at this run's biped, gait and training settings."""
        try:
            sweep = SweepConfig.model_validate({
                **self.sweep.model_dump(exclude={"train_config", "gait", "params"}),
                "train_config": self.train.model_dump(),
                "gait": self.gait.model_dump(),
                "params": self.biped.model_dump(),
            })
        except ValidationError as e:
            raise ConfigError(f"Invalid sweep configuration: {e}") from e
        return self.model_copy(update={"sweep": sweep})


# flat key -> (section, field); section None means a top-level field
FLAT_KEYS: Dict[str, Tuple[Optional[str], str]] = {
    "l_thigh": ("biped", "l_thigh"),
    "l_shank": ("biped", "l_shank"),
    "step_length": ("gait", "step_length"),
    "step_height": ("gait", "step_height"),
    "com_height": ("gait", "com_height"),
    "com_bob": ("gait", "com_bob"),
    "n_samples": ("gait", "n_samples"),
    "data_seed": ("gait", "seed"),
    "phase_jitter": ("gait", "phase_jitter"),
    "epochs": ("train", "epochs"),
    "learn_rate": ("train", "learn_rate"),
    "ridge_lambda": ("train", "ridge_lambda"),
    "mfs_per_input": ("train", "mfs_per_input"),
    "train_seed": ("train", "seed"),
    "sizes": ("sweep", "sizes"),
    "test_size": ("sweep", "test_size"),
    "base_seed": ("sweep", "base_seed"),
    "test_seed": ("sweep", "test_seed"),
    "max_workers": ("sweep", "max_workers"),
    "walk_steps": ("walk", "steps"),
    "max_iter": ("walk", "max_iter"),
    "tol": ("walk", "tol"),
    "log_level": (None, "log_level"),
    "log_file": (None, "log_file"),
}


def _coerce_flat_value(key: str, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if key == "sizes":
        return [part.strip() for part in raw.split(",") if part.strip()]
    if raw == "" and key in ("mfs_per_input", "test_seed", "log_file"):
        return None
    return raw


def get_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Get validated configuration: defaults, then env, then file, then flag overrides."""
    config = RunConfig.from_env()
    if path:
        config = RunConfig.from_file(path, base=config)
    if overrides:
        config = RunConfig.from_flat(
            {k: v for k, v in overrides.items() if v is not None}, base=config
        )
    return config
