"""Data models for biped-hflc."""

import math
from enum import Enum
from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Leg(str, Enum):
    """Leg side."""
    LEFT = "left"
    RIGHT = "right"


class PlanarPoint(BaseModel):
    """Point in the sagittal plane: x along the walking direction, y height above ground (m)."""

    model_config = ConfigDict(frozen=True)

    x: float
    y: float

    @field_validator('x', 'y')
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError('coordinates must be finite')
        return v

    def distance_to(self, other: "PlanarPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class LegPose(BaseModel):
    """Leg joint angles (rad).

    ``beta`` is the hip angle from the downward vertical, positive toward +x;
    ``gamma`` is the knee flexion, 0 for a straight leg.
    """

    model_config = ConfigDict(frozen=True)

    beta: float
    gamma: float


class GaitSample(BaseModel):
    """One synchronized record of every signal used by the controller hierarchy."""

    model_config = ConfigDict(frozen=True)

    t: float = Field(..., ge=0.0, le=1.0, description="Gait phase")
    com: PlanarPoint
    beta_left: float
    gamma_left: float
    ankle_left: PlanarPoint
    beta_right: float
    gamma_right: float
    ankle_right: PlanarPoint

    def signals(self) -> Dict[str, float]:
        """Flat signal map keyed by controller signal names."""
        return {
            "x0": self.com.x,
            "y0": self.com.y,
            "beta_left": self.beta_left,
            "gamma_left": self.gamma_left,
            "xcl": self.ankle_left.x,
            "ycl": self.ankle_left.y,
            "beta_right": self.beta_right,
            "gamma_right": self.gamma_right,
            "xcr": self.ankle_right.x,
            "ycr": self.ankle_right.y,
        }

    def pose(self, leg: Leg) -> LegPose:
        if leg == Leg.LEFT:
            return LegPose(beta=self.beta_left, gamma=self.gamma_left)
        return LegPose(beta=self.beta_right, gamma=self.gamma_right)

    def ankle(self, leg: Leg) -> PlanarPoint:
        return self.ankle_left if leg == Leg.LEFT else self.ankle_right


# CSV column order of a gait dataset
GAIT_COLUMNS: Tuple[str, ...] = (
    "t", "x0", "y0",
    "beta_left", "gamma_left", "xcl", "ycl",
    "beta_right", "gamma_right", "xcr", "ycr",
)


class Sample(BaseModel):
    """One supervised training pair."""

    model_config = ConfigDict(frozen=True)

    x: Tuple[float, ...]
    y: float

    @model_validator(mode='after')
    def validate_finite(self):
        if not all(math.isfinite(v) for v in self.x) or not math.isfinite(self.y):
            raise ValueError('sample values must be finite')
        return self


class Dataset(BaseModel):
    """Named collection of samples with uniform input dimension."""

    model_config = ConfigDict(frozen=True)

    samples: List[Sample]
    name: str = "dataset"
    seed: int = 0

    @model_validator(mode='after')
    def validate_dimensions(self):
        if self.samples:
            dim = len(self.samples[0].x)
            if any(len(s.x) != dim for s in self.samples):
                raise ValueError(f"dataset {self.name!r} mixes input dimensions")
        return self

    @property
    def n_inputs(self) -> int:
        return len(self.samples[0].x) if self.samples else 0

    def __len__(self) -> int:
        return len(self.samples)
