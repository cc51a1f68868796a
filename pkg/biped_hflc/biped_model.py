"""Planar two-link biped kinematics and gait dataset synthesis.

The body is a point mass at the hip; each leg is a thigh and a shank
joined at the knee. Closed-form forward and inverse kinematics give exact
joint targets for every gait phase, which is what the controllers are
trained on.
"""

import logging
import math
from typing import List, NamedTuple, Optional

import numpy as np

from .config import BipedParams, GaitSpec
from .errors import GenerationError, InvalidArgumentError, UnreachableError
from .models import GaitSample, LegPose, PlanarPoint

logger = logging.getLogger(__name__)

# boundary slack for reachability, in meters
REACH_TOLERANCE = 1e-12
# FK consistency required of every generated sample, in meters
FK_TOLERANCE = 1e-9

# left leg is the stance leg, planted here for the whole step
STANCE_ANKLE = PlanarPoint(x=0.0, y=0.0)


class LegChain(NamedTuple):
    """Knee and ankle positions of one leg."""
    knee: PlanarPoint
    ankle: PlanarPoint


def forward_kinematics(params: BipedParams, hip: PlanarPoint, pose: LegPose) -> LegChain:
    """Knee and ankle positions for a hip position and joint angles."""
    knee = PlanarPoint(
        x=hip.x + params.l_thigh * math.sin(pose.beta),
        y=hip.y - params.l_thigh * math.cos(pose.beta),
    )
    shank_angle = pose.beta + pose.gamma
    ankle = PlanarPoint(
        x=knee.x + params.l_shank * math.sin(shank_angle),
        y=knee.y - params.l_shank * math.cos(shank_angle),
    )
    return LegChain(knee=knee, ankle=ankle)


def inverse_kinematics(params: BipedParams, hip: PlanarPoint, ankle: PlanarPoint) -> LegPose:
    """Joint angles placing the ankle at ``ankle``; the knee branch with gamma >= 0 is returned."""
    l_t, l_s = params.l_thigh, params.l_shank
    dx = ankle.x - hip.x
    dy = ankle.y - hip.y
    d = math.hypot(dx, dy)
    lower, upper = abs(l_t - l_s), l_t + l_s
    if d > upper + REACH_TOLERANCE or d < lower - REACH_TOLERANCE:
        raise UnreachableError(d, lower, upper)

    cos_knee = (l_t ** 2 + l_s ** 2 - d ** 2) / (2.0 * l_t * l_s)
    gamma = math.pi - math.acos(min(1.0, max(-1.0, cos_knee)))
    # hip->ankle direction measured from the downward vertical
    phi = math.atan2(dx, -dy)
    alpha = math.atan2(l_s * math.sin(gamma), l_t + l_s * math.cos(gamma))
    return LegPose(beta=phi - alpha, gamma=gamma)


def com_trajectory(gait: GaitSpec, t: float) -> PlanarPoint:
    """Reference COM position at phase t: steady advance with a sinusoidal bob."""
    return PlanarPoint(
        x=gait.step_length * t,
        y=gait.com_height + gait.com_bob * math.sin(2.0 * math.pi * t),
    )


def swing_ankle_trajectory(gait: GaitSpec, t: float) -> PlanarPoint:
    """Swing ankle position at phase t, from lift-off behind to touch-down ahead."""
    return PlanarPoint(
        x=-gait.step_length / 2.0 + gait.step_length * t,
        y=gait.step_height * math.sin(math.pi * t),
    )


def sample_phases(n: int, phase_jitter: float, seed: int) -> np.ndarray:
    """Stratified phases t_i = (i + u_i * jitter) / n, u_i ~ U[-1, 1], clamped to [0, 1]."""
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=n)
    return np.clip((np.arange(n) + u * phase_jitter) / n, 0.0, 1.0)


def _solve_leg(params: BipedParams, hip: PlanarPoint, ankle: PlanarPoint, t: float, role: str) -> LegPose:
    try:
        pose = inverse_kinematics(params, hip, ankle)
    except UnreachableError as e:
        raise GenerationError(
            f"phase t={t:.6f}: {role} ankle ({ankle.x:.6g}, {ankle.y:.6g}) unreachable "
            f"from COM ({hip.x:.6g}, {hip.y:.6g}): {e}"
        ) from e
    reached = forward_kinematics(params, hip, pose).ankle
    if reached.distance_to(ankle) > FK_TOLERANCE:
        raise GenerationError(f"phase t={t:.6f}: {role} leg FK mismatch {reached.distance_to(ankle):.3g} m")
    return pose


def gait_sample_at(params: BipedParams, gait: GaitSpec, t: float) -> GaitSample:
    """Exact kinematic record at phase t (left = stance, right = swing)."""
    com = com_trajectory(gait, t)
    swing = swing_ankle_trajectory(gait, t)
    stance_pose = _solve_leg(params, com, STANCE_ANKLE, t, "stance")
    swing_pose = _solve_leg(params, com, swing, t, "swing")
    return GaitSample(
        t=t,
        com=com,
        beta_left=stance_pose.beta,
        gamma_left=stance_pose.gamma,
        ankle_left=STANCE_ANKLE,
        beta_right=swing_pose.beta,
        gamma_right=swing_pose.gamma,
        ankle_right=swing,
    )


def generate_dataset(
    params: BipedParams,
    gait: GaitSpec,
    n: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[GaitSample]:
    """Synthesize ``n`` gait samples at stratified, jittered phases drawn from ``seed``."""
    n = gait.n_samples if n is None else n
    seed = gait.seed if seed is None else seed
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    phases = sample_phases(n, gait.phase_jitter, seed)
    samples = [gait_sample_at(params, gait, float(t)) for t in phases]
    logger.debug(f"Generated {n} gait samples (seed={seed})")
    return samples
