"""Tests for biped kinematics and gait synthesis."""

import math

import numpy as np
import pytest

from biped_hflc.biped_model import (
    STANCE_ANKLE,
    com_trajectory,
    forward_kinematics,
    gait_sample_at,
    generate_dataset,
    inverse_kinematics,
    sample_phases,
    swing_ankle_trajectory,
)
from biped_hflc.config import BipedParams, GaitSpec
from biped_hflc.errors import GenerationError, InvalidArgumentError, UnreachableError
from biped_hflc.models import Leg, LegPose, PlanarPoint


class TestForwardKinematics:
    """Test forward kinematics."""

    def test_straight_leg(self, biped_params):
        """Test a straight vertical leg."""
        chain = forward_kinematics(biped_params, PlanarPoint(x=0.0, y=1.0), LegPose(beta=0.0, gamma=0.0))

        assert chain.knee.x == pytest.approx(0.0)
        assert chain.knee.y == pytest.approx(0.5)
        assert chain.ankle.x == pytest.approx(0.0)
        assert chain.ankle.y == pytest.approx(0.0, abs=1e-15)

    def test_horizontal_leg(self, biped_params):
        """Test a leg swung forward to horizontal."""
        chain = forward_kinematics(
            biped_params, PlanarPoint(x=0.0, y=1.0), LegPose(beta=math.pi / 2, gamma=0.0)
        )

        assert chain.ankle.x == pytest.approx(1.0)
        assert chain.ankle.y == pytest.approx(1.0)


class TestInverseKinematics:
    """Test inverse kinematics."""

    def test_round_trip(self, biped_params):
        """Test FK reproduces random reachable ankle targets."""
        rng = np.random.default_rng(42)
        hip = PlanarPoint(x=0.1, y=0.9)
        for _ in range(1000):
            d = rng.uniform(0.05, 0.999)
            angle = rng.uniform(-math.pi, math.pi)
            target = PlanarPoint(x=hip.x + d * math.sin(angle), y=hip.y - d * math.cos(angle))

            pose = inverse_kinematics(biped_params, hip, target)

            assert pose.gamma >= 0.0
            assert forward_kinematics(biped_params, hip, pose).ankle.distance_to(target) < 1e-9

    def test_unequal_links(self):
        """Test a shank longer than the thigh."""
        params = BipedParams(l_thigh=0.4, l_shank=0.6)
        hip = PlanarPoint(x=0.0, y=0.9)
        target = PlanarPoint(x=0.3, y=0.2)

        pose = inverse_kinematics(params, hip, target)

        assert forward_kinematics(params, hip, pose).ankle.distance_to(target) < 1e-9

    def test_full_extension(self, biped_params):
        """Test a target at exactly full reach."""
        pose = inverse_kinematics(biped_params, PlanarPoint(x=0.0, y=1.0), PlanarPoint(x=0.0, y=0.0))

        assert pose.gamma == pytest.approx(0.0, abs=1e-7)
        assert pose.beta == pytest.approx(0.0, abs=1e-7)

    def test_out_of_reach(self, biped_params):
        """Test a target beyond full reach."""
        with pytest.raises(UnreachableError, match="unreachable"):
            inverse_kinematics(biped_params, PlanarPoint(x=0.0, y=1.2), PlanarPoint(x=0.0, y=0.0))

    def test_inside_inner_reach(self):
        """Test a target closer than the link-length difference."""
        params = BipedParams(l_thigh=0.5, l_shank=0.3)

        with pytest.raises(UnreachableError) as exc_info:
            inverse_kinematics(params, PlanarPoint(x=0.0, y=0.1), PlanarPoint(x=0.0, y=0.0))

        assert exc_info.value.lower == pytest.approx(0.2)


class TestTrajectories:
    """Test reference trajectories."""

    def test_com_path(self, gait):
        """Test COM advance and bob."""
        assert com_trajectory(gait, 0.0) == PlanarPoint(x=0.0, y=0.9)

        quarter = com_trajectory(gait, 0.25)
        assert quarter.x == pytest.approx(0.075)
        assert quarter.y == pytest.approx(0.92)

    def test_swing_path(self, gait):
        """Test swing ankle from lift-off to apex."""
        lift_off = swing_ankle_trajectory(gait, 0.0)
        apex = swing_ankle_trajectory(gait, 0.5)

        assert (lift_off.x, lift_off.y) == (-0.15, 0.0)
        assert apex.x == pytest.approx(0.0)
        assert apex.y == pytest.approx(0.05)

    def test_phases_stratified(self):
        """Test phases fall one per stratum, increasing, within [0, 1]."""
        phases = sample_phases(30, 0.1, seed=5)

        assert len(phases) == 30
        assert np.all(np.diff(phases) > 0)
        assert phases.min() >= 0.0 and phases.max() <= 1.0

    def test_phases_need_two(self):
        """Test fewer than two phases is invalid."""
        with pytest.raises(InvalidArgumentError):
            sample_phases(1, 0.1, seed=0)


class TestGenerateDataset:
    """Test gait dataset synthesis."""

    def test_size_and_stance(self, biped_params, gait):
        """Test sample count and the planted stance ankle."""
        samples = generate_dataset(biped_params, gait, n=30, seed=0)

        assert len(samples) == 30
        assert all(s.ankle(Leg.LEFT) == STANCE_ANKLE for s in samples)

    def test_kinematic_consistency(self, gait_samples, biped_params):
        """Test every record satisfies forward kinematics for both legs."""
        for sample in gait_samples:
            for leg in Leg:
                ankle = forward_kinematics(biped_params, sample.com, sample.pose(leg)).ankle
                assert ankle.distance_to(sample.ankle(leg)) < 1e-9

    def test_deterministic(self, biped_params, gait):
        """Test same seed gives identical samples."""
        assert generate_dataset(biped_params, gait, n=10, seed=3) == generate_dataset(
            biped_params, gait, n=10, seed=3
        )

    def test_seeds_differ(self, biped_params, gait):
        """Test different seeds give different phases."""
        first = generate_dataset(biped_params, gait, n=10, seed=3)
        second = generate_dataset(biped_params, gait, n=10, seed=4)

        assert [s.t for s in first] != [s.t for s in second]

    def test_defaults_from_gait(self, biped_params):
        """Test size and seed default to the gait settings."""
        gait = GaitSpec(n_samples=12, seed=8)

        assert generate_dataset(biped_params, gait) == generate_dataset(biped_params, gait, n=12, seed=8)

    def test_too_few(self, biped_params, gait):
        """Test n below two is invalid."""
        with pytest.raises(InvalidArgumentError, match="n must be >= 2"):
            generate_dataset(biped_params, gait, n=1)

    def test_unreachable_gait(self, biped_params):
        """Test a COM above leg reach names the phase."""
        with pytest.raises(GenerationError, match="phase"):
            generate_dataset(biped_params, GaitSpec(com_height=1.5), n=5)

    def test_sample_at_phase(self, biped_params, gait):
        """Test a record at one phase matches direct IK."""
        sample = gait_sample_at(biped_params, gait, 0.4)

        expected = inverse_kinematics(biped_params, com_trajectory(gait, 0.4), swing_ankle_trajectory(gait, 0.4))
        assert sample.pose(Leg.RIGHT) == expected
