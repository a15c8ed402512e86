import math

import pytest
from pydantic import ValidationError

from splatscene.compose.motion import Keyframe, MotionTrajectory, sample_trajectory
from splatscene.models import AffineTransform


@pytest.fixture
def walk() -> MotionTrajectory:
    return MotionTrajectory(
        keyframes=[
            Keyframe(time=0.0, affine=AffineTransform.from_yaw(0.0, 1.0, (0.0, 0.0, 0.0))),
            Keyframe(time=2.0, affine=AffineTransform.from_yaw(math.pi / 2, 2.0, (2.0, 4.0, 0.0))),
        ]
    )


def test_keyframes_are_hit_exactly(walk):
    assert sample_trajectory(walk, 0.0) == walk.keyframes[0].affine
    assert sample_trajectory(walk, 2.0) == walk.keyframes[1].affine


def test_times_outside_the_range_clamp(walk):
    assert sample_trajectory(walk, -1.0) == walk.keyframes[0].affine
    assert sample_trajectory(walk, 9.0) == walk.keyframes[1].affine


def test_midpoint_interpolates(walk):
    mid = sample_trajectory(walk, 1.0)
    assert mid.s == pytest.approx(1.5)
    assert mid.t == pytest.approx((1.0, 2.0, 0.0))
    assert mid.yaw == pytest.approx(math.pi / 4)


def test_rotation_takes_the_short_way():
    traj = MotionTrajectory(
        keyframes=[
            Keyframe(time=0.0, affine=AffineTransform.from_yaw(math.radians(170))),
            Keyframe(time=1.0, affine=AffineTransform.from_yaw(math.radians(-170))),
        ]
    )
    assert abs(sample_trajectory(traj, 0.5).yaw) == pytest.approx(math.pi)


def test_keyframe_times_must_increase():
    frame = Keyframe(time=1.0, affine=AffineTransform.identity())
    with pytest.raises(ValidationError):
        MotionTrajectory(keyframes=[frame, frame])
    with pytest.raises(ValidationError):
        MotionTrajectory(keyframes=[])
    assert MotionTrajectory(keyframes=[frame]).duration == 0.0
