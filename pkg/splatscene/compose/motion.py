"""Keyframed rigid motion for dynamic instances."""

import bisect

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial.transform import Rotation, Slerp

from splatscene.models import AffineTransform


class Keyframe(BaseModel):
    model_config = ConfigDict(frozen=True)

    time: float
    affine: AffineTransform


class MotionTrajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    keyframes: list[Keyframe] = Field(min_length=1)

    @model_validator(mode="after")
    def _increasing(self) -> "MotionTrajectory":
        times = [k.time for k in self.keyframes]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"keyframe times must be strictly increasing, got {times}")
        return self

    @property
    def times(self) -> list[float]:
        return [k.time for k in self.keyframes]

    @property
    def duration(self) -> float:
        return self.keyframes[-1].time - self.keyframes[0].time


def sample_trajectory(traj: MotionTrajectory, t: float) -> AffineTransform:
    """Affine at time t: lerp of scale and translation, shortest-arc slerp of rotation.

    Times outside the keyframe range clamp to the end keyframes.
    """
    frames = traj.keyframes
    if t <= frames[0].time:
        return frames[0].affine
    if t >= frames[-1].time:
        return frames[-1].affine

    i = bisect.bisect_right(traj.times, t) - 1
    a, b = frames[i], frames[i + 1]
    if t == a.time:
        return a.affine

    u = (t - a.time) / (b.time - a.time)
    s = a.affine.s + u * (b.affine.s - a.affine.s)
    translation = tuple(p + u * (q - p) for p, q in zip(a.affine.t, b.affine.t))
    key_rots = Rotation.from_quat([a.affine.r, b.affine.r], scalar_first=True)
    rot = Slerp([0.0, 1.0], key_rots)([u])[0]
    return AffineTransform(
        s=s,
        r=tuple(float(c) for c in rot.as_quat(scalar_first=True)),
        t=translation,
    )
