"""Evaluation path shared by every method: straight passes, then an orbit."""

import math

from splatscene.config import CameraConfig
from splatscene.errors import DomainError
from splatscene.models import CameraPose, SceneDims, yaw_towards


def orbit_radius(scene: SceneDims) -> float:
    """Two thirds of the scene diameter."""
    return (2.0 / 3.0) * (2.0 * scene.scene_radius)


def evaluation_trajectory(
    scene: SceneDims,
    step: float,
    azimuths: int,
    config: CameraConfig | None = None,
) -> list[CameraPose]:
    """Diametral lines at azimuths k*pi/a walked every ``step`` meters, then an orbit."""
    config = config or CameraConfig()
    if step <= 0:
        raise DomainError(f"step must be > 0, got {step}")
    if azimuths < 1:
        raise DomainError(f"azimuths must be >= 1, got {azimuths}")
    radius = scene.scene_radius
    z = config.eval_height
    poses: list[CameraPose] = []

    n_line = math.floor(2.0 * radius / step + 1e-9) + 1
    for k in range(azimuths):
        phi = k * math.pi / azimuths
        dx, dy = math.cos(phi), math.sin(phi)
        yaw = yaw_towards(dx, dy)
        for i in range(n_line):
            d = -radius + i * step
            poses.append(
                CameraPose(position=(d * dx, d * dy, z), yaw=yaw, pitch=0.0, fov=config.fov)
            )

    rho = orbit_radius(scene)
    n_circle = max(1, round(2.0 * math.pi * rho / step))
    for j in range(n_circle):
        theta = 2.0 * math.pi * j / n_circle
        x, y = rho * math.cos(theta), rho * math.sin(theta)
        poses.append(
            CameraPose(position=(x, y, z), yaw=yaw_towards(-x, -y), pitch=0.0, fov=config.fov)
        )
    return poses
