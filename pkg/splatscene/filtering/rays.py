"""Pinhole projection of Gaussian centers onto a pose's pixel grid.

Each visible Gaussian lands on exactly one pixel (the one holding its
projected center). Depth is measured along the camera's forward axis.
"""

import math
from collections import defaultdict
from typing import NamedTuple

import numpy as np

from splatscene.errors import DomainError
from splatscene.gaussians.cloud import GaussianCloud
from splatscene.models import CameraPose

MIN_DEPTH = 1e-4

Resolution = tuple[int, int]


class CameraBasis(NamedTuple):
    eye: tuple[float, float, float]
    right: tuple[float, float, float]
    up: tuple[float, float, float]
    forward: tuple[float, float, float]
    focal: float


def camera_basis(pose: CameraPose, resolution: Resolution) -> CameraBasis:
    height, _ = resolution
    sy, cy = math.sin(pose.yaw), math.cos(pose.yaw)
    sp, cp = math.sin(pose.pitch), math.cos(pose.pitch)
    return CameraBasis(
        eye=tuple(float(v) for v in pose.position),  # type: ignore[arg-type]
        right=(cy, sy, 0.0),
        up=(sy * sp, -cy * sp, cp),
        forward=(-sy * cp, cy * cp, sp),
        focal=(0.5 * height) / math.tan(0.5 * pose.fov),
    )


def _check_resolution(resolution: Resolution) -> None:
    height, width = resolution
    if height <= 0 or width <= 0:
        raise DomainError(f"resolution must be positive, got {resolution}")


class Projection(NamedTuple):
    """Visible Gaussians of one pose: indices, flat pixel ids and depths."""

    indices: np.ndarray
    pixels: np.ndarray
    depths: np.ndarray


def project(means: np.ndarray, pose: CameraPose, resolution: Resolution) -> Projection:
    _check_resolution(resolution)
    height, width = resolution
    b = camera_basis(pose, resolution)
    d = np.asarray(means, dtype=np.float64).reshape(-1, 3) - np.asarray(b.eye)
    dx, dy, dz = d[:, 0], d[:, 1], d[:, 2]
    depth = dx * b.forward[0] + dy * b.forward[1] + dz * b.forward[2]
    x = dx * b.right[0] + dy * b.right[1] + dz * b.right[2]
    y = dx * b.up[0] + dy * b.up[1] + dz * b.up[2]

    front = depth > 0
    depth = np.maximum(np.where(front, depth, 1.0), MIN_DEPTH)
    px = np.floor(0.5 * width + b.focal * x / depth)
    py = np.floor(0.5 * height - b.focal * y / depth)
    visible = front & (px >= 0) & (px < width) & (py >= 0) & (py < height)

    idx = np.flatnonzero(visible)
    pixels = (py[idx] * width + px[idx]).astype(np.intp)
    return Projection(idx, pixels, depth[idx])


def assign_to_rays(
    cloud: GaussianCloud, pose: CameraPose, resolution: Resolution
) -> dict[tuple[int, int], list[tuple[int, float]]]:
    """Map (row, col) -> [(gaussian index, depth), ...] in cloud order."""
    _, width = resolution
    proj = project(cloud.means, pose, resolution)
    rays: dict[tuple[int, int], list[tuple[int, float]]] = defaultdict(list)
    for i, pix, depth in zip(proj.indices, proj.pixels, proj.depths):
        rays[divmod(int(pix), width)].append((int(i), float(depth)))
    return dict(rays)
