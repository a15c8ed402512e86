"""Anchor regions on the floor plane and their grid candidates."""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from splatscene.config import LayoutConfig
from splatscene.errors import DomainError
from splatscene.models import AnchorRegion, Box3, SceneDims, yaw_towards

EPS = 1e-9

# inward normal yaw per wall: x-, x+, y-, y+
_WALL_YAWS = (-math.pi / 2, math.pi / 2, 0.0, math.pi)


class CandidateSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    region: AnchorRegion
    positions: list[tuple[float, float]]
    instance: str = ""


def _wall_distances(x: float, y: float, scene: SceneDims) -> tuple[float, float, float, float]:
    hw, hl = 0.5 * scene.width, 0.5 * scene.length  # type: ignore[operator]
    return (x + hw, hw - x, y + hl, hl - y)


def classify_region(
    x: float, y: float, scene: SceneDims, config: LayoutConfig | None = None
) -> AnchorRegion:
    config = config or LayoutConfig()
    if not scene.is_indoor:
        radius = float(scene.radius)  # type: ignore[arg-type]
        r = math.hypot(x, y)
        if r <= config.outdoor_center * radius + EPS:
            return AnchorRegion.CENTER
        if r >= config.outdoor_side * radius - EPS:
            return AnchorRegion.SIDE
        return AnchorRegion.OTHERS

    band = config.side_band * min(scene.width, scene.length)  # type: ignore[type-var]
    dx_lo, dx_hi, dy_lo, dy_hi = _wall_distances(x, y, scene)
    near_x = min(dx_lo, dx_hi) <= band + EPS
    near_y = min(dy_lo, dy_hi) <= band + EPS
    if near_x and near_y:
        return AnchorRegion.CORNER
    if near_x or near_y:
        return AnchorRegion.SIDE
    half_w = config.center_fraction * 0.5 * scene.width  # type: ignore[operator]
    half_l = config.center_fraction * 0.5 * scene.length  # type: ignore[operator]
    if abs(x) <= half_w + EPS and abs(y) <= half_l + EPS:
        return AnchorRegion.CENTER
    return AnchorRegion.OTHERS


def grid_points(scene: SceneDims, grid: float) -> list[tuple[float, float]]:
    """Multiples of ``grid`` inside the floor, sorted by (x, y)."""
    if grid <= 0:
        raise DomainError(f"grid spacing must be > 0, got {grid}")
    if scene.is_indoor:
        nx = math.floor(0.5 * scene.width / grid + EPS)  # type: ignore[operator]
        ny = math.floor(0.5 * scene.length / grid + EPS)  # type: ignore[operator]
        return [(i * grid, j * grid) for i in range(-nx, nx + 1) for j in range(-ny, ny + 1)]
    radius = float(scene.radius)  # type: ignore[arg-type]
    n = math.floor(radius / grid + EPS)
    return [
        (i * grid, j * grid)
        for i in range(-n, n + 1)
        for j in range(-n, n + 1)
        if math.hypot(i * grid, j * grid) <= radius + EPS
    ]


def candidate_positions(
    region: AnchorRegion,
    scene: SceneDims,
    grid: float,
    config: LayoutConfig | None = None,
    instance: str = "",
) -> CandidateSet:
    if region is AnchorRegion.CORNER and not scene.is_indoor:
        raise DomainError("outdoor scenes have no CORNER region")
    positions = [
        p for p in grid_points(scene, grid) if classify_region(p[0], p[1], scene, config) is region
    ]
    return CandidateSet(region=region, positions=positions, instance=instance)


def anchor_yaw(region: AnchorRegion, x: float, y: float, scene: SceneDims) -> float:
    """Default heading for an anchor-placed object.

    Indoor SIDE objects face away from their nearest wall; CORNER objects and
    outdoor SIDE objects face the scene center; everything else faces +y.
    """
    if region is AnchorRegion.SIDE and scene.is_indoor:
        distances = _wall_distances(x, y, scene)
        return _WALL_YAWS[int(np.argmin(distances))]
    if region in (AnchorRegion.SIDE, AnchorRegion.CORNER):
        return yaw_towards(-x, -y)
    return 0.0


def within_bounds(box: Box3, scene: SceneDims) -> bool:
    if box.min[2] < -EPS:
        return False
    if scene.is_indoor:
        hw, hl = 0.5 * scene.width, 0.5 * scene.length  # type: ignore[operator]
        return (
            box.min[0] >= -hw - EPS
            and box.max[0] <= hw + EPS
            and box.min[1] >= -hl - EPS
            and box.max[1] <= hl + EPS
            and box.max[2] <= scene.height + EPS  # type: ignore[operator]
        )
    radius = float(scene.radius)  # type: ignore[arg-type]
    return all(
        math.hypot(x, y) <= radius + EPS
        for x in (box.min[0], box.max[0])
        for y in (box.min[1], box.max[1])
    )
