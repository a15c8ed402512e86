"""Three-stage training pose sampling.

Stage 1 looks around from near the scene center, stage 2 covers the scene
region by region (object cells indoors, concentric rings outdoors) and stage 3
reuses every pose from the first two stages.
"""

import logging
import math
from collections.abc import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from splatscene.config import CameraConfig
from splatscene.errors import DomainError, UnknownInstanceError
from splatscene.gaussians.geometry import transform_box
from splatscene.layout.models import Layout
from splatscene.models import Box3, CameraPose, SceneDims, yaw_towards

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_FAN_RAYS = 16
_FAN_STEPS = 40


class PosePlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    scene: SceneDims
    stage1: list[CameraPose]
    stage2: list[CameraPose]
    stage3: list[CameraPose]


def forward_vector(pose: CameraPose) -> np.ndarray:
    return pose.forward()


def _eye_heights(
    rng: np.random.Generator, scene: SceneDims, n: int, config: CameraConfig
) -> np.ndarray:
    if scene.is_indoor:
        return rng.uniform(config.eye_height_min, config.eye_height_max, n)
    return np.full(n, config.outdoor_eye_height)


def sample_stage1(
    scene: SceneDims, count: int, seed: int, config: CameraConfig | None = None
) -> list[CameraPose]:
    """Poses in a small disk around the center, looking in every direction."""
    config = config or CameraConfig()
    if count <= 0:
        raise DomainError(f"stage-1 pose count must be > 0, got {count}")
    rng = np.random.default_rng(seed)
    radius = config.rho1 * scene.scene_radius
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    theta = rng.uniform(0.0, TWO_PI, count)
    z = _eye_heights(rng, scene, count, config)
    yaw = rng.uniform(0.0, TWO_PI, count)
    lo, hi = (math.radians(v) for v in config.stage1_pitch_deg)
    pitch = rng.uniform(lo, hi, count)
    return [
        CameraPose(
            position=(
                float(r[i] * math.cos(theta[i])),
                float(r[i] * math.sin(theta[i])),
                float(z[i]),
            ),
            yaw=float(yaw[i]),
            pitch=float(pitch[i]),
            fov=config.fov,
        )
        for i in range(count)
    ]


def object_centers(layout: Layout) -> dict[str, tuple[float, float]]:
    centers = {}
    for iid, box in layout.world_boxes().items():
        cx, cy, _ = box.center
        centers[iid] = (float(cx), float(cy))
    return centers


def nearest_object(x: float, y: float, centers: Mapping[str, tuple[float, float]]) -> str:
    """Owner of the Voronoi cell containing (x, y); ties go to the earlier object."""
    best, best_d = "", math.inf
    for iid, (cx, cy) in centers.items():
        d = math.hypot(x - cx, y - cy)
        if d < best_d:
            best, best_d = iid, d
    return best


def _inside_any(point: Sequence[float], boxes: Sequence[Box3], inflation: float) -> bool:
    return any(b.inflate(inflation).contains(point) for b in boxes)


def _cell_point(
    iid: str,
    centers: Mapping[str, tuple[float, float]],
    hw: float,
    hl: float,
    z: float,
    boxes: Sequence[Box3],
    inflation: float,
    rng: np.random.Generator,
) -> tuple[float, float] | None:
    """Farthest free floor point of iid's cell along a fan of rays from its center.

    None when no point of the cell clears the boxes, or the cell is empty
    (another object shares the center).
    """
    cx, cy = centers[iid]
    phase = float(rng.uniform(0.0, TWO_PI))
    best, best_d = None, 0.0
    for k in range(_FAN_RAYS):
        a = phase + TWO_PI * k / _FAN_RAYS
        dx, dy = math.cos(a), math.sin(a)
        for d in np.geomspace(1e-3, 1.0, _FAN_STEPS) * math.hypot(hw, hl):
            x, y = cx + float(d) * dx, cy + float(d) * dy
            if abs(x) > hw or abs(y) > hl or nearest_object(x, y, centers) != iid:
                break
            if boxes and _inside_any((x, y, z), boxes, inflation):
                continue
            if d > best_d:
                best, best_d = (x, y), float(d)
    return best


def sample_stage2_indoor(
    scene: SceneDims,
    layout: Layout,
    per_region: int,
    seed: int,
    config: CameraConfig | None = None,
    avoid_objects: bool = False,
) -> list[CameraPose]:
    """``per_region`` poses inside each object's floor cell, looking at that object.

    Cells are drawn by rejection sampling over the floor. A cell that gets no
    hit within ``max_attempts`` draws still gets one pose, found by marching
    out from its owner; a cell with fewer than ``per_region`` hits is logged.
    """
    config = config or CameraConfig()
    if not scene.is_indoor:
        raise DomainError("indoor stage-2 sampling needs an indoor scene")
    centers = object_centers(layout)
    if not centers:
        raise DomainError("indoor stage-2 sampling needs a non-empty layout")
    boxes = list(layout.world_boxes().values()) if avoid_objects else []
    rng = np.random.default_rng(seed)
    hw, hl = 0.5 * scene.width, 0.5 * scene.length  # type: ignore[operator]
    lo, hi = (math.radians(v) for v in config.stage2_pitch_deg)

    def pose_at(x: float, y: float, z: float, cx: float, cy: float) -> CameraPose:
        return CameraPose(
            position=(x, y, z),
            yaw=yaw_towards(cx - x, cy - y),
            pitch=float(rng.uniform(lo, hi)),
            fov=config.fov,
        )

    poses: list[CameraPose] = []
    for iid, (cx, cy) in centers.items():
        found = 0
        for _ in range(config.max_attempts):
            if found == per_region:
                break
            x, y = float(rng.uniform(-hw, hw)), float(rng.uniform(-hl, hl))
            if nearest_object(x, y, centers) != iid:
                continue
            z = float(rng.uniform(config.eye_height_min, config.eye_height_max))
            if boxes and _inside_any((x, y, z), boxes, config.inflation):
                continue
            poses.append(pose_at(x, y, z, cx, cy))
            found += 1
        if found == 0:
            z = float(rng.uniform(config.eye_height_min, config.eye_height_max))
            point = _cell_point(iid, centers, hw, hl, z, boxes, config.inflation, rng)
            if point is not None:
                poses.append(pose_at(*point, z, cx, cy))
                found = 1
        if found < per_region:
            log.warning("Region of %s starved: %d/%d poses", iid, found, per_region)
    return poses


def sample_stage2_outdoor(
    scene: SceneDims,
    circles: int,
    batches: int,
    seed: int,
    config: CameraConfig | None = None,
) -> list[CameraPose]:
    """Per batch, one pose on every concentric ring along a shared azimuth and view direction."""
    config = config or CameraConfig()
    if scene.is_indoor:
        raise DomainError("outdoor stage-2 sampling needs an outdoor scene")
    if circles < 1:
        raise DomainError(f"circles must be >= 1, got {circles}")
    rng = np.random.default_rng(seed)
    radius = float(scene.radius)  # type: ignore[arg-type]
    pitch = math.radians(config.outdoor_pitch_deg)
    poses = []
    for _ in range(batches):
        azimuth = float(rng.uniform(0.0, TWO_PI))
        view = float(rng.uniform(0.0, TWO_PI))
        for k in range(1, circles + 1):
            r = k * radius / circles
            poses.append(
                CameraPose(
                    position=(
                        r * math.cos(azimuth),
                        r * math.sin(azimuth),
                        config.outdoor_eye_height,
                    ),
                    yaw=view,
                    pitch=pitch,
                    fov=config.fov,
                )
            )
    return poses


def assemble_stage3(stage1: Sequence[CameraPose], stage2: Sequence[CameraPose]) -> list[CameraPose]:
    return [*stage1, *stage2]


def reject_colliding_poses(
    poses: Sequence[CameraPose],
    layout: Layout,
    assets: Mapping[str, Box3] | None = None,
    inflation: float = 0.2,
) -> list[CameraPose]:
    """Drop poses whose eye lies inside an inflated world box (boundary counts as inside)."""
    if assets is None:
        boxes = list(layout.world_boxes().values())
    else:
        boxes = [transform_box(assets[i], a) for i, a in layout.placements.items() if i in assets]
    kept = [p for p in poses if not _inside_any(p.position, boxes, inflation)]
    if len(kept) < len(poses):
        log.debug("Rejected %d colliding pose(s)", len(poses) - len(kept))
    return kept


def region_coverage(poses: Sequence[CameraPose], layout: Layout) -> dict[str, int]:
    centers = object_centers(layout)
    coverage = {iid: 0 for iid in centers}
    if not centers:
        return coverage
    for p in poses:
        coverage[nearest_object(p.position[0], p.position[1], centers)] += 1
    return coverage


def starved_regions(poses: Sequence[CameraPose], layout: Layout) -> list[str]:
    return [iid for iid, n in region_coverage(poses, layout).items() if n == 0]


def resample_around(
    layout: Layout,
    instance: str,
    count: int,
    seed: int,
    config: CameraConfig | None = None,
) -> list[CameraPose]:
    """Extra stage-2 style poses on a ring around one (moved) object, looking at it."""
    config = config or CameraConfig()
    if instance not in layout.placements:
        raise UnknownInstanceError(instance)
    box = layout.world_box(instance)
    cx, cy, _ = (float(v) for v in box.center)
    ext = box.extent
    ring = 0.5 * math.hypot(float(ext[0]), float(ext[1])) + config.inflation + 0.5
    scene = layout.scene
    rng = np.random.default_rng(seed)
    lo, hi = (math.radians(v) for v in config.stage2_pitch_deg)

    boxes = list(layout.world_boxes().values())
    poses: list[CameraPose] = []
    for _ in range(config.max_attempts):
        if len(poses) == count:
            break
        theta = float(rng.uniform(0.0, TWO_PI))
        x, y = cx + ring * math.cos(theta), cy + ring * math.sin(theta)
        z = float(_eye_heights(rng, scene, 1, config)[0])
        if not _on_floor(x, y, scene) or _inside_any((x, y, z), boxes, config.inflation):
            continue
        poses.append(
            CameraPose(
                position=(x, y, z),
                yaw=yaw_towards(cx - x, cy - y),
                pitch=float(rng.uniform(lo, hi)),
                fov=config.fov,
            )
        )
    return poses


def _on_floor(x: float, y: float, scene: SceneDims) -> bool:
    if scene.is_indoor:
        hw, hl = 0.5 * scene.width, 0.5 * scene.length  # type: ignore[operator]
        return abs(x) <= hw and abs(y) <= hl
    return math.hypot(x, y) <= float(scene.radius)  # type: ignore[arg-type]


def plan_poses(
    scene: SceneDims,
    layout: Layout | None,
    seed: int,
    config: CameraConfig | None = None,
) -> PosePlan:
    """All three stages, with colliding poses removed."""
    config = config or CameraConfig()
    stage1 = sample_stage1(scene, config.stage1_count, seed, config)
    if scene.is_indoor:
        if layout is None or not layout.placements:
            raise DomainError("indoor pose planning needs a layout")
        stage2 = sample_stage2_indoor(scene, layout, config.per_region, seed + 1, config)
    else:
        stage2 = sample_stage2_outdoor(
            scene, config.outdoor_circles, config.outdoor_batches, seed + 1, config
        )
    if layout is not None:
        stage1 = reject_colliding_poses(stage1, layout, inflation=config.inflation)
        stage2 = reject_colliding_poses(stage2, layout, inflation=config.inflation)
        starved = starved_regions(stage2, layout) if scene.is_indoor else []
        if starved:
            log.warning("No surviving stage-2 pose for %s", ", ".join(starved))
    return PosePlan(
        scene=scene, stage1=stage1, stage2=stage2, stage3=assemble_stage3(stage1, stage2)
    )
