"""Initial environment clouds (room shell or outdoor dome) and box-shaped stand-in assets."""

import math

import numpy as np

from splatscene.errors import DomainError
from splatscene.gaussians.cloud import GaussianCloud
from splatscene.models import Box3, SceneDims, Vec3

ENV_OPACITY = 0.8
# DC 0 renders as mid-gray (0.5 after the SH offset)
NEUTRAL_DC = (0.0, 0.0, 0.0)

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def _axis(lo: float, hi: float, spacing: float) -> np.ndarray:
    n = max(1, math.ceil((hi - lo) / spacing - 1e-9))
    return np.linspace(lo, hi, n + 1)


def _box_surface(lo: Vec3, hi: Vec3, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Lattice points over the six faces: z-low, z-high, y-low, y-high, x-low, x-high.

    Edge and corner points shared by two faces are kept once, at their first face.
    Returns (points, normals) where normals point into the box.
    """
    xs, ys, zs = (_axis(lo[k], hi[k], spacing) for k in range(3))
    faces = [
        ((xs, ys, [lo[2]]), (0.0, 0.0, 1.0)),
        ((xs, ys, [hi[2]]), (0.0, 0.0, -1.0)),
        ((xs, [lo[1]], zs), (0.0, 1.0, 0.0)),
        ((xs, [hi[1]], zs), (0.0, -1.0, 0.0)),
        (([lo[0]], ys, zs), (1.0, 0.0, 0.0)),
        (([hi[0]], ys, zs), (-1.0, 0.0, 0.0)),
    ]
    seen: set[tuple[float, float, float]] = set()
    points: list[tuple[float, float, float]] = []
    normals: list[tuple[float, float, float]] = []
    for (fx, fy, fz), normal in faces:
        for x in fx:
            for y in fy:
                for z in fz:
                    key = (round(float(x), 9), round(float(y), 9), round(float(z), 9))
                    if key in seen:
                        continue
                    seen.add(key)
                    points.append((float(x), float(y), float(z)))
                    normals.append(normal)
    return np.asarray(points, dtype=np.float64), np.asarray(normals, dtype=np.float64)


def _isotropic_cloud(
    points: np.ndarray,
    normals: np.ndarray,
    spacing: float,
    label: str,
    dc: Vec3 = NEUTRAL_DC,
) -> GaussianCloud:
    n = len(points)
    return GaussianCloud(
        means=points,
        rotations=np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)),
        scales=np.full((n, 3), 0.5 * spacing),
        opacities=np.full(n, ENV_OPACITY),
        sh_dc=np.tile(dc, (n, 1)),
        normals=normals,
        label=label,
    )


def init_indoor_environment(scene: SceneDims, spacing: float) -> GaussianCloud:
    """Gaussians covering floor, ceiling and the four walls of the room."""
    if not scene.is_indoor:
        raise DomainError("indoor environment needs an indoor scene")
    if spacing <= 0:
        raise DomainError(f"spacing must be > 0, got {spacing}")
    hw, hl = 0.5 * scene.width, 0.5 * scene.length  # type: ignore[operator]
    points, normals = _box_surface((-hw, -hl, 0.0), (hw, hl, float(scene.height)), spacing)
    return _isotropic_cloud(points, normals, spacing, "environment")


def hemisphere_count(radius: float, spacing: float) -> int:
    return max(1, round(2.0 * math.pi * radius * radius / (spacing * spacing)))


def init_outdoor_environment(scene: SceneDims, spacing: float) -> GaussianCloud:
    """Dome of radius 3R (Fibonacci sampling) followed by a ground disk of the same radius."""
    if scene.is_indoor:
        raise DomainError("outdoor environment needs an outdoor scene")
    if spacing <= 0:
        raise DomainError(f"spacing must be > 0, got {spacing}")
    rho = 3.0 * float(scene.radius)  # type: ignore[arg-type]

    n = hemisphere_count(rho, spacing)
    i = np.arange(n, dtype=np.float64)
    z = (i + 0.5) / n
    ring = np.sqrt(1.0 - z * z)
    phi = i * _GOLDEN_ANGLE
    dome = np.stack([ring * np.cos(phi), ring * np.sin(phi), z], axis=1)
    dome_points = rho * dome

    k = math.floor(rho / spacing + 1e-9)
    steps = np.arange(-k, k + 1, dtype=np.float64) * spacing
    gx, gy = np.meshgrid(steps, steps, indexing="ij")
    inside = gx * gx + gy * gy <= rho * rho + 1e-9
    ground = np.stack([gx[inside], gy[inside], np.zeros(int(inside.sum()))], axis=1)

    points = np.concatenate([dome_points, ground])
    normals = np.concatenate([-dome, np.tile([0.0, 0.0, 1.0], (len(ground), 1))])
    return _isotropic_cloud(points, normals, spacing, "environment")


def init_environment(scene: SceneDims, spacing: float) -> GaussianCloud:
    if scene.is_indoor:
        return init_indoor_environment(scene, spacing)
    return init_outdoor_environment(scene, spacing)


def box_asset(size: Vec3, spacing: float, label: str = "", dc: Vec3 = NEUTRAL_DC) -> GaussianCloud:
    """Stand-in object: a box surface in model units, half the real size, centered at the origin."""
    if spacing <= 0:
        raise DomainError(f"spacing must be > 0, got {spacing}")
    box = Box3.centered(tuple(0.5 * float(v) for v in size))
    points, normals = _box_surface(box.min, box.max, spacing)
    return _isotropic_cloud(points, -normals, spacing, label, dc)
