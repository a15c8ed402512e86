"""Density, volume, bounds and world placement of Gaussian clouds."""

import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
from scipy.spatial.transform import Rotation

from splatscene.errors import DomainError
from splatscene.gaussians.cloud import Gaussian, GaussianCloud
from splatscene.gaussians.sh import rotate_sh_rest
from splatscene.models import AffineTransform, Box3

ShMode = Literal["truncate", "rotate"]

IDENTITY_QUAT = (1.0, 0.0, 0.0, 0.0)


def evaluate_density(g: Gaussian, p: Sequence[float] | np.ndarray) -> float:
    """Unnormalized Gaussian density exp(-1/2 d^T Sigma^-1 d) at point p."""
    d = np.asarray(p, dtype=np.float64) - np.asarray(g.mean)
    rot = Rotation.from_quat(g.rotation, scalar_first=True).as_matrix()
    sigma = rot @ np.diag(np.square(g.scale)) @ rot.T
    mahalanobis = float(d @ np.linalg.solve(sigma, d))
    return math.exp(-0.5 * mahalanobis)


def volume(g: Gaussian) -> float:
    """Product of the per-axis scales (sqrt det Sigma)."""
    sx, sy, sz = g.scale
    return sx * sy * sz


def volumes(cloud: GaussianCloud) -> np.ndarray:
    return np.prod(cloud.scales, axis=1)


def _is_identity(q: Sequence[float]) -> bool:
    return tuple(float(c) for c in q) == IDENTITY_QUAT


def apply_affine(
    cloud: GaussianCloud, a: AffineTransform, sh_mode: ShMode = "truncate"
) -> GaussianCloud:
    """Place a model-space cloud in the world: x -> r * (s * x) + t.

    Rotations are left-multiplied by r and scales multiplied by s. Under a
    non-identity rotation the higher SH bands are zeroed ("truncate") or
    rotated band by band ("rotate").
    """
    if len(cloud) == 0:
        return cloud
    t = np.asarray(a.t, dtype=np.float64)
    if _is_identity(a.r):
        return cloud.replace(means=cloud.means * a.s + t, scales=cloud.scales * a.s)

    rot = a.rotation()
    means = (cloud.means * a.s) @ a.matrix().T + t
    rotations = (rot * Rotation.from_quat(cloud.rotations, scalar_first=True)).as_quat(
        scalar_first=True
    )
    if sh_mode == "rotate":
        sh_rest = rotate_sh_rest(cloud.sh_rest, a.matrix())
    elif sh_mode == "truncate":
        sh_rest = np.zeros_like(cloud.sh_rest)
    else:
        raise DomainError(f"unknown SH mode '{sh_mode}'")
    return cloud.replace(
        means=means, rotations=rotations, scales=cloud.scales * a.s, sh_rest=sh_rest
    )


def compose_affine(b: AffineTransform, a: AffineTransform) -> AffineTransform:
    """b after a: applying the result equals applying a, then b."""
    r = (b.rotation() * a.rotation()).as_quat(scalar_first=True)
    t = b.matrix() @ (b.s * np.asarray(a.t)) + np.asarray(b.t)
    return AffineTransform(
        s=b.s * a.s, r=tuple(float(c) for c in r), t=tuple(float(c) for c in t)
    )


def merge_clouds(clouds: Sequence[GaussianCloud], label: str | None = None) -> GaussianCloud:
    """Concatenate clouds, keeping each input's order."""
    if not clouds:
        return GaussianCloud.empty(label or "")
    if len(clouds) == 1 and label is None:
        return clouds[0]
    if label is None:
        label = "+".join(c.label for c in clouds if c.label)
    columns = {
        name: np.concatenate([c.columns()[name] for c in clouds])
        for name in clouds[0].columns()
    }
    return GaussianCloud(**columns, label=label)


def aabb(cloud: GaussianCloud, k: float = 3.0) -> Box3:
    """Bounds of every Gaussian's k-sigma ellipsoid."""
    if len(cloud) == 0:
        raise DomainError("aabb of an empty cloud")
    if k < 0:
        raise DomainError(f"sigma multiplier must be >= 0, got {k}")
    rots = Rotation.from_quat(cloud.rotations, scalar_first=True).as_matrix()
    half = k * np.sqrt(np.einsum("nij,nj->ni", np.square(rots), np.square(cloud.scales)))
    return Box3.from_arrays(
        (cloud.means - half).min(axis=0), (cloud.means + half).max(axis=0)
    )


def transform_box(box: Box3, a: AffineTransform) -> Box3:
    """Axis-aligned bounds of the eight transformed corners of a model box."""
    pts = a.apply(box.corners())
    return Box3.from_arrays(pts.min(axis=0), pts.max(axis=0))
