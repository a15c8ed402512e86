"""Rendering-contribution scores and score-based pruning.

A Gaussian earns V / (D^2 * maxV) from every ray it is assigned to, where V
is its volume, D its depth along that view and maxV the largest volume on the
same ray. Large, near, dominant Gaussians score high; the lowest-scoring
fraction is removed.
"""

import csv
import io
import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.spatial.transform import Rotation

from splatscene.errors import DomainError
from splatscene.filtering.rays import MIN_DEPTH, Resolution, project
from splatscene.gaussians.cloud import GaussianCloud
from splatscene.gaussians.geometry import volumes
from splatscene.models import CameraPose

log = logging.getLogger(__name__)


class ScoreVector(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scores: np.ndarray
    poses_used: int
    resolution: Resolution

    @field_validator("scores", mode="before")
    @classmethod
    def _as_array(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.float64).reshape(-1)
        if np.any(arr < 0):
            raise ValueError("scores must be >= 0")
        arr.setflags(write=False)
        return arr

    def __len__(self) -> int:
        return len(self.scores)


def _pose_scores(
    vol: np.ndarray, means: np.ndarray, pose: CameraPose, resolution: Resolution
) -> np.ndarray:
    height, width = resolution
    out = np.zeros(len(vol))
    proj = project(means, pose, resolution)
    if len(proj.indices) == 0:
        return out
    v = vol[proj.indices]
    max_v = np.zeros(height * width)
    np.maximum.at(max_v, proj.pixels, v)
    np.add.at(out, proj.indices, v / (proj.depths**2 * max_v[proj.pixels]))
    return out


def contribution_scores(
    cloud: GaussianCloud,
    poses: Sequence[CameraPose],
    resolution: Resolution = (64, 64),
    threads: int = 1,
) -> ScoreVector:
    """Accumulate per-view contributions; views are summed in pose order."""
    if not poses:
        raise DomainError("scoring needs at least one pose")
    vol = volumes(cloud)
    means = cloud.means
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda p: _pose_scores(vol, means, p, resolution), poses))
    else:
        partials = [_pose_scores(vol, means, p, resolution) for p in poses]
    total = np.zeros(len(cloud))
    for part in partials:
        total += part
    log.debug("Scored %d Gaussians over %d pose(s)", len(cloud), len(poses))
    return ScoreVector(scores=total, poses_used=len(poses), resolution=resolution)


def brute_force_scores(
    cloud: GaussianCloud, poses: Sequence[CameraPose], resolution: Resolution = (64, 64)
) -> ScoreVector:
    """Reference scorer that tests every pixel against every Gaussian.

    The view frame comes from a yaw-then-pitch rotation and a center belongs to
    a pixel when its image-plane coordinates fall inside that pixel's square,
    so no projection code is shared with ``contribution_scores``.
    """
    if not poses:
        raise DomainError("scoring needs at least one pose")
    height, width = resolution
    if height <= 0 or width <= 0:
        raise DomainError(f"resolution must be positive, got {resolution}")
    vol = np.prod(cloud.scales, axis=1)
    scores = np.zeros(len(cloud))
    if len(cloud) == 0:
        return ScoreVector(scores=scores, poses_used=len(poses), resolution=resolution)
    for pose in poses:
        # view frame columns: right, forward, up
        view = Rotation.from_euler("ZX", [pose.yaw, pose.pitch])
        local = view.inv().apply(cloud.means - np.asarray(pose.position, dtype=np.float64))
        depth = local[:, 1]
        front = depth > 0
        depth = np.maximum(np.where(front, depth, 1.0), MIN_DEPTH)
        focal = (0.5 * height) / math.tan(0.5 * pose.fov)
        u = focal * local[:, 0] / depth
        v = focal * local[:, 2] / depth
        for row in range(height):
            top = 0.5 * height - row
            for col in range(width):
                left = col - 0.5 * width
                inside = front & (u >= left) & (u < left + 1) & (v > top - 1) & (v <= top)
                members = np.flatnonzero(inside)
                if len(members) == 0:
                    continue
                max_v = vol[members].max()
                scores[members] += vol[members] / (depth[members] ** 2 * max_v)
    return ScoreVector(scores=scores, poses_used=len(poses), resolution=resolution)


def _check_aligned(cloud: GaussianCloud, scores: ScoreVector) -> None:
    if len(scores) != len(cloud):
        raise DomainError(f"{len(scores)} scores for {len(cloud)} Gaussians")


def filter_cloud(cloud: GaussianCloud, scores: ScoreVector, eta: float) -> GaussianCloud:
    """Remove the ceil(eta * N) lowest scorers; survivors keep their order.

    Among equal scores the lower index survives.
    """
    if not 0.0 <= eta < 1.0:
        raise DomainError(f"eta must lie in [0, 1), got {eta}")
    _check_aligned(cloud, scores)
    n = len(cloud)
    k = math.ceil(eta * n - 1e-9) if n else 0
    if k <= 0:
        return cloud
    idx = np.arange(n)
    ranking = np.lexsort((idx, -scores.scores))
    keep = np.sort(ranking[: n - k])
    log.info("Filtered %d of %d Gaussians", k, n)
    return cloud.subset(keep)


def filter_by_threshold(
    cloud: GaussianCloud, scores: ScoreVector, threshold: float
) -> GaussianCloud:
    """Keep Gaussians scoring at least ``threshold``."""
    _check_aligned(cloud, scores)
    keep = np.flatnonzero(scores.scores >= threshold)
    return cloud.subset(keep)


def should_filter(iteration: int, every: int) -> bool:
    if every <= 0:
        raise DomainError(f"filter interval must be > 0, got {every}")
    return iteration > 0 and iteration % every == 0


def scores_to_csv(scores: ScoreVector) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "score"])
    for i, s in enumerate(scores.scores):
        writer.writerow([i, repr(float(s))])
    return buf.getvalue()
