import numpy as np
import pytest

from splatscene.compose.environment import (
    box_asset,
    hemisphere_count,
    init_environment,
    init_indoor_environment,
    init_outdoor_environment,
)
from splatscene.errors import DomainError
from splatscene.gaussians.geometry import aabb
from splatscene.models import SceneDims


def test_room_shell_lattice():
    cloud = init_environment(SceneDims.indoor(4.0, 4.0, 3.0), 1.0)
    # 5 x 5 x 4 lattice minus its 3 x 3 x 2 interior
    assert len(cloud) == 82
    assert len({tuple(p) for p in cloud.means.tolist()}) == 82
    assert cloud.label == "environment"
    on_surface = (
        np.isclose(np.abs(cloud.means[:, 0]), 2.0)
        | np.isclose(np.abs(cloud.means[:, 1]), 2.0)
        | np.isclose(cloud.means[:, 2], 0.0)
        | np.isclose(cloud.means[:, 2], 3.0)
    )
    assert on_surface.all()
    assert np.allclose(cloud.scales, 0.5)


def test_room_normals_point_inward():
    cloud = init_indoor_environment(SceneDims.indoor(2.0, 2.0, 2.0), 0.5)
    center = np.array([0.0, 0.0, 1.0])
    inward = np.einsum("ij,ij->i", center - cloud.means, cloud.normals)
    assert np.all(inward > 0)


def test_outdoor_dome_and_ground():
    cloud = init_outdoor_environment(SceneDims.outdoor(2.0), 1.0)
    n_dome = hemisphere_count(6.0, 1.0)
    dome, ground = cloud.means[:n_dome], cloud.means[n_dome:]
    assert np.allclose(np.linalg.norm(dome, axis=1), 6.0)
    assert np.all(dome[:, 2] > 0)
    assert np.all(ground[:, 2] == 0.0)
    assert np.all(np.linalg.norm(ground[:, :2], axis=1) <= 6.0 + 1e-9)
    assert len(ground) == sum(1 for i in range(-6, 7) for j in range(-6, 7) if i * i + j * j <= 36)


def test_environment_kind_must_match():
    with pytest.raises(DomainError):
        init_indoor_environment(SceneDims.outdoor(2.0), 1.0)
    with pytest.raises(DomainError):
        init_outdoor_environment(SceneDims.indoor(2.0, 2.0, 2.0), 1.0)
    with pytest.raises(DomainError):
        init_environment(SceneDims.indoor(2.0, 2.0, 2.0), 0.0)


def test_box_asset_is_half_size():
    asset = box_asset((2.0, 1.0, 0.8), 0.1, label="sofa")
    box = aabb(asset, k=0.0)
    assert np.allclose(box.min, (-0.5, -0.25, -0.2))
    assert np.allclose(box.max, (0.5, 0.25, 0.2))
    assert asset.label == "sofa"
    outward = np.einsum("ij,ij->i", asset.means, asset.normals)
    assert np.all(outward > 0)
