import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from splatscene.errors import DomainError
from splatscene.gaussians.cloud import Gaussian, GaussianCloud
from splatscene.gaussians.geometry import (
    aabb,
    apply_affine,
    compose_affine,
    evaluate_density,
    merge_clouds,
    transform_box,
    volume,
    volumes,
)
from splatscene.gaussians.sh import rotate_sh_rest, sh_basis
from splatscene.models import AffineTransform, Box3
from tests.conftest import make_cloud


def test_density_peaks_at_the_mean():
    g = Gaussian(mean=(1.0, 2.0, 3.0), scale=(1.0, 2.0, 3.0), opacity=0.5)
    assert evaluate_density(g, (1.0, 2.0, 3.0)) == pytest.approx(1.0)
    assert evaluate_density(g, (2.0, 2.0, 3.0)) == pytest.approx(math.exp(-0.5))
    assert evaluate_density(g, (1.0, 4.0, 3.0)) == pytest.approx(math.exp(-0.5))


def test_volume_is_scale_product():
    g = Gaussian(mean=(0.0, 0.0, 0.0), scale=(0.5, 2.0, 3.0), opacity=0.5)
    assert volume(g) == pytest.approx(3.0)
    cloud = GaussianCloud.from_gaussians([g, g])
    assert np.allclose(volumes(cloud), [3.0, 3.0])


def test_cloud_validation():
    with pytest.raises(ValidationError):
        make_cloud([[0.0, 0.0, 0.0]], opacity=1.5)
    with pytest.raises(ValidationError):
        make_cloud([[0.0, 0.0, 0.0]], scale=0.0)
    with pytest.raises(ValidationError):
        GaussianCloud(means=np.zeros((1, 3)), rotations=[[2.0, 0.0, 0.0, 0.0]], scales=[[1.0] * 3])


def test_cloud_is_read_only():
    cloud = make_cloud([[0.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        cloud.means[0, 0] = 1.0


def test_cloud_indexing_and_subset():
    cloud = make_cloud([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], label="row")
    assert cloud[1].mean == (1.0, 0.0, 0.0)
    sub = cloud.subset([2, 0])
    assert sub.means[:, 0].tolist() == [2.0, 0.0]
    assert sub.label == "row"
    assert len(GaussianCloud.empty()) == 0


def test_apply_affine_scales_and_translates():
    cloud = make_cloud([[1.0, 0.0, 0.0]], scale=0.1)
    out = apply_affine(cloud, AffineTransform(s=2.0, t=(0.0, 0.0, 1.0)))
    assert np.allclose(out.means, [[2.0, 0.0, 1.0]])
    assert np.allclose(out.scales, 0.2)
    assert np.array_equal(out.opacities, cloud.opacities)


def test_apply_affine_rotates_means_and_truncates_sh():
    cloud = make_cloud([[1.0, 0.0, 0.0]]).replace(sh_rest=np.ones((1, 45)))
    out = apply_affine(cloud, AffineTransform.from_yaw(math.pi / 2))
    assert np.allclose(out.means, [[0.0, 1.0, 0.0]], atol=1e-12)
    assert np.all(out.sh_rest == 0.0)
    assert np.allclose(np.linalg.norm(out.rotations, axis=1), 1.0)


def test_apply_affine_rejects_unknown_sh_mode():
    with pytest.raises(DomainError):
        apply_affine(make_cloud([[0.0, 0.0, 0.0]]), AffineTransform.from_yaw(1.0), "keep")


def test_rotated_sh_shades_like_the_original():
    rng = np.random.default_rng(0)
    rest = rng.standard_normal((1, 45))
    rot = Rotation.from_euler("xyz", [0.3, -0.7, 1.1]).as_matrix()
    rotated = rotate_sh_rest(rest, rot)
    dirs = rng.standard_normal((32, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for c in range(3):
        before = sh_basis(dirs @ rot) @ rest.reshape(3, 15)[c]
        after = sh_basis(dirs) @ rotated.reshape(3, 15)[c]
        assert np.allclose(before, after, atol=1e-8)


def test_compose_affine_matches_sequential_application():
    a = AffineTransform.from_yaw(0.4, 1.5, (1.0, 0.0, 0.0))
    b = AffineTransform.from_yaw(-1.2, 0.5, (0.0, 2.0, 0.5))
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
    assert np.allclose(compose_affine(b, a).apply(pts), b.apply(a.apply(pts)))


def test_merge_keeps_order():
    a = make_cloud([[0.0, 0.0, 0.0]], label="a")
    b = make_cloud([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], label="b")
    merged = merge_clouds([a, b])
    assert len(merged) == 3
    assert merged.means[:, 0].tolist() == [0.0, 1.0, 2.0]
    assert merged.label == "a+b"
    assert len(merge_clouds([])) == 0


def test_aabb_covers_k_sigma():
    box = aabb(make_cloud([[0.0, 0.0, 0.0]], scale=0.1))
    assert np.allclose(box.min, (-0.3, -0.3, -0.3))
    assert np.allclose(box.max, (0.3, 0.3, 0.3))
    with pytest.raises(DomainError):
        aabb(GaussianCloud.empty())


def test_transform_box_swaps_axes_under_quarter_turn():
    box = transform_box(Box3.centered((2.0, 1.0, 1.0)), AffineTransform.from_yaw(math.pi / 2))
    assert np.allclose(box.extent, (1.0, 2.0, 1.0))
