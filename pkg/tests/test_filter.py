import numpy as np
import pytest
from pydantic import ValidationError

from splatscene.errors import DomainError
from splatscene.filtering.rays import assign_to_rays, project
from splatscene.filtering.scores import (
    ScoreVector,
    brute_force_scores,
    contribution_scores,
    filter_by_threshold,
    filter_cloud,
    scores_to_csv,
    should_filter,
)
from splatscene.models import CameraPose
from tests.conftest import make_cloud

ORIGIN = CameraPose(position=(0.0, 0.0, 0.0), yaw=0.0)


def scored(values) -> ScoreVector:
    return ScoreVector(scores=values, poses_used=1, resolution=(64, 64))


def test_single_gaussian_scores_inverse_square_depth():
    cloud = make_cloud([(0.0, 2.0, 0.0)])
    assert contribution_scores(cloud, [ORIGIN]).scores[0] == pytest.approx(0.25)


def test_gaussians_behind_the_camera_score_nothing():
    cloud = make_cloud([(0.0, -2.0, 0.0), (0.0, 2.0, 0.0)])
    assert project(cloud.means, ORIGIN, (64, 64)).indices.tolist() == [1]
    assert contribution_scores(cloud, [ORIGIN]).scores.tolist() == pytest.approx([0.0, 0.25])


def test_shared_ray_is_normalised_by_the_largest_volume():
    cloud = make_cloud([(0.0, 1.0, 0.0), (0.0, 2.0, 0.0)])
    cloud = cloud.replace(scales=np.array([[0.1] * 3, [0.2] * 3]))
    rays = assign_to_rays(cloud, ORIGIN, (64, 64))
    assert rays == {(32, 32): [(0, 1.0), (1, 2.0)]}
    scores = contribution_scores(cloud, [ORIGIN]).scores
    assert scores == pytest.approx([1.0 / 8.0, 0.25])


def random_scene(seed: int):
    rng = np.random.default_rng(seed)
    means = rng.uniform((-2.0, 1.0, -1.0), (2.0, 5.0, 1.0), (200, 3))
    cloud = make_cloud(means).replace(scales=rng.uniform(0.01, 0.2, (200, 3)))
    poses = [
        ORIGIN,
        CameraPose(position=(0.5, -1.0, 0.2), yaw=0.3, pitch=0.1),
        CameraPose(position=(-0.5, 0.0, 0.0), yaw=-0.4, pitch=-0.2),
    ]
    return cloud, poses


def test_matches_the_reference_loops():
    cloud, poses = random_scene(0)
    fast = contribution_scores(cloud, poses, resolution=(16, 24))
    slow = brute_force_scores(cloud, poses, resolution=(16, 24))
    assert np.allclose(fast.scores, slow.scores)
    assert fast.poses_used == 3


def test_threads_do_not_change_scores():
    cloud, poses = random_scene(1)
    one = contribution_scores(cloud, poses, threads=1)
    many = contribution_scores(cloud, poses, threads=3)
    assert np.array_equal(one.scores, many.scores)


def test_scores_ignore_a_global_scale():
    cloud, poses = random_scene(2)
    bigger = cloud.replace(scales=cloud.scales * 3.0)
    assert np.allclose(
        contribution_scores(cloud, poses).scores, contribution_scores(bigger, poses).scores
    )


def test_scoring_needs_poses():
    with pytest.raises(DomainError):
        contribution_scores(make_cloud([(0.0, 1.0, 0.0)]), [])
    with pytest.raises(ValidationError):
        scored([0.5, -0.1])


def test_filter_removes_the_lowest_fraction():
    cloud = make_cloud([(float(i), 0.0, 0.0) for i in range(10)])
    scores = scored([5.0, 0.1, 3.0, 0.2, 9.0, 0.3, 4.0, 8.0, 7.0, 6.0])
    kept = filter_cloud(cloud, scores, 0.25)
    assert len(kept) == 7
    assert kept.means[:, 0].tolist() == [0.0, 2.0, 4.0, 6.0, 7.0, 8.0, 9.0]


def test_filter_ties_keep_the_lower_index():
    cloud = make_cloud([(float(i), 0.0, 0.0) for i in range(5)])
    kept = filter_cloud(cloud, scored([1.0, 0.0, 0.0, 0.0, 2.0]), 0.4)
    assert kept.means[:, 0].tolist() == [0.0, 1.0, 4.0]


def test_filter_edge_cases():
    cloud = make_cloud([(float(i), 0.0, 0.0) for i in range(3)])
    assert filter_cloud(cloud, scored([1.0, 2.0, 3.0]), 0.0) is cloud
    with pytest.raises(DomainError):
        filter_cloud(cloud, scored([1.0, 2.0, 3.0]), 1.0)
    with pytest.raises(DomainError):
        filter_cloud(cloud, scored([1.0, 2.0]), 0.5)


def test_filter_by_threshold():
    cloud = make_cloud([(float(i), 0.0, 0.0) for i in range(4)])
    kept = filter_by_threshold(cloud, scored([0.5, 0.1, 0.2, 0.9]), 0.2)
    assert kept.means[:, 0].tolist() == [0.0, 2.0, 3.0]


def test_should_filter():
    assert not should_filter(0, 500)
    assert should_filter(500, 500)
    assert not should_filter(501, 500)
    assert should_filter(1000, 500)
    with pytest.raises(DomainError):
        should_filter(10, 0)


def test_scores_csv():
    assert scores_to_csv(scored([0.25, 1.0])) == "index,score\n0,0.25\n1,1.0\n"


def test_reference_scorer_needs_no_projection_helper(mocker):
    mocker.patch("splatscene.filtering.scores.project", side_effect=AssertionError)
    turned = CameraPose(position=(1.0, 0.0, 0.5), yaw=np.pi / 2, pitch=0.0)
    cloud = make_cloud([(-1.0, 0.01, 0.51), (3.0, 0.0, 0.5)])
    scores = brute_force_scores(cloud, [turned], resolution=(16, 16)).scores
    assert scores == pytest.approx([0.25, 0.0])
