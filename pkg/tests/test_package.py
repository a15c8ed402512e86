import json

import numpy as np
import pytest

from splatscene.compose.environment import box_asset, init_environment
from splatscene.compose.motion import MotionTrajectory
from splatscene.compose.package import (
    compose_package,
    compose_scene,
    compose_scene_at_time,
    load_manifest,
    load_trajectories,
    manifest_to_json,
    package_from_layout,
    with_trajectories,
)
from splatscene.errors import SchemaError, UnknownInstanceError
from splatscene.gaussians.cloud import GaussianCloud
from splatscene.gaussians.geometry import apply_affine
from splatscene.layout.solver import solve_layout
from splatscene.models import AffineTransform
from tests.test_solver import fixture_graph, half_size_boxes


@pytest.fixture
def scene(living_room, room):
    graph = fixture_graph(living_room, room)
    layout = solve_layout(graph, half_size_boxes(graph))
    refs = {n: f"assets/{graph.instances[n].category}.ply" for n in graph.nodes}
    assets = {
        ref: box_asset(graph.instances[n].size, 0.25, label=n) for n, ref in refs.items()
    }
    environment = init_environment(room, 1.0)
    pkg = package_from_layout(layout, refs, environment, environment_spacing=1.0)
    return layout, pkg, assets


def test_compose_puts_the_environment_first(scene):
    layout, pkg, assets = scene
    by_instance = {iid: assets[obj.asset] for iid, obj in pkg.objects.items()}
    cloud = compose_scene(layout, by_instance, pkg.environment)
    assert cloud.label == "scene"
    assert len(cloud) == len(pkg.environment) + sum(len(a) for a in by_instance.values())
    assert np.array_equal(cloud.means[: len(pkg.environment)], pkg.environment.means)
    # package composition resolves assets through their references
    assert compose_package(pkg, assets) == cloud


def test_compose_places_each_instance(scene):
    layout, pkg, assets = scene
    cloud = compose_package(pkg, assets)
    start = len(pkg.environment)
    for iid, obj in pkg.objects.items():
        placed = apply_affine(assets[obj.asset], layout.placements[iid])
        assert np.allclose(cloud.means[start : start + len(placed)], placed.means)
        start += len(placed)
    assert start == len(cloud)


def test_missing_asset_is_reported(scene):
    layout, pkg, assets = scene
    with pytest.raises(UnknownInstanceError):
        compose_scene(layout, {}, pkg.environment)
    with pytest.raises(UnknownInstanceError):
        package_from_layout(layout, {}, GaussianCloud.empty())


def test_manifest_reloads(scene):
    _, pkg, _ = scene
    text = manifest_to_json(pkg)
    doc = json.loads(text)
    assert [o["id"] for o in doc["objects"]] == list(pkg.objects)
    assert doc["environment"] == {"kind": "indoor", "spacing": 1.0}

    again = load_manifest(text)
    assert again.scene == pkg.scene
    assert again.objects == pkg.objects
    assert again.environment == pkg.environment
    assert again.trajectories == {}


def test_manifest_accepts_yaw_entries():
    text = json.dumps(
        {
            "scene": {"kind": "outdoor", "radius": 5.0},
            "objects": [
                {
                    "id": "bench1",
                    "asset": "bench.ply",
                    "s": 2.0,
                    "t": [1.0, 0.0, 0.2],
                    "yaw": 1.5,
                    "model_box": {"min": [-0.5, -0.2, -0.1], "max": [0.5, 0.2, 0.1]},
                }
            ],
        }
    )
    pkg = load_manifest(text)
    assert pkg.objects["bench1"].affine.yaw == pytest.approx(1.5)
    assert len(pkg.environment) == 0


def test_bad_manifest():
    with pytest.raises(SchemaError):
        load_manifest('{"scene": {"kind": "indoor"}}')
    with pytest.raises(SchemaError):
        load_manifest("[]")


def moving_sofa() -> dict[str, MotionTrajectory]:
    text = json.dumps(
        [
            {
                "id": "sofa2",
                "keyframes": [
                    {"time": 0.0, "s": 2.0, "t": [0.0, 0.0, 0.4], "yaw": 0.0},
                    {"time": 2.0, "s": 2.0, "t": [1.0, 0.0, 0.4], "yaw": 0.0},
                ],
            }
        ]
    )
    return load_trajectories(text)


def test_trajectories_drive_composition(scene):
    _, pkg, assets = scene
    pkg = with_trajectories(pkg, moving_sofa())
    cloud = compose_scene_at_time(pkg, assets, 1.0)

    start = len(pkg.environment)
    for iid, obj in pkg.objects.items():
        if iid == "sofa2":
            break
        start += len(assets[obj.asset])
    sofa = assets[pkg.objects["sofa2"].asset]
    expected = apply_affine(sofa, AffineTransform(s=2.0, t=(0.5, 0.0, 0.4)))
    assert np.allclose(cloud.means[start : start + len(sofa)], expected.means)

    again = load_manifest(manifest_to_json(pkg))
    assert again.trajectories == pkg.trajectories


def test_trajectories_need_known_instances(scene):
    _, pkg, _ = scene
    stray = {"lamp1": moving_sofa()["sofa2"]}
    with pytest.raises(UnknownInstanceError):
        with_trajectories(pkg, stray)
    with pytest.raises(SchemaError):
        load_trajectories('[{"id": "sofa2", "keyframes": [{"time": 0.0}]}]')

    doc = json.loads(manifest_to_json(pkg))
    doc["trajectories"] = [
        {"id": "lamp1", "keyframes": [{"time": 0.0, "s": 1.0, "t": [0, 0, 0], "yaw": 0.0}]}
    ]
    with pytest.raises(SchemaError):
        load_manifest(json.dumps(doc))


def test_static_scene_ignores_time(scene):
    _, pkg, assets = scene
    assert compose_scene_at_time(pkg, assets, 3.0) == compose_package(pkg, assets)
