import pytest

from splatscene.errors import DomainError, SchemaError, UnknownInstanceError
from splatscene.layout.models import ViolationKind, layout_to_json, load_layout
from splatscene.layout.solver import solve_layout
from splatscene.layout.verify import verify_layout
from splatscene.models import AffineTransform
from tests.test_solver import fixture_graph, half_size_boxes


@pytest.fixture
def solved(living_room, room):
    graph = fixture_graph(living_room, room)
    return graph, solve_layout(graph, half_size_boxes(graph))


def moved(layout, instance, affine: AffineTransform):
    return layout.model_copy(update={"placements": {**layout.placements, instance: affine}})


def kinds(report) -> set[ViolationKind]:
    return {v.kind for v in report.violations}


def test_collision_is_reported(solved):
    graph, layout = solved
    broken = moved(layout, "sofa2", layout.placements["sofa1"])
    report = verify_layout(broken, graph)
    collisions = report.of_kind(ViolationKind.COLLISION)
    assert [set(v.instances) for v in collisions] == [{"sofa1", "sofa2"}]


def test_stacked_pairs_are_not_collisions(solved):
    graph, layout = solved
    assert verify_layout(layout, graph).of_kind(ViolationKind.COLLISION) == []


def test_broken_relation_is_reported(solved):
    graph, layout = solved
    a = layout.placements["coffee table1"]
    turned = AffineTransform.from_yaw(a.yaw + 3.14159, a.s, a.t)
    report = verify_layout(moved(layout, "coffee table1", turned), graph)
    relation = report.of_kind(ViolationKind.RELATION)
    assert [v.instances for v in relation] == [("sofa1", "coffee table1")]


def test_anchor_and_bounds_are_reported(solved):
    graph, layout = solved
    plant = layout.placements["potted plant1"]
    centered = plant.with_translation((0.0, 0.0, plant.t[2]))
    report = verify_layout(moved(layout, "potted plant1", centered), graph)
    assert ViolationKind.ANCHOR in kinds(report)
    outside = plant.with_translation((4.0, 4.0, 0.0))
    report = verify_layout(moved(layout, "potted plant1", outside), graph)
    assert ViolationKind.BOUNDS in kinds(report)


def test_uncovered_nodes_are_rejected(solved):
    graph, layout = solved
    placements = {k: v for k, v in layout.placements.items() if k != "TV1"}
    with pytest.raises(DomainError):
        verify_layout(layout.model_copy(update={"placements": placements}), graph)


def test_layout_json_reloads(solved):
    graph, layout = solved
    again = load_layout(layout_to_json(layout))
    assert again.placements == layout.placements
    assert again.model_boxes == layout.model_boxes
    assert verify_layout(again, graph).ok
    with pytest.raises(UnknownInstanceError):
        again.world_box("lamp1")


def test_bad_layout_json():
    with pytest.raises(SchemaError):
        load_layout('{"instances": {}}')
    with pytest.raises(SchemaError):
        load_layout("not json")
