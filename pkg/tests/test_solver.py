import numpy as np
import pytest

from splatscene.errors import DomainError, InfeasibleLayoutError
from splatscene.layout.models import ViolationKind, layout_to_json
from splatscene.layout.solver import (
    place_instance,
    scaling_factor,
    select_anchor_object,
    solve_layout,
)
from splatscene.layout.verify import verify_layout
from splatscene.models import AnchorRegion, Box3, Relation, SceneDims
from splatscene.planning.client import read_fixture
from splatscene.planning.scene_spec import (
    ConstraintGraph,
    Edge,
    InstanceInfo,
    parse_scene_spec,
)

HARD = (ViolationKind.COLLISION, ViolationKind.ANCHOR, ViolationKind.BOUNDS)


def half_size_boxes(graph: ConstraintGraph) -> dict[str, Box3]:
    return {
        n: Box3.centered(tuple(0.5 * v for v in graph.instances[n].size)) for n in graph.nodes
    }


def fixture_graph(path, scene: SceneDims) -> ConstraintGraph:
    docs = read_fixture(path)
    return parse_scene_spec(docs.objects, docs.anchors, docs.relations, scene)


def make_graph(scene, specs, edges=()) -> ConstraintGraph:
    """specs: (id, anchor, size) triples."""
    return ConstraintGraph(
        nodes=[iid for iid, _, _ in specs],
        instances={
            iid: InstanceInfo(category=iid.rstrip("0123456789"), size=size, description=iid)
            for iid, _, size in specs
        },
        anchors={iid: anchor for iid, anchor, _ in specs},
        edges=[Edge(subject=s, object=o, relation=r) for s, o, r in edges],
        scene=scene,
    )


def test_scaling_factor():
    assert scaling_factor((2.0, 1.0, 0.8), Box3.centered((1.0, 0.5, 0.4))) == pytest.approx(2.0)
    assert scaling_factor((2.0, 2.0, 2.0), Box3.centered((1.0, 4.0, 1.0))) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        scaling_factor((1.0, 1.0, 1.0), Box3.centered((1.0, 0.0, 1.0)))


def test_anchor_object_is_the_best_connected(living_room, room):
    graph = fixture_graph(living_room, room)
    assert select_anchor_object(graph) == "sofa1"
    assert select_anchor_object(graph, ["potted plant2", "potted plant1"]) == "potted plant1"


def test_living_room_has_no_violations(living_room, room):
    graph = fixture_graph(living_room, room)
    layout = solve_layout(graph, half_size_boxes(graph))
    assert set(layout.placements) == set(graph.nodes)
    assert layout.report.ok
    assert verify_layout(layout, graph).ok
    tv, stand = layout.world_box("TV1"), layout.world_box("TV stand1")
    assert tv.min[2] == pytest.approx(stand.max[2])


def test_layout_is_deterministic(living_room, room):
    graph = fixture_graph(living_room, room)
    first = layout_to_json(solve_layout(graph, half_size_boxes(graph), seed=3))
    second = layout_to_json(solve_layout(graph, half_size_boxes(graph), seed=3))
    assert first == second


def test_park_layout_is_sound(park):
    graph = fixture_graph(park, SceneDims.outdoor(6.0))
    layout = solve_layout(graph, half_size_boxes(graph), grid=0.5)
    report = verify_layout(layout, graph)
    assert report.of_kind(*HARD) == []
    assert report.violations == layout.report.violations


def test_random_layouts_are_sound():
    rng = np.random.default_rng(42)
    scene = SceneDims.indoor(8.0, 8.0, 3.0)
    regions = [AnchorRegion.CENTER, AnchorRegion.SIDE, AnchorRegion.OTHERS, AnchorRegion.CORNER]
    for _ in range(5):
        n = int(rng.integers(2, 6))
        specs = [
            (
                f"box{i + 1}",
                regions[int(rng.integers(len(regions)))],
                tuple(float(v) for v in rng.uniform(0.3, 0.8, 3)),
            )
            for i in range(n)
        ]
        edges = [(f"box{i + 1}", f"box{i}", Relation.NEXT) for i in range(1, n)]
        graph = make_graph(scene, specs, edges)
        layout = solve_layout(graph, half_size_boxes(graph), grid=0.5)
        report = verify_layout(layout, graph)
        assert report.of_kind(*HARD) == []
        assert report.violations == layout.report.violations


def corner_graph(count: int) -> ConstraintGraph:
    # four corner cells of a 3 x 3 room at a 0.1 grid, one candidate each
    scene = SceneDims.indoor(3.0, 3.0, 2.0)
    specs = [(f"plant{i}", AnchorRegion.CORNER, (0.5, 0.5, 0.5)) for i in range(1, count + 1)]
    return make_graph(scene, specs)


def test_small_feasible_instance_is_solved():
    graph = corner_graph(4)
    layout = solve_layout(graph, half_size_boxes(graph), grid=0.1)
    assert verify_layout(layout, graph).ok
    centers = {
        tuple(round(float(c), 6) for c in layout.world_box(n).center[:2]) for n in graph.nodes
    }
    assert centers == {(-1.1, -1.1), (-1.1, 1.1), (1.1, -1.1), (1.1, 1.1)}


def test_infeasible_instance_raises():
    graph = corner_graph(5)
    with pytest.raises(InfeasibleLayoutError):
        solve_layout(graph, half_size_boxes(graph), grid=0.1)


def test_missing_model_box_is_rejected(living_room, room):
    graph = fixture_graph(living_room, room)
    boxes = half_size_boxes(graph)
    del boxes["sofa2"]
    with pytest.raises(DomainError):
        solve_layout(graph, boxes)


def test_place_instance_keeps_existing_placements(living_room, room):
    graph = fixture_graph(living_room, room)
    layout = solve_layout(graph, half_size_boxes(graph))
    info = InstanceInfo(category="lamp", size=(0.4, 0.4, 1.5), description="A floor lamp.")
    edge = Edge(subject="lamp1", object="sofa2", relation=Relation.NEXT)
    grown = graph.with_instance("lamp1", info, AnchorRegion.OTHERS, [edge])
    affine = place_instance(layout, grown, "lamp1", Box3.centered((0.2, 0.2, 0.75)))
    placements = {**layout.placements, "lamp1": affine}
    boxes = {**layout.model_boxes, "lamp1": Box3.centered((0.2, 0.2, 0.75))}
    grown_layout = layout.model_copy(update={"placements": placements, "model_boxes": boxes})
    assert verify_layout(grown_layout, grown).of_kind(*HARD) == []
