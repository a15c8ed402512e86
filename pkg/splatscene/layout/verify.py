"""Independent checker for solved layouts."""

import logging
from collections.abc import Mapping

from splatscene.config import LayoutConfig
from splatscene.errors import DomainError
from splatscene.layout.models import Layout, LayoutReport, Violation, ViolationKind
from splatscene.layout.regions import classify_region, within_bounds
from splatscene.layout.relations import Placed, aabb_overlap, placed_from, relation_holds
from splatscene.models import Box3
from splatscene.planning.scene_spec import ConstraintGraph

log = logging.getLogger(__name__)


def vertical_pairs(graph: ConstraintGraph) -> set[frozenset[str]]:
    return {frozenset((e.subject, e.object)) for e in graph.edges if e.relation.vertical}


def verify_layout(
    layout: Layout,
    graph: ConstraintGraph,
    assets: Mapping[str, Box3] | None = None,
    config: LayoutConfig | None = None,
) -> LayoutReport:
    """Report collisions, broken relations, anchor misses and out-of-bounds boxes."""
    config = config or LayoutConfig()
    assets = assets if assets is not None else layout.model_boxes
    missing = [n for n in graph.nodes if n not in layout.placements or n not in assets]
    if missing:
        raise DomainError(f"layout does not cover {missing}")

    placed: dict[str, Placed] = {
        n: placed_from(layout.placements[n], assets[n]) for n in graph.nodes
    }
    violations: list[Violation] = []

    exempt = vertical_pairs(graph)
    nodes = graph.nodes
    for i, a in enumerate(nodes):
        for b in nodes[i + 1 :]:
            if frozenset((a, b)) in exempt:
                continue
            if aabb_overlap(placed[a].box, placed[b].box, config.clearance):
                violations.append(
                    Violation(
                        kind=ViolationKind.COLLISION, instances=(a, b), detail="footprints overlap"
                    )
                )

    for e in graph.edges:
        if not relation_holds(e.relation, placed[e.subject], placed[e.object], config):
            violations.append(
                Violation(
                    kind=ViolationKind.RELATION,
                    instances=(e.subject, e.object),
                    detail=f"{e.subject} is not {e.relation.value} {e.object}",
                )
            )

    for n in nodes:
        p = placed[n]
        expected = graph.anchors[n]
        actual = classify_region(p.x, p.y, layout.scene, config)
        if actual is not expected:
            violations.append(
                Violation(
                    kind=ViolationKind.ANCHOR,
                    instances=(n,),
                    detail=(
                        f"center ({p.x:.3f}, {p.y:.3f}) is {actual.value}, "
                        f"expected {expected.value}"
                    ),
                )
            )
        if not within_bounds(p.box, layout.scene):
            violations.append(
                Violation(kind=ViolationKind.BOUNDS, instances=(n,), detail="box leaves the scene")
            )

    if violations:
        log.debug("Layout check found %d violation(s)", len(violations))
    return LayoutReport(violations=violations)
