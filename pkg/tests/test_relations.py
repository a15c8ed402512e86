import math

import pytest

from splatscene.layout.relations import (
    DIRECTIONAL,
    aabb_overlap,
    facing_yaw,
    local_offset,
    placed_from,
    relation_holds,
)
from splatscene.models import AffineTransform, Box3, Relation

UNIT = Box3.centered((1.0, 1.0, 1.0))


def at(x: float, y: float, yaw: float = 0.0, z: float = 0.5):
    return placed_from(AffineTransform.from_yaw(yaw, 1.0, (x, y, z)), UNIT)


def test_directional_relations_use_the_reference_frame():
    ref = at(0.0, 0.0)
    assert relation_holds(Relation.FRONT, at(0.0, 2.0), ref)
    assert relation_holds(Relation.BEHIND, at(0.0, -2.0), ref)
    assert relation_holds(Relation.RIGHT, at(2.0, 0.0), ref)
    assert relation_holds(Relation.LEFT, at(-2.0, 0.0), ref)
    assert not relation_holds(Relation.FRONT, at(0.0, -2.0), ref)
    # diagonal offsets are neither in front nor to the side
    assert not relation_holds(Relation.FRONT, at(1.0, 1.0), ref)
    assert not relation_holds(Relation.RIGHT, at(1.0, 1.0), ref)


def test_directions_turn_with_the_reference():
    ref = at(0.0, 0.0, yaw=math.pi / 2)
    assert relation_holds(Relation.FRONT, at(-2.0, 0.0), ref)
    assert relation_holds(Relation.RIGHT, at(0.0, 2.0), ref)
    lateral, frontal = local_offset(at(-2.0, 0.0), ref)
    assert lateral == pytest.approx(0.0, abs=1e-12)
    assert frontal == pytest.approx(2.0)


def test_facing_yaw_puts_the_offset_in_the_half_plane():
    for relation in DIRECTIONAL:
        dx, dy = 1.0, 2.0
        yaw = facing_yaw(relation, dx, dy)
        assert yaw is not None
        assert relation_holds(relation, at(dx, dy), at(0.0, 0.0, yaw=yaw))
    assert facing_yaw(Relation.FRONT, 0.0, 0.0) is None
    assert facing_yaw(Relation.NEXT, 1.0, 0.0) is None


def test_next_uses_half_diagonals_and_slack():
    limit = 2 * 0.5 * math.sqrt(2.0) + 0.5
    assert relation_holds(Relation.NEXT, at(limit - 0.01, 0.0), at(0.0, 0.0))
    assert not relation_holds(Relation.NEXT, at(limit + 0.01, 0.0), at(0.0, 0.0))


def test_opposite_needs_both_sides_and_a_half_turn():
    ref = at(0.0, -2.0)
    assert relation_holds(Relation.OPPOSITE, at(0.0, 2.0, yaw=math.pi), ref)
    assert relation_holds(Relation.OPPOSITE, at(0.3, 2.0, yaw=math.radians(190)), ref)
    assert not relation_holds(Relation.OPPOSITE, at(0.0, 2.0, yaw=0.0), ref)
    assert not relation_holds(Relation.OPPOSITE, at(0.0, -3.0, yaw=math.pi), ref)


def test_vertical_relations_need_touching_faces():
    base = at(0.0, 0.0)
    assert relation_holds(Relation.OVER, at(0.2, 0.0, z=1.5), base)
    assert relation_holds(Relation.UNDER, base, at(0.2, 0.0, z=1.5))
    assert not relation_holds(Relation.OVER, at(0.2, 0.0, z=1.6), base)
    assert not relation_holds(Relation.OVER, at(3.0, 0.0, z=1.5), base)


def test_touching_boxes_do_not_overlap():
    a = Box3(min=(0.0, 0.0, 0.0), max=(1.0, 1.0, 1.0))
    b = Box3(min=(1.0, 0.0, 0.0), max=(2.0, 1.0, 1.0))
    assert not aabb_overlap(a, b)
    assert aabb_overlap(a, b, clearance=0.01)
    c = Box3(min=(0.5, 0.5, 5.0), max=(1.5, 1.5, 6.0))
    assert aabb_overlap(a, c)
    assert not aabb_overlap(a, c, three_d=True)
