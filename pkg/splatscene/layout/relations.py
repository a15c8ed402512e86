"""Geometric meaning of the relation vocabulary.

The solver and the verifier both evaluate relations through ``relation_holds``
so a placement the solver accepts is one the verifier accepts.
"""

import math
from typing import NamedTuple

from splatscene.config import LayoutConfig
from splatscene.gaussians.geometry import transform_box
from splatscene.models import (
    AffineTransform,
    Box3,
    Relation,
    forward_xy,
    right_xy,
    wrap_angle,
    yaw_towards,
)

EPS = 1e-9
Z_TOLERANCE = 1e-6

DIRECTIONAL = frozenset({Relation.LEFT, Relation.RIGHT, Relation.FRONT, Relation.BEHIND})


class Placed(NamedTuple):
    """World footprint of one placed instance."""

    x: float
    y: float
    yaw: float
    box: Box3

    @property
    def half_diagonal(self) -> float:
        ext = self.box.extent
        return 0.5 * math.hypot(float(ext[0]), float(ext[1]))


def placed_from(affine: AffineTransform, model_box: Box3) -> Placed:
    box = transform_box(model_box, affine)
    cx, cy, _ = box.center
    return Placed(float(cx), float(cy), affine.yaw, box)


def aabb_overlap(a: Box3, b: Box3, clearance: float = 0.0, three_d: bool = False) -> bool:
    """Strict overlap of the boxes after inflating both by ``clearance``."""
    axes = 3 if three_d else 2
    for k in range(axes):
        if a.min[k] - clearance >= b.max[k] + clearance:
            return False
        if b.min[k] - clearance >= a.max[k] + clearance:
            return False
    return True


def local_offset(subject: Placed, reference: Placed) -> tuple[float, float]:
    """(lateral, frontal) offset of subject in the reference's frame."""
    dx, dy = subject.x - reference.x, subject.y - reference.y
    fx, fy = forward_xy(reference.yaw)
    rx, ry = right_xy(reference.yaw)
    return dx * rx + dy * ry, dx * fx + dy * fy


def _dominates(primary: float, other: float, ratio: float) -> bool:
    return primary > EPS and primary >= ratio * abs(other) - EPS


def relation_holds(
    relation: Relation,
    subject: Placed,
    reference: Placed,
    config: LayoutConfig | None = None,
) -> bool:
    """True when ``subject`` is <relation> of ``reference``."""
    config = config or LayoutConfig()
    ratio = config.lateral_ratio

    if relation in DIRECTIONAL:
        lateral, frontal = local_offset(subject, reference)
        if relation is Relation.FRONT:
            return _dominates(frontal, lateral, ratio)
        if relation is Relation.BEHIND:
            return _dominates(-frontal, lateral, ratio)
        if relation is Relation.RIGHT:
            return _dominates(lateral, frontal, ratio)
        return _dominates(-lateral, frontal, ratio)

    if relation is Relation.NEXT:
        distance = math.hypot(subject.x - reference.x, subject.y - reference.y)
        limit = subject.half_diagonal + reference.half_diagonal + config.next_slack
        return distance <= limit + EPS

    if relation is Relation.OPPOSITE:
        fx, fy = forward_xy(reference.yaw)
        a = subject.x * fx + subject.y * fy
        b = reference.x * fx + reference.y * fy
        if abs(a) <= EPS or abs(b) <= EPS or (a > 0) == (b > 0):
            return False
        turn = abs(wrap_angle(subject.yaw - reference.yaw))
        return abs(turn - math.pi) <= config.opposite_tolerance + EPS

    if not aabb_overlap(subject.box, reference.box):
        return False
    if relation is Relation.OVER:
        return abs(subject.box.min[2] - reference.box.max[2]) <= Z_TOLERANCE
    return abs(subject.box.max[2] - reference.box.min[2]) <= Z_TOLERANCE


def facing_yaw(relation: Relation, dx: float, dy: float) -> float | None:
    """Yaw that puts a point at offset (dx, dy) in the named half-plane.

    Returns None for a zero offset or a non-directional relation.
    """
    if dx == 0.0 and dy == 0.0:
        return None
    if relation is Relation.FRONT:
        return yaw_towards(dx, dy)
    if relation is Relation.BEHIND:
        return yaw_towards(-dx, -dy)
    if relation is Relation.RIGHT:
        return math.atan2(dy, dx)
    if relation is Relation.LEFT:
        return math.atan2(-dy, -dx)
    return None
