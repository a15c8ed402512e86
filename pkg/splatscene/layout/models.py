"""Layout records and their JSON form."""

import json
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from splatscene.errors import SchemaError, UnknownInstanceError
from splatscene.gaussians.geometry import transform_box
from splatscene.models import AffineTransform, Box3, SceneDims


class ViolationKind(str, Enum):
    COLLISION = "collision"
    RELATION = "relation"
    ANCHOR = "anchor"
    BOUNDS = "bounds"


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ViolationKind
    instances: tuple[str, ...]
    detail: str = ""


class LayoutReport(BaseModel):
    violations: list[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def of_kind(self, *kinds: ViolationKind) -> list[Violation]:
        return [v for v in self.violations if v.kind in kinds]


class Layout(BaseModel):
    """Placement of every instance plus the model boxes they were solved with.

    ``report`` lists the relations the solver had to give up on.
    """

    placements: dict[str, AffineTransform]
    model_boxes: dict[str, Box3] = Field(default_factory=dict)
    scene: SceneDims
    seed: int = 0
    report: LayoutReport = Field(default_factory=LayoutReport)

    def affine(self, instance: str) -> AffineTransform:
        try:
            return self.placements[instance]
        except KeyError:
            raise UnknownInstanceError(instance) from None

    def world_box(self, instance: str) -> Box3:
        try:
            model_box = self.model_boxes[instance]
        except KeyError:
            raise UnknownInstanceError(instance) from None
        return transform_box(model_box, self.affine(instance))

    def world_boxes(self) -> dict[str, Box3]:
        return {i: self.world_box(i) for i in self.placements if i in self.model_boxes}


def layout_to_json(layout: Layout) -> str:
    instances = {}
    for iid, a in layout.placements.items():
        entry: dict = {"s": a.s, "t": list(a.t), "yaw_radians": a.yaw, "quat": list(a.r)}
        if iid in layout.model_boxes:
            box = layout.model_boxes[iid]
            entry["model_box"] = {"min": list(box.min), "max": list(box.max)}
        instances[iid] = entry
    doc = {
        "scene": layout.scene.to_json_dict(),
        "seed": layout.seed,
        "instances": instances,
        "deferred": layout.report.model_dump(mode="json")["violations"],
    }
    return json.dumps(doc, indent=2)


def load_layout(text: str) -> Layout:
    """Inverse of ``layout_to_json``; the stored quaternion is authoritative."""
    try:
        doc = json.loads(text)
        placements = {}
        boxes = {}
        for iid, entry in doc["instances"].items():
            placements[iid] = AffineTransform(
                s=entry["s"], r=tuple(entry["quat"]), t=tuple(entry["t"])
            )
            if "model_box" in entry:
                boxes[iid] = Box3.model_validate(entry["model_box"])
        return Layout(
            placements=placements,
            model_boxes=boxes,
            scene=SceneDims.model_validate(doc["scene"]),
            seed=int(doc.get("seed", 0)),
            report=LayoutReport(violations=doc.get("deferred", [])),
        )
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise SchemaError(f"layout: {e}") from e
