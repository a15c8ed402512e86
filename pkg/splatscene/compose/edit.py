"""Object-level scene edits: relocate, add and remove instances."""

import logging
from collections.abc import Sequence
from enum import Enum
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from splatscene.compose.package import SceneObject, ScenePackage
from splatscene.config import LayoutConfig
from splatscene.errors import DomainError, SchemaError, UnknownInstanceError
from splatscene.layout.models import LayoutReport
from splatscene.layout.solver import place_instance, solve_layout
from splatscene.layout.verify import verify_layout
from splatscene.models import AffineTransform, AnchorRegion, Box3, Vec3
from splatscene.planning.scene_spec import ConstraintGraph, Edge, InstanceInfo

log = logging.getLogger(__name__)


class EditKind(str, Enum):
    RELOCATE = "relocate"
    ADD = "add"
    REMOVE = "remove"


class EditCommand(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: EditKind
    instance: str
    affine: AffineTransform | None = None
    asset: str | None = None
    anchor: AnchorRegion | None = None
    size: Vec3 | None = None
    model_box: Box3 | None = None
    description: str = ""
    relations: list[Edge] = Field(default_factory=list)

    @model_validator(mode="after")
    def _fields_for_kind(self) -> "EditCommand":
        if self.kind is EditKind.RELOCATE and self.affine is None:
            raise ValueError("relocate needs an affine")
        if self.kind is EditKind.ADD:
            missing = [
                name
                for name in ("asset", "anchor", "size", "model_box")
                if getattr(self, name) is None
            ]
            if missing:
                raise ValueError(f"add needs {', '.join(missing)}")
        return self


class EditResult(NamedTuple):
    package: ScenePackage
    report: LayoutReport
    graph: ConstraintGraph


def _resolve(pkg: ScenePackage, graph: ConstraintGraph, name: str) -> str:
    iid = graph.resolve(name)
    if iid not in pkg.objects:
        raise UnknownInstanceError(name)
    return iid


def _relocate(pkg: ScenePackage, iid: str, affine: AffineTransform) -> ScenePackage:
    obj = pkg.objects[iid]
    objects = {**pkg.objects, iid: obj.model_copy(update={"affine": affine})}
    return pkg.model_copy(update={"objects": objects})


def _remove(
    pkg: ScenePackage, graph: ConstraintGraph, iid: str
) -> tuple[ScenePackage, ConstraintGraph]:
    objects = {k: v for k, v in pkg.objects.items() if k != iid}
    trajectories = {k: v for k, v in pkg.trajectories.items() if k != iid}
    pkg = pkg.model_copy(update={"objects": objects, "trajectories": trajectories})
    return pkg, graph.without_instance(iid)


def _add(
    pkg: ScenePackage, graph: ConstraintGraph, cmd: EditCommand, config: LayoutConfig
) -> tuple[ScenePackage, ConstraintGraph]:
    iid = cmd.instance
    if any(n.lower() == iid.lower() for n in graph.nodes):
        raise DomainError(f"instance '{iid}' already exists")
    info = InstanceInfo(
        category=cmd.asset or iid,
        size=cmd.size,  # type: ignore[arg-type]
        description=cmd.description or cmd.asset or iid,
    )
    graph = graph.with_instance(iid, info, cmd.anchor, cmd.relations)  # type: ignore[arg-type]
    box: Box3 = cmd.model_box  # type: ignore[assignment]
    affine = cmd.affine
    if affine is None:
        affine = place_instance(pkg.layout(), graph, iid, box, config=config)
    obj = SceneObject(asset=cmd.asset, affine=affine, model_box=box)  # type: ignore[arg-type]
    pkg = pkg.model_copy(update={"objects": {**pkg.objects, iid: obj}})
    return pkg, graph


def _apply(
    pkg: ScenePackage, cmd: EditCommand, graph: ConstraintGraph, config: LayoutConfig
) -> tuple[ScenePackage, ConstraintGraph]:
    if cmd.kind is EditKind.ADD:
        return _add(pkg, graph, cmd, config)
    iid = _resolve(pkg, graph, cmd.instance)
    if cmd.kind is EditKind.REMOVE:
        return _remove(pkg, graph, iid)
    return _relocate(pkg, iid, cmd.affine), graph  # type: ignore[arg-type]


def apply_edit(
    pkg: ScenePackage,
    cmd: EditCommand,
    graph: ConstraintGraph,
    config: LayoutConfig | None = None,
) -> EditResult:
    """Apply one edit and check the resulting layout.

    The edit is kept even when the report lists violations.
    """
    config = config or LayoutConfig()
    pkg, graph = _apply(pkg, cmd, graph, config)
    report = verify_layout(pkg.layout(), graph, config=config)
    log.info("%s %s: %d violation(s)", cmd.kind.value, cmd.instance, len(report.violations))
    return EditResult(pkg, report, graph)


def apply_edits(
    pkg: ScenePackage,
    cmds: Sequence[EditCommand],
    graph: ConstraintGraph,
    replan: bool = False,
    config: LayoutConfig | None = None,
    seed: int = 0,
) -> EditResult:
    """Apply a batch; re-solve the whole layout when asked or when several objects move."""
    config = config or LayoutConfig()
    for cmd in cmds:
        pkg, graph = _apply(pkg, cmd, graph, config)

    relocations = sum(cmd.kind is EditKind.RELOCATE for cmd in cmds)
    if replan or relocations > 1:
        log.info("Re-solving layout after %d edit(s)", len(cmds))
        boxes = {iid: obj.model_box for iid, obj in pkg.objects.items()}
        layout = solve_layout(graph, boxes, config.grid, seed, config)
        objects = {
            iid: obj.model_copy(update={"affine": layout.placements[iid]})
            for iid, obj in pkg.objects.items()
        }
        pkg = pkg.model_copy(update={"objects": objects})

    report = verify_layout(pkg.layout(), graph, config=config)
    return EditResult(pkg, report, graph)


_COMMANDS = TypeAdapter(list[EditCommand])


def load_edit_commands(text: str) -> list[EditCommand]:
    try:
        return _COMMANDS.validate_json(text)
    except ValidationError as e:
        raise SchemaError(f"edits: {e.errors()[0]['msg']}") from e
