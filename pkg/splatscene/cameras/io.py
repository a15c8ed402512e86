"""JSON-lines pose files: one {stage, position, yaw, pitch, fov} record per line."""

import json
from collections.abc import Iterable, Sequence

from pydantic import ValidationError

from splatscene.cameras.sampling import PosePlan, assemble_stage3
from splatscene.errors import SchemaError
from splatscene.models import CameraPose, SceneDims

EVAL_STAGE = "eval"


def poses_to_jsonl(poses: Iterable[CameraPose], stage: int | str) -> str:
    lines = [
        json.dumps(
            {
                "stage": stage,
                "position": list(p.position),
                "yaw": p.yaw,
                "pitch": p.pitch,
                "fov": p.fov,
            }
        )
        for p in poses
    ]
    return "".join(f"{line}\n" for line in lines)


def plan_to_jsonl(plan: PosePlan) -> str:
    """Stage 1 and 2 records; stage 3 is their concatenation and is not repeated."""
    return poses_to_jsonl(plan.stage1, 1) + poses_to_jsonl(plan.stage2, 2)


def read_poses_jsonl(text: str) -> list[tuple[int | str, CameraPose]]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            stage = doc.pop("stage")
            records.append((stage, CameraPose.model_validate(doc)))
        except (AttributeError, KeyError, TypeError, ValueError, ValidationError) as e:
            raise SchemaError(f"pose line {lineno}: {e}") from e
    return records


def plan_from_jsonl(text: str, scene: SceneDims) -> PosePlan:
    records = read_poses_jsonl(text)
    stage1 = [p for s, p in records if s == 1]
    stage2 = [p for s, p in records if s == 2]
    return PosePlan(
        scene=scene, stage1=stage1, stage2=stage2, stage3=assemble_stage3(stage1, stage2)
    )


def stage_poses(
    records: Sequence[tuple[int | str, CameraPose]], stage: int | str
) -> list[CameraPose]:
    return [p for s, p in records if s == stage]
