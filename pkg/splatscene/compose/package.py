"""Scene packages: which asset sits where, plus the environment and any motion."""

import json
import logging
from collections.abc import Mapping

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from splatscene.compose.environment import init_environment
from splatscene.compose.motion import Keyframe, MotionTrajectory, sample_trajectory
from splatscene.errors import SchemaError, UnknownInstanceError
from splatscene.gaussians.cloud import GaussianCloud
from splatscene.gaussians.geometry import ShMode, apply_affine, merge_clouds
from splatscene.layout.models import Layout
from splatscene.models import AffineTransform, Box3, SceneDims

log = logging.getLogger(__name__)


class SceneObject(BaseModel):
    model_config = ConfigDict(frozen=True)

    asset: str
    affine: AffineTransform
    model_box: Box3


class ScenePackage(BaseModel):
    model_config = ConfigDict(frozen=True)

    scene: SceneDims
    objects: dict[str, SceneObject]
    environment: GaussianCloud = Field(default_factory=GaussianCloud.empty)
    environment_spacing: float | None = None
    trajectories: dict[str, MotionTrajectory] = Field(default_factory=dict)

    def layout(self) -> Layout:
        return Layout(
            placements={i: o.affine for i, o in self.objects.items()},
            model_boxes={i: o.model_box for i, o in self.objects.items()},
            scene=self.scene,
        )

    def object(self, instance: str) -> SceneObject:
        try:
            return self.objects[instance]
        except KeyError:
            raise UnknownInstanceError(instance) from None


def package_from_layout(
    layout: Layout,
    asset_refs: Mapping[str, str],
    environment: GaussianCloud,
    environment_spacing: float | None = None,
) -> ScenePackage:
    objects = {}
    for iid, affine in layout.placements.items():
        if iid not in asset_refs:
            raise UnknownInstanceError(iid)
        objects[iid] = SceneObject(
            asset=asset_refs[iid], affine=affine, model_box=layout.model_boxes[iid]
        )
    return ScenePackage(
        scene=layout.scene,
        objects=objects,
        environment=environment,
        environment_spacing=environment_spacing,
    )


def _asset(
    assets: Mapping[str, GaussianCloud], instance: str, ref: str | None = None
) -> GaussianCloud:
    if instance in assets:
        return assets[instance]
    if ref is not None and ref in assets:
        return assets[ref]
    raise UnknownInstanceError(instance)


def compose_scene(
    layout: Layout,
    assets: Mapping[str, GaussianCloud],
    environment: GaussianCloud,
    sh_mode: ShMode = "truncate",
) -> GaussianCloud:
    """Environment first, then every instance mapped into the world in layout order."""
    parts = [environment]
    for iid, affine in layout.placements.items():
        parts.append(apply_affine(_asset(assets, iid), affine, sh_mode))
    return merge_clouds(parts, label="scene")


def compose_scene_at_time(
    pkg: ScenePackage,
    assets: Mapping[str, GaussianCloud],
    t: float,
    sh_mode: ShMode = "truncate",
) -> GaussianCloud:
    """Compose with each moving instance at its sampled pose.

    ``assets`` may be keyed by instance id or by asset reference.
    """
    parts = [pkg.environment]
    for iid, obj in pkg.objects.items():
        traj = pkg.trajectories.get(iid)
        affine = sample_trajectory(traj, t) if traj is not None else obj.affine
        parts.append(apply_affine(_asset(assets, iid, obj.asset), affine, sh_mode))
    return merge_clouds(parts, label="scene")


def compose_package(
    pkg: ScenePackage, assets: Mapping[str, GaussianCloud], sh_mode: ShMode = "truncate"
) -> GaussianCloud:
    parts = [pkg.environment]
    for iid, obj in pkg.objects.items():
        parts.append(apply_affine(_asset(assets, iid, obj.asset), obj.affine, sh_mode))
    return merge_clouds(parts, label="scene")


def _affine_json(a: AffineTransform) -> dict:
    return {"s": a.s, "t": list(a.t), "quat": list(a.r)}


def _affine_from(entry: dict) -> AffineTransform:
    if "quat" in entry:
        return AffineTransform(s=entry["s"], r=tuple(entry["quat"]), t=tuple(entry["t"]))
    return AffineTransform.from_yaw(entry.get("yaw", 0.0), entry["s"], entry["t"])


def manifest_to_json(pkg: ScenePackage) -> str:
    doc = {
        "scene": pkg.scene.to_json_dict(),
        "objects": [
            {
                "id": iid,
                "asset": obj.asset,
                **_affine_json(obj.affine),
                "yaw": obj.affine.yaw,
                "model_box": {"min": list(obj.model_box.min), "max": list(obj.model_box.max)},
            }
            for iid, obj in pkg.objects.items()
        ],
        "environment": {"kind": pkg.scene.kind.value, "spacing": pkg.environment_spacing},
        "trajectories": [
            {
                "id": iid,
                "keyframes": [{"time": k.time, **_affine_json(k.affine)} for k in traj.keyframes],
            }
            for iid, traj in pkg.trajectories.items()
        ],
    }
    return json.dumps(doc, indent=2)


def _trajectories(entries: list[dict]) -> dict[str, MotionTrajectory]:
    return {
        tr["id"]: MotionTrajectory(
            keyframes=[Keyframe(time=k["time"], affine=_affine_from(k)) for k in tr["keyframes"]]
        )
        for tr in entries
    }


def load_trajectories(text: str) -> dict[str, MotionTrajectory]:
    """Parse a list of {id, keyframes: [{time, s, t, quat | yaw}]} records."""
    try:
        return _trajectories(json.loads(text))
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise SchemaError(f"trajectories: {e}") from e


def with_trajectories(
    pkg: ScenePackage, trajectories: Mapping[str, MotionTrajectory]
) -> ScenePackage:
    unknown = sorted(set(trajectories) - set(pkg.objects))
    if unknown:
        raise UnknownInstanceError(unknown[0])
    return pkg.model_copy(update={"trajectories": {**pkg.trajectories, **trajectories}})


def load_manifest(text: str) -> ScenePackage:
    """Parse a manifest; the environment is regenerated from its kind and spacing."""
    try:
        doc = json.loads(text)
        scene = SceneDims.model_validate(doc["scene"])
        objects = {
            o["id"]: SceneObject(
                asset=o["asset"],
                affine=_affine_from(o),
                model_box=Box3.model_validate(o["model_box"]),
            )
            for o in doc["objects"]
        }
        trajectories = _trajectories(doc.get("trajectories", []))
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise SchemaError(f"manifest: {e}") from e

    unknown = sorted(set(trajectories) - set(objects))
    if unknown:
        raise SchemaError(f"manifest: trajectories for unknown instances {unknown}")
    spacing = (doc.get("environment") or {}).get("spacing")
    environment = init_environment(scene, spacing) if spacing else GaussianCloud.empty()
    return ScenePackage(
        scene=scene,
        objects=objects,
        environment=environment,
        environment_spacing=spacing,
        trajectories=trajectories,
    )
