"""File-level steps of the scene pipeline.

Every step reads what the previous one left in a working directory and writes
its own outputs there atomically, so running the steps one by one and running
``pipeline`` produce the same files.
"""

import asyncio
import logging
import re
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import NamedTuple, cast

import numpy as np

from splatscene.cameras.io import EVAL_STAGE, poses_to_jsonl, read_poses_jsonl
from splatscene.cameras.sampling import PosePlan, plan_poses, resample_around
from splatscene.cameras.trajectory import evaluation_trajectory
from splatscene.compose.edit import EditKind, EditResult, apply_edits, load_edit_commands
from splatscene.compose.environment import box_asset, init_environment
from splatscene.compose.package import (
    ScenePackage,
    compose_package,
    compose_scene_at_time,
    load_manifest,
    load_trajectories,
    manifest_to_json,
    package_from_layout,
    with_trajectories,
)
from splatscene.config import Config, DiffusionConfig
from splatscene.diffusion.ddim import build_denoise_trajectory, build_mts_trajectory
from splatscene.diffusion.guidance import mts_direction
from splatscene.diffusion.latents import EMPTY, LatentState, prompt
from splatscene.diffusion.predictors import PREDICTORS
from splatscene.diffusion.schedule import (
    dreamtime_weights,
    sample_timesteps,
    schedule_from_config,
    schedule_to_dict,
    step_weights,
    time_window,
)
from splatscene.errors import DomainError
from splatscene.filtering.scores import (
    ScoreVector,
    contribution_scores,
    filter_by_threshold,
    filter_cloud,
    scores_to_csv,
)
from splatscene.gaussians.cloud import GaussianCloud
from splatscene.gaussians.geometry import ShMode, aabb
from splatscene.gaussians.ply import load_ply, save_ply
from splatscene.layout.models import Layout, LayoutReport, layout_to_json, load_layout
from splatscene.layout.solver import solve_layout
from splatscene.layout.verify import verify_layout
from splatscene.models import Box3, CameraPose, SceneDims
from splatscene.planning.client import (
    ANCHORS_FILE,
    OBJECTS_FILE,
    RELATIONS_FILE,
    SCENE_FILE,
    PlanDocuments,
    plan_scene,
    read_fixture,
)
from splatscene.planning.scene_spec import (
    ConstraintGraph,
    load_graph,
    parse_scene,
    parse_scene_spec,
    serialize_graph,
)
from splatscene.utils.io import atomic_write_bytes, atomic_write_text

log = logging.getLogger(__name__)

GRAPH_FILE = "graph.json"
LAYOUT_FILE = "layout.json"
MANIFEST_FILE = "manifest.json"
SCENE_PLY = "scene.ply"
FILTERED_PLY = "filtered.ply"
SCORES_FILE = "scores.csv"
ASSETS_DIR = "assets"
FRAMES_DIR = "frames"
EDIT_POSES_FILE = "poses-edit.jsonl"


def pose_file(stage: int | str) -> str:
    return f"poses-{EVAL_STAGE}.jsonl" if stage == EVAL_STAGE else f"poses-stage{stage}.jsonl"


def asset_name(category: str) -> str:
    """File stem for a category: 'coffee table' -> 'coffee-table'."""
    return re.sub(r"[^a-z0-9]+", "-", category.lower()).strip("-") or "asset"


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DomainError(f"missing input file {path}") from None


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError:
        raise DomainError(f"missing input file {path}") from None


def _json_text(text: str) -> str:
    return text.strip() + "\n"


def read_scene(workdir: Path, default: SceneDims) -> SceneDims:
    path = Path(workdir) / SCENE_FILE
    return parse_scene(path.read_text(encoding="utf-8")) if path.exists() else default


def plan_step(
    workdir: Path,
    scene_text: str,
    config: Config,
    scene: SceneDims,
    user_constraint: str = "",
    dialogue: str | None = None,
) -> PlanDocuments:
    """Produce the three planning documents and the scene extent."""
    workdir = Path(workdir)
    docs = asyncio.run(plan_scene(scene_text, user_constraint, config.planner, scene, dialogue))
    atomic_write_text(workdir / OBJECTS_FILE, _json_text(docs.objects))
    atomic_write_text(workdir / ANCHORS_FILE, _json_text(docs.anchors))
    atomic_write_text(workdir / RELATIONS_FILE, _json_text(docs.relations))
    atomic_write_text(workdir / SCENE_FILE, _json_text(scene.model_dump_json(exclude_none=True)))
    log.info("Plan written to %s", workdir)
    return docs


def load_plan_graph(workdir: Path, config: Config) -> ConstraintGraph:
    workdir = Path(workdir)
    docs = read_fixture(workdir)
    scene = read_scene(workdir, config.scene)
    return parse_scene_spec(
        docs.objects, docs.anchors, docs.relations, scene, vary=config.planner.vary_replicas
    )


def asset_refs(graph: ConstraintGraph) -> dict[str, str]:
    return {iid: asset_name(graph.instances[iid].category) for iid in graph.nodes}


def ensure_assets(
    workdir: Path, sizes: Iterable[tuple[str, Sequence[float]]], spacing: float
) -> dict[str, GaussianCloud]:
    """Load assets/<name>.ply, writing a box stand-in of the given size first when missing.

    Assets are always read back from disk so every step sees the same
    float32-rounded values.
    """
    assets: dict[str, GaussianCloud] = {}
    for name, size in sizes:
        if name in assets:
            continue
        path = Path(workdir) / ASSETS_DIR / f"{name}.ply"
        if not path.exists():
            cloud = box_asset(tuple(size), spacing, label=name)  # type: ignore[arg-type]
            atomic_write_bytes(path, save_ply(cloud))
            log.debug("Wrote box asset %s (%d Gaussians)", path.name, len(cloud))
        assets[name] = load_ply(path.read_bytes(), label=name)
    return assets


def graph_assets(workdir: Path, graph: ConstraintGraph, spacing: float) -> dict[str, GaussianCloud]:
    refs = asset_refs(graph)
    sizes = ((refs[i], graph.instances[i].size) for i in graph.nodes)
    return ensure_assets(workdir, sizes, spacing)


def read_assets(workdir: Path, names: Iterable[str]) -> dict[str, GaussianCloud]:
    assets = {}
    for name in names:
        path = Path(workdir) / ASSETS_DIR / f"{name}.ply"
        if not path.exists():
            raise DomainError(f"missing asset {path}")
        assets[name] = load_ply(path.read_bytes(), label=name)
    return assets


def model_boxes(
    refs: dict[str, str], assets: dict[str, GaussianCloud], sigma: float
) -> dict[str, Box3]:
    boxes: dict[str, Box3] = {}
    by_asset = {name: aabb(cloud, k=sigma) for name, cloud in assets.items()}
    for iid, ref in refs.items():
        boxes[iid] = by_asset[ref]
    return boxes


def layout_step(workdir: Path, config: Config, seed: int, grid: float | None = None) -> Layout:
    workdir = Path(workdir)
    graph = load_plan_graph(workdir, config)
    assets = graph_assets(workdir, graph, config.environment.asset_spacing)
    boxes = model_boxes(asset_refs(graph), assets, config.layout.model_box_sigma)
    layout = solve_layout(graph, boxes, grid, seed, config.layout)
    atomic_write_text(workdir / GRAPH_FILE, _json_text(serialize_graph(graph)))
    atomic_write_text(workdir / LAYOUT_FILE, _json_text(layout_to_json(layout)))
    log.info("Placed %d instance(s)", len(layout.placements))
    return layout


def verify_step(workdir: Path, config: Config) -> LayoutReport:
    workdir = Path(workdir)
    layout = load_layout(_read(workdir / LAYOUT_FILE))
    graph = load_graph(_read(workdir / GRAPH_FILE))
    return verify_layout(layout, graph, config=config.layout)


def _environment_spacing(scene: SceneDims, config: Config) -> float:
    env = config.environment
    return env.indoor_spacing if scene.is_indoor else env.outdoor_spacing


def _write_package(
    workdir: Path, pkg: ScenePackage, assets: dict[str, GaussianCloud], config: Config
) -> None:
    sh_mode = cast(ShMode, config.environment.sh_mode)
    atomic_write_text(workdir / MANIFEST_FILE, _json_text(manifest_to_json(pkg)))
    atomic_write_bytes(workdir / SCENE_PLY, save_ply(compose_package(pkg, assets, sh_mode)))


def compose_step(workdir: Path, config: Config) -> ScenePackage:
    workdir = Path(workdir)
    layout = load_layout(_read(workdir / LAYOUT_FILE))
    graph = load_graph(_read(workdir / GRAPH_FILE))
    assets = graph_assets(workdir, graph, config.environment.asset_spacing)
    spacing = _environment_spacing(layout.scene, config)
    environment = init_environment(layout.scene, spacing)
    pkg = package_from_layout(layout, asset_refs(graph), environment, spacing)
    _write_package(workdir, pkg, assets, config)
    log.info(
        "Composed %d object(s) with %d environment Gaussians", len(pkg.objects), len(environment)
    )
    return pkg


def edit_step(
    workdir: Path, edits_text: str, config: Config, seed: int, replan: bool = False
) -> EditResult:
    """Apply a batch of edit commands to the composed scene and re-compose it.

    Relocated objects get extra stage-2 poses in poses-edit.jsonl.
    """
    workdir = Path(workdir)
    pkg = load_manifest(_read(workdir / MANIFEST_FILE))
    graph = load_graph(_read(workdir / GRAPH_FILE))
    cmds = load_edit_commands(edits_text)

    added = [(c.asset, c.size) for c in cmds if c.kind is EditKind.ADD]
    ensure_assets(workdir, added, config.environment.asset_spacing)  # type: ignore[arg-type]

    result = apply_edits(pkg, cmds, graph, replan=replan, config=config.layout, seed=seed)
    pkg = result.package
    assets = read_assets(workdir, {o.asset for o in pkg.objects.values()})
    _write_package(workdir, pkg, assets, config)
    atomic_write_text(workdir / GRAPH_FILE, _json_text(serialize_graph(result.graph)))
    layout = pkg.layout().model_copy(update={"seed": seed, "report": result.report})
    atomic_write_text(workdir / LAYOUT_FILE, _json_text(layout_to_json(layout)))

    moved = [result.graph.resolve(c.instance) for c in cmds if c.kind is EditKind.RELOCATE]
    poses: list[CameraPose] = []
    for k, iid in enumerate(dict.fromkeys(moved)):
        poses.extend(
            resample_around(layout, iid, config.camera.per_region, seed + k, config.camera)
        )
    if poses:
        atomic_write_text(workdir / EDIT_POSES_FILE, poses_to_jsonl(poses, 2))
    return result


def animate_step(
    workdir: Path, times: Sequence[float], config: Config, trajectories_text: str | None = None
) -> list[Path]:
    """Compose one frame per requested time; new trajectories are saved into the manifest."""
    workdir = Path(workdir)
    pkg = load_manifest(_read(workdir / MANIFEST_FILE))
    if trajectories_text is not None:
        pkg = with_trajectories(pkg, load_trajectories(trajectories_text))
        atomic_write_text(workdir / MANIFEST_FILE, _json_text(manifest_to_json(pkg)))
    if not pkg.trajectories:
        log.warning("Scene has no trajectories; frames will be identical")
    assets = read_assets(workdir, {o.asset for o in pkg.objects.values()})
    sh_mode = cast(ShMode, config.environment.sh_mode)
    frames = []
    for k, t in enumerate(times):
        cloud = compose_scene_at_time(pkg, assets, t, sh_mode)
        path = workdir / FRAMES_DIR / f"frame-{k:03d}.ply"
        frames.append(atomic_write_bytes(path, save_ply(cloud)))
    return frames


def cameras_step(workdir: Path, config: Config, seed: int) -> PosePlan:
    workdir = Path(workdir)
    layout = load_layout(_read(workdir / LAYOUT_FILE))
    plan = plan_poses(layout.scene, layout, seed, config.camera)
    path = evaluation_trajectory(
        layout.scene, config.camera.eval_step, config.camera.eval_azimuths, config.camera
    )
    atomic_write_text(workdir / pose_file(1), poses_to_jsonl(plan.stage1, 1))
    atomic_write_text(workdir / pose_file(2), poses_to_jsonl(plan.stage2, 2))
    atomic_write_text(workdir / pose_file(3), poses_to_jsonl(plan.stage3, 3))
    atomic_write_text(workdir / pose_file(EVAL_STAGE), poses_to_jsonl(path, EVAL_STAGE))
    log.info(
        "Planned %d + %d training pose(s), %d evaluation pose(s)",
        len(plan.stage1),
        len(plan.stage2),
        len(path),
    )
    return plan


class FilterOutcome(NamedTuple):
    cloud: GaussianCloud
    scores: ScoreVector
    removed: int


def filter_step(
    workdir: Path,
    config: Config,
    eta: float | None = None,
    stage: int | str = 3,
    threads: int | None = None,
) -> FilterOutcome:
    workdir = Path(workdir)
    cloud = load_ply(_read_bytes(workdir / SCENE_PLY), label="scene")
    poses = [p for _, p in read_poses_jsonl(_read(workdir / pose_file(stage)))]
    fcfg = config.filter
    scores = contribution_scores(cloud, poses, fcfg.resolution, threads or fcfg.threads)
    if fcfg.threshold is not None and eta is None:
        kept = filter_by_threshold(cloud, scores, fcfg.threshold)
    else:
        kept = filter_cloud(cloud, scores, fcfg.eta if eta is None else eta)
    atomic_write_text(workdir / SCORES_FILE, scores_to_csv(scores))
    atomic_write_bytes(workdir / FILTERED_PLY, save_ply(kept))
    return FilterOutcome(kept, scores, len(cloud) - len(kept))


def schedule_dump(
    config: DiffusionConfig,
    iteration: int | None = None,
    iter_max: int | None = None,
    seed: int = 0,
    predictor: str = "smooth",
    latent_size: int = 8,
    prompt_token: str = "a scene",
) -> dict:
    """Schedule table and DreamTime weights; with ``iter_max`` also one MTS trajectory.

    ``schedule.alpha_bar`` is indexed by t = 0..T; ``dreamtime_weights`` starts
    at t = 1, so it holds one entry fewer.

    The trajectory uses a synthetic predictor: latents inverted through the
    sampled timesteps, their denoised counterparts and the guidance direction.
    """
    sched = schedule_from_config(config)
    doc: dict = {
        "schedule": schedule_to_dict(sched),
        "dreamtime_weights": [float(w) for w in dreamtime_weights(config.mu, config.sigma, sched)],
    }
    if iter_max is None:
        return doc
    if predictor not in PREDICTORS:
        raise DomainError(f"unknown predictor {predictor!r}; choose from {sorted(PREDICTORS)}")
    if latent_size < 1:
        raise DomainError(f"latent size must be >= 1, got {latent_size}")

    t_end = time_window(iteration or 0, iter_max, sched.T)
    steps = sample_timesteps(t_end, config.intervals, seed)
    pred = PREDICTORS[predictor]()
    x0 = LatentState.from_array(np.random.default_rng(seed + 1).standard_normal(latent_size))
    traj = build_mts_trajectory(x0, steps, pred, EMPTY, sched, config.delta_t)
    y = prompt(prompt_token)
    weights = step_weights(steps, sched, config)
    direction = mts_direction(traj, pred, y, EMPTY, weights)
    denoised = build_denoise_trajectory(traj, pred, y, sched, config.delta_t)
    doc["trajectory"] = {
        "T_end": t_end,
        "timesteps": steps,
        "weights": weights,
        "x0": [float(v) for v in x0.values],
        "latents": [[float(v) for v in x.values] for x in traj.latents],
        "denoised": [[float(v) for v in x.values] for x in denoised],
        "direction": [float(v) for v in direction.values],
    }
    return doc


class PipelineResult(NamedTuple):
    layout: Layout
    package: ScenePackage
    poses: PosePlan
    filtered: FilterOutcome


def run_pipeline(
    workdir: Path,
    scene_text: str,
    config: Config,
    scene: SceneDims,
    seed: int,
    eta: float | None = None,
    user_constraint: str = "",
    dialogue: str | None = None,
    threads: int | None = None,
) -> PipelineResult:
    """plan -> layout -> compose -> cameras -> filter in one working directory."""
    workdir = Path(workdir)
    plan_step(workdir, scene_text, config, scene, user_constraint, dialogue)
    layout = layout_step(workdir, config, seed)
    pkg = compose_step(workdir, config)
    poses = cameras_step(workdir, config, seed)
    filtered = filter_step(workdir, config, eta, threads=threads)
    return PipelineResult(layout, pkg, poses, filtered)
