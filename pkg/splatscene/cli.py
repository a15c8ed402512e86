"""Command-line interface using Click + Rich."""

import json
import logging
import math
from collections.abc import Sequence
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from splatscene import pipeline
from splatscene.config import Config, PlannerMode, load_config
from splatscene.diffusion.predictors import PREDICTORS
from splatscene.errors import SplatSceneError
from splatscene.layout.models import Layout
from splatscene.models import SceneDims
from splatscene.planning.client import read_dialogue
from splatscene.planning.scene_spec import parse_objects
from splatscene.utils.io import atomic_write_text

console = Console()
err_console = Console(stderr=True)

log = logging.getLogger(__name__)


class CommandFailed(click.ClickException):
    """A domain failure surfaced as exit code 1."""

    exit_code = 1

    def show(self, file=None) -> None:
        err_console.print(f"[red]Error:[/red] {escape(self.message)}")


class _Group(click.Group):
    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except SplatSceneError as e:
            log.debug("Command failed", exc_info=True)
            raise CommandFailed(str(e)) from e


def _setup_logging(quiet: bool, verbose: bool) -> None:
    level = logging.WARNING if quiet else logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _parse_room(ctx, param, value: str | None) -> SceneDims | None:
    if value is None:
        return None
    try:
        width, length, height = (float(v) for v in value.lower().split("x"))
        return SceneDims.indoor(width, length, height)
    except ValueError:
        raise click.BadParameter(f"expected WxLxH with positive sizes, got {value!r}") from None


def _parse_resolution(ctx, param, value: str | None) -> tuple[int, int] | None:
    if value is None:
        return None
    try:
        height, width = (int(v) for v in value.lower().split("x"))
    except ValueError:
        raise click.BadParameter(f"expected HxW, got {value!r}") from None
    if height <= 0 or width <= 0:
        raise click.BadParameter("resolution must be positive")
    return height, width


def _config(ctx: click.Context) -> Config:
    return ctx.obj


def _scene(
    config: Config, room: SceneDims | None, radius: float | None, fixture: Path | None
) -> SceneDims:
    if room is not None and radius is not None:
        raise click.UsageError("--room and --radius are mutually exclusive")
    if room is not None:
        return room
    if radius is not None:
        if radius <= 0:
            raise click.BadParameter("radius must be > 0", param_hint="--radius")
        return SceneDims.outdoor(radius)
    if fixture is not None:
        return pipeline.read_scene(fixture, config.scene)
    return config.scene


def _with_fixture(config: Config, fixture: Path | None) -> Config:
    if fixture is None:
        if config.planner.mode is PlannerMode.FIXTURE and config.planner.fixture_path is None:
            raise click.UsageError("fixture planner mode needs --fixture (or planner.fixture_path)")
        return config
    update = {"mode": PlannerMode.FIXTURE, "fixture_path": fixture}
    planner = config.planner.model_copy(update=update)
    return config.model_copy(update={"planner": planner})


def _dialogue(dialogue: Path | None, fixture: Path | None) -> str | None:
    if dialogue is not None:
        return dialogue.read_text(encoding="utf-8")
    return read_dialogue(fixture) if fixture is not None else None


def _print_layout(layout: Layout) -> None:
    table = Table(title="Layout")
    table.add_column("Instance", style="cyan")
    table.add_column("x", justify="right")
    table.add_column("y", justify="right")
    table.add_column("z", justify="right")
    table.add_column("Yaw (deg)", justify="right")
    table.add_column("Scale", justify="right", style="dim")
    for iid, a in layout.placements.items():
        x, y, z = a.t
        yaw = f"{math.degrees(a.yaw):.0f}"
        table.add_row(iid, f"{x:.2f}", f"{y:.2f}", f"{z:.2f}", yaw, f"{a.s:.3f}")
    console.print(table)
    if layout.report.violations:
        console.print(f"[yellow]{len(layout.report.violations)} relation(s) deferred[/yellow]")


workdir_option = click.option(
    "--workdir",
    "-w",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    show_default=True,
    help="Directory holding the pipeline files.",
)
seed_option = click.option("--seed", type=int, default=None, help="Random seed (default: config).")
fixture_option = click.option(
    "--fixture",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help="Replay recorded planning documents from this directory.",
)
room_option = click.option(
    "--room", callback=_parse_room, default=None, help="Indoor room size WxLxH in meters."
)
radius_option = click.option(
    "--radius", type=float, default=None, help="Outdoor scene radius in meters."
)
constraint_option = click.option(
    "--constraint", default="", help="Extra user constraint for the planner."
)
dialogue_option = click.option(
    "--dialogue",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Dialogue history to fold into the constraint.",
)
threads_option = click.option(
    "--threads", type=click.IntRange(min=1), default=None, help="Scoring threads."
)


@click.group(cls=_Group)
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Config file (TOML, or JSON by suffix).",
)
@click.option("--quiet", "-q", is_flag=True, help="Only log warnings and errors.")
@click.option("--verbose", "-v", is_flag=True, help="Log debug detail.")
@click.pass_context
def main(ctx: click.Context, config_path: Path | None, quiet: bool, verbose: bool):
    """splatscene: text-to-scene planning, layout and Gaussian compression."""
    _setup_logging(quiet, verbose)
    try:
        ctx.obj = load_config(config_path)
    except (ValueError, OSError) as e:
        raise click.BadParameter(str(e), param_hint="--config") from e


@main.command()
@click.option("--force", is_flag=True, help="Overwrite an existing config.")
@click.option("--path", type=click.Path(dir_okay=False, path_type=Path), default=None)
def init(force: bool, path: Path | None):
    """Initialize default config."""
    from splatscene.config import write_default_config

    path = write_default_config(path, force=force)
    console.print(f"[green]Config ready: {path}[/green]")


@main.command()
@click.option("--scene", "scene_text", required=True, help="Scene description.")
@fixture_option
@room_option
@radius_option
@constraint_option
@dialogue_option
@workdir_option
@click.pass_context
def plan(
    ctx: click.Context,
    scene_text: str,
    fixture: Path | None,
    room: SceneDims | None,
    radius: float | None,
    constraint: str,
    dialogue: Path | None,
    workdir: Path,
):
    """Write the objects, anchors and relations documents."""
    config = _with_fixture(_config(ctx), fixture)
    scene = _scene(config, room, radius, fixture)
    docs = pipeline.plan_step(
        workdir, scene_text, config, scene, constraint, _dialogue(dialogue, fixture)
    )
    categories = len(parse_objects(docs.objects))
    console.print(f"[green]Planned {categories} categories into {workdir}[/green]")


@main.command()
@workdir_option
@seed_option
@click.option("--grid", type=float, default=None, help="Candidate grid spacing in meters.")
@click.pass_context
def layout(ctx: click.Context, workdir: Path, seed: int | None, grid: float | None):
    """Solve the object layout for a plan."""
    config = _config(ctx)
    result = pipeline.layout_step(workdir, config, config.seed if seed is None else seed, grid)
    _print_layout(result)


@main.command()
@workdir_option
@click.pass_context
def verify(ctx: click.Context, workdir: Path):
    """Check a layout for collisions, relation, anchor and bounds violations."""
    report = pipeline.verify_step(workdir, _config(ctx))
    if report.ok:
        console.print("[green]Layout satisfies every constraint.[/green]")
        return
    table = Table(title="Violations")
    table.add_column("Kind", style="red")
    table.add_column("Instances", style="cyan")
    table.add_column("Detail")
    for v in report.violations:
        table.add_row(v.kind.value, ", ".join(v.instances), v.detail)
    console.print(table)
    ctx.exit(1)


@main.command()
@workdir_option
@click.pass_context
def compose(ctx: click.Context, workdir: Path):
    """Merge environment and placed assets into scene.ply."""
    pkg = pipeline.compose_step(workdir, _config(ctx))
    target = workdir / pipeline.SCENE_PLY
    console.print(f"[green]Composed {len(pkg.objects)} object(s) into {target}[/green]")


@main.command()
@workdir_option
@seed_option
@click.pass_context
def cameras(ctx: click.Context, workdir: Path, seed: int | None):
    """Sample training poses (three stages) and the evaluation path."""
    config = _config(ctx)
    plan = pipeline.cameras_step(workdir, config, config.seed if seed is None else seed)
    table = Table(title="Camera poses")
    table.add_column("Stage", style="cyan")
    table.add_column("Poses", justify="right")
    for stage, poses in (("1", plan.stage1), ("2", plan.stage2), ("3", plan.stage3)):
        table.add_row(stage, str(len(poses)))
    console.print(table)


@main.command(name="filter")
@workdir_option
@click.option(
    "--eta",
    type=click.FloatRange(0.0, 1.0, max_open=True),
    default=None,
    help="Fraction to remove.",
)
@click.option("--stage", type=click.Choice(["1", "2", "3", "eval"]), default="3", show_default=True)
@click.option(
    "--resolution", callback=_parse_resolution, default=None, help="Score resolution HxW."
)
@threads_option
@click.pass_context
def filter_(
    ctx: click.Context,
    workdir: Path,
    eta: float | None,
    stage: str,
    resolution: tuple[int, int] | None,
    threads: int | None,
):
    """Score every Gaussian of scene.ply and drop the weakest."""
    config = _config(ctx)
    if resolution is not None:
        settings = config.filter.model_copy(update={"resolution": resolution})
        config = config.model_copy(update={"filter": settings})
    outcome = pipeline.filter_step(
        workdir, config, eta, stage if stage == "eval" else int(stage), threads
    )
    console.print(
        f"[green]Kept {len(outcome.cloud)} Gaussians, removed {outcome.removed}[/green]"
    )


@main.command()
@click.argument("edits", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@workdir_option
@seed_option
@click.option("--replan", is_flag=True, help="Re-solve the whole layout after the edits.")
@click.pass_context
def edit(ctx: click.Context, edits: Path, workdir: Path, seed: int | None, replan: bool):
    """Apply relocate/add/remove commands from a JSON file."""
    config = _config(ctx)
    result = pipeline.edit_step(
        workdir,
        edits.read_text(encoding="utf-8"),
        config,
        config.seed if seed is None else seed,
        replan,
    )
    if result.report.ok:
        console.print(f"[green]Scene now holds {len(result.package.objects)} object(s)[/green]")
    else:
        count = len(result.report.violations)
        console.print(f"[yellow]Edited scene has {count} violation(s)[/yellow]")


@main.command()
@workdir_option
@click.option(
    "--time", "times", type=float, multiple=True, required=True, help="Sample time (repeatable)."
)
@click.option(
    "--trajectories",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Keyframe trajectories to attach before sampling.",
)
@click.pass_context
def animate(
    ctx: click.Context, workdir: Path, times: tuple[float, ...], trajectories: Path | None
):
    """Compose the scene at the given times."""
    text = trajectories.read_text(encoding="utf-8") if trajectories is not None else None
    frames = pipeline.animate_step(workdir, times, _config(ctx), text)
    for frame in frames:
        console.print(f"[green]{frame}[/green]")


@main.command(name="schedule-dump")
@click.option("--iteration", type=click.IntRange(min=0), default=None)
@click.option(
    "--iter-max", type=click.IntRange(min=1), default=None, help="Also dump one trajectory."
)
@seed_option
@click.option(
    "--predictor", type=click.Choice(sorted(PREDICTORS)), default="smooth", show_default=True
)
@click.option("--latent-size", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--prompt", "prompt_token", default="a scene", show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def schedule_dump(
    ctx: click.Context,
    iteration: int | None,
    iter_max: int | None,
    seed: int | None,
    predictor: str,
    latent_size: int,
    prompt_token: str,
    output: Path | None,
):
    """Dump the noise schedule (and optionally an MTS trajectory) as JSON."""
    config = _config(ctx)
    if iteration is not None and iter_max is None:
        raise click.UsageError("--iteration needs --iter-max")
    doc = pipeline.schedule_dump(
        config.diffusion,
        iteration,
        iter_max,
        config.seed if seed is None else seed,
        predictor,
        latent_size,
        prompt_token,
    )
    text = json.dumps(doc, indent=2) + "\n"
    if output is None:
        click.echo(text, nl=False)
    else:
        atomic_write_text(output, text)
        err_console.print(f"[green]Wrote {output}[/green]")


@main.command(name="pipeline")
@click.option("--scene", "scene_text", required=True, help="Scene description.")
@fixture_option
@room_option
@radius_option
@constraint_option
@dialogue_option
@workdir_option
@seed_option
@click.option("--eta", type=click.FloatRange(0.0, 1.0, max_open=True), default=None)
@threads_option
@click.pass_context
def pipeline_(
    ctx: click.Context,
    scene_text: str,
    fixture: Path | None,
    room: SceneDims | None,
    radius: float | None,
    constraint: str,
    dialogue: Path | None,
    workdir: Path,
    seed: int | None,
    eta: float | None,
    threads: int | None,
):
    """plan -> layout -> compose -> cameras -> filter in one directory."""
    config = _with_fixture(_config(ctx), fixture)
    scene = _scene(config, room, radius, fixture)
    result = pipeline.run_pipeline(
        workdir,
        scene_text,
        config,
        scene,
        config.seed if seed is None else seed,
        eta,
        constraint,
        _dialogue(dialogue, fixture),
        threads,
    )
    _print_layout(result.layout)
    console.print(
        f"[green]Filtered scene: {len(result.filtered.cloud)} Gaussians "
        f"({result.filtered.removed} removed)[/green]"
    )


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = main.main(
            args=list(argv) if argv is not None else None,
            prog_name="splatscene",
            standalone_mode=False,
        )
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        err_console.print("[red]Aborted![/red]")
        return 1
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    main()
