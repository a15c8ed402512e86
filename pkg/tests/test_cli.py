import json

import pytest
from click.testing import CliRunner

from splatscene import pipeline
from splatscene.cli import main, run
from splatscene.gaussians.ply import load_ply
from tests.conftest import FIXTURES

LIVING_ROOM = str(FIXTURES / "living-room")
PLAN = ["--scene", "a living room", "--fixture", LIVING_ROOM]


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("[camera]\nstage1_count = 20\nper_region = 2\n", encoding="utf-8")
    return str(path)


def invoke(runner, config, *args):
    return runner.invoke(main, ["--config", config, "-q", *args], catch_exceptions=False)


def test_init_writes_config(runner, tmp_path):
    target = tmp_path / "cfg" / "config.toml"
    result = runner.invoke(main, ["init", "--path", str(target)])
    assert result.exit_code == 0
    assert "seed = 0" in target.read_text(encoding="utf-8")


def test_unknown_command_is_a_usage_error(runner):
    assert runner.invoke(main, ["bogus"]).exit_code == 2
    assert run(["bogus"]) == 2


def test_bad_room_is_a_usage_error(runner, tmp_path):
    result = runner.invoke(main, ["plan", *PLAN, "--room", "5x5", "-w", str(tmp_path)])
    assert result.exit_code == 2


def test_plan_needs_a_fixture_in_fixture_mode(runner, tmp_path):
    result = runner.invoke(main, ["plan", "--scene", "a living room", "-w", str(tmp_path)])
    assert result.exit_code == 2


def test_missing_inputs_exit_with_one(runner, tmp_path):
    assert runner.invoke(main, ["verify", "-w", str(tmp_path)]).exit_code == 1
    assert run(["verify", "-w", str(tmp_path)]) == 1


def test_steps_one_by_one(runner, small_config, tmp_path):
    work = str(tmp_path / "work")
    assert invoke(runner, small_config, "plan", *PLAN, "-w", work).exit_code == 0
    for name in ("objects.json", "anchors.json", "relations.json", "scene.json"):
        assert (tmp_path / "work" / name).exists()

    assert invoke(runner, small_config, "layout", "-w", work).exit_code == 0
    layout = json.loads((tmp_path / "work" / pipeline.LAYOUT_FILE).read_text(encoding="utf-8"))
    assert len(layout["instances"]) == 7
    verify = invoke(runner, small_config, "verify", "-w", work)
    assert verify.exit_code == (0 if not layout["deferred"] else 1)

    assert invoke(runner, small_config, "compose", "-w", work).exit_code == 0
    assert invoke(runner, small_config, "cameras", "-w", work).exit_code == 0
    for stage in (1, 2, 3, "eval"):
        assert (tmp_path / "work" / pipeline.pose_file(stage)).exists()

    result = invoke(runner, small_config, "filter", "-w", work, "--eta", "0.2", "--stage", "eval")
    assert result.exit_code == 0
    scene = load_ply((tmp_path / "work" / pipeline.SCENE_PLY).read_bytes())
    filtered = load_ply((tmp_path / "work" / pipeline.FILTERED_PLY).read_bytes())
    assert len(scene) - len(filtered) == -(-len(scene) * 2 // 10)


def test_forced_collision_fails_verify(runner, small_config, tmp_path):
    work = tmp_path / "work"
    invoke(runner, small_config, "plan", *PLAN, "-w", str(work))
    invoke(runner, small_config, "layout", "-w", str(work))
    path = work / pipeline.LAYOUT_FILE
    doc = json.loads(path.read_text(encoding="utf-8"))
    doc["instances"]["sofa2"] = doc["instances"]["sofa1"]
    path.write_text(json.dumps(doc), encoding="utf-8")

    result = invoke(runner, small_config, "verify", "-w", str(work))
    assert result.exit_code == 1
    assert "collision" in result.output


def run_pipeline(runner, config, work) -> None:
    result = invoke(runner, config, "pipeline", *PLAN, "-w", str(work), "--seed", "3")
    assert result.exit_code == 0


def test_pipeline_is_reproducible(runner, small_config, tmp_path):
    run_pipeline(runner, small_config, tmp_path / "a")
    run_pipeline(runner, small_config, tmp_path / "b")
    names = [
        pipeline.LAYOUT_FILE,
        pipeline.MANIFEST_FILE,
        pipeline.SCENE_PLY,
        pipeline.FILTERED_PLY,
        pipeline.SCORES_FILE,
        pipeline.pose_file(3),
        pipeline.pose_file("eval"),
    ]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_edit_and_animate(runner, small_config, tmp_path):
    work = tmp_path / "work"
    run_pipeline(runner, small_config, work)

    edits = tmp_path / "edits.json"
    edits.write_text('[{"kind": "remove", "instance": "potted plant2"}]', encoding="utf-8")
    result = invoke(runner, small_config, "edit", str(edits), "-w", str(work))
    assert result.exit_code == 0
    manifest = json.loads((work / pipeline.MANIFEST_FILE).read_text(encoding="utf-8"))
    assert "potted plant2" not in [o["id"] for o in manifest["objects"]]

    trajectories = tmp_path / "motion.json"
    sofa = next(o for o in manifest["objects"] if o["id"] == "sofa2")
    start = {"s": sofa["s"], "t": sofa["t"], "quat": sofa["quat"]}
    end = {**start, "t": [sofa["t"][0], sofa["t"][1] + 0.5, sofa["t"][2]]}
    trajectories.write_text(
        json.dumps([{"id": "sofa2", "keyframes": [{"time": 0.0, **start}, {"time": 1.0, **end}]}]),
        encoding="utf-8",
    )
    args = ["-w", str(work), "--time", "0", "--time", "1", "--trajectories", str(trajectories)]
    result = invoke(runner, small_config, "animate", *args)
    assert result.exit_code == 0
    first = (work / pipeline.FRAMES_DIR / "frame-000.ply").read_bytes()
    second = (work / pipeline.FRAMES_DIR / "frame-001.ply").read_bytes()
    assert first != second
    assert (work / pipeline.SCENE_PLY).read_bytes() != second


def test_schedule_dump(runner):
    result = runner.invoke(main, ["-q", "schedule-dump"])
    assert result.exit_code == 0
    doc = json.loads(result.stdout)
    assert doc["schedule"]["T"] == 1000
    # alpha_bar covers t = 0..T, the weights t = 1..T
    assert len(doc["schedule"]["alpha_bar"]) == 1001
    assert len(doc["dreamtime_weights"]) == 1000
    assert sum(doc["dreamtime_weights"]) == pytest.approx(1.0)
    assert "trajectory" not in doc


def test_schedule_dump_with_trajectory(runner, tmp_path):
    out = tmp_path / "schedule.json"
    args = ["-q", "schedule-dump", "--iteration", "0", "--iter-max", "10", "--latent-size", "4"]
    result = runner.invoke(main, [*args, "-o", str(out)])
    assert result.exit_code == 0
    trajectory = json.loads(out.read_text(encoding="utf-8"))["trajectory"]
    assert trajectory["T_end"] == 1000
    assert len(trajectory["direction"]) == 4
    assert runner.invoke(main, ["schedule-dump", "--iteration", "3"]).exit_code == 2
