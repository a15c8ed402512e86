import json

import pytest
from pydantic import ValidationError

from splatscene.config import Config, PlannerMode, load_config, write_default_config
from splatscene.models import SceneDims


def test_missing_file_gives_defaults(tmp_path):
    config = load_config(tmp_path / "absent.toml")
    assert config == Config()
    assert config.layout.grid == 0.25
    assert config.planner.mode is PlannerMode.FIXTURE


def test_example_config_matches_defaults(tmp_path):
    path = write_default_config(tmp_path / "splatscene" / "config.toml")
    assert path.exists()
    assert load_config(path).model_dump() == Config().model_dump()


def test_write_default_config_keeps_existing_files(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("seed = 9\n", encoding="utf-8")
    write_default_config(path)
    assert load_config(path).seed == 9
    write_default_config(path, force=True)
    assert load_config(path).seed == 0


def test_toml_overrides(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(
        "seed = 3\n"
        "[scene]\nkind = 'outdoor'\nradius = 12.0\n"
        "[layout]\ngrid = 0.5\n"
        "[filter]\nresolution = [32, 48]\n",
        encoding="utf-8",
    )
    config = load_config(path)
    assert config.seed == 3
    assert config.scene == SceneDims.outdoor(12.0)
    assert config.layout.grid == 0.5
    assert config.layout.clearance == 0.05
    assert config.filter.resolution == (32, 48)


def test_json_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"camera": {"stage1_count": 12}}), encoding="utf-8")
    assert load_config(path).camera.stage1_count == 12


def test_bad_config(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("[layout]\ngird = 0.5\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_config(path)
    path.write_text("[planner]\nmode = 'live'\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="endpoint_url"):
        load_config(path)
    path.write_text("[layout]\ngrid = 0\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_config(path)
