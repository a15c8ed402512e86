"""User configuration loaded from a TOML (or single JSON) file."""

import json
import math
import tomllib
from enum import Enum
from pathlib import Path

from platformdirs import user_config_dir
from pydantic import BaseModel, ConfigDict, Field, model_validator

from splatscene.models import SceneDims

_PROJECT_ROOT = Path(__file__).resolve().parents[1]
_EXAMPLE_CONFIG = _PROJECT_ROOT / "config.example.toml"

DEFAULT_CONFIG_PATH = Path(user_config_dir("splatscene")) / "config.toml"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PlannerMode(str, Enum):
    FIXTURE = "fixture"
    LIVE = "live"


class PlannerConfig(_Section):
    mode: PlannerMode = PlannerMode.FIXTURE
    endpoint_url: str = ""
    # name of the environment variable holding the key, never the key itself
    api_key_env: str = "SPLATSCENE_API_KEY"
    auth_header: str = "Authorization"
    auth_scheme: str = "Bearer"
    max_retries: int = Field(2, ge=0)
    retry_backoff: float = Field(0.5, ge=0)
    timeout: float = Field(60.0, gt=0)
    fixture_path: Path | None = None
    model: str | None = None
    temperature: float | None = None
    vary_replicas: bool = False

    @model_validator(mode="after")
    def _live_needs_endpoint(self) -> "PlannerConfig":
        if self.mode is PlannerMode.LIVE and not self.endpoint_url:
            raise ValueError("live planner mode requires endpoint_url")
        return self


class LayoutConfig(_Section):
    grid: float = Field(0.25, gt=0)
    clearance: float = Field(0.05, ge=0)
    side_band: float = Field(0.15, gt=0, lt=0.5)
    center_fraction: float = Field(0.4, gt=0, le=1)
    outdoor_center: float = Field(0.2, gt=0, lt=1)
    outdoor_side: float = Field(0.8, gt=0, lt=1)
    next_slack: float = Field(0.5, ge=0)
    opposite_tolerance_deg: float = Field(15.0, ge=0, le=180)
    lateral_ratio: float = Field(2.0, gt=0)
    repair_budget: int = Field(200_000, ge=0)
    diversify: bool = False
    model_box_sigma: float = Field(0.0, ge=0)

    @property
    def opposite_tolerance(self) -> float:
        return math.radians(self.opposite_tolerance_deg)


class CameraConfig(_Section):
    rho1: float = Field(0.25, gt=0, le=1)
    stage1_count: int = Field(100, ge=1)
    per_region: int = Field(4, ge=1)
    outdoor_batches: int = Field(8, ge=1)
    outdoor_circles: int = Field(4, ge=1)
    inflation: float = Field(0.2, ge=0)
    fov_deg: float = Field(60.0, gt=0, lt=180)
    eye_height_min: float = 1.2
    eye_height_max: float = 1.8
    outdoor_eye_height: float = 1.6
    stage1_pitch_deg: tuple[float, float] = (-15.0, 30.0)
    stage2_pitch_deg: tuple[float, float] = (-60.0, -20.0)
    outdoor_pitch_deg: float = -30.0
    eval_step: float = Field(0.25, gt=0)
    eval_azimuths: int = Field(4, ge=1)
    eval_height: float = 1.6
    max_attempts: int = Field(10_000, ge=1)

    @property
    def fov(self) -> float:
        return math.radians(self.fov_deg)


class FilterConfig(_Section):
    eta: float = Field(0.1, ge=0, lt=1)
    resolution: tuple[int, int] = (64, 64)
    every: int = Field(500, ge=1)
    threads: int = Field(1, ge=1)
    threshold: float | None = None


class DiffusionConfig(_Section):
    kind: str = "scaled-linear"
    T: int = Field(1000, ge=1)
    beta_start: float = 0.00085
    beta_end: float = 0.012
    intervals: int = Field(4, ge=1)
    mu: float = 500.0
    sigma: float = Field(250.0, gt=0)
    delta_t: int = Field(50, ge=1)
    weighting: str = "uniform"
    reconstruction_views: int = Field(20, ge=1)
    reconstruction_t_max: int = Field(200, ge=1)


class EnvironmentConfig(_Section):
    indoor_spacing: float = Field(0.25, gt=0)
    outdoor_spacing: float = Field(1.0, gt=0)
    asset_spacing: float = Field(0.1, gt=0)
    sh_mode: str = "truncate"


class Config(_Section):
    scene: SceneDims = SceneDims.indoor(5.0, 5.0, 3.0)
    seed: int = 0
    planner: PlannerConfig = Field(default_factory=PlannerConfig)
    layout: LayoutConfig = Field(default_factory=LayoutConfig)
    camera: CameraConfig = Field(default_factory=CameraConfig)
    filter: FilterConfig = Field(default_factory=FilterConfig)
    diffusion: DiffusionConfig = Field(default_factory=DiffusionConfig)
    environment: EnvironmentConfig = Field(default_factory=EnvironmentConfig)


def load_config(path: Path | None = None) -> Config:
    """Load config from a TOML file (or JSON by suffix), falling back to defaults."""
    path = path or DEFAULT_CONFIG_PATH

    if not path.exists():
        return Config()

    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        with open(path, "rb") as f:
            data = tomllib.load(f)

    return Config.model_validate(data)


def write_default_config(path: Path | None = None, force: bool = False) -> Path:
    """Write a default config file if missing.

    Args:
        path: Optional path to write the config.
        force: Overwrite existing file if True.

    Returns:
        Path to the written (or existing) config file.
    """
    path = path or DEFAULT_CONFIG_PATH
    path.parent.mkdir(parents=True, exist_ok=True)

    if path.exists() and not force:
        return path

    if _EXAMPLE_CONFIG.exists():
        content = _EXAMPLE_CONFIG.read_text(encoding="utf-8")
    else:
        content = "# splatscene configuration\n"

    path.write_text(content, encoding="utf-8")
    return path
