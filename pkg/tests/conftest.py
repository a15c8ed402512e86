from pathlib import Path

import numpy as np
import pytest

from splatscene.config import Config
from splatscene.gaussians.cloud import GaussianCloud
from splatscene.models import SceneDims

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture
def living_room() -> Path:
    return FIXTURES / "living-room"


@pytest.fixture
def park() -> Path:
    return FIXTURES / "park"


@pytest.fixture
def room() -> SceneDims:
    return SceneDims.indoor(5.0, 5.0, 3.0)


@pytest.fixture
def config() -> Config:
    return Config()


def make_cloud(means, scale: float = 0.1, opacity: float = 0.8, label: str = "") -> GaussianCloud:
    means = np.asarray(means, dtype=np.float64).reshape(-1, 3)
    n = len(means)
    return GaussianCloud(
        means=means,
        rotations=np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)),
        scales=np.full((n, 3), scale),
        opacities=np.full(n, opacity),
        sh_dc=np.full((n, 3), 0.5),
        label=label,
    )
