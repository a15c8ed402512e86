"""Gaussian splat data model.

A cloud is stored as parallel arrays (one row per Gaussian) so the affine,
scoring and PLY code can work on whole columns at once. ``cloud[i]`` gives a
validated single :class:`Gaussian` when per-element access is needed.
"""

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from splatscene.models import UNIT_TOLERANCE, Quat, Vec3

SH_REST = 45


class Gaussian(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: Vec3
    rotation: Quat = (1.0, 0.0, 0.0, 0.0)
    scale: Vec3
    opacity: float = Field(ge=0.0, le=1.0)
    sh_dc: Vec3 = (0.0, 0.0, 0.0)
    sh_rest: tuple[float, ...] = (0.0,) * SH_REST

    @field_validator("rotation")
    @classmethod
    def _unit(cls, q: Quat) -> Quat:
        if abs(float(np.linalg.norm(q)) - 1.0) > UNIT_TOLERANCE:
            raise ValueError("rotation must be a unit quaternion")
        return q

    @field_validator("scale")
    @classmethod
    def _positive(cls, s: Vec3) -> Vec3:
        if any(v <= 0 for v in s):
            raise ValueError("scale components must be > 0")
        return s

    @field_validator("sh_rest")
    @classmethod
    def _rest_len(cls, rest: tuple[float, ...]) -> tuple[float, ...]:
        if len(rest) != SH_REST:
            raise ValueError(f"sh_rest needs {SH_REST} coefficients, got {len(rest)}")
        return rest


_COLUMNS = {
    "means": 3,
    "rotations": 4,
    "scales": 3,
    "opacities": 0,
    "sh_dc": 3,
    "sh_rest": SH_REST,
    "normals": 3,
}


class GaussianCloud(BaseModel):
    """Ordered set of Gaussians. Arrays are float64 and read-only.

    ``sh_rest`` keeps the channel-major file order (all 15 red coefficients,
    then green, then blue).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    means: np.ndarray
    rotations: np.ndarray
    scales: np.ndarray
    opacities: np.ndarray
    sh_dc: np.ndarray
    sh_rest: np.ndarray
    normals: np.ndarray
    label: str = ""

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        n = len(np.asarray(data.get("means", np.zeros((0, 3)))))
        for name, width in _COLUMNS.items():
            shape = (n,) if width == 0 else (n, width)
            value = data.get(name)
            arr = np.zeros(shape) if value is None else np.array(value, dtype=np.float64)
            if n == 0 and arr.size == 0:
                arr = arr.reshape(shape)
            arr.setflags(write=False)
            data[name] = arr
        return data

    @model_validator(mode="after")
    def _check(self) -> "GaussianCloud":
        n = len(self.means)
        for name, width in _COLUMNS.items():
            arr = getattr(self, name)
            expected = (n,) if width == 0 else (n, width)
            if arr.shape != expected:
                raise ValueError(f"{name} has shape {arr.shape}, expected {expected}")
        if n:
            norms = np.linalg.norm(self.rotations, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
                raise ValueError("rotations must be unit quaternions")
            if np.any(self.scales <= 0):
                raise ValueError("scales must be > 0")
            if np.any((self.opacities < 0) | (self.opacities > 1)):
                raise ValueError("opacities must lie in [0, 1]")
        return self

    @classmethod
    def empty(cls, label: str = "") -> "GaussianCloud":
        return cls(means=np.zeros((0, 3)), label=label)

    @classmethod
    def from_gaussians(cls, gaussians: Sequence[Gaussian], label: str = "") -> "GaussianCloud":
        if not gaussians:
            return cls.empty(label)
        return cls(
            means=[g.mean for g in gaussians],
            rotations=[g.rotation for g in gaussians],
            scales=[g.scale for g in gaussians],
            opacities=[g.opacity for g in gaussians],
            sh_dc=[g.sh_dc for g in gaussians],
            sh_rest=[g.sh_rest for g in gaussians],
            label=label,
        )

    def __len__(self) -> int:
        return len(self.means)

    def __getitem__(self, i: int) -> Gaussian:
        return Gaussian(
            mean=tuple(self.means[i]),
            rotation=tuple(self.rotations[i]),
            scale=tuple(self.scales[i]),
            opacity=float(self.opacities[i]),
            sh_dc=tuple(self.sh_dc[i]),
            sh_rest=tuple(self.sh_rest[i]),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaussianCloud):
            return NotImplemented
        return self.label == other.label and all(
            np.array_equal(getattr(self, name), getattr(other, name)) for name in _COLUMNS
        )

    __hash__ = None  # type: ignore[assignment]

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in _COLUMNS}

    def replace(self, **changes) -> "GaussianCloud":
        """New cloud with some columns (or the label) swapped, revalidated."""
        data = {**self.columns(), "label": self.label, **changes}
        return GaussianCloud(**data)

    def subset(self, indices: Sequence[int] | np.ndarray) -> "GaussianCloud":
        idx = np.asarray(indices, dtype=np.intp)
        return GaussianCloud(
            **{name: arr[idx] for name, arr in self.columns().items()}, label=self.label
        )
