"""Latent vectors, prompt tokens and the noise-predictor contract."""

import math
from collections.abc import Sequence
from typing import Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from splatscene.errors import DomainError


class PromptId(BaseModel):
    """Opaque prompt token. ``EMPTY`` is the unconditional prompt."""

    model_config = ConfigDict(frozen=True)

    token: str
    empty: bool = False

    def __str__(self) -> str:
        return "<empty>" if self.empty else self.token


EMPTY = PromptId(token="", empty=True)


def prompt(token: str) -> PromptId:
    if not token:
        raise DomainError("a user prompt needs a non-empty token")
    return PromptId(token=token)


class LatentState(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    shape: tuple[int, ...]

    @field_validator("values", mode="before")
    @classmethod
    def _flat(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_shape(self) -> "LatentState":
        if len(self.values) != math.prod(self.shape):
            raise ValueError(f"{len(self.values)} values do not fill shape {self.shape}")
        return self

    @classmethod
    def from_array(cls, arr: np.ndarray | Sequence[float]) -> "LatentState":
        a = np.asarray(arr, dtype=np.float64)
        return cls(values=a.reshape(-1), shape=a.shape)

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "LatentState":
        return cls(values=np.zeros(math.prod(shape)), shape=tuple(shape))

    def array(self) -> np.ndarray:
        return self.values.reshape(self.shape)

    def with_values(self, values: np.ndarray) -> "LatentState":
        return LatentState(values=values, shape=self.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __len__(self) -> int:
        return len(self.values)


def check_same_shape(*latents: LatentState) -> None:
    shapes = {x.shape for x in latents}
    if len(shapes) > 1:
        raise DomainError(f"latent shapes differ: {sorted(shapes)}")


class NoisePredictor(Protocol):
    """eps(latent, t, prompt): deterministic and shape-preserving."""

    def __call__(self, latent: LatentState, t: int, prompt: PromptId) -> LatentState: ...


def predict(pred: NoisePredictor, latent: LatentState, t: int, prompt: PromptId) -> LatentState:
    out = pred(latent, t, prompt)
    if out.shape != latent.shape:
        raise DomainError(f"predictor returned shape {out.shape} for input {latent.shape}")
    return out
