"""Synthetic noise predictors.

They stand in for a trained network when inspecting trajectories from the
command line and in tests. Prompt tokens are hashed into a stable offset so
different prompts give different (but reproducible) predictions.
"""

import hashlib

import numpy as np

from splatscene.diffusion.latents import LatentState, PromptId


def prompt_offset(prompt: PromptId) -> float:
    if prompt.empty:
        return 0.0
    digest = hashlib.sha256(prompt.token.encode()).digest()
    return int.from_bytes(digest[:4], "little") / 2**32 - 0.5


class ZeroPredictor:
    def __call__(self, latent: LatentState, t: int, prompt: PromptId) -> LatentState:
        return latent.with_values(np.zeros(len(latent)))


class ConstantPredictor:
    def __init__(self, value: float | np.ndarray):
        self.value = value

    def __call__(self, latent: LatentState, t: int, prompt: PromptId) -> LatentState:
        return latent.with_values(np.broadcast_to(self.value, (len(latent),)).copy())


class TimePredictor:
    """Depends on the timestep and prompt only: c * (t / T) + prompt offset."""

    def __init__(self, scale: float = 1.0, T: int = 1000):
        self.scale = scale
        self.T = T

    def __call__(self, latent: LatentState, t: int, prompt: PromptId) -> LatentState:
        idx = np.arange(len(latent), dtype=np.float64)
        value = self.scale * (t / self.T) * np.cos(idx) + prompt_offset(prompt)
        return latent.with_values(value)


class LinearPredictor:
    """eps = M x + b(t), with a fixed matrix drawn from ``seed``."""

    def __init__(self, size: int, seed: int = 0, gain: float = 0.1):
        rng = np.random.default_rng(seed)
        self.matrix = gain * rng.standard_normal((size, size))
        self.bias = rng.standard_normal(size)

    def __call__(self, latent: LatentState, t: int, prompt: PromptId) -> LatentState:
        value = self.matrix @ latent.values + self.bias * (t / 1000.0) + prompt_offset(prompt)
        return latent.with_values(value)


class SmoothPredictor:
    """Bounded nonlinear predictor: a * sin(x) + b * t / T + prompt offset."""

    def __init__(self, amplitude: float = 0.5, drift: float = 0.2, T: int = 1000):
        self.amplitude = amplitude
        self.drift = drift
        self.T = T

    def __call__(self, latent: LatentState, t: int, prompt: PromptId) -> LatentState:
        value = (
            self.amplitude * np.sin(latent.values)
            + self.drift * (t / self.T)
            + prompt_offset(prompt)
        )
        return latent.with_values(value)


PREDICTORS = {
    "zero": ZeroPredictor,
    "constant": lambda: ConstantPredictor(0.1),
    "time": TimePredictor,
    "smooth": SmoothPredictor,
}
