"""Deterministic DDIM inversion and denoising over an abstract predictor.

One step from t_a to t_b with noise estimate eps is

    x_b = sqrt(ab_b) * (x_a - sqrt(1 - ab_a) * eps) / sqrt(ab_a) + sqrt(1 - ab_b) * eps

Inversion evaluates eps at (x_a, t_a). Denoising evaluates it at the target
timestep by default, which makes it the exact inverse of inversion for any
predictor that ignores the latent; ``eval_at="source"`` gives the usual DDIM
sampling line instead.
"""

import logging
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from splatscene.diffusion.latents import (
    EMPTY,
    LatentState,
    NoisePredictor,
    PromptId,
    check_same_shape,
    predict,
)
from splatscene.diffusion.schedule import ScheduleTable, build_schedule
from splatscene.errors import DomainError

log = logging.getLogger(__name__)

EvalAt = Literal["target", "source"]


def _update(
    x: LatentState, eps: LatentState, t_a: int, t_b: int, sched: ScheduleTable
) -> LatentState:
    x0 = (x.values - sched.noise(t_a) * eps.values) / sched.signal(t_a)
    return x.with_values(sched.signal(t_b) * x0 + sched.noise(t_b) * eps.values)


def substep_grid(t_lo: int, t_hi: int, delta_t: int | None) -> list[int]:
    """Timesteps from t_lo to t_hi inclusive, every delta_t counted from t_lo."""
    if delta_t is None or delta_t >= t_hi - t_lo:
        return [t_lo, t_hi]
    if delta_t < 1:
        raise DomainError(f"delta_t must be >= 1, got {delta_t}")
    grid = list(range(t_lo, t_hi, delta_t))
    grid.append(t_hi)
    return grid


def ddim_invert_step(
    x: LatentState,
    t_from: int,
    t_to: int,
    pred: NoisePredictor,
    prompt: PromptId = EMPTY,
    sched: ScheduleTable | None = None,
    delta_t: int | None = None,
) -> LatentState:
    """Move x from t_from up to t_to; t_from may be 0 (the clean latent)."""
    sched = sched or build_schedule()
    if not t_to > t_from:
        raise DomainError(f"inversion needs t_to > t_from, got {t_from} -> {t_to}")
    sched.check_t(t_from, allow_zero=True)
    sched.check_t(t_to)
    grid = substep_grid(t_from, t_to, delta_t)
    for a, b in zip(grid, grid[1:]):
        x = _update(x, predict(pred, x, a, prompt), a, b, sched)
    return x


def ddim_denoise_step(
    x: LatentState,
    t_from: int,
    t_to: int,
    pred: NoisePredictor,
    prompt: PromptId = EMPTY,
    sched: ScheduleTable | None = None,
    delta_t: int | None = None,
    eval_at: EvalAt = "target",
) -> LatentState:
    """Move x from t_from down to t_to; t_to may be 0."""
    sched = sched or build_schedule()
    if not t_from > t_to:
        raise DomainError(f"denoising needs t_from > t_to, got {t_from} -> {t_to}")
    sched.check_t(t_from)
    sched.check_t(t_to, allow_zero=True)
    grid = substep_grid(t_to, t_from, delta_t)[::-1]
    for a, b in zip(grid, grid[1:]):
        eps = predict(pred, x, b if eval_at == "target" else a, prompt)
        x = _update(x, eps, a, b, sched)
    return x


class MtsTrajectory(BaseModel):
    """Latents x_{t_1}..x_{t_m} along ascending timesteps.

    ``predictions`` holds (positive, negative) noise estimates per step once
    they have been evaluated; ``predicted_with`` records the predictor and the
    (positive, negative) prompts that produced them.
    """

    model_config = ConfigDict(frozen=True)

    timesteps: list[int]
    latents: list[LatentState]
    predictions: list[tuple[LatentState, LatentState]] = []
    predicted_with: tuple[Any, PromptId, PromptId] | None = Field(None, exclude=True, repr=False)

    @model_validator(mode="after")
    def _aligned(self) -> "MtsTrajectory":
        if len(self.timesteps) != len(self.latents):
            raise ValueError("timesteps and latents are not aligned")
        if self.predictions and len(self.predictions) != len(self.timesteps):
            raise ValueError("predictions and timesteps are not aligned")
        if bool(self.predictions) != (self.predicted_with is not None):
            raise ValueError("predictions need the predictor and prompts that made them")
        if any(t <= 0 for t in self.timesteps):
            raise ValueError("timesteps must be > 0")
        if any(b <= a for a, b in zip(self.timesteps, self.timesteps[1:])):
            raise ValueError("timesteps must be strictly ascending")
        return self

    def __len__(self) -> int:
        return len(self.timesteps)


def _check_ascending(timesteps: list[int]) -> None:
    if not timesteps:
        raise DomainError("at least one timestep is required")
    if timesteps[0] <= 0 or any(b <= a for a, b in zip(timesteps, timesteps[1:])):
        raise DomainError(f"timesteps must be strictly ascending and > 0, got {timesteps}")


def build_mts_trajectory(
    x0: LatentState,
    timesteps: list[int],
    pred: NoisePredictor,
    invert_prompt: PromptId = EMPTY,
    sched: ScheduleTable | None = None,
    delta_t: int | None = None,
) -> MtsTrajectory:
    """Chain inversion from the clean latent through every t_i."""
    sched = sched or build_schedule()
    _check_ascending(timesteps)
    latents = []
    x, t = x0, 0
    for t_next in timesteps:
        x = ddim_invert_step(x, t, t_next, pred, invert_prompt, sched, delta_t)
        latents.append(x)
        t = t_next
    log.debug("Inverted %d step(s) up to t=%d", len(timesteps), timesteps[-1])
    return MtsTrajectory(timesteps=list(timesteps), latents=latents)


def build_denoise_trajectory(
    traj: MtsTrajectory,
    pred: NoisePredictor,
    prompt: PromptId,
    sched: ScheduleTable | None = None,
    delta_t: int | None = None,
    eval_at: EvalAt = "source",
) -> list[LatentState]:
    """Denoised counterparts x~_{t_i}: x~_{t_i} is denoised from x_{t_{i+1}}.

    The last entry is x_{t_m} itself.
    """
    sched = sched or build_schedule()
    out = []
    for i, t in enumerate(traj.timesteps[:-1]):
        t_next = traj.timesteps[i + 1]
        out.append(
            ddim_denoise_step(traj.latents[i + 1], t_next, t, pred, prompt, sched, delta_t, eval_at)
        )
    out.append(traj.latents[-1])
    return out


def ddim_round_trip_gap(
    x_lo: LatentState,
    t_lo: int,
    t_hi: int,
    pred: NoisePredictor,
    invert_prompt: PromptId,
    denoise_prompt: PromptId,
    sched: ScheduleTable | None = None,
) -> LatentState:
    """x_lo - x~_lo for one inversion step followed by one source-evaluated denoising step.

    Equals sqrt(ab_lo) * (sigma_hi - sigma_lo) * (eps(x_hi, t_hi) - eps(x_lo, t_lo)).
    """
    sched = sched or build_schedule()
    x_hi = ddim_invert_step(x_lo, t_lo, t_hi, pred, invert_prompt, sched)
    eps_hi = predict(pred, x_hi, t_hi, denoise_prompt)
    eps_lo = predict(pred, x_lo, t_lo, invert_prompt)
    check_same_shape(eps_hi, eps_lo)
    scale = sched.signal(t_lo) * (sched.sigma(t_hi) - sched.sigma(t_lo))
    return x_lo.with_values(scale * (eps_hi.values - eps_lo.values))


def relative_error(a: LatentState, b: LatentState) -> float:
    check_same_shape(a, b)
    ref = max(b.norm(), 1e-300)
    return a.with_values(a.values - b.values).norm() / ref
