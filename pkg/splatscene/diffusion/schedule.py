"""Noise schedules, time windows, stratified timestep draws and DreamTime weights."""

import logging
import math
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from splatscene.config import DiffusionConfig
from splatscene.diffusion.latents import LatentState, check_same_shape
from splatscene.errors import DomainError

log = logging.getLogger(__name__)


class ScheduleKind(StrEnum):
    LINEAR = "linear"
    SCALED_LINEAR = "scaled-linear"


class ScheduleTable(BaseModel):
    """Cumulative signal rates alpha_bar[0..T]; alpha_bar[0] = 1."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    T: int
    alpha_bar: np.ndarray
    kind: ScheduleKind = ScheduleKind.SCALED_LINEAR

    @field_validator("alpha_bar", mode="before")
    @classmethod
    def _as_array(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self) -> "ScheduleTable":
        if len(self.alpha_bar) != self.T + 1:
            raise ValueError(f"expected {self.T + 1} entries, got {len(self.alpha_bar)}")
        if self.alpha_bar[0] != 1.0:
            raise ValueError("alpha_bar[0] must be 1")
        if np.any(self.alpha_bar <= 0) or np.any(self.alpha_bar > 1):
            raise ValueError("alpha_bar must lie in (0, 1]")
        if np.any(np.diff(self.alpha_bar) >= 0):
            raise ValueError("alpha_bar must be strictly decreasing")
        return self

    def check_t(self, t: int, allow_zero: bool = False) -> None:
        lo = 0 if allow_zero else 1
        if not lo <= t <= self.T:
            raise DomainError(f"timestep {t} outside [{lo}, {self.T}]")

    def signal(self, t: int) -> float:
        """sqrt(alpha_bar_t)."""
        return math.sqrt(self.alpha_bar[t])

    def noise(self, t: int) -> float:
        """sqrt(1 - alpha_bar_t)."""
        return math.sqrt(1.0 - self.alpha_bar[t])

    def sigma(self, t: int) -> float:
        """Noise-to-signal ratio sqrt((1 - alpha_bar_t) / alpha_bar_t)."""
        return math.sqrt((1.0 - self.alpha_bar[t]) / self.alpha_bar[t])


def build_schedule(
    kind: ScheduleKind | str = ScheduleKind.SCALED_LINEAR,
    T: int = 1000,
    beta_start: float = 0.00085,
    beta_end: float = 0.012,
) -> ScheduleTable:
    try:
        kind = ScheduleKind(kind)
    except ValueError:
        raise DomainError(f"unknown schedule kind {kind!r}") from None
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise DomainError(f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}")
    if kind is ScheduleKind.LINEAR:
        betas = np.linspace(beta_start, beta_end, T)
    else:
        betas = np.linspace(math.sqrt(beta_start), math.sqrt(beta_end), T) ** 2
    alpha_bar = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
    return ScheduleTable(T=T, alpha_bar=alpha_bar, kind=kind)


def schedule_from_config(config: DiffusionConfig) -> ScheduleTable:
    return build_schedule(config.kind, config.T, config.beta_start, config.beta_end)


def add_noise(x0: LatentState, eps: LatentState, t: int, sched: ScheduleTable) -> LatentState:
    """x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps."""
    check_same_shape(x0, eps)
    sched.check_t(t)
    return x0.with_values(sched.signal(t) * x0.values + sched.noise(t) * eps.values)


def pseudo_ground_truth(
    xt: LatentState, eps_hat: LatentState, t: int, sched: ScheduleTable
) -> LatentState:
    """One-step clean estimate (x_t - sqrt(1 - ab_t) eps_hat) / sqrt(ab_t)."""
    check_same_shape(xt, eps_hat)
    sched.check_t(t)
    return xt.with_values((xt.values - sched.noise(t) * eps_hat.values) / sched.signal(t))


def time_window(iteration: int, iter_max: int, T: int = 1000) -> int:
    """Linearly shrinking upper timestep bound, never below 1."""
    if iter_max < 1:
        raise DomainError(f"iter_max must be >= 1, got {iter_max}")
    if not 0 <= iteration <= iter_max:
        raise DomainError(f"iteration {iteration} outside [0, {iter_max}]")
    return max(1, math.floor((1.0 - iteration / iter_max) * T + 0.5))


def sample_timesteps(T_end: int, m: int, seed: int | np.random.Generator) -> list[int]:
    """One integer timestep from each of the m intervals (T_end(i-1)/m, T_end*i/m]."""
    if m < 1:
        raise DomainError(f"interval count must be >= 1, got {m}")
    if T_end < m:
        raise DomainError(f"T_end={T_end} is smaller than the interval count {m}")
    rng = np.random.default_rng(seed)
    steps = []
    for i in range(1, m + 1):
        lo = T_end * (i - 1) // m + 1
        hi = T_end * i // m
        steps.append(int(rng.integers(lo, hi + 1)))
    return steps


def _dreamtime_raw(sched: ScheduleTable, mu: float, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    t = np.arange(1, sched.T + 1, dtype=np.float64)
    ab = sched.alpha_bar[1:]
    return np.sqrt((1.0 - ab) / ab) * np.exp(-((t - mu) ** 2) / (2.0 * sigma**2))


def dreamtime_weights(mu: float, sigma: float, sched: ScheduleTable) -> np.ndarray:
    """Normalized weights for t = 1..T (index 0 holds t = 1)."""
    raw = _dreamtime_raw(sched, mu, sigma)
    z = math.fsum(raw)
    if z == 0.0:
        raise DomainError(f"weights vanish for mu={mu}, sigma={sigma}")
    return raw / z


def dreamtime_weight(t: int, mu: float, sigma: float, sched: ScheduleTable) -> float:
    sched.check_t(t)
    return float(dreamtime_weights(mu, sigma, sched)[t - 1])


def step_weights(
    timesteps: list[int], sched: ScheduleTable, config: DiffusionConfig | None = None
) -> list[float]:
    """Per-step w(t_i): 1 everywhere, or DreamTime weights when configured."""
    config = config or DiffusionConfig()
    if config.weighting == "uniform":
        return [1.0] * len(timesteps)
    if config.weighting == "dreamtime":
        table = dreamtime_weights(config.mu, config.sigma, sched)
        return [float(table[t - 1]) for t in timesteps]
    raise DomainError(f"unknown weighting {config.weighting!r}")


def sample_reconstruction_timestep(seed: int | np.random.Generator, t_max: int = 200) -> int:
    """Noise level for the reconstruction targets, uniform on [1, t_max]."""
    if t_max < 1:
        raise DomainError(f"t_max must be >= 1, got {t_max}")
    return int(np.random.default_rng(seed).integers(1, t_max + 1))


def schedule_to_dict(sched: ScheduleTable) -> dict:
    return {
        "kind": str(sched.kind),
        "T": sched.T,
        "alpha_bar": [float(a) for a in sched.alpha_bar],
    }
