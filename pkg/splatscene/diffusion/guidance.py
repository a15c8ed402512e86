"""Guidance directions and the reconstruction objective."""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from splatscene.diffusion.ddim import MtsTrajectory
from splatscene.diffusion.latents import (
    LatentState,
    NoisePredictor,
    PromptId,
    check_same_shape,
    predict,
)
from splatscene.diffusion.schedule import ScheduleTable, add_noise, pseudo_ground_truth
from splatscene.errors import DomainError

log = logging.getLogger(__name__)


def guidance_direction(eps_a: LatentState, eps_b: LatentState, w: float) -> LatentState:
    """Classifier-score term w * (eps_a - eps_b)."""
    check_same_shape(eps_a, eps_b)
    return eps_a.with_values(w * (eps_a.values - eps_b.values))


def classifier_free_guidance(
    eps_uncond: LatentState, eps_cond: LatentState, scale: float
) -> LatentState:
    check_same_shape(eps_uncond, eps_cond)
    return eps_uncond.with_values(eps_uncond.values + scale * (eps_cond.values - eps_uncond.values))


def sds_direction(eps_hat: LatentState, eps: LatentState, w: float) -> LatentState:
    """Score-distillation term w * (eps_hat - eps) against the injected noise."""
    return guidance_direction(eps_hat, eps, w)


def evaluate_predictions(
    traj: MtsTrajectory,
    pred: NoisePredictor,
    prompt_pos: PromptId,
    prompt_neg: PromptId,
    threads: int = 1,
) -> MtsTrajectory:
    """Attach (positive, negative) noise estimates for every trajectory step."""

    def pair(i: int) -> tuple[LatentState, LatentState]:
        x, t = traj.latents[i], traj.timesteps[i]
        return predict(pred, x, t, prompt_pos), predict(pred, x, t, prompt_neg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(pair, range(len(traj))))
    else:
        pairs = [pair(i) for i in range(len(traj))]
    return traj.model_copy(
        update={"predictions": pairs, "predicted_with": (pred, prompt_pos, prompt_neg)}
    )


def _predicted_with(
    traj: MtsTrajectory, pred: NoisePredictor, prompt_pos: PromptId, prompt_neg: PromptId
) -> bool:
    if traj.predicted_with is None:
        return False
    used, pos, neg = traj.predicted_with
    return used is pred and (pos, neg) == (prompt_pos, prompt_neg)


def mts_direction(
    traj: MtsTrajectory,
    pred: NoisePredictor,
    prompt_pos: PromptId,
    prompt_neg: PromptId,
    weights: Sequence[float],
    threads: int = 1,
) -> LatentState:
    """Sum of w(t_i) * (eps(x_i, t_i, pos) - eps(x_i, t_i, neg)) over the trajectory.

    For editing, pass the edit prompt as ``prompt_pos`` and the source prompt
    as ``prompt_neg``. Attached predictions are reused only when they came
    from the same predictor and prompt pair.
    """
    if len(weights) != len(traj):
        raise DomainError(f"{len(weights)} weights for {len(traj)} trajectory steps")
    if not _predicted_with(traj, pred, prompt_pos, prompt_neg):
        traj = evaluate_predictions(traj, pred, prompt_pos, prompt_neg, threads)
    if len(traj) == 1:
        a, b = traj.predictions[0]
        return guidance_direction(a, b, weights[0])
    terms = np.stack(
        [guidance_direction(a, b, w).values for (a, b), w in zip(traj.predictions, weights)]
    )
    total = np.array([math.fsum(column) for column in terms.T])
    return traj.latents[0].with_values(total)


def reconstruction_loss(rendered: Sequence[LatentState], targets: Sequence[LatentState]) -> float:
    """Sum of L2 distances between renders and their targets."""
    if len(rendered) != len(targets):
        raise DomainError(f"{len(rendered)} renders for {len(targets)} targets")
    dists = []
    for r, g in zip(rendered, targets):
        check_same_shape(r, g)
        dists.append(float(np.linalg.norm(r.values - g.values)))
    return math.fsum(dists)


def reconstruction_targets(
    renders: Sequence[LatentState],
    pred: NoisePredictor,
    prompt: PromptId,
    t: int,
    sched: ScheduleTable,
    seed: int,
) -> list[LatentState]:
    """Noise every render to t and take its one-step pseudo ground truth."""
    rng = np.random.default_rng(seed)
    targets = []
    for x0 in renders:
        eps = x0.with_values(rng.standard_normal(len(x0)))
        xt = add_noise(x0, eps, t, sched)
        targets.append(pseudo_ground_truth(xt, predict(pred, xt, t, prompt), t, sched))
    log.debug("Built %d reconstruction target(s) at t=%d", len(targets), t)
    return targets
