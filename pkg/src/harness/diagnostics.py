"""Empirical checks of the Sign-Gaussian mechanism against its closed forms."""

from dataclasses import dataclass, field

import numpy as np
import structlog

from src.aggregation.rain import RainAggregator, model_update
from src.client.mechanism import attenuation, flip_probability, sign_gaussian, sign_of
from src.client.params import OutputMode, RainParams, minimal_sigma, validate_dp
from src.exceptions import DomainError
from src.harness.task import SyntheticTask, root_direction, softmax_gradient
from src.ring.prg import Prg, seed_from_int

logger = structlog.get_logger()


def empirical_flip_rate(ratio: float, sigma: float, trials: int, seed: int) -> float:
    """Fraction of sign flips for g = ratio * sigma; g = 0 counts -1 outputs as flips."""
    rng = Prg(seed_from_int(seed), 0, "diagnostics/flip").numpy_generator()
    g = np.full(trials, ratio * sigma)
    bits = sign_gaussian(g, sigma, rng).bits
    return float(np.mean(bits == 0))


@dataclass
class AlignmentReport:
    """Measured sign-cosine against the 1 - 2 * P_flip lower bound, per round and on average."""

    sigma: float
    epsilon: float
    cosines: list[float] = field(default_factory=list)
    bounds: list[float] = field(default_factory=list)
    skipped_rounds: int = 0

    @property
    def mean_cosine(self) -> float:
        return float(np.mean(self.cosines)) if self.cosines else float("nan")

    @property
    def mean_bound(self) -> float:
        return float(np.mean(self.bounds)) if self.bounds else float("nan")


def alignment_check(
    task: SyntheticTask,
    rounds: int,
    num_clients: int,
    seed: int,
    epsilon: float = 2.0,
    lambda_mad: float = 1.0,
    learning_rate: float = 0.01,
    sigma_margin: float = 1.001,
) -> AlignmentReport:
    """
    Drive RAIN sign-mode rounds on clean, normalized gradients and measure alignment.

    Every client holds the full-data gradient divided by its max magnitude, so C = 1 and
    the sensitivity is 1/3. sigma is the minimal compliant value times the margin. Only
    coordinates with |g| >= 2 * sensitivity enter the cosine.
    """
    if rounds < 1 or num_clients < 1:
        raise DomainError("Need at least one round and one client")
    clip_bound = 1.0
    sensitivity = 1.0 / 3.0
    sigma = minimal_sigma(clip_bound, sensitivity, epsilon, sigma_margin)
    params = RainParams(epsilon=epsilon, sigma=sigma, clip=clip_bound, sensitivity=sensitivity)
    if not validate_dp(params).ok:
        raise DomainError(f"sigma={sigma} does not satisfy the DP bound")

    aggregator = RainAggregator(lambda_mad, OutputMode.SIGN)
    seed_bytes = seed_from_int(seed)
    report = AlignmentReport(sigma=sigma, epsilon=epsilon)
    w = task.initial_model()

    for t in range(rounds):
        g = softmax_gradient(w, task.x_train, task.y_train, task.num_classes)
        scale = float(np.max(np.abs(g)))
        if scale == 0.0:
            report.skipped_rounds += 1
            continue
        g = g / scale
        strong = np.abs(g) >= 2 * sensitivity

        updates = []
        for i in range(num_clients):
            rng = Prg(seed_bytes, t, f"alignment/client/{i}").numpy_generator()
            updates.append(sign_gaussian(g, sigma, rng).signs)
        reference = root_direction(task.x_calibration, task.y_calibration, w, task.num_classes)
        outcome = aggregator.aggregate(np.stack(updates), reference)

        if outcome.no_trusted_updates:
            report.skipped_rounds += 1
        else:
            if np.any(strong):
                truth = sign_of(g[strong])
                report.cosines.append(float(np.mean(outcome.direction[strong] * truth)))
                p_flip = float(np.max(flip_probability(g[strong], sigma)))
                report.bounds.append(1.0 - 2.0 * p_flip)
            w = model_update(w, outcome.direction, learning_rate)

    logger.info(
        "Alignment check complete",
        mean_cosine=report.mean_cosine,
        mean_bound=report.mean_bound,
        mean_attenuation=float(attenuation(2 * sensitivity, sigma)),
    )
    return report
