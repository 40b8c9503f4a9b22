"""Sum-product message passing on the cycle-free RAIM factor graph.

Each station i contributes a branch  p(lambda_i) - f_i - b_i - g_i - x  where
f_i = p(b_i | lambda_i) and g_i = p(y_i | x, b_i). Messages are Gaussian
mixtures; a ``None`` message stands for the constant (unit) function, which is
what a flat prior on x sends when no other branch exists.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from raimsim.core.numerics import (
    DEFAULT_TOLERANCE,
    Bracket,
    GaussianMixture,
    bisect_min_radius,
    mixture_interval_risk,
    mixture_log_eval,
    mixture_mean,
    mixture_product,
    mixture_shift_convolve,
)
from raimsim.exceptions import AllMeasurementsExcludedError, MessagePassingError
from raimsim.models.scenario import GaussianPrior, PriorX, Scenario, bias_prior_mixture

logger = logging.getLogger(__name__)

NO_EXCLUSION_THRESHOLD = 1.0


@dataclass(frozen=True, eq=False)
class BranchMessages:
    """Messages computed along one station's branch."""

    mu_f_to_b: GaussianMixture
    mu_g_to_x: GaussianMixture
    mu_x_to_g: GaussianMixture | None
    mu_g_to_b: GaussianMixture | None
    log_mu_f_to_lambda: tuple[float, float]
    lambda_posterior: float


@dataclass(frozen=True, eq=False)
class MessagePassingResult:
    """All branch messages plus the unnormalized x marginal p(x) prod mu_{g_i -> x}."""

    branches: tuple[BranchMessages, ...]
    joint: GaussianMixture
    component_operations: int

    @cached_property
    def posterior(self) -> GaussianMixture:
        return self.joint.normalize()

    @property
    def theta_post(self) -> tuple[float, ...]:
        return tuple(b.lambda_posterior for b in self.branches)


@dataclass(frozen=True, eq=False)
class BayesResult:
    """Estimate and protection level derived from an x posterior."""

    posterior: GaussianMixture
    estimate: float
    pl: float
    theta_post: tuple[float, ...]
    excluded: tuple[int, ...]


def _multiply(
    a: GaussianMixture | None, b: GaussianMixture | None
) -> tuple[GaussianMixture | None, int]:
    """Product of two messages where ``None`` is the unit; returns (product, operations)."""
    if a is None:
        return b, 0
    if b is None:
        return a, 0
    product = mixture_product(a, b)
    return product, len(product)


def _product(messages: Sequence[GaussianMixture], prior: PriorX) -> tuple[GaussianMixture | None, int]:
    """Multiply messages at the x node; returns (product or unit, component operations)."""
    result = prior.as_mixture() if isinstance(prior, GaussianPrior) else None
    operations = 0
    for message in messages:
        result, count = _multiply(result, message)
        operations += count
    return result, operations


def _lambda_posterior(theta: float, log_mu0: float, log_mu1: float) -> float:
    with np.errstate(divide="ignore"):
        log_fault = math.log(theta) if theta > 0.0 else -math.inf
        log_clear = math.log1p(-theta) if theta < 1.0 else -math.inf
    a = log_fault + log_mu1
    b = log_clear + log_mu0
    if a == -math.inf and b == -math.inf:
        raise MessagePassingError("Both fault indicator hypotheses have zero mass")
    return float(math.exp(a - np.logaddexp(a, b)))


def lambda_posteriors(s: Scenario, branches: Sequence[BranchMessages]) -> list[float]:
    """Posterior fault probabilities theta'_i from the step-6 messages."""
    return [
        _lambda_posterior(station.theta, *branch.log_mu_f_to_lambda)
        for station, branch in zip(s.stations, branches)
    ]


def run_message_passing(s: Scenario, y: Sequence[float]) -> MessagePassingResult:
    """Run the six-step schedule on every branch and form the x marginal."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise MessagePassingError("No measurements to process")
    if y.size != s.size:
        raise MessagePassingError(f"Expected {s.size} measurements, got {y.size}")

    operations = 0

    # steps 1-3: priors to the leaves, f_i -> b_i, g_i -> x
    mu_f_to_b = [bias_prior_mixture(station) for station in s.stations]
    mu_g_to_x = []
    for i, station in enumerate(s.stations):
        message = mixture_shift_convolve(mu_f_to_b[i], y[i], station.noise_variance, negate=True)
        mu_g_to_x.append(message)
        operations += len(message)

    # step 4: leave-one-out products at x from prefix and suffix products
    prefix = [s.prior_x.as_mixture() if isinstance(s.prior_x, GaussianPrior) else None]
    for message in mu_g_to_x:
        product, count = _multiply(prefix[-1], message)
        prefix.append(product)
        operations += count
    suffix: list[GaussianMixture | None] = [None] * (s.size + 1)
    for i in range(s.size - 1, 0, -1):
        suffix[i], count = _multiply(mu_g_to_x[i], suffix[i + 1])
        operations += count

    partial = []
    for i, station in enumerate(s.stations):
        mu_x_to_g, count = _multiply(prefix[i], suffix[i + 1])
        operations += count

        if mu_x_to_g is None:
            mu_g_to_b = None
            log_lambda = (0.0, 0.0)
        else:
            # step 5: g_i -> b_i
            mu_g_to_b = mixture_shift_convolve(mu_x_to_g, y[i], station.noise_variance, negate=True)
            # step 6: f_i -> lambda_i, closed form for both indicator values
            log_lambda = (
                mixture_log_eval(mu_g_to_b, 0.0),
                mixture_log_eval(mu_g_to_b, station.bias_mean, extra_variance=station.bias_variance),
            )
            operations += 3 * len(mu_g_to_b)

        partial.append((mu_f_to_b[i], mu_g_to_x[i], mu_x_to_g, mu_g_to_b, log_lambda))

    joint = prefix[-1]

    branches = []
    for station, (f_to_b, g_to_x, x_to_g, g_to_b, log_lambda) in zip(s.stations, partial):
        branches.append(
            BranchMessages(
                mu_f_to_b=f_to_b,
                mu_g_to_x=g_to_x,
                mu_x_to_g=x_to_g,
                mu_g_to_b=g_to_b,
                log_mu_f_to_lambda=log_lambda,
                lambda_posterior=_lambda_posterior(station.theta, *log_lambda),
            )
        )

    logger.debug(f"Message passing over {s.size} branches: {len(joint)} posterior components")
    return MessagePassingResult(
        branches=tuple(branches),
        joint=joint,
        component_operations=operations,
    )


def exclude_faults(
    s: Scenario,
    messages: MessagePassingResult,
    theta_threshold: float,
) -> tuple[tuple[int, ...], GaussianMixture]:
    """Drop branches with theta'_i > theta_threshold and re-form the x posterior.

    Only the cached mu_{g_i -> x} messages are reused; nothing is recomputed.
    """
    excluded = tuple(
        i for i, branch in enumerate(messages.branches) if branch.lambda_posterior > theta_threshold
    )
    if not excluded:
        return (), messages.posterior
    if len(excluded) == s.size:
        raise AllMeasurementsExcludedError(
            f"All {s.size} measurements exceed theta_threshold {theta_threshold}"
        )

    kept = [b.mu_g_to_x for i, b in enumerate(messages.branches) if i not in excluded]
    joint, _ = _product(kept, s.prior_x)
    logger.debug(f"Excluded stations {excluded}; {len(joint)} posterior components remain")
    return excluded, joint.normalize()


def estimate_and_pl(
    posterior: GaussianMixture,
    tir: float,
    tolerance: float = DEFAULT_TOLERANCE,
) -> tuple[float, float]:
    """Weighted-mean estimate and the smallest PL whose two-sided tail mass <= tir."""
    estimate = mixture_mean(posterior)
    bracket = Bracket.for_mixture(posterior, estimate, tolerance=tolerance)
    pl = bisect_min_radius(
        lambda radius: mixture_interval_risk(posterior, estimate, radius),
        tir,
        bracket,
    )
    return estimate, pl


def run_bayes(
    s: Scenario,
    y: Sequence[float],
    theta_threshold: float | None = None,
    messages: MessagePassingResult | None = None,
) -> BayesResult:
    """Full Bayesian RAIM pipeline for one epoch.

    ``theta_threshold`` defaults to the scenario value (fault exclusion);
    pass :data:`NO_EXCLUSION_THRESHOLD` for the no-exclusion variant. A
    precomputed ``messages`` lets both variants share one message pass.
    """
    if messages is None:
        messages = run_message_passing(s, y)
    threshold = s.theta_threshold if theta_threshold is None else theta_threshold

    excluded, posterior = exclude_faults(s, messages, threshold)
    posterior = posterior.sort_by_weight()
    estimate, pl = estimate_and_pl(posterior, s.tir)
    return BayesResult(
        posterior=posterior,
        estimate=estimate,
        pl=pl,
        theta_post=messages.theta_post,
        excluded=excluded,
    )
