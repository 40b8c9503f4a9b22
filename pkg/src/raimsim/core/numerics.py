"""Scalar Gaussian and Gaussian-mixture algebra, tail functions and bisection.

Mixtures are stored as parallel numpy arrays of weights, means and variances.
A component with variance 0 is a Dirac delta at its mean. Weights are held in
log form relative to ``log_scale``; the linear ``weights`` view may underflow
for components far below the largest one, the log weights never do.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp, ndtr, ndtri

from raimsim.exceptions import (
    DomainError,
    InvalidBracketError,
    MixtureNormalizationError,
    NumericsError,
    ProtectionLevelUnavailableError,
)

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9
DEFAULT_TOLERANCE = 1e-6  # meters
DEFAULT_MAX_ITERATIONS = 200
EXPANSION_CAP = 2.0**40
FALLBACK_BRACKET_HI = 1.0  # meters

_LOG_2PI = math.log(2.0 * math.pi)


def _log_normal_pdf(x, mean, variance):
    """Log density of N(x; mean, variance) for strictly positive variance."""
    return -0.5 * (_LOG_2PI + np.log(variance) + (x - mean) ** 2 / variance)


@dataclass(frozen=True)
class WeightedGaussian:
    """A single unnormalized Gaussian term; variance 0 is a delta at ``mean``."""

    weight: float
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not self.weight >= 0.0:
            raise NumericsError(f"Component weight must be nonnegative, got {self.weight}")
        if not self.variance >= 0.0:
            raise NumericsError(f"Component variance must be nonnegative, got {self.variance}")

    @property
    def is_delta(self) -> bool:
        return self.variance == 0.0


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Weighted sum of scalar Gaussians (immutable).

    The true weight of component ``l`` is ``exp(log_weights[l] + log_scale)``,
    equivalently ``weights[l] * exp(log_scale)`` while ``weights[l]`` is normal.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_scale: float = 0.0
    log_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float).ravel()
        means = np.array(self.means, dtype=float).ravel()
        variances = np.array(self.variances, dtype=float).ravel()

        if not (weights.shape == means.shape == variances.shape):
            raise NumericsError(
                f"Mismatched component arrays: {weights.shape}, {means.shape}, {variances.shape}"
            )
        if np.any(weights < 0.0) or np.any(np.isnan(weights)):
            raise NumericsError("Mixture weights must be nonnegative")
        if np.any(variances < 0.0) or np.any(np.isnan(variances)):
            raise NumericsError("Mixture variances must be nonnegative")

        with np.errstate(divide="ignore"):
            log_weights = np.log(weights)
        for array in (weights, means, variances, log_weights):
            array.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "log_scale", float(self.log_scale))
        object.__setattr__(self, "log_weights", log_weights)

    @classmethod
    def _assemble(
        cls,
        log_weights: np.ndarray,
        means: np.ndarray,
        variances: np.ndarray,
        log_scale: float,
        weights: np.ndarray | None = None,
    ) -> "GaussianMixture":
        """Unchecked constructor for arrays produced by the mixture algebra."""
        mixture = object.__new__(cls)
        object.__setattr__(mixture, "log_weights", log_weights)
        object.__setattr__(mixture, "weights", np.exp(log_weights) if weights is None else weights)
        object.__setattr__(mixture, "means", means)
        object.__setattr__(mixture, "variances", variances)
        object.__setattr__(mixture, "log_scale", float(log_scale))
        return mixture

    @classmethod
    def from_log_weights(
        cls,
        log_weights: np.ndarray,
        means: np.ndarray,
        variances: np.ndarray,
        log_scale: float = 0.0,
    ) -> "GaussianMixture":
        """Build from log weights, moving the largest one into ``log_scale``."""
        finite = np.isfinite(log_weights)
        if finite.any():
            shift = float(log_weights[finite].max())
            log_weights = log_weights - shift
            log_scale += shift
        return cls._assemble(log_weights, means, variances, log_scale)

    @classmethod
    def single(cls, mean: float, variance: float, weight: float = 1.0) -> "GaussianMixture":
        return cls(weights=[weight], means=[mean], variances=[variance])

    def __len__(self) -> int:
        return int(self.means.size)

    @property
    def components(self) -> list[WeightedGaussian]:
        """Components with the scale folded into the weights."""
        weights = np.exp(self.log_weights + self.log_scale)
        return [
            WeightedGaussian(float(w), float(m), float(v))
            for w, m, v in zip(weights, self.means, self.variances)
        ]

    @cached_property
    def stds(self) -> np.ndarray:
        return np.sqrt(self.variances)

    @property
    def log_mass(self) -> float:
        """Log of the total (unnormalized) mass."""
        if not np.any(self.log_weights > -np.inf):
            return -math.inf
        return self.log_scale + float(logsumexp(self.log_weights))

    @property
    def total_mass(self) -> float:
        return math.exp(self.log_mass)

    def normalize(self) -> "GaussianMixture":
        """Return a copy whose weights sum to one; component ratios are preserved."""
        if not np.any(self.log_weights > -np.inf):
            raise MixtureNormalizationError("Cannot normalize a mixture with zero total mass")
        log_total = float(logsumexp(self.log_weights))
        if not math.isfinite(log_total):
            raise MixtureNormalizationError(f"Cannot normalize a mixture with log mass {log_total}")
        return GaussianMixture._assemble(
            self.log_weights - log_total, self.means, self.variances, 0.0
        )

    def sort_by_weight(self) -> "GaussianMixture":
        """Return a copy with components in decreasing weight order."""
        order = np.argsort(-self.log_weights, kind="stable")
        return GaussianMixture._assemble(
            self.log_weights[order],
            self.means[order],
            self.variances[order],
            self.log_scale,
            weights=self.weights[order],
        )

    def pdf(self, t) -> np.ndarray:
        """Density at one or more points (vectorised :func:`mixture_eval`)."""
        points = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([mixture_eval(self, float(p)) for p in points])


def _pairwise_product(m1, v1, m2, v2):
    """Closed-form product of Gaussian pairs; returns (mean, variance, log scale factor).

    Works on broadcastable arrays. The precision-form equations are rewritten
    over ``v1 + v2`` so a single delta never produces an infinite precision.
    """
    var_sum = v1 + v2
    if np.all(var_sum > 0.0):
        return (m1 * v2 + m2 * v1) / var_sum, v1 * v2 / var_sum, _log_normal_pdf(m1, m2, var_sum)

    both_delta = var_sum == 0.0
    safe_sum = np.where(both_delta, 1.0, var_sum)
    mean = np.where(both_delta, m1, (m1 * v2 + m2 * v1) / safe_sum)
    variance = np.where(both_delta, 0.0, v1 * v2 / safe_sum)
    log_s = np.where(
        both_delta,
        np.where(m1 == m2, 0.0, -np.inf),
        _log_normal_pdf(m1, m2, safe_sum),
    )
    return mean, variance, log_s


def gaussian_product(g1: WeightedGaussian, g2: WeightedGaussian) -> WeightedGaussian:
    """Product of two weighted Gaussians as a weighted Gaussian.

    Two deltas at different points multiply to zero mass.
    """
    mean, variance, log_s = _pairwise_product(
        np.float64(g1.mean), np.float64(g1.variance), np.float64(g2.mean), np.float64(g2.variance)
    )
    weight = g1.weight * g2.weight * math.exp(float(log_s))
    return WeightedGaussian(weight, float(mean), float(variance))


def mixture_product(a: GaussianMixture, b: GaussianMixture) -> GaussianMixture:
    """All ``len(a) * len(b)`` pairwise component products (unnormalized)."""
    if len(a) == 0 or len(b) == 0:
        raise NumericsError("Cannot multiply an empty mixture")

    mean, variance, log_s = _pairwise_product(
        a.means[:, None], a.variances[:, None], b.means[None, :], b.variances[None, :]
    )
    log_w = a.log_weights[:, None] + b.log_weights[None, :] + log_s

    return GaussianMixture.from_log_weights(
        log_w.ravel(), mean.ravel(), variance.ravel(), a.log_scale + b.log_scale
    )


def mixture_shift_convolve(
    m: GaussianMixture,
    offset: float,
    extra_variance: float,
    negate: bool,
) -> GaussianMixture:
    """Map each component (w, mu, var) to (w, offset +/- mu, var + extra_variance).

    With ``negate`` this is ``t -> integral N(t; offset - s, extra_variance) m(s) ds``.
    """
    if len(m) == 0:
        raise NumericsError("Cannot convolve an empty mixture")
    if extra_variance < 0.0:
        raise DomainError(f"extra_variance must be nonnegative, got {extra_variance}")

    means = offset - m.means if negate else offset + m.means
    return GaussianMixture._assemble(
        m.log_weights, means, m.variances + extra_variance, m.log_scale, weights=m.weights
    )


def _component_log_pdf(m: GaussianMixture, t: float, extra_variance: float) -> np.ndarray:
    variances = m.variances + extra_variance
    continuous = variances > 0.0
    if continuous.all():
        return _log_normal_pdf(t, m.means, variances)

    log_pdf = np.empty_like(variances)
    log_pdf[continuous] = _log_normal_pdf(t, m.means[continuous], variances[continuous])
    # a delta has no finite density at its own atom
    log_pdf[~continuous] = np.where(m.means[~continuous] == t, np.inf, -np.inf)
    return log_pdf


def mixture_log_eval(m: GaussianMixture, t: float, extra_variance: float = 0.0) -> float:
    """Log of ``sum_l w_l N(t; m_l, var_l + extra_variance)``.

    ``extra_variance`` evaluates the convolution of the mixture with a zero-mean
    Gaussian, i.e. the integral of ``N(t; b, extra_variance) * m(b)`` over ``b``.
    """
    live = m.log_weights > -np.inf
    if not live.any():
        return -math.inf
    log_pdf = _component_log_pdf(m, t, extra_variance)
    if live.all():
        return m.log_scale + float(logsumexp(m.log_weights + log_pdf))
    return m.log_scale + float(logsumexp(m.log_weights[live] + log_pdf[live]))


def mixture_eval(m: GaussianMixture, t: float) -> float:
    """Mixture density at ``t``; delta components add zero unless ``t`` is their atom."""
    return math.exp(mixture_log_eval(m, t))


def mixture_mean(m: GaussianMixture) -> float:
    """Weighted mean of a normalized mixture."""
    total = m.total_mass
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise MixtureNormalizationError(f"Mixture weights sum to {total}, expected 1")
    return float(np.dot(np.exp(m.log_weights + m.log_scale), m.means))


def q_function(u: float) -> float:
    """Standard normal upper-tail probability Q(u)."""
    return float(ndtr(-u))


def q_inverse(p: float) -> float:
    """Inverse of :func:`q_function` on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"q_inverse requires 0 < p < 1, got {p}")
    return float(-ndtri(p))


def mixture_interval_risk(m: GaussianMixture, center: float, radius: float) -> float:
    """Probability mass outside ``[center - radius, center + radius]``."""
    if radius < 0.0:
        raise DomainError(f"radius must be nonnegative, got {radius}")

    weights = np.exp(m.log_weights + m.log_scale)
    continuous = m.variances > 0.0
    if continuous.all():
        lower = ndtr((center - radius - m.means) / m.stds)
        upper = ndtr((m.means - center - radius) / m.stds)
        return min(1.0, float(np.dot(weights, lower + upper)))

    risk = 0.0
    if continuous.any():
        means = m.means[continuous]
        stds = m.stds[continuous]
        lower = ndtr((center - radius - means) / stds)
        upper = ndtr((means - center - radius) / stds)
        risk += float(np.dot(weights[continuous], lower + upper))

    outside = np.abs(m.means[~continuous] - center) > radius
    risk += float(weights[~continuous][outside].sum())
    return min(1.0, risk)


@dataclass(frozen=True)
class Bracket:
    """Initial search interval and stopping rule for :func:`bisect_min_radius`."""

    lo: float
    hi: float
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise InvalidBracketError(f"Bracket requires lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tolerance > 0.0:
            raise InvalidBracketError(f"Tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise InvalidBracketError("max_iterations must be at least 1")

    @classmethod
    def for_mixture(
        cls,
        m: GaussianMixture,
        center: float,
        tolerance: float = DEFAULT_TOLERANCE,
    ) -> "Bracket":
        """Default bracket: [0, 10 * (max std + max |mean - center|)]."""
        spread = float(m.stds.max() + np.abs(m.means - center).max())
        hi = 10.0 * spread
        if not hi > 0.0 or not math.isfinite(hi):
            hi = FALLBACK_BRACKET_HI
        return cls(lo=0.0, hi=hi, tolerance=tolerance)


def bisect_min_radius(
    risk: Callable[[float], float],
    target: float,
    bracket: Bracket,
) -> float:
    """Smallest radius ``r`` with ``risk(r) <= target``, to within the bracket tolerance.

    ``risk`` must be non-increasing. The upper end is doubled until it brackets
    the target; past ``2**40`` times the initial width the level is unavailable.
    """
    lo, hi = bracket.lo, bracket.hi
    if risk(lo) <= target:
        return lo

    max_span = (bracket.hi - bracket.lo) * EXPANSION_CAP
    while risk(hi) > target:
        span = 2.0 * (hi - bracket.lo)
        lo, hi = hi, bracket.lo + span
        if span > max_span:
            raise ProtectionLevelUnavailableError(
                f"Risk stays above {target} up to radius {hi:.6g}; PL unavailable"
            )

    for _ in range(bracket.max_iterations):
        if hi - lo <= bracket.tolerance:
            break
        mid = 0.5 * (lo + hi)
        if risk(mid) <= target:
            hi = mid
        else:
            lo = mid

    if hi - lo > bracket.tolerance:
        logger.warning(
            f"Bisection stopped after {bracket.max_iterations} iterations "
            f"with width {hi - lo:.3g} > {bracket.tolerance:.3g}"
        )
    return hi
