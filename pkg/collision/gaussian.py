"""
Gaussian object beliefs and the densities the estimator integrates.
"""
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from scipy.special import erf

from geometry.polar import TWO_PI, normalize_angle

SQRT_TWO = math.sqrt(2.0)
AXES = ('x', 'y', 'theta')

# Fourier terms kept for the wrapped Gaussian: exp(-k^2 sigma^2 / 2) < 1e-16 beyond k = 8.6 / sigma
FOURIER_ORDER = 32
FOURIER_REACH = 8.6
# the truncated shift sum matches the full series to 1e-12 while sigma <= 0.88 n_beta
TRUNCATION_SPREAD = 0.88


def _triple(value, field):
    try:
        triple = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ValidationError(
            '%(field)s must be a sequence of three numbers',
            code='invalid_belief',
            params={'field': field},
        )
    if len(triple) != 3:
        raise ValidationError(
            '%(field)s must have exactly three entries, got %(count)s',
            code='invalid_belief',
            params={'field': field, 'count': len(triple)},
        )
    if not all(math.isfinite(v) for v in triple):
        raise ValidationError(
            '%(field)s entries must be finite',
            code='invalid_belief',
            params={'field': field},
        )
    return triple


@dataclass(frozen=True)
class GaussianBelief:
    """
    Independent Gaussian over the object's (x, y, theta) with mean ``mu`` and
    standard deviations ``sigma``. Heading is treated as wrapped.
    """
    mu: tuple
    sigma: tuple

    def __post_init__(self):
        object.__setattr__(self, 'mu', _triple(self.mu, 'mu'))
        object.__setattr__(self, 'sigma', _triple(self.sigma, 'sigma'))
        for axis, value in zip(AXES, self.sigma):
            if value <= 0:
                raise ValidationError(
                    'sigma_%(axis)s must be strictly positive, got %(value)s',
                    code='invalid_belief',
                    params={'axis': axis, 'value': value},
                )

    @classmethod
    def from_json(cls, payload):
        """Build a belief from ``{"mu": [...], "sigma": [...]}``."""
        try:
            return cls(mu=payload['mu'], sigma=payload['sigma'])
        except (KeyError, TypeError):
            raise ValidationError(
                'belief must be an object with "mu" and "sigma" entries',
                code='invalid_belief',
            )

    def to_json(self):
        return {'mu': list(self.mu), 'sigma': list(self.sigma)}

    @property
    def sigma_min(self):
        """Smaller positional standard deviation."""
        return min(self.sigma[0], self.sigma[1])

    @property
    def sigma_max(self):
        return max(self.sigma[0], self.sigma[1])

    def relative_to(self, ego_cfg):
        """
        This world-frame belief expressed in the body frame of an ego posed at
        ``ego_cfg``. The positional spread is the diagonal of the rotated
        covariance; off-diagonal terms are dropped.
        """
        c, s = math.cos(ego_cfg.theta), math.sin(ego_cfg.theta)
        dx, dy = self.mu[0] - ego_cfg.x, self.mu[1] - ego_cfg.y
        var_x, var_y = self.sigma[0] ** 2, self.sigma[1] ** 2
        return GaussianBelief(
            mu=(c * dx + s * dy, -s * dx + c * dy, self.mu[2] - ego_cfg.theta),
            sigma=(
                math.sqrt(c * c * var_x + s * s * var_y),
                math.sqrt(s * s * var_x + c * c * var_y),
                self.sigma[2],
            ),
        )


@dataclass(frozen=True)
class HeadingTruncation:
    """Number of 2π-shifted copies kept on each side of the wrapped Gaussian."""
    n_beta: int = 3

    def __post_init__(self):
        if isinstance(self.n_beta, bool) or int(self.n_beta) != self.n_beta or self.n_beta < 3:
            raise ValidationError(
                'n_beta must be an integer >= 3, got %(value)s',
                code='invalid_truncation',
                params={'value': self.n_beta},
            )

    @property
    def shifts(self):
        return TWO_PI * np.arange(-self.n_beta, self.n_beta + 1)

    def series_terms(self, sigma_theta, available=FOURIER_ORDER):
        """
        Fourier terms that give the truncated heading probability to double
        precision, or None when the shift sum must be evaluated directly.
        """
        if sigma_theta > TRUNCATION_SPREAD * self.n_beta:
            return None
        terms = math.ceil(FOURIER_REACH / sigma_theta)
        return terms if terms <= available else None


def wrapped_gaussian_pdf(theta, mu, sigma, trunc=None):
    trunc = trunc or HeadingTruncation()
    theta = np.asarray(theta, dtype=float)
    z = (theta[..., None] + trunc.shifts - mu) / sigma
    density = np.exp(-0.5 * z * z).sum(axis=-1) / (math.sqrt(TWO_PI) * sigma)
    if density.ndim == 0:
        return float(density)
    return density


def _segment_mass(a, b, mu, sigma, shifts):
    """Un-halved erf difference of plain segments [a, b], β innermost."""
    scale = sigma * SQRT_TWO
    upper = erf((b[..., None] - mu + shifts) / scale)
    lower = erf((a[..., None] - mu + shifts) / scale)
    return (upper - lower).sum(axis=-1)


def interval_probabilities(lower, upper, counts, full, mu_theta, sigma_theta, trunc):
    """
    Heading probability of every row of padded disjoint-interval arrays.

    Wrapped intervals are split at 2π; full rows are exactly 1.
    """
    mu = normalize_angle(mu_theta)
    shifts = trunc.shifts
    valid = np.arange(lower.shape[1])[None, :] < counts[:, None]
    head_b = np.minimum(upper, TWO_PI)
    tail_b = np.maximum(upper - TWO_PI, 0.0)
    mass = (_segment_mass(lower, head_b, mu, sigma_theta, shifts)
            + _segment_mass(np.zeros_like(tail_b), tail_b, mu, sigma_theta, shifts))
    probability = 0.5 * np.where(valid, mass, 0.0).sum(axis=1)
    probability = np.where(full, 1.0, probability)
    return np.clip(probability, 0.0, 1.0)


def heading_interval_probability(intervals, mu_theta, sigma_theta, trunc=None):
    """Probability that the wrapped-Gaussian heading falls in ``intervals``."""
    trunc = trunc or HeadingTruncation()
    intervals = [iv for iv in intervals if not iv.is_empty]
    if not intervals:
        return 0.0
    if any(iv.is_full for iv in intervals):
        return 1.0
    lower = np.array([[iv.lower for iv in intervals]])
    upper = np.array([[iv.upper for iv in intervals]])
    counts = np.array([len(intervals)])
    return float(interval_probabilities(
        lower, upper, counts, np.array([False]), mu_theta, sigma_theta, trunc
    )[0])


def cartesian_position_density(x, y, rho, belief):
    """Polar position density evaluated at precomputed Cartesian points."""
    sx, sy = belief.sigma[0], belief.sigma[1]
    exponent = -((x - belief.mu[0]) ** 2) / (2 * sx * sx) - ((y - belief.mu[1]) ** 2) / (2 * sy * sy)
    return rho / (TWO_PI * sx * sy) * np.exp(exponent)


def polar_position_density(phi, rho, belief):
    """Bivariate Gaussian position density in polar coordinates (ρ Jacobian included)."""
    phi = np.asarray(phi, dtype=float)
    rho = np.asarray(rho, dtype=float)
    density = cartesian_position_density(rho * np.cos(phi), rho * np.sin(phi), rho, belief)
    if np.ndim(density) == 0:
        return float(density)
    return density


@dataclass(frozen=True, eq=False)
class HeadingMoments:
    """
    Trigonometric moments of the disjoint intervals of every grid point.

    ``measure`` is the interval measure over 2π; row k-1 of ``sin`` and ``cos``
    holds the summed sin(k·b) - sin(k·a) and cos(k·b) - cos(k·a) over π·k.
    Integrating the Fourier series of the wrapped Gaussian over the intervals
    turns a weighted sum of heading probabilities into two matrix-vector
    products.
    """
    measure: np.ndarray
    sin: np.ndarray
    cos: np.ndarray

    @property
    def order(self):
        return self.sin.shape[0]

    def weighted_probability(self, weights, mu_theta, sigma_theta, terms):
        """Sum of ``weights`` times the heading probability of every point."""
        k = np.arange(1, terms + 1)
        decay = np.exp(-0.5 * (k * sigma_theta) ** 2)
        series = (np.cos(k * mu_theta) * (self.sin[:terms] @ weights)
                  - np.sin(k * mu_theta) * (self.cos[:terms] @ weights))
        return float(weights @ self.measure + decay @ series)


def heading_moments(sets, order=FOURIER_ORDER):
    valid = (np.arange(sets.lower.shape[1])[None, :] < sets.counts[:, None]) & ~sets.full[:, None]
    lower = np.where(valid, sets.lower, 0.0)
    upper = np.where(valid, sets.upper, 0.0)
    measure = np.where(sets.full, 1.0, (upper - lower).sum(axis=1) / TWO_PI)
    sin = np.empty((order, sets.n_points))
    cos = np.empty((order, sets.n_points))
    for k in range(1, order + 1):
        sin[k - 1] = (np.sin(k * upper) - np.sin(k * lower)).sum(axis=1) / (math.pi * k)
        cos[k - 1] = (np.cos(k * upper) - np.cos(k * lower)).sum(axis=1) / (math.pi * k)
    return HeadingMoments(measure=measure, sin=sin, cos=cos)
