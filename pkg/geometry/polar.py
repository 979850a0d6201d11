"""
Polar transforms of object configurations relative to the ego's geometric
center, and the angle normalisations shared by the whole engine.
"""
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

TWO_PI = 2.0 * math.pi


def normalize_angle(angle):
    """Map an angle (scalar or array) into [0, 2π)."""
    wrapped = np.mod(angle, TWO_PI)
    # mod of a tiny negative number rounds up to exactly 2π
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def wrap_to_pi(angle):
    """Map an angle (scalar or array) into (-π, π]."""
    wrapped = angle - TWO_PI * np.ceil((np.asarray(angle) - math.pi) / TWO_PI)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def _require_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValidationError(
                '%(field)s must be finite, got %(value)s',
                code='not_finite',
                params={'field': name, 'value': value},
            )


@dataclass(frozen=True)
class Configuration:
    """
    Planar pose (x, y, theta). Theta is stored as given and interpreted
    modulo 2π.
    """
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        _require_finite(x=self.x, y=self.y, theta=self.theta)

    def as_tuple(self):
        return (self.x, self.y, self.theta)


@dataclass(frozen=True)
class PolarConfiguration:
    """Configuration with its position expressed as (phi, rho)."""
    phi: float
    rho: float
    theta: float = 0.0

    def __post_init__(self):
        _require_finite(phi=self.phi, rho=self.rho, theta=self.theta)
        if self.rho < 0:
            raise ValidationError('rho must be non-negative', code='negative_rho')
        if not 0.0 <= self.phi < TWO_PI:
            raise ValidationError('phi must lie in [0, 2π)', code='phi_out_of_range')


def polar_angle(y, x):
    """atan2 in [0, 2π), with the angle of the origin fixed to 0."""
    phi = normalize_angle(np.arctan2(y, x))
    at_origin = (np.asarray(x) == 0) & (np.asarray(y) == 0)
    phi = np.where(at_origin, 0.0, phi)
    if np.ndim(phi) == 0:
        return float(phi)
    return phi


def to_polar(config):
    """Express a configuration's position in polar coordinates."""
    rho = math.hypot(config.x, config.y)
    phi = polar_angle(config.y, config.x)
    return PolarConfiguration(phi=phi, rho=rho, theta=config.theta)


def from_polar(polar):
    return Configuration(
        x=polar.rho * math.cos(polar.phi),
        y=polar.rho * math.sin(polar.phi),
        theta=polar.theta,
    )


def shift_polar(x_o, y_o, offset_e):
    """
    Polar coordinates of the object center seen from an ego circle offset by
    ``offset_e`` along the ego's longitudinal axis. Works on scalars and on
    numpy arrays alike.
    """
    dx = np.asarray(x_o, dtype=float) - offset_e
    dy = np.asarray(y_o, dtype=float)
    rho = np.hypot(dx, dy)
    phi = polar_angle(dy, dx)
    if np.ndim(rho) == 0:
        return float(phi), float(rho)
    return phi, rho
