"""
Heading intervals for which an offset object circle meets an ego circle.

For an object whose center sits at (phi', rho') relative to an ego circle and
whose own circle is displaced L_o along its heading, the object circle meets
the ego circle (joint radius R) exactly for headings in a closed interval
centered on phi' + π. ``heading_bounds_array`` evaluates that case table for
whole grids at once; ``heading_bounds`` is its scalar form.
"""
import math
from dataclasses import dataclass

import numpy as np

from .polar import TWO_PI, normalize_angle

EMPTY = 0
PARTIAL = 1
FULL = 2


@dataclass(frozen=True)
class AngleInterval:
    """
    Closed heading interval [lower, upper] interpreted mod 2π.

    ``lower`` lies in [0, 2π) and ``upper`` = lower + width, so an interval
    with upper > 2π wraps through zero.
    """
    lower: float = 0.0
    upper: float = 0.0
    is_empty: bool = False
    is_full: bool = False

    @classmethod
    def empty(cls):
        return cls(0.0, 0.0, is_empty=True)

    @classmethod
    def full(cls):
        return cls(0.0, TWO_PI, is_full=True)

    @classmethod
    def span(cls, lower, upper):
        """Interval from ``lower`` to ``upper`` going counter-clockwise."""
        width = upper - lower
        if width < 0:
            return cls.empty()
        if width >= TWO_PI:
            return cls.full()
        start = normalize_angle(lower)
        return cls(start, start + width)

    @property
    def width(self):
        if self.is_empty:
            return 0.0
        return self.upper - self.lower

    def measure(self):
        return self.width

    @property
    def wraps(self):
        return not (self.is_empty or self.is_full) and self.upper > TWO_PI

    def contains(self, theta, tol=0.0):
        """Whether the heading ``theta`` (any real) lies in the interval."""
        if self.is_empty:
            return False
        if self.is_full:
            return True
        rel = normalize_angle(theta - self.lower)
        return rel <= self.width + tol or rel >= TWO_PI - tol

    def shifted(self, delta):
        """The interval rotated by ``delta``."""
        if self.is_empty or self.is_full:
            return self
        return AngleInterval.span(self.lower + delta, self.upper + delta)

    def plain_segments(self):
        """Non-wrapping pieces of the interval within [0, 2π]."""
        if self.is_empty:
            return []
        if self.is_full:
            return [(0.0, TWO_PI)]
        if self.wraps:
            return [(self.lower, TWO_PI), (0.0, self.upper - TWO_PI)]
        return [(self.lower, self.upper)]

    def to_json(self):
        if self.is_empty:
            return {'empty': True}
        if self.is_full:
            return {'full': True}
        return {'lower': self.lower, 'upper': self.upper}


def heading_bounds_array(phi_prime, rho_prime, offset_o, joint_radius):
    """
    Case table for arrays of (phi', rho') and a fixed object offset.

    Returns ``(lower, upper, state)`` arrays where ``state`` is one of
    EMPTY, PARTIAL or FULL; lower/upper are only meaningful where PARTIAL.
    ``lower`` is in [0, 2π) and ``upper - lower`` is the interval width.
    """
    phi = np.asarray(phi_prime, dtype=float)
    rho = np.asarray(rho_prime, dtype=float)
    phi, rho = np.broadcast_arrays(phi, rho)
    L, R = float(offset_o), float(joint_radius)

    state = np.full(rho.shape, PARTIAL, dtype=np.int8)
    lower = np.zeros(rho.shape)
    upper = np.zeros(rho.shape)

    if L == 0.0:
        # heading does not move the circle
        state[:] = np.where(rho <= R, FULL, EMPTY)
        upper[state == FULL] = TWO_PI
        return lower, upper, state

    state[rho > R + L] = EMPTY
    if L > R:
        state[rho < L - R] = EMPTY
    else:
        state[rho <= R - L] = FULL

    partial = state == PARTIAL
    if partial.any():
        r = rho[partial]
        with np.errstate(divide='ignore', invalid='ignore'):
            cos_half = (L * L + r * r - R * R) / (2.0 * L * r)
        # drift near tangency pushes the argument just outside [-1, 1]
        half = np.arccos(np.clip(cos_half, -1.0, 1.0))
        start = normalize_angle(phi[partial] + math.pi - half)
        lower[partial] = np.atleast_1d(start)
        upper[partial] = lower[partial] + 2.0 * half
    upper[state == FULL] = TWO_PI
    return lower, upper, state


def heading_bounds(phi_prime, rho_prime, offset_o, joint_radius):
    """Heading interval of one (phi', rho') point as an ``AngleInterval``."""
    lower, upper, state = heading_bounds_array(
        [phi_prime], [rho_prime], offset_o, joint_radius
    )
    if state[0] == EMPTY:
        return AngleInterval.empty()
    if state[0] == FULL:
        return AngleInterval.full()
    return AngleInterval(float(lower[0]), float(upper[0]))
