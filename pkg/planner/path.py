"""
Reference path and the path-following error.

The path is sampled at uniform steps of its parameter λ. One unit of λ covers
``arc_per_lambda`` metres of arc, so with ``arc_per_lambda`` equal to the
sample time a vehicle at speed v advances λ by v per step.
"""
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from geometry.polar import wrap_to_pi

DEFAULT_RESOLUTION = 0.01


@dataclass(frozen=True, eq=False)
class ReferencePath:
    lambdas: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    v_ref: float
    arc_per_lambda: float

    @property
    def domain(self):
        return float(self.lambdas[0]), float(self.lambdas[-1])

    @property
    def length(self):
        return (self.lambdas[-1] - self.lambdas[0]) * self.arc_per_lambda

    def point(self, lam):
        """(x_P, y_P, theta_P) at parameter ``lam`` (clipped to the domain)."""
        lam = min(max(lam, self.lambdas[0]), self.lambdas[-1])
        return (
            float(np.interp(lam, self.lambdas, self.x)),
            float(np.interp(lam, self.lambdas, self.y)),
            float(np.interp(lam, self.lambdas, self.theta)),
        )

    @classmethod
    def from_waypoints(cls, waypoints, v_ref, arc_per_lambda=0.2, resolution=DEFAULT_RESOLUTION):
        """Polyline through ``waypoints`` re-sampled every ``resolution`` metres."""
        points = np.asarray(waypoints, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) < 2:
            raise ValidationError('a path needs at least two (x, y) waypoints', code='invalid_path')
        if arc_per_lambda <= 0 or resolution <= 0:
            raise ValidationError('path scaling must be positive', code='invalid_path')
        steps = np.diff(points, axis=0)
        seg_len = np.hypot(steps[:, 0], steps[:, 1])
        if (seg_len == 0).any():
            raise ValidationError('consecutive waypoints must differ', code='irregular_path')
        knots = np.concatenate(([0.0], np.cumsum(seg_len)))
        total = knots[-1]
        s = np.linspace(0.0, total, int(math.ceil(total / resolution)) + 1)
        headings = np.unwrap(np.arctan2(steps[:, 1], steps[:, 0]))
        segment = np.clip(np.searchsorted(knots, s, side='right') - 1, 0, len(steps) - 1)
        return cls(
            lambdas=s / arc_per_lambda,
            x=np.interp(s, knots, points[:, 0]),
            y=np.interp(s, knots, points[:, 1]),
            theta=headings[segment],
            v_ref=float(v_ref),
            arc_per_lambda=float(arc_per_lambda),
        )

    @classmethod
    def straight(cls, start, heading, length, v_ref, arc_per_lambda=0.2, resolution=DEFAULT_RESOLUTION):
        end = (start[0] + length * math.cos(heading), start[1] + length * math.sin(heading))
        return cls.from_waypoints([start, end], v_ref, arc_per_lambda, resolution)


def localize_on_path(path, cfg):
    """Parameter of the sample closest to the ego position; ties go to the smaller λ."""
    dist = (path.x - cfg.x) ** 2 + (path.y - cfg.y) ** 2
    return float(path.lambdas[int(np.argmin(dist))])


def advance_progress(lam, v_e, theta_e, theta_p, domain=None):
    lam_next = lam + v_e * math.cos(theta_e - theta_p)
    if domain is not None:
        lam_next = min(max(lam_next, domain[0]), domain[1])
    return lam_next


def path_error(cfg, v_e, path, lam):
    x_p, y_p, theta_p = path.point(lam)
    return np.array([
        cfg.x - x_p,
        cfg.y - y_p,
        wrap_to_pi(cfg.theta - theta_p),
        v_e - path.v_ref,
    ])


def stage_cost(e, weights):
    """Quadratic cost eᵀWe; ``weights`` is the diagonal or the full matrix."""
    e = np.asarray(e, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 1:
        return float(np.dot(weights * e, e))
    return float(e @ weights @ e)
