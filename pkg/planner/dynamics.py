"""Forward-Euler unicycle: state (x, y, theta), inputs (v, omega)."""
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from geometry.polar import Configuration


@dataclass(frozen=True)
class EgoState:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise ValidationError('ego state must be finite', code='invalid_state')

    @classmethod
    def from_configuration(cls, cfg):
        return cls(cfg.x, cfg.y, cfg.theta)

    def configuration(self):
        return Configuration(self.x, self.y, self.theta)

    def as_array(self):
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True)
class ControlInput:
    v: float
    omega: float

    def within(self, v_bounds, omega_bounds, tol=0.0):
        return (v_bounds[0] - tol <= self.v <= v_bounds[1] + tol
                and omega_bounds[0] - tol <= self.omega <= omega_bounds[1] + tol)


def unicycle_step(z, u, sample_time):
    return EgoState(
        x=z.x + sample_time * u.v * math.cos(z.theta),
        y=z.y + sample_time * u.v * math.sin(z.theta),
        theta=z.theta + sample_time * u.omega,
    )


def rollout(z, inputs, sample_time):
    """States z_0..z_N (N+1 × 3) under an (N × 2) input sequence."""
    inputs = np.asarray(inputs, dtype=float).reshape(-1, 2)
    states = np.empty((len(inputs) + 1, 3))
    states[0] = (z.x, z.y, z.theta)
    for n, (v, omega) in enumerate(inputs):
        x, y, theta = states[n]
        states[n + 1] = (
            x + sample_time * v * math.cos(theta),
            y + sample_time * v * math.sin(theta),
            theta + sample_time * omega,
        )
    return states


def output(z, u):
    """Configuration and commanded speed of the ego."""
    return z.configuration(), u.v
