"""
Monte-Carlo collision oracle on the exact rectangles (separating axis test)
and on the circle covers.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from geometry.polar import TWO_PI

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16


class SeededSampler:
    """
    Reproducible standard-normal stream built on ``SeedSequence``/PCG64.

    Identical seeds give identical streams; ``spawn`` derives independent
    child streams.
    """

    def __init__(self, seed=0, sequence=None):
        if sequence is None:
            if seed is None or int(seed) != seed or seed < 0:
                raise ValidationError(
                    'seed must be a non-negative integer, got %(value)s',
                    code='invalid_seed',
                    params={'value': seed},
                )
            sequence = np.random.SeedSequence(int(seed))
        self.seed = int(sequence.entropy) if seed is None else int(seed)
        self._sequence = sequence
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, count):
        return [SeededSampler(seed=self.seed, sequence=child) for child in self._sequence.spawn(count)]

    def standard_normal(self, size):
        return self._generator.standard_normal(size)

    def uniform(self, low, high, size=None):
        return self._generator.uniform(low, high, size)

    def configurations(self, belief, n):
        """Yield (x, y, theta) sample chunks of ``belief``, theta taken mod 2π."""
        mu = np.asarray(belief.mu)
        sigma = np.asarray(belief.sigma)
        remaining = n
        while remaining > 0:
            size = min(remaining, CHUNK_SIZE)
            draws = mu + sigma * self.standard_normal((size, 3))
            yield draws[:, 0], draws[:, 1], np.mod(draws[:, 2], TWO_PI)
            remaining -= size


@dataclass(frozen=True)
class McsResult:
    estimate: float
    n_samples: int
    std_error: float
    seed: int = None

    @classmethod
    def from_count(cls, hits, n, seed=None):
        p = hits / n
        return cls(estimate=p, n_samples=n, std_error=math.sqrt(p * (1.0 - p) / n), seed=seed)

    def to_json(self):
        return {
            'estimate': self.estimate,
            'n': self.n_samples,
            'std_error': self.std_error,
            'seed': self.seed,
        }


def rectangles_intersect_many(ego_fp, obj_fp, x, y, theta):
    """
    Separating-axis test of the ego rectangle at the origin (heading 0) against
    object rectangles at (x, y, theta). Touching counts as intersecting.
    """
    x, y, theta = (np.asarray(v, dtype=float) for v in (x, y, theta))
    c, s = np.abs(np.cos(theta)), np.abs(np.sin(theta))
    ct, st = np.cos(theta), np.sin(theta)
    ea, eb = 0.5 * ego_fp.length, 0.5 * ego_fp.width
    oa, ob = 0.5 * obj_fp.length, 0.5 * obj_fp.width
    return (
        (np.abs(x) <= ea + oa * c + ob * s)
        & (np.abs(y) <= eb + oa * s + ob * c)
        & (np.abs(x * ct + y * st) <= oa + ea * c + eb * s)
        & (np.abs(-x * st + y * ct) <= ob + ea * s + eb * c)
    )


def rectangles_intersect(ego_fp, obj_fp, obj_cfg):
    return bool(rectangles_intersect_many(ego_fp, obj_fp, obj_cfg.x, obj_cfg.y, obj_cfg.theta))


def circles_intersect_many(ego_cover, obj_cover, x, y, theta):
    """Whether any ego circle touches any object circle, per sample."""
    joint_sq = (ego_cover.radius + obj_cover.radius) ** 2
    ct, st = np.cos(theta), np.sin(theta)
    hit = np.zeros(np.shape(x), dtype=bool)
    for offset_o in obj_cover.offsets:
        ox, oy = x + offset_o * ct, y + offset_o * st
        for offset_e in ego_cover.offsets:
            hit |= (ox - offset_e) ** 2 + oy * oy <= joint_sq
    return hit


def _count(test, belief, n, sampler):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(
            'number of samples must be a positive integer, got %(value)s',
            code='invalid_samples',
            params={'value': n},
        )
    hits = 0
    for x, y, theta in sampler.configurations(belief, int(n)):
        hits += int(np.count_nonzero(test(x, y, theta)))
    return McsResult.from_count(hits, int(n), sampler.seed)


def mcs_poc(ego_fp, obj_fp, belief, n, sampler):
    """Fraction of sampled object configurations whose rectangle meets the ego's."""
    return _count(
        lambda x, y, theta: rectangles_intersect_many(ego_fp, obj_fp, x, y, theta),
        belief, n, sampler,
    )


def mcs_poc_circles(ego_cover, obj_cover, belief, n, sampler):
    """Like ``mcs_poc`` but against the circle covers."""
    return _count(
        lambda x, y, theta: circles_intersect_many(ego_cover, obj_cover, x, y, theta),
        belief, n, sampler,
    )
