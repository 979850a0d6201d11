"""
Rectangular footprints and their multi-circle covers.

A footprint of length l and width w is covered by N_c equal circles placed
equidistantly along its longitudinal axis. The radius is the smallest one for
which the union of circles still contains every corner of the rectangle.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from .polar import Configuration

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RectangleFootprint:
    """
    Vehicle footprint with length along the heading and width across it.
    """
    length: float
    width: float

    def __post_init__(self):
        for name in ('length', 'width'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(
                    '%(field)s must be a positive finite number, got %(value)s',
                    code='invalid_footprint',
                    params={'field': name, 'value': value},
                )
        if self.length < self.width:
            raise ValidationError(
                'length (%(length)s) must not be smaller than width (%(width)s)',
                code='invalid_footprint',
                params={'length': self.length, 'width': self.width},
            )

    def scaled(self, factor):
        """Footprint with both dimensions multiplied by ``factor``."""
        return RectangleFootprint(self.length * factor, self.width * factor)

    def __str__(self):
        return f'{self.length:g}x{self.width:g}'


@dataclass(frozen=True)
class CircleCover:
    """
    N_c equal circles of radius r whose centers lie on the longitudinal axis,
    ``spacing`` apart and symmetric about the geometric center.
    """
    n_circles: int
    radius: float
    spacing: float
    offsets: tuple

    @property
    def half_span(self):
        """Distance from the geometric center to the outermost circle center."""
        return 0.5 * self.spacing * (self.n_circles - 1)

    @property
    def non_negative_offsets(self):
        """Offsets L_o >= 0; their negatives are recovered by symmetry."""
        return tuple(o for o in self.offsets if o >= 0)

    def centers(self, cfg):
        """World positions of the circle centers for a vehicle posed at ``cfg``."""
        offsets = np.asarray(self.offsets, dtype=float)
        c, s = math.cos(cfg.theta), math.sin(cfg.theta)
        return np.column_stack((cfg.x + offsets * c, cfg.y + offsets * s))

    def contains(self, points, cfg=None):
        """Boolean mask of ``points`` (k×2) lying inside the circle union."""
        cfg = cfg or Configuration(0.0, 0.0, 0.0)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        centers = self.centers(cfg)
        dist = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=-1)
        return (dist <= self.radius * (1 + 1e-12)).any(axis=1)


def cover_rectangle(footprint, n):
    """Smallest-radius equidistant cover of ``footprint`` by ``n`` circles."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(
            'number of circles must be a positive integer, got %(value)s',
            code='invalid_circle_count',
            params={'value': n},
        )
    n = int(n)
    half_w = 0.5 * footprint.width
    radius = math.hypot(footprint.length / (2 * n), half_w)
    spacing = 2.0 * math.sqrt(max(radius * radius - half_w * half_w, 0.0))
    offsets = tuple((i - (n + 1) / 2.0) * spacing for i in range(1, n + 1))
    return CircleCover(n_circles=n, radius=radius, spacing=spacing, offsets=offsets)


def max_collision_distance(ego, obj):
    """
    Center distance beyond which no ego circle can touch any object circle.
    """
    return ego.radius + obj.radius + obj.half_span + ego.half_span


def rectangle_corners(footprint, cfg=None):
    """Counter-clockwise corners (4×2) of ``footprint`` posed at ``cfg``."""
    cfg = cfg or Configuration(0.0, 0.0, 0.0)
    hl, hw = 0.5 * footprint.length, 0.5 * footprint.width
    local = np.array([[hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]])
    c, s = math.cos(cfg.theta), math.sin(cfg.theta)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([cfg.x, cfg.y])
