"""
Heading-interval engine: the polar integration grid, the per-point matrix of
circle-pair intervals and its reduction to disjoint interval sets.

Everything here depends only on the two covers and the grid, never on the
object belief, so the results are computed once per estimator and reused.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from geometry.bounds import EMPTY, FULL, PARTIAL, AngleInterval, heading_bounds_array
from geometry.polar import TWO_PI, normalize_angle, shift_polar

logger = logging.getLogger(__name__)


def _frozen(array):
    array = np.ascontiguousarray(array)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class IntegrationGrid:
    """
    Uniform N_s × N_s grid over [0, 2π] × [0, ρ̄], both endpoints included.

    Pairs are flattened row-major with φ as the outer axis. ``weights`` holds
    the trapezoid factor of every pair (1/2 per boundary axis).
    """
    n_samples: int
    rho_bar: float
    delta_phi: float
    delta_rho: float
    phi: np.ndarray
    rho: np.ndarray
    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self):
        return self.n_samples * self.n_samples

    def pairs(self):
        return np.column_stack((self.phi, self.rho))


def build_grid(rho_bar, n_samples):
    if isinstance(n_samples, bool) or int(n_samples) != n_samples or n_samples < 2:
        raise ValidationError(
            'n_samples must be an integer >= 2, got %(value)s',
            code='invalid_grid',
            params={'value': n_samples},
        )
    if not math.isfinite(rho_bar) or rho_bar < 0:
        raise ValidationError(
            'rho_bar must be finite and non-negative, got %(value)s',
            code='invalid_grid',
            params={'value': rho_bar},
        )
    n = int(n_samples)
    phis = np.linspace(0.0, TWO_PI, n)
    rhos = np.linspace(0.0, rho_bar, n)
    edge = np.ones(n)
    edge[[0, -1]] = 0.5
    phi = np.repeat(phis, n)
    rho = np.tile(rhos, n)
    weights = np.outer(edge, edge).ravel()
    return IntegrationGrid(
        n_samples=n,
        rho_bar=float(rho_bar),
        delta_phi=TWO_PI / (n - 1),
        delta_rho=rho_bar / (n - 1),
        phi=_frozen(phi),
        rho=_frozen(rho),
        x=_frozen(rho * np.cos(phi)),
        y=_frozen(rho * np.sin(phi)),
        weights=_frozen(weights),
    )


@dataclass(frozen=True, eq=False)
class IntervalGridMatrix:
    """
    One heading interval per grid point and (ego circle, object circle) pair.

    Arrays are P × K with K = N_c,e · N_c,o. ``state`` holds EMPTY, PARTIAL or
    FULL; ``lower`` is in [0, 2π) and ``upper - lower`` is the width.
    ``column_offsets`` lists the (L_e, L_o) pair of every column.
    """
    lower: np.ndarray
    upper: np.ndarray
    state: np.ndarray
    column_offsets: tuple

    @property
    def shape(self):
        return self.state.shape

    def intervals_at(self, index):
        row = []
        for lo, up, st in zip(self.lower[index], self.upper[index], self.state[index]):
            if st == FULL:
                row.append(AngleInterval.full())
            elif st == EMPTY:
                row.append(AngleInterval.empty())
            else:
                row.append(AngleInterval(float(lo), float(up)))
        return row


def _mirror(lower, upper, state):
    """Interval of the circle at -L_o: the +L_o interval turned by π."""
    width = upper - lower
    m_lower = np.where(state == PARTIAL, normalize_angle(lower + math.pi), lower)
    return m_lower, np.where(state == PARTIAL, m_lower + width, upper), state.copy()


def intersection_intervals(ego, obj, grid):
    """Heading intervals of every circle pair at every grid point."""
    joint_radius = ego.radius + obj.radius
    lowers, uppers, states, columns = [], [], [], []
    for offset_e in ego.offsets:
        phi_s, rho_s = shift_polar(grid.x, grid.y, offset_e)
        for offset_o in obj.non_negative_offsets:
            lower, upper, state = heading_bounds_array(phi_s, rho_s, offset_o, joint_radius)
            lowers.append(lower)
            uppers.append(upper)
            states.append(state)
            columns.append((offset_e, offset_o))
            if offset_o > 0:
                m_lower, m_upper, m_state = _mirror(lower, upper, state)
                lowers.append(m_lower)
                uppers.append(m_upper)
                states.append(m_state)
                columns.append((offset_e, -offset_o))
    return IntervalGridMatrix(
        lower=_frozen(np.column_stack(lowers)),
        upper=_frozen(np.column_stack(uppers)),
        state=_frozen(np.column_stack(states)),
        column_offsets=tuple(columns),
    )


@dataclass(frozen=True, eq=False)
class DisjointIntervalSet:
    """
    Pairwise-disjoint heading intervals per grid point.

    Stored as padded P × M arrays sorted by lower endpoint; only the first
    ``counts[i]`` entries of row i are meaningful. Rows flagged ``full`` hold
    the single interval [0, 2π].
    """
    lower: np.ndarray
    upper: np.ndarray
    counts: np.ndarray
    full: np.ndarray

    @property
    def n_points(self):
        return len(self.counts)

    def intervals_at(self, index):
        if self.full[index]:
            return [AngleInterval.full()]
        return [
            AngleInterval(float(self.lower[index, j]), float(self.upper[index, j]))
            for j in range(int(self.counts[index]))
        ]

    def measure(self):
        """Total measure of every row."""
        valid = np.arange(self.lower.shape[1])[None, :] < self.counts[:, None]
        widths = np.where(valid, self.upper - self.lower, 0.0).sum(axis=1)
        return np.where(self.full, TWO_PI, widths)

    def equals(self, other):
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ('lower', 'upper', 'counts', 'full')
        )

    def to_payload(self):
        return {
            'width': int(self.lower.shape[1]),
            'lower': self.lower.tolist(),
            'upper': self.upper.tolist(),
            'counts': self.counts.tolist(),
            'full': self.full.tolist(),
        }

    @classmethod
    def from_payload(cls, payload):
        width = payload['width']
        n = len(payload['counts'])
        return cls(
            lower=_frozen(np.asarray(payload['lower'], dtype=float).reshape(n, width)),
            upper=_frozen(np.asarray(payload['upper'], dtype=float).reshape(n, width)),
            counts=_frozen(np.asarray(payload['counts'], dtype=np.int64)),
            full=_frozen(np.asarray(payload['full'], dtype=bool)),
        )


def _merge_rows(lower, upper, state):
    """
    Union of the intervals of every row.

    Wrapped intervals are split at 2π, the plain segments are merged by one
    sorted sweep and a segment touching 0 is re-joined to one touching 2π.
    """
    n_rows, n_cols = state.shape
    full = (state == FULL).any(axis=1)
    partial = (state == PARTIAL) & ~full[:, None]

    inf = np.inf
    seg_a = np.concatenate([np.where(partial, lower, inf),
                            np.where(partial & (upper > TWO_PI), 0.0, inf)], axis=1)
    seg_b = np.concatenate([np.where(partial, np.minimum(upper, TWO_PI), -inf),
                            np.where(partial & (upper > TWO_PI), upper - TWO_PI, -inf)], axis=1)
    order = np.argsort(seg_a, axis=1, kind='stable')
    seg_a = np.take_along_axis(seg_a, order, axis=1)
    seg_b = np.take_along_axis(seg_b, order, axis=1)

    width = max(seg_a.shape[1], 1)
    out_a = np.zeros((n_rows, width))
    out_b = np.zeros((n_rows, width))
    counts = np.zeros(n_rows, dtype=np.int64)
    rows = np.arange(n_rows)
    cur_a = np.full(n_rows, inf)
    cur_b = np.full(n_rows, -inf)
    active = np.zeros(n_rows, dtype=bool)

    for j in range(seg_a.shape[1]):
        a, b = seg_a[:, j], seg_b[:, j]
        valid = np.isfinite(a)
        extend = valid & active & (a <= cur_b)
        cur_b = np.where(extend, np.maximum(cur_b, b), cur_b)
        start = valid & ~extend
        emit = start & active
        out_a[rows[emit], counts[emit]] = cur_a[emit]
        out_b[rows[emit], counts[emit]] = cur_b[emit]
        counts[emit] += 1
        cur_a = np.where(start, a, cur_a)
        cur_b = np.where(start, b, cur_b)
        active |= start
    out_a[rows[active], counts[active]] = cur_a[active]
    out_b[rows[active], counts[active]] = cur_b[active]
    counts[active] += 1

    last = np.maximum(counts - 1, 0)
    first_at_zero = (counts > 0) & (out_a[:, 0] <= 0.0)
    last_at_two_pi = (counts > 0) & (out_b[rows, last] >= TWO_PI)
    covers_all = (counts == 1) & first_at_zero & last_at_two_pi
    full |= covers_all

    rejoin = (counts >= 2) & first_at_zero & last_at_two_pi & ~full
    if rejoin.any():
        idx = rows[rejoin]
        out_b[idx, last[idx]] = out_b[idx, 0] + TWO_PI
        out_a[idx, :-1] = out_a[idx, 1:]
        out_b[idx, :-1] = out_b[idx, 1:]
        counts[idx] -= 1

    out_a[full] = 0.0
    out_b[full] = 0.0
    out_a[full, 0] = 0.0
    out_b[full, 0] = TWO_PI
    counts[full] = 1

    keep = max(int(counts.max()) if n_rows else 1, 1)
    return DisjointIntervalSet(
        lower=_frozen(out_a[:, :keep]),
        upper=_frozen(out_b[:, :keep]),
        counts=_frozen(counts),
        full=_frozen(full),
    )


def sort_disjoint(matrix):
    """Merge the intervals of every grid point into disjoint sets."""
    return _merge_rows(matrix.lower, matrix.upper, matrix.state)


def merge_angle_intervals(intervals):
    """Disjoint union of a list of ``AngleInterval``."""
    intervals = list(intervals)
    if not intervals:
        return []
    lower = np.array([[iv.lower for iv in intervals]])
    upper = np.array([[iv.upper for iv in intervals]])
    state = np.array([[
        EMPTY if iv.is_empty else FULL if iv.is_full else PARTIAL for iv in intervals
    ]], dtype=np.int8)
    merged = _merge_rows(lower, upper, state)
    if not merged.full[0] and merged.counts[0] == 0:
        return []
    return merged.intervals_at(0)
