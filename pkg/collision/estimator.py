"""
Two-phase POC estimator.

``init_estimator`` does all belief-independent work (covers, ρ̄, grid,
disjoint heading intervals and their Fourier moments) once. ``estimate_poc``
then turns a belief into a position weight per grid point, with a trapezoid
rule when the grid resolves the density and a panel quadrature otherwise, and
sums those weights against the heading probability of every point.
"""
import functools
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from scipy import sparse

from core.conf import engine_settings
from geometry.shapes import cover_rectangle, max_collision_distance

from .gaussian import (
    HeadingTruncation, cartesian_position_density, heading_moments, interval_probabilities,
)
from .intervals import DisjointIntervalSet, build_grid, intersection_intervals, sort_disjoint

logger = logging.getLogger(__name__)

# grid points whose weight is this far below the peak are skipped
DENSITY_FLOOR = 1e-15

# grid steps the trapezoid rule needs, in units of the smallest positional sigma
RADIAL_RESOLUTION = 0.35
ANGULAR_RESOLUTION = 1.5

# panel quadrature: node spacing in sigmas, order cap and support half-width
PANEL_RESOLUTION = 0.5
MAX_PANEL_ORDER = 48
SUPPORT_SIGMAS = 8.5
# larger panel quadratures are evaluated on the panels near the belief only
PANEL_OPERATOR_POINTS = 20_000


@dataclass(frozen=True, eq=False)
class PocEstimator:
    """Frozen precomputation for one pair of footprints, circle counts and grid."""
    ego_footprint: object
    obj_footprint: object
    ego_cover: object
    obj_cover: object
    rho_bar: float
    grid: object
    intervals: DisjointIntervalSet
    moments: object

    @property
    def n_samples(self):
        return self.grid.n_samples

    @property
    def circles(self):
        return (self.ego_cover.n_circles, self.obj_cover.n_circles)

    def estimate(self, belief, trunc=None):
        return estimate_poc(self, belief, trunc)

    def describe(self):
        return {
            'ego': str(self.ego_footprint),
            'obj': str(self.obj_footprint),
            'circles': list(self.circles),
            'grid': self.n_samples,
            'rho_bar': self.rho_bar,
        }


def _build_covers(ego_fp, obj_fp, n_ego, n_obj):
    ego_cover = cover_rectangle(ego_fp, n_ego)
    obj_cover = cover_rectangle(obj_fp, n_obj)
    return ego_cover, obj_cover, max_collision_distance(ego_cover, obj_cover)


def init_estimator(ego_fp, obj_fp, n_ego, n_obj, n_samples):
    started = time.perf_counter()
    ego_cover, obj_cover, rho_bar = _build_covers(ego_fp, obj_fp, n_ego, n_obj)
    grid = build_grid(rho_bar, n_samples)
    intervals = sort_disjoint(intersection_intervals(ego_cover, obj_cover, grid))
    est = PocEstimator(
        ego_fp, obj_fp, ego_cover, obj_cover, rho_bar, grid, intervals, heading_moments(intervals),
    )
    logger.info(
        'Initialised estimator %s/%s circles=%s,%s grid=%s rho_bar=%.4f in %.1f ms',
        ego_fp, obj_fp, n_ego, n_obj, n_samples, rho_bar,
        1e3 * (time.perf_counter() - started),
    )
    return est


def estimator_from_intervals(ego_fp, obj_fp, n_ego, n_obj, n_samples, intervals):
    """Rebuild an estimator around previously computed disjoint intervals."""
    ego_cover, obj_cover, rho_bar = _build_covers(ego_fp, obj_fp, n_ego, n_obj)
    grid = build_grid(rho_bar, n_samples)
    if intervals.n_points != grid.n_points:
        raise ValidationError(
            'cached intervals cover %(got)s points, grid has %(want)s',
            code='stale_cache',
            params={'got': intervals.n_points, 'want': grid.n_points},
        )
    return PocEstimator(
        ego_fp, obj_fp, ego_cover, obj_cover, rho_bar, grid, intervals, heading_moments(intervals),
    )


def _reach(grid, belief):
    return min(grid.rho_bar, math.hypot(belief.mu[0], belief.mu[1]) + 3 * belief.sigma_max)


def resolves(grid, belief):
    """Whether the grid steps are fine enough for the trapezoid rule on this belief."""
    sigma_min = belief.sigma_min
    return (grid.delta_rho <= RADIAL_RESOLUTION * sigma_min
            and _reach(grid, belief) * grid.delta_phi <= ANGULAR_RESOLUTION * sigma_min)


def trapezoid_weights(grid, belief):
    density = cartesian_position_density(grid.x, grid.y, grid.rho, belief)
    return grid.delta_phi * grid.delta_rho * grid.weights * density


@functools.lru_cache(maxsize=8)
def _gauss_legendre(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1) / 2, weights / 2


def _panel_order(step, sigma):
    return int(np.clip(math.ceil(step / (PANEL_RESOLUTION * sigma)), 1, MAX_PANEL_ORDER))


def _panel_points(grid, j, i, phi_order, rho_order):
    """
    Gauss-Legendre points of the panels with lower corners (φ_j, ρ_i).

    Returns the points (x, y, ρ), their quadrature weights, and the index and
    bilinear share of the four corners every point is split onto.
    """
    n = grid.n_samples
    t_phi, w_phi = _gauss_legendre(phi_order)
    t_rho, w_rho = _gauss_legendre(rho_order)
    s = t_phi[None, :, None]
    r = t_rho[None, None, :]
    phi = grid.phi[::n][j][:, None, None] + grid.delta_phi * s
    rho = grid.rho[:n][i][:, None, None] + grid.delta_rho * r
    phi, rho = np.broadcast_arrays(phi, rho)
    scale = np.broadcast_to(
        np.outer(w_phi, w_rho)[None] * (grid.delta_phi * grid.delta_rho), phi.shape
    )
    corner = np.broadcast_to((j * n + i)[:, None, None], phi.shape)
    index = np.stack((corner, corner + 1, corner + n, corner + n + 1)).reshape(4, -1)
    shares = np.stack((
        np.broadcast_to((1 - s) * (1 - r), phi.shape),
        np.broadcast_to((1 - s) * r, phi.shape),
        np.broadcast_to(s * (1 - r), phi.shape),
        np.broadcast_to(s * r, phi.shape),
    )).reshape(4, -1)
    rho = rho.ravel()
    phi = phi.ravel()
    return rho * np.cos(phi), rho * np.sin(phi), rho, scale.ravel(), index, shares


@dataclass(frozen=True, eq=False)
class PanelOperator:
    """Panel quadrature over the whole grid, as a sparse map from points to grid weights."""
    x: np.ndarray
    y: np.ndarray
    rho: np.ndarray
    matrix: object

    def weights(self, belief):
        return self.matrix @ cartesian_position_density(self.x, self.y, self.rho, belief)


@functools.lru_cache(maxsize=32)
def panel_operator(grid, phi_order, rho_order):
    n = grid.n_samples
    j, i = (a.ravel() for a in np.meshgrid(np.arange(n - 1), np.arange(n - 1), indexing='ij'))
    x, y, rho, scale, index, shares = _panel_points(grid, j, i, phi_order, rho_order)
    columns = np.broadcast_to(np.arange(len(rho)), index.shape)
    matrix = sparse.csr_matrix(
        ((shares * scale).ravel(), (index.ravel(), columns.ravel())),
        shape=(grid.n_points, len(rho)),
    )
    return PanelOperator(x=x, y=y, rho=rho, matrix=matrix)


def _near_panels(grid, belief):
    """Lower corners of the panels whose bounding disc meets the belief's support box."""
    n = grid.n_samples
    j, i = (a.ravel() for a in np.meshgrid(np.arange(n - 1), np.arange(n - 1), indexing='ij'))
    rhos = grid.rho[:n]
    rho_mid = rhos[i] + grid.delta_rho / 2
    phi_mid = grid.phi[::n][j] + grid.delta_phi / 2
    radius = 2 * (rhos[i] + grid.delta_rho) * math.sin(grid.delta_phi / 4) + grid.delta_rho / 2
    half = SUPPORT_SIGMAS * np.asarray(belief.sigma[:2])
    gap_x = np.maximum(np.abs(rho_mid * np.cos(phi_mid) - belief.mu[0]) - half[0], 0.0)
    gap_y = np.maximum(np.abs(rho_mid * np.sin(phi_mid) - belief.mu[1]) - half[1], 0.0)
    near = np.hypot(gap_x, gap_y) <= radius
    return j[near], i[near]


def panel_weights(grid, belief):
    """
    Position mass carried by every grid point for a density narrower than the
    grid steps.

    Each panel between four neighbouring points is integrated with a
    Gauss-Legendre rule fine enough for the belief, and its mass is shared
    among the corners with bilinear weights.
    """
    sigma_min = belief.sigma_min
    phi_order = _panel_order(_reach(grid, belief) * grid.delta_phi, sigma_min)
    rho_order = _panel_order(grid.delta_rho, sigma_min)
    if (grid.n_samples - 1) ** 2 * phi_order * rho_order <= PANEL_OPERATOR_POINTS:
        return panel_operator(grid, phi_order, rho_order).weights(belief)

    j, i = _near_panels(grid, belief)
    if not j.size:
        return np.zeros(grid.n_points)
    x, y, rho, scale, index, shares = _panel_points(grid, j, i, phi_order, rho_order)
    mass = scale * cartesian_position_density(x, y, rho, belief)
    return np.bincount(index.ravel(), weights=(shares * mass).ravel(), minlength=grid.n_points)


def estimate_poc(est, belief, trunc=None):
    trunc = trunc or HeadingTruncation()
    grid = est.grid
    if resolves(grid, belief):
        weights = trapezoid_weights(grid, belief)
    else:
        weights = panel_weights(grid, belief)

    terms = trunc.series_terms(belief.sigma[2], est.moments.order)
    if terms is not None:
        poc = est.moments.weighted_probability(weights, belief.mu[2], belief.sigma[2], terms)
    else:
        peak = weights.max()
        if not peak > 0:
            return 0.0
        support = np.flatnonzero(weights > DENSITY_FLOOR * peak)
        sets = est.intervals
        heading = interval_probabilities(
            sets.lower[support], sets.upper[support], sets.counts[support], sets.full[support],
            belief.mu[2], belief.sigma[2], trunc,
        )
        poc = np.sum(weights[support] * heading)
    return float(min(max(poc, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class PocEstimatorBank:
    """
    Estimators for the same covers on several uniform grids, coarsest first.
    """
    estimators: tuple

    @property
    def rho_bar(self):
        return self.estimators[0].rho_bar

    @property
    def levels(self):
        return tuple(est.n_samples for est in self.estimators)

    @property
    def ego_footprint(self):
        return self.estimators[0].ego_footprint

    @property
    def obj_footprint(self):
        return self.estimators[0].obj_footprint

    @property
    def circles(self):
        return self.estimators[0].circles

    def select(self, belief):
        """Coarsest estimator whose grid resolves the belief's position density."""
        for est in self.estimators:
            if resolves(est.grid, belief):
                return est
        return self.estimators[-1]

    def estimate(self, belief, trunc=None):
        return estimate_poc(self.select(belief), belief, trunc)

    def describe(self):
        described = self.estimators[0].describe()
        described['grid'] = list(self.levels)
        return described


def init_estimator_bank(ego_fp, obj_fp, n_ego, n_obj, levels=None):
    levels = tuple(sorted(set(levels or engine_settings()['GRID_LEVELS'])))
    if not levels:
        raise ValidationError('at least one grid level is required', code='invalid_grid')
    return PocEstimatorBank(tuple(
        cached_estimator(ego_fp, obj_fp, n_ego, n_obj, n) for n in levels
    ))


def _load_or_store(ego_fp, obj_fp, n_ego, n_obj, n_samples):
    from .models import IntervalCache

    key = IntervalCache.key_for(ego_fp, obj_fp, n_ego, n_obj, n_samples)
    entry = IntervalCache.objects.filter(**key).first()
    if entry is not None:
        try:
            return estimator_from_intervals(
                ego_fp, obj_fp, n_ego, n_obj, n_samples,
                DisjointIntervalSet.from_payload(entry.payload),
            )
        except (KeyError, ValueError, ValidationError):
            logger.warning('Discarding unreadable interval cache entry %s', entry.pk)
            entry.delete()
    est = init_estimator(ego_fp, obj_fp, n_ego, n_obj, n_samples)
    IntervalCache.objects.update_or_create(**key, defaults={'payload': est.intervals.to_payload()})
    return est


@functools.lru_cache(maxsize=64)
def _memoised(ego_fp, obj_fp, n_ego, n_obj, n_samples, persistent):
    if persistent:
        return _load_or_store(ego_fp, obj_fp, n_ego, n_obj, n_samples)
    return init_estimator(ego_fp, obj_fp, n_ego, n_obj, n_samples)


def cached_estimator(ego_fp, obj_fp, n_ego, n_obj, n_samples):
    """Process-wide memo of ``init_estimator``, persisted when interval caching is on."""
    persistent = bool(engine_settings()['CACHE_INTERVALS'])
    return _memoised(ego_fp, obj_fp, int(n_ego), int(n_obj), int(n_samples), persistent)
