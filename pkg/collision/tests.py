import math
from unittest import mock

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, TestCase, override_settings, tag
from rest_framework import status
from rest_framework.test import APITestCase
from scipy import integrate

from geometry.bounds import AngleInterval
from geometry.polar import TWO_PI, Configuration
from geometry.shapes import RectangleFootprint, cover_rectangle

from . import estimator
from .estimator import (
    _memoised, cached_estimator, estimate_poc, init_estimator, init_estimator_bank, panel_weights,
    resolves,
)
from .gaussian import (
    GaussianBelief, HeadingTruncation, heading_interval_probability, heading_moments,
    interval_probabilities, polar_position_density, wrapped_gaussian_pdf,
)
from .intervals import (
    DisjointIntervalSet, build_grid, intersection_intervals, merge_angle_intervals,
    sort_disjoint,
)
from .models import IntervalCache
from .oracle import (
    McsResult, SeededSampler, circles_intersect_many, mcs_poc, mcs_poc_circles,
    rectangles_intersect, rectangles_intersect_many,
)

CAR = RectangleFootprint(4.5, 2.0)


def union_contains(intervals, theta):
    return any(iv.contains(theta) for iv in intervals)


class IntegrationGridTests(SimpleTestCase):
    """Test the polar integration grid"""

    def test_corner_only_grid(self):
        grid = build_grid(5.5, 2)
        expected = [(0.0, 0.0), (0.0, 5.5), (TWO_PI, 0.0), (TWO_PI, 5.5)]
        np.testing.assert_allclose(grid.pairs(), expected)
        np.testing.assert_allclose(grid.weights, [0.25] * 4)

    def test_default_grid(self):
        grid = build_grid(5.5, 20)
        self.assertEqual(grid.n_points, 400)
        self.assertAlmostEqual(grid.delta_phi, TWO_PI / 19)
        self.assertAlmostEqual(grid.delta_rho, 5.5 / 19)
        self.assertAlmostEqual(grid.phi[-1], TWO_PI)
        self.assertAlmostEqual(grid.rho[19], 5.5)
        self.assertAlmostEqual(
            grid.delta_phi * grid.delta_rho * grid.weights.sum(), TWO_PI * 5.5
        )

    def test_zero_radius_grid(self):
        grid = build_grid(0.0, 3)
        self.assertTrue((grid.rho == 0).all())

    def test_rejects_single_sample(self):
        with self.assertRaises(ValidationError):
            build_grid(5.5, 1)

    def test_arrays_are_read_only(self):
        grid = build_grid(5.5, 4)
        with self.assertRaises(ValueError):
            grid.rho[0] = 1.0


class IntersectionIntervalsTests(SimpleTestCase):
    """Test the circle-pair interval matrix"""

    def setUp(self):
        self.cover = cover_rectangle(CAR, 3)
        self.grid = build_grid(5.5, 20)
        self.matrix = intersection_intervals(self.cover, self.cover, self.grid)

    def test_shape(self):
        self.assertEqual(self.matrix.shape, (400, 9))
        self.assertEqual(len(self.matrix.column_offsets), 9)

    def test_single_circle_covers(self):
        single = cover_rectangle(CAR, 1)
        grid = build_grid(2.6 * single.radius, 20)
        matrix = intersection_intervals(single, single, grid)
        self.assertEqual(matrix.shape, (400, 1))
        for i in range(grid.n_points):
            (interval,) = matrix.intervals_at(i)
            if grid.rho[i] <= 2 * single.radius:
                self.assertTrue(interval.is_full)
            else:
                self.assertTrue(interval.is_empty)

    def test_outer_boundary_is_contact_only(self):
        # phi = 0, rho = rho_bar
        for interval in self.matrix.intervals_at(19):
            self.assertAlmostEqual(interval.measure(), 0.0, places=6)

    def test_mirrored_columns(self):
        columns = self.matrix.column_offsets
        for j, (offset_e, offset_o) in enumerate(columns):
            if offset_o <= 0:
                continue
            k = columns.index((offset_e, -offset_o))
            for i in range(0, self.grid.n_points, 7):
                plus = self.matrix.intervals_at(i)[j]
                minus = self.matrix.intervals_at(i)[k]
                expected = plus.shifted(math.pi)
                self.assertEqual(minus.is_empty, plus.is_empty)
                self.assertEqual(minus.is_full, plus.is_full)
                if not (plus.is_empty or plus.is_full):
                    self.assertAlmostEqual(minus.lower, expected.lower, places=9)
                    self.assertAlmostEqual(minus.width, expected.width, places=9)

    def test_membership_matches_circle_geometry(self):
        rng = np.random.default_rng(5)
        joint = 2 * self.cover.radius
        offsets = np.asarray(self.cover.offsets)
        for i in range(0, self.grid.n_points, 3):
            x, y = self.grid.x[i], self.grid.y[i]
            row = self.matrix.intervals_at(i)
            for theta in rng.uniform(0, TWO_PI, 30):
                ox = x + offsets * math.cos(theta)
                oy = y + offsets * math.sin(theta)
                dist = np.hypot(ox[:, None] - offsets[None, :], oy[:, None])
                if np.abs(dist - joint).min() < 1e-9:
                    continue
                self.assertEqual(union_contains(row, theta), bool((dist <= joint).any()))


class SortDisjointTests(SimpleTestCase):
    """Test interval merging"""

    def test_overlapping_pair(self):
        merged = merge_angle_intervals([AngleInterval(1.0, 2.0), AngleInterval(1.5, 3.0)])
        self.assertEqual(len(merged), 1)
        self.assertAlmostEqual(merged[0].lower, 1.0)
        self.assertAlmostEqual(merged[0].upper, 3.0)

    def test_full_dominates(self):
        merged = merge_angle_intervals([AngleInterval.full(), AngleInterval(1.0, 2.0)])
        self.assertEqual(len(merged), 1)
        self.assertTrue(merged[0].is_full)

    def test_wrapped_merge(self):
        merged = merge_angle_intervals([
            AngleInterval.span(5.8, 0.4 + TWO_PI), AngleInterval(0.3, 1.0),
        ])
        self.assertEqual(len(merged), 1)
        self.assertAlmostEqual(merged[0].lower, 5.8)
        self.assertAlmostEqual(merged[0].upper, 1.0 + TWO_PI)
        for theta in np.linspace(0, TWO_PI, 10_000, endpoint=False):
            before = union_contains([AngleInterval.span(5.8, 0.4 + TWO_PI), AngleInterval(0.3, 1.0)], theta)
            self.assertEqual(union_contains(merged, theta), before)

    def test_transitive_chain(self):
        merged = merge_angle_intervals([
            AngleInterval(2.5, 3.5), AngleInterval(1.0, 2.0), AngleInterval(1.8, 2.6),
        ])
        self.assertEqual([(m.lower, m.upper) for m in merged], [(1.0, 3.5)])

    def test_segments_covering_circle_become_full(self):
        merged = merge_angle_intervals([
            AngleInterval(0.0, 3.5), AngleInterval.span(3.0, 6.5),
        ])
        self.assertTrue(merged[0].is_full)

    def test_empty_inputs(self):
        self.assertEqual(merge_angle_intervals([]), [])
        self.assertEqual(merge_angle_intervals([AngleInterval.empty()]), [])

    def test_grid_sets_preserve_measure_and_membership(self):
        cover = cover_rectangle(CAR, 3)
        grid = build_grid(5.5, 12)
        matrix = intersection_intervals(cover, cover, grid)
        sets = sort_disjoint(matrix)
        rng = np.random.default_rng(9)
        thetas = rng.uniform(0, TWO_PI, 1000)
        fine = np.linspace(0, TWO_PI, 200_001)
        measures = sets.measure()
        for i in range(grid.n_points):
            sources = matrix.intervals_at(i)
            merged = sets.intervals_at(i)
            self.assertLessEqual(len(merged), 9)
            for theta in thetas[::10]:
                self.assertEqual(union_contains(merged, theta), union_contains(sources, theta))
            # disjoint, sorted by lower endpoint
            plain = sorted(seg for iv in merged for seg in iv.plain_segments())
            for (a0, b0), (a1, b1) in zip(plain, plain[1:]):
                self.assertLess(b0, a1)
            lowers = [iv.lower for iv in merged]
            self.assertEqual(lowers, sorted(lowers))
            self.assertLessEqual(measures[i], TWO_PI + 1e-12)
            if i % 11 == 0:
                covered = np.zeros(fine.shape, dtype=bool)
                for iv in sources:
                    for a, b in iv.plain_segments():
                        covered |= (fine >= a) & (fine <= b)
                self.assertAlmostEqual(measures[i], covered.mean() * TWO_PI, delta=1e-3)

    def test_repeated_construction_is_identical(self):
        cover = cover_rectangle(CAR, 3)
        grid = build_grid(5.5, 20)
        first = sort_disjoint(intersection_intervals(cover, cover, grid))
        second = sort_disjoint(intersection_intervals(cover, cover, grid))
        self.assertTrue(first.equals(second))

    def test_payload_round_trip(self):
        cover = cover_rectangle(CAR, 2)
        sets = sort_disjoint(intersection_intervals(cover, cover, build_grid(5.0, 6)))
        self.assertTrue(DisjointIntervalSet.from_payload(sets.to_payload()).equals(sets))


class WrappedGaussianTests(SimpleTestCase):
    """Test the wrapped heading density and its interval probabilities"""

    def test_normalisation(self):
        value, _ = integrate.quad(
            lambda t: wrapped_gaussian_pdf(t, math.pi, 1.0), 0, TWO_PI, epsabs=1e-13
        )
        self.assertAlmostEqual(value, 1.0, delta=1e-9)

    def test_peak_at_mean(self):
        for sigma in (0.2, 0.5, 1.0):
            sweep = np.linspace(0, TWO_PI, 4001)
            density = wrapped_gaussian_pdf(sweep, 2.0, sigma)
            self.assertAlmostEqual(sweep[np.argmax(density)], 2.0, delta=TWO_PI / 4000)

    def test_truncation_matches_wide_sum(self):
        narrow = wrapped_gaussian_pdf(math.pi, 0.0, 0.5, HeadingTruncation(3))
        wide = wrapped_gaussian_pdf(math.pi, 0.0, 0.5, HeadingTruncation(50))
        self.assertAlmostEqual(narrow, wide, delta=1e-12)

    def test_truncation_requires_three_copies(self):
        with self.assertRaises(ValidationError):
            HeadingTruncation(2)

    def test_full_interval_is_one(self):
        rng = np.random.default_rng(1)
        for mu, sigma in zip(rng.uniform(-10, 10, 100), rng.uniform(0.05, math.pi, 100)):
            self.assertAlmostEqual(
                heading_interval_probability([AngleInterval.full()], mu, sigma), 1.0, delta=1e-9
            )

    def test_partition_sums_to_one(self):
        rng = np.random.default_rng(2)
        halves = [AngleInterval(0.0, math.pi), AngleInterval(math.pi, TWO_PI)]
        for mu, sigma in zip(rng.uniform(0, TWO_PI, 100), rng.uniform(0.05, 2.5, 100)):
            self.assertAlmostEqual(heading_interval_probability(halves, mu, sigma), 1.0, delta=1e-9)

    def test_empty_set(self):
        self.assertEqual(heading_interval_probability([], 1.0, 0.5), 0.0)
        self.assertEqual(heading_interval_probability([AngleInterval.empty()], 1.0, 0.5), 0.0)

    def test_single_interval_matches_quadrature(self):
        interval = AngleInterval(2.636232, 3.646954)
        expected, _ = integrate.quad(
            lambda t: wrapped_gaussian_pdf(t, math.pi, 0.5), interval.lower, interval.upper,
            epsabs=1e-13,
        )
        self.assertAlmostEqual(
            heading_interval_probability([interval], math.pi, 0.5), expected, delta=1e-9
        )

    def test_random_sets_match_quadrature(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            raw = [
                AngleInterval.span(lo, lo + width)
                for lo, width in zip(rng.uniform(0, TWO_PI, 3), rng.uniform(0, 2.0, 3))
            ]
            merged = merge_angle_intervals(raw)
            mu, sigma = rng.uniform(0, TWO_PI), rng.uniform(0.1, 2.0)
            expected = 0.0
            for interval in merged:
                for a, b in interval.plain_segments():
                    value, _ = integrate.quad(
                        lambda t: wrapped_gaussian_pdf(t, mu, sigma), a, b,
                        epsabs=1e-13, epsrel=1e-12, limit=200,
                    )
                    expected += value
            self.assertAlmostEqual(
                heading_interval_probability(merged, mu, sigma), expected, delta=1e-9
            )

    def test_series_terms(self):
        trunc = HeadingTruncation(3)
        self.assertEqual(trunc.series_terms(1.0), 9)
        self.assertIsNone(trunc.series_terms(0.1))
        self.assertIsNone(trunc.series_terms(3.0))
        self.assertEqual(HeadingTruncation(5).series_terms(3.0), 3)

    def test_moments_match_shift_sum(self):
        sets = init_estimator(CAR, CAR, 3, 3, 20).intervals
        moments = heading_moments(sets)
        rng = np.random.default_rng(9)
        trunc = HeadingTruncation()
        for mu, sigma in zip(rng.uniform(-4, 10, 30), rng.uniform(0.3, 2.5, 30)):
            weights = rng.uniform(0, 1, sets.n_points)
            direct = interval_probabilities(
                sets.lower, sets.upper, sets.counts, sets.full, mu, sigma, trunc
            )
            terms = trunc.series_terms(sigma)
            self.assertAlmostEqual(
                moments.weighted_probability(weights, mu, sigma, terms), weights @ direct, delta=1e-9
            )

    def test_moments_of_full_rows(self):
        sets = init_estimator(CAR, CAR, 1, 1, 15).intervals
        moments = heading_moments(sets)
        np.testing.assert_array_equal(moments.measure[sets.full], 1.0)
        np.testing.assert_array_equal(moments.sin[:, sets.full], 0.0)


class PositionDensityTests(SimpleTestCase):
    """Test the polar position density"""

    def setUp(self):
        self.belief = GaussianBelief(mu=(0.0, 0.0, 0.0), sigma=(1.0, 1.0, 1.0))

    def test_zero_at_origin(self):
        for phi in (0.0, 1.0, 4.0):
            self.assertEqual(polar_position_density(phi, 0.0, self.belief), 0.0)

    def test_hand_value(self):
        self.assertAlmostEqual(
            polar_position_density(0.0, 1.0, self.belief), math.exp(-0.5) / TWO_PI, places=12
        )
        self.assertAlmostEqual(polar_position_density(0.0, 1.0, self.belief), 0.0965324, places=7)

    def test_normalisation(self):
        belief = GaussianBelief(mu=(1.0, 1.0, 0.0), sigma=(1.0, 1.0, 1.0))
        value, _ = integrate.dblquad(
            lambda rho, phi: polar_position_density(phi, rho, belief), 0, TWO_PI, 0, 15,
            epsabs=1e-10,
        )
        self.assertAlmostEqual(value, 1.0, delta=1e-6)


class GaussianBeliefTests(SimpleTestCase):
    """Test belief validation and frame changes"""

    def test_rejects_non_positive_sigma(self):
        with self.assertRaises(ValidationError) as ctx:
            GaussianBelief(mu=(0, 0, 0), sigma=(1.0, 0.0, 1.0))
        self.assertIn('sigma_y', ctx.exception.messages[0])

    def test_rejects_wrong_length(self):
        with self.assertRaises(ValidationError):
            GaussianBelief(mu=(0, 0), sigma=(1, 1, 1))

    def test_json(self):
        belief = GaussianBelief.from_json({'mu': [1, 2, 3], 'sigma': [0.1, 0.2, 0.3]})
        self.assertEqual(belief.to_json(), {'mu': [1.0, 2.0, 3.0], 'sigma': [0.1, 0.2, 0.3]})
        with self.assertRaises(ValidationError):
            GaussianBelief.from_json({'mu': [1, 2, 3]})

    def test_relative_to_ego_frame(self):
        belief = GaussianBelief(mu=(1.0, 0.0, 0.5), sigma=(1.0, 2.0, 0.1))
        relative = belief.relative_to(Configuration(1.0, 1.0, math.pi / 2))
        self.assertAlmostEqual(relative.mu[0], -1.0)
        self.assertAlmostEqual(relative.mu[1], 0.0)
        self.assertAlmostEqual(relative.mu[2], 0.5 - math.pi / 2)
        self.assertAlmostEqual(relative.sigma[0], 2.0)
        self.assertAlmostEqual(relative.sigma[1], 1.0)
        self.assertEqual(relative.sigma[2], 0.1)


class EstimatorTests(SimpleTestCase):
    """Test the two-phase POC estimator"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.est = init_estimator(CAR, CAR, 3, 3, 20)
        cls.bank = init_estimator_bank(CAR, CAR, 3, 3, (20, 40, 80, 160))

    def test_initialisation(self):
        self.assertAlmostEqual(self.est.rho_bar, 5.5)
        self.assertEqual(self.est.grid.n_points, 400)
        self.assertLessEqual(int(self.est.intervals.counts.max()), 9)

    def test_single_circle_grid_is_full_inside_joint_radius(self):
        est = init_estimator(CAR, CAR, 1, 1, 15)
        joint = est.ego_cover.radius + est.obj_cover.radius
        inside = est.grid.rho < joint - 1e-9
        self.assertTrue(est.intervals.full[inside].all())

    def test_repeated_initialisation_is_identical(self):
        other = init_estimator(CAR, CAR, 3, 3, 20)
        self.assertTrue(other.intervals.equals(self.est.intervals))
        np.testing.assert_array_equal(other.grid.weights, self.est.grid.weights)

    def test_far_belief(self):
        belief = GaussianBelief(mu=(100.0, 100.0, 0.0), sigma=(0.1, 0.1, 0.1))
        self.assertLess(estimate_poc(self.est, belief), 1e-12)

    def test_concentric_belief(self):
        belief = GaussianBelief(mu=(0.0, 0.0, 0.0), sigma=(0.05, 0.05, 0.05))
        self.assertGreaterEqual(estimate_poc(self.est, belief), 0.999)
        self.assertGreaterEqual(self.bank.estimate(belief), 0.999)

    def test_narrow_belief_between_grid_points(self):
        belief = GaussianBelief(mu=(0.15, 0.1, 1.0), sigma=(0.02, 0.02, 0.02))
        self.assertFalse(resolves(self.est.grid, belief))
        self.assertGreaterEqual(estimate_poc(self.est, belief), 0.999)

    def test_panel_weights_carry_the_full_mass(self):
        belief = GaussianBelief(mu=(1.3, 0.7, 0.0), sigma=(0.03, 0.03, 0.1))
        weights = panel_weights(self.est.grid, belief)
        self.assertEqual(weights.shape, (400,))
        self.assertTrue((weights >= 0).all())
        self.assertAlmostEqual(weights.sum(), 1.0, delta=1e-4)

    def test_wide_belief_uses_trapezoid(self):
        belief = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(2.5, 2.5, 1.0))
        self.assertTrue(resolves(self.est.grid, belief))

    def test_panel_paths_agree(self):
        grid = self.est.grid
        belief = GaussianBelief(mu=(2.0, -1.0, 0.0), sigma=(0.6, 0.5, 0.4))
        self.assertFalse(resolves(grid, belief))
        with mock.patch.object(estimator, 'PANEL_OPERATOR_POINTS', 0):
            direct = panel_weights(grid, belief)
        np.testing.assert_allclose(panel_weights(grid, belief), direct, atol=1e-12)

    def test_result_is_a_probability(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            belief = GaussianBelief(
                mu=(*rng.uniform(-4, 4, 2), rng.uniform(0, TWO_PI)),
                sigma=tuple(rng.uniform(0.2, 2.0, 3)),
            )
            poc = self.est.estimate(belief)
            self.assertGreaterEqual(poc, 0.0)
            self.assertLessEqual(poc, 1.0)

    def test_deterministic(self):
        belief = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(1.5, 1.5, 1.5))
        self.assertEqual(self.est.estimate(belief), self.est.estimate(belief))

    def test_grid_convergence(self):
        fine = init_estimator(CAR, CAR, 3, 3, 40)
        for sigma in (1.5, 2.5):
            belief = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(sigma,) * 3)
            self.assertLess(abs(fine.estimate(belief) - self.est.estimate(belief)), 1e-2)

    def test_larger_footprints_do_not_lower_poc(self):
        big = init_estimator_bank(CAR.scaled(1.1), CAR.scaled(1.1), 3, 3, (20, 40, 80, 160))
        for mu in ((2.5, 2.5, 0.0), (-3.0, 1.0, 1.0), (0.0, 5.0, 2.0)):
            belief = GaussianBelief(mu=mu, sigma=(1.0, 1.0, 1.0))
            self.assertGreaterEqual(big.estimate(belief), self.bank.estimate(belief) - 1e-3)

    def test_bank_selects_by_resolution(self):
        wide = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(2.5, 2.5, 1.0))
        narrow = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(0.1, 0.1, 1.0))
        self.assertEqual(self.bank.select(wide).n_samples, 20)
        self.assertEqual(self.bank.select(narrow).n_samples, 160)
        self.assertEqual(self.bank.levels, (20, 40, 80, 160))

    def test_moderate_uncertainty_against_oracle(self):
        belief = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(1.5, 1.5, 1.5))
        oracle = mcs_poc(CAR, CAR, belief, 100_000, SeededSampler(42))
        poc = self.est.estimate(belief)
        self.assertGreaterEqual(poc, oracle.estimate - 3 * oracle.std_error)
        self.assertLessEqual(poc, oracle.estimate + 0.15)

    @tag('slow')
    def test_over_approximates_rectangle_oracle(self):
        rng = np.random.default_rng(2024)
        sampler = SeededSampler(2024)
        for _ in range(200):
            belief = GaussianBelief(
                mu=(*rng.uniform(-8, 8, 2), rng.uniform(0, TWO_PI)),
                sigma=tuple(rng.uniform(0.05, 2.5, 3)),
            )
            oracle = mcs_poc(CAR, CAR, belief, 100_000, sampler)
            self.assertGreaterEqual(
                self.bank.estimate(belief), oracle.estimate - 3 * oracle.std_error, belief
            )

    @tag('slow')
    def test_agrees_with_circle_oracle(self):
        rng = np.random.default_rng(77)
        sampler = SeededSampler(77)
        cover = cover_rectangle(CAR, 3)
        for _ in range(50):
            belief = GaussianBelief(
                mu=(*rng.uniform(-6, 6, 2), rng.uniform(0, TWO_PI)),
                sigma=tuple(rng.uniform(0.5, 2.5, 3)),
            )
            oracle = mcs_poc_circles(cover, cover, belief, 100_000, sampler)
            self.assertAlmostEqual(
                self.bank.estimate(belief), oracle.estimate,
                delta=3 * oracle.std_error + 1e-2, msg=belief,
            )


class SeparatingAxisTests(SimpleTestCase):
    """Test the exact rectangle intersection"""

    def test_concentric(self):
        for theta in (0.0, 0.7, 2.0, 4.0):
            self.assertTrue(rectangles_intersect(CAR, CAR, Configuration(0.0, 0.0, theta)))

    def test_separated(self):
        self.assertFalse(rectangles_intersect(CAR, CAR, Configuration(10.0, 0.0, 0.0)))

    def test_touching_counts(self):
        self.assertTrue(rectangles_intersect(CAR, CAR, Configuration(4.5, 0.0, 0.0)))
        self.assertTrue(rectangles_intersect(CAR, CAR, Configuration(4.5 - 1e-9, 0.0, 0.0)))
        self.assertFalse(rectangles_intersect(CAR, CAR, Configuration(4.5 + 1e-9, 0.0, 0.0)))

    def test_rotated_corner_gap(self):
        # diagonal placement where the axis-aligned bounds overlap but the corner misses
        self.assertFalse(rectangles_intersect(
            RectangleFootprint(2.0, 2.0), RectangleFootprint(2.0, 2.0),
            Configuration(2.3, 2.3, math.pi / 4),
        ))
        self.assertTrue(rectangles_intersect(
            RectangleFootprint(2.0, 2.0), RectangleFootprint(2.0, 2.0),
            Configuration(1.5, 1.5, 0.0),
        ))

    def test_matches_polygon_brute_force(self):
        from geometry.shapes import rectangle_corners

        def segments_cross(p1, p2, q1, q2):
            def orient(a, b, c):
                return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
            d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
            return d1 * d2 <= 0 and d3 * d4 <= 0

        def inside(point, corners):
            signs = [
                (corners[(k + 1) % 4][0] - corners[k][0]) * (point[1] - corners[k][1])
                - (corners[(k + 1) % 4][1] - corners[k][1]) * (point[0] - corners[k][0])
                for k in range(4)
            ]
            return all(s >= 0 for s in signs)

        rng = np.random.default_rng(8)
        ego_corners = rectangle_corners(CAR)
        obj_fp = RectangleFootprint(3.0, 1.5)
        for x, y, theta in zip(rng.uniform(-6, 6, 1000), rng.uniform(-4, 4, 1000),
                               rng.uniform(0, TWO_PI, 1000)):
            obj_corners = rectangle_corners(obj_fp, Configuration(x, y, theta))
            brute = (
                any(segments_cross(ego_corners[i], ego_corners[(i + 1) % 4],
                                   obj_corners[j], obj_corners[(j + 1) % 4])
                    for i in range(4) for j in range(4))
                or inside(obj_corners[0], ego_corners)
                or inside(ego_corners[0], obj_corners)
            )
            self.assertEqual(rectangles_intersect(CAR, obj_fp, Configuration(x, y, theta)), brute)

    def test_vectorised_matches_scalar(self):
        rng = np.random.default_rng(10)
        x, y, theta = rng.uniform(-5, 5, 50), rng.uniform(-5, 5, 50), rng.uniform(0, 6, 50)
        many = rectangles_intersect_many(CAR, CAR, x, y, theta)
        for k in range(50):
            self.assertEqual(many[k], rectangles_intersect(CAR, CAR, Configuration(x[k], y[k], theta[k])))


class MonteCarloTests(SimpleTestCase):
    """Test the Monte-Carlo oracle"""

    def test_certain_collision(self):
        belief = GaussianBelief(mu=(0.5, 0.2, 0.3), sigma=(1e-9, 1e-9, 1e-9))
        for n in (1, 10, 1000):
            self.assertEqual(mcs_poc(CAR, CAR, belief, n, SeededSampler(1)).estimate, 1.0)

    def test_certain_miss(self):
        belief = GaussianBelief(mu=(100.0, 0.0, 0.0), sigma=(1e-9, 1e-9, 1e-9))
        self.assertEqual(mcs_poc(CAR, CAR, belief, 1000, SeededSampler(1)).estimate, 0.0)

    def test_same_seed_same_result(self):
        belief = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(1.5, 1.5, 1.5))
        first = mcs_poc(CAR, CAR, belief, 20_000, SeededSampler(3))
        second = mcs_poc(CAR, CAR, belief, 20_000, SeededSampler(3))
        self.assertEqual(first, second)
        other = mcs_poc(CAR, CAR, belief, 20_000, SeededSampler(4))
        self.assertNotEqual(first.estimate, other.estimate)

    def test_std_error(self):
        result = McsResult.from_count(250, 1000, seed=5)
        self.assertAlmostEqual(result.std_error, math.sqrt(0.25 * 0.75 / 1000))
        self.assertEqual(result.to_json(), {
            'estimate': 0.25, 'n': 1000, 'std_error': result.std_error, 'seed': 5,
        })

    def test_rejects_zero_samples(self):
        belief = GaussianBelief(mu=(0, 0, 0), sigma=(1, 1, 1))
        with self.assertRaises(ValidationError):
            mcs_poc(CAR, CAR, belief, 0, SeededSampler(0))

    def test_circle_union_dominates_rectangles(self):
        cover = cover_rectangle(CAR, 3)
        rng = np.random.default_rng(6)
        for seed in range(10):
            belief = GaussianBelief(
                mu=(*rng.uniform(-5, 5, 2), rng.uniform(0, TWO_PI)), sigma=(1.0, 1.0, 1.0),
            )
            rect = mcs_poc(CAR, CAR, belief, 10_000, SeededSampler(seed))
            circles = mcs_poc_circles(cover, cover, belief, 10_000, SeededSampler(seed))
            self.assertGreaterEqual(circles.estimate, rect.estimate)

    def test_single_circles_just_inside(self):
        cover = cover_rectangle(CAR, 1)
        joint = 2 * cover.radius
        belief = GaussianBelief(mu=(joint - 0.01, 0.0, 0.0), sigma=(1e-4, 1e-4, 1e-4))
        self.assertEqual(mcs_poc_circles(cover, cover, belief, 1000, SeededSampler(0)).estimate, 1.0)

    def test_circle_test_vectorised(self):
        cover = cover_rectangle(CAR, 3)
        hits = circles_intersect_many(
            cover, cover, np.array([0.0, 20.0]), np.array([0.0, 0.0]), np.array([0.0, 0.0])
        )
        self.assertEqual(hits.tolist(), [True, False])

    def test_spawned_streams(self):
        children = SeededSampler(9).spawn(2)
        again = SeededSampler(9).spawn(2)
        np.testing.assert_array_equal(children[0].standard_normal(5), again[0].standard_normal(5))
        self.assertFalse(np.array_equal(children[0].standard_normal(5), children[1].standard_normal(5)))

    @tag('slow')
    def test_error_shrinks_with_samples(self):
        belief = GaussianBelief(mu=(2.5, 2.5, 0.0), sigma=(1.5, 1.5, 1.5))
        reference = mcs_poc(CAR, CAR, belief, 1_000_000, SeededSampler(100)).estimate
        spreads = []
        for n in (1_000, 16_000):
            estimates = [mcs_poc(CAR, CAR, belief, n, SeededSampler(s)).estimate for s in range(40)]
            spreads.append(np.std(estimates))
            self.assertLess(abs(np.mean(estimates) - reference), 5 * np.std(estimates) / math.sqrt(40) + 1e-3)
        self.assertGreater(spreads[0] / spreads[1], 2.0)


class IntervalCacheTests(TestCase):
    """Test persistent interval caching"""

    def setUp(self):
        _memoised.cache_clear()

    def tearDown(self):
        _memoised.cache_clear()

    @override_settings(POC_ENGINE={'CACHE_INTERVALS': True})
    def test_cache_round_trip(self):
        est = cached_estimator(CAR, CAR, 2, 2, 8)
        self.assertEqual(IntervalCache.objects.count(), 1)
        entry = IntervalCache.objects.get()
        self.assertEqual(entry.n_samples, 8)
        self.assertIn('4.5x2', str(entry))
        _memoised.cache_clear()
        loaded = cached_estimator(CAR, CAR, 2, 2, 8)
        self.assertIsNot(loaded, est)
        self.assertTrue(loaded.intervals.equals(est.intervals))
        self.assertEqual(IntervalCache.objects.count(), 1)

    @override_settings(POC_ENGINE={'CACHE_INTERVALS': False})
    def test_memory_only_by_default(self):
        first = cached_estimator(CAR, CAR, 2, 2, 8)
        self.assertIs(cached_estimator(CAR, CAR, 2, 2, 8), first)
        self.assertEqual(IntervalCache.objects.count(), 0)


class PocApiTests(APITestCase):
    """Test the POC endpoints"""

    def test_estimate(self):
        response = self.client.post('/api/poc/estimate/', {
            'mu': '2.5,2.5,0', 'sigma': '1.5,1.5,1.5', 'circles': '3,3', 'grid': 20,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertGreater(response.data['poc'], 0.0)
        self.assertLessEqual(response.data['poc'], 1.0)
        self.assertEqual(response.data['config']['circles'], [3, 3])
        self.assertIn('schema_version', response.data)

    def test_estimate_accepts_lists(self):
        response = self.client.post('/api/poc/estimate/', {
            'mu': [100, 100, 0], 'sigma': [0.1, 0.1, 0.1], 'ego': [4.5, 2], 'circles': [1, 1],
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertLess(response.data['poc'], 1e-12)

    def test_zero_sigma_is_rejected(self):
        response = self.client.post('/api/poc/estimate/', {
            'mu': '2.5,2.5,0', 'sigma': '1.5,0,1.5',
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('sigma', response.data)

    def test_bad_footprint_is_rejected(self):
        response = self.client.post('/api/poc/estimate/', {
            'mu': '1,1,0', 'sigma': '1,1,1', 'ego': '2x4.5',
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('ego', response.data)

    def test_oversized_grid_is_rejected(self):
        response = self.client.post('/api/poc/estimate/', {
            'mu': '1,1,0', 'sigma': '1,1,1', 'grid': 100_000,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('grid', response.data)

    def test_too_many_circles_are_rejected(self):
        response = self.client.post('/api/poc/estimate/', {
            'mu': '1,1,0', 'sigma': '1,1,1', 'circles': '3,1000',
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('circles', response.data)

    def test_oversized_oracle_is_rejected(self):
        response = self.client.post('/api/poc/oracle/', {
            'mu': '1,1,0', 'sigma': '1,1,1', 'samples': 10**12,
        }, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('samples', response.data)

    @override_settings(POC_ENGINE={'MAX_GRID_SAMPLES': 30})
    def test_limits_come_from_engine_settings(self):
        body = {'mu': '1,1,0', 'sigma': '1,1,1', 'circles': '1,1'}
        rejected = self.client.post('/api/poc/estimate/', {**body, 'grid': 31}, format='json')
        accepted = self.client.post('/api/poc/estimate/', {**body, 'grid': 30}, format='json')
        self.assertEqual(rejected.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(accepted.status_code, status.HTTP_200_OK)

    def test_oracle_is_reproducible(self):
        body = {'mu': '2.5,2.5,0', 'sigma': '1.5,1.5,1.5', 'samples': 5000, 'seed': 11}
        first = self.client.post('/api/poc/oracle/', body, format='json')
        second = self.client.post('/api/poc/oracle/', body, format='json')
        self.assertEqual(first.status_code, status.HTTP_200_OK)
        self.assertEqual(first.data['estimate'], second.data['estimate'])
        self.assertEqual(first.data['n'], 5000)
        self.assertEqual(first.data['seed'], 11)
