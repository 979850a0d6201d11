import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .bounds import AngleInterval, heading_bounds, heading_bounds_array, EMPTY, FULL
from .polar import (
    Configuration, PolarConfiguration, TWO_PI, from_polar, normalize_angle,
    shift_polar, to_polar, wrap_to_pi,
)
from .shapes import (
    RectangleFootprint, cover_rectangle, max_collision_distance, rectangle_corners,
)


class FootprintTests(SimpleTestCase):
    """Test footprint validation"""

    def test_rejects_non_positive_dimensions(self):
        with self.assertRaises(ValidationError):
            RectangleFootprint(0.0, 0.0)
        with self.assertRaises(ValidationError):
            RectangleFootprint(4.5, -2.0)

    def test_rejects_width_above_length(self):
        with self.assertRaises(ValidationError) as ctx:
            RectangleFootprint(2.0, 4.5)
        self.assertEqual(ctx.exception.code, 'invalid_footprint')

    def test_rejects_non_finite(self):
        with self.assertRaises(ValidationError):
            RectangleFootprint(float('inf'), 2.0)

    def test_corners_are_counter_clockwise(self):
        corners = rectangle_corners(RectangleFootprint(4.0, 2.0))
        x, y = corners[:, 0], corners[:, 1]
        signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        self.assertAlmostEqual(signed_area, 8.0)


class CoverRectangleTests(SimpleTestCase):
    """Test multi-circle covers"""

    def test_three_circle_cover(self):
        cover = cover_rectangle(RectangleFootprint(4.5, 2.0), 3)
        self.assertAlmostEqual(cover.radius, 1.25, places=12)
        self.assertAlmostEqual(cover.spacing, 1.5, places=12)
        np.testing.assert_allclose(cover.offsets, [-1.5, 0.0, 1.5], atol=1e-12)

    def test_single_circle_square(self):
        cover = cover_rectangle(RectangleFootprint(3.0, 3.0), 1)
        self.assertAlmostEqual(cover.radius, 3.0 / math.sqrt(2.0), places=12)
        self.assertEqual(cover.offsets, (0.0,))

    def test_two_circle_cover(self):
        cover = cover_rectangle(RectangleFootprint(4.5, 2.0), 2)
        self.assertAlmostEqual(cover.radius, math.sqrt(2.265625), places=12)
        self.assertAlmostEqual(cover.spacing, 2.25, places=12)
        np.testing.assert_allclose(cover.offsets, [-1.125, 1.125], atol=1e-12)

    def test_rejects_zero_circles(self):
        with self.assertRaises(ValidationError) as ctx:
            cover_rectangle(RectangleFootprint(4.5, 2.0), 0)
        self.assertEqual(ctx.exception.code, 'invalid_circle_count')

    def test_radius_and_spacing_relation(self):
        fp = RectangleFootprint(4.5, 2.0)
        for n in range(1, 9):
            cover = cover_rectangle(fp, n)
            self.assertAlmostEqual(
                cover.radius, math.sqrt((fp.length / (2 * n)) ** 2 + fp.width ** 2 / 4), places=12
            )
            self.assertAlmostEqual(
                cover.spacing, 2 * math.sqrt(cover.radius ** 2 - fp.width ** 2 / 4), places=12
            )
            np.testing.assert_allclose(np.diff(cover.offsets), cover.spacing, atol=1e-12)
            self.assertAlmostEqual(sum(cover.offsets), 0.0, places=12)
            self.assertAlmostEqual(max(cover.offsets), cover.spacing * (n - 1) / 2, places=12)

    def test_cover_contains_rectangle(self):
        rng = np.random.default_rng(7)
        for length, width in ((4.5, 2.0), (1.0, 1.0), (10.0, 0.5)):
            fp = RectangleFootprint(length, width)
            points = rng.uniform(-0.5, 0.5, size=(10_000, 2)) * [length, width]
            edge = np.linspace(-0.5, 0.5, 401)
            border = np.concatenate([
                np.column_stack((edge * length, np.full_like(edge, 0.5 * width))),
                np.column_stack((edge * length, np.full_like(edge, -0.5 * width))),
                np.column_stack((np.full_like(edge, 0.5 * length), edge * width)),
                np.column_stack((np.full_like(edge, -0.5 * length), edge * width)),
            ])
            for n in range(1, 9):
                cover = cover_rectangle(fp, n)
                self.assertTrue(cover.contains(points).all(), f'{fp} n={n}')
                self.assertTrue(cover.contains(border).all(), f'{fp} n={n} border')

    def test_radius_is_minimal(self):
        fp = RectangleFootprint(4.5, 2.0)
        corners = rectangle_corners(fp)
        for n in range(1, 7):
            cover = cover_rectangle(fp, n)
            centers = cover.centers(Configuration(0.0, 0.0, 0.0))
            dist = np.linalg.norm(corners[:, None, :] - centers[None, :, :], axis=-1)
            self.assertTrue((dist.min(axis=1) > cover.radius * 0.999).any())

    def test_centers_follow_heading(self):
        cover = cover_rectangle(RectangleFootprint(4.5, 2.0), 3)
        centers = cover.centers(Configuration(1.0, 2.0, math.pi / 2))
        np.testing.assert_allclose(centers, [[1.0, 0.5], [1.0, 2.0], [1.0, 3.5]], atol=1e-12)


class MaxCollisionDistanceTests(SimpleTestCase):
    """Test the radial bound of the collision set"""

    def test_three_circle_covers(self):
        cover = cover_rectangle(RectangleFootprint(4.5, 2.0), 3)
        self.assertAlmostEqual(max_collision_distance(cover, cover), 5.5, places=12)

    def test_single_circle_covers(self):
        ego = cover_rectangle(RectangleFootprint(4.5, 2.0), 1)
        obj = cover_rectangle(RectangleFootprint(3.0, 1.5), 1)
        self.assertAlmostEqual(max_collision_distance(ego, obj), ego.radius + obj.radius)

    def test_mixed_covers(self):
        ego = cover_rectangle(RectangleFootprint(4.5, 2.0), 2)
        obj = cover_rectangle(RectangleFootprint(4.5, 2.0), 3)
        expected = math.sqrt(2.265625) + 1.25 + 1.5 + 1.125
        self.assertAlmostEqual(max_collision_distance(ego, obj), expected, places=12)


class PolarTests(SimpleTestCase):
    """Test polar transforms and angle normalisation"""

    def test_axis_points(self):
        p = to_polar(Configuration(0.0, 4.0, 0.0))
        self.assertAlmostEqual(p.phi, math.pi / 2)
        self.assertAlmostEqual(p.rho, 4.0)
        p = to_polar(Configuration(-3.0, 0.0, 1.0))
        self.assertAlmostEqual(p.phi, math.pi)
        self.assertAlmostEqual(p.rho, 3.0)
        self.assertEqual(p.theta, 1.0)

    def test_three_four_five(self):
        p = to_polar(Configuration(3.0, 4.0, 0.5))
        self.assertAlmostEqual(p.phi, 0.927295218, places=8)
        self.assertAlmostEqual(p.rho, 5.0)

    def test_origin_has_zero_angle(self):
        p = to_polar(Configuration(0.0, 0.0, 0.0))
        self.assertEqual((p.phi, p.rho), (0.0, 0.0))

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for x, y in rng.uniform(-50, 50, size=(200, 2)):
            back = from_polar(to_polar(Configuration(x, y, 0.3)))
            self.assertAlmostEqual(back.x, x, delta=1e-12 * max(1.0, abs(x)))
            self.assertAlmostEqual(back.y, y, delta=1e-12 * max(1.0, abs(y)))

    def test_negative_angles_map_into_range(self):
        p = to_polar(Configuration(1.0, -1.0, 0.0))
        self.assertAlmostEqual(p.phi, 7 * math.pi / 4)

    def test_polar_configuration_validation(self):
        with self.assertRaises(ValidationError):
            PolarConfiguration(phi=0.0, rho=-1.0)
        with self.assertRaises(ValidationError):
            PolarConfiguration(phi=TWO_PI, rho=1.0)
        with self.assertRaises(ValidationError):
            Configuration(float('nan'), 0.0, 0.0)

    def test_shift_polar(self):
        self.assertEqual(shift_polar(2.0, 0.0, 2.0), (0.0, 0.0))
        phi, rho = shift_polar(1.0, 1.0, 1.0)
        self.assertAlmostEqual(phi, math.pi / 2)
        self.assertAlmostEqual(rho, 1.0)
        p = to_polar(Configuration(3.0, 4.0, 0.0))
        self.assertEqual(shift_polar(3.0, 4.0, 0.0), (p.phi, p.rho))

    def test_normalize_and_wrap(self):
        self.assertEqual(normalize_angle(-1e-18), 0.0)
        self.assertAlmostEqual(normalize_angle(-math.pi / 2), 3 * math.pi / 2)
        self.assertAlmostEqual(normalize_angle(5 * math.pi), math.pi)
        self.assertAlmostEqual(wrap_to_pi(math.pi), math.pi)
        self.assertAlmostEqual(wrap_to_pi(-math.pi), math.pi)
        self.assertAlmostEqual(wrap_to_pi(3 * math.pi / 2), -math.pi / 2)
        self.assertAlmostEqual(wrap_to_pi(TWO_PI), 0.0)


class AngleIntervalTests(SimpleTestCase):
    """Test heading interval values"""

    def test_span_normalizes_lower(self):
        interval = AngleInterval.span(-0.5, 0.5)
        self.assertAlmostEqual(interval.lower, TWO_PI - 0.5)
        self.assertAlmostEqual(interval.width, 1.0)
        self.assertTrue(interval.wraps)
        self.assertTrue(interval.contains(0.0))
        self.assertFalse(interval.contains(math.pi))

    def test_full_and_empty(self):
        self.assertEqual(AngleInterval.empty().measure(), 0.0)
        self.assertAlmostEqual(AngleInterval.full().measure(), TWO_PI)
        self.assertTrue(AngleInterval.span(0.0, 7.0).is_full)
        self.assertFalse(AngleInterval.empty().contains(1.0))

    def test_plain_segments_of_wrapped(self):
        segments = AngleInterval.span(5.8, 5.8 + 0.8).plain_segments()
        self.assertEqual(len(segments), 2)
        self.assertAlmostEqual(segments[0][1], TWO_PI)
        self.assertAlmostEqual(segments[1][1], 5.8 + 0.8 - TWO_PI)


class HeadingBoundsTests(SimpleTestCase):
    """Test the base-case heading intervals"""

    def test_contained_object_circle(self):
        self.assertTrue(heading_bounds(1.3, 0.0, 1.0, 2.0).is_full)

    def test_far_object(self):
        self.assertTrue(heading_bounds(0.0, 4.0, 1.0, 2.0).is_empty)

    def test_partial_interval(self):
        interval = heading_bounds(0.0, 2.0, 2.0, 1.0)
        half = math.acos(7 / 8)
        self.assertAlmostEqual(half, 0.505361, places=6)
        self.assertAlmostEqual(interval.lower, math.pi - half, places=12)
        self.assertAlmostEqual(interval.upper, math.pi + half, places=12)

    def test_inner_hole_when_offset_exceeds_radius(self):
        self.assertTrue(heading_bounds(0.0, 0.5, 2.0, 1.0).is_empty)
        tangent = heading_bounds(0.0, 1.0, 2.0, 1.0)
        self.assertFalse(tangent.is_empty)
        self.assertAlmostEqual(tangent.width, 0.0, places=6)

    def test_zero_offset(self):
        self.assertTrue(heading_bounds(0.0, 1.9, 0.0, 2.0).is_full)
        self.assertTrue(heading_bounds(0.0, 2.1, 0.0, 2.0).is_empty)

    def test_width_vanishes_at_outer_contact(self):
        widths = [heading_bounds(0.0, 3.0 - eps, 1.0, 2.0).width for eps in (1e-2, 1e-4, 1e-6)]
        self.assertTrue(widths[0] > widths[1] > widths[2])
        self.assertLess(widths[2], 1e-2)

    def test_rotation_shifts_interval(self):
        base = heading_bounds(0.4, 2.5, 1.2, 2.0)
        for delta in (0.3, 2.0, 5.5):
            moved = heading_bounds(normalize_angle(0.4 + delta), 2.5, 1.2, 2.0)
            expected = base.shifted(delta)
            self.assertAlmostEqual(moved.lower, expected.lower, places=9)
            self.assertAlmostEqual(moved.width, expected.width, places=9)

    def test_array_matches_scalar(self):
        phi = np.array([0.0, 1.0, 2.0, 3.0])
        rho = np.array([0.0, 2.0, 3.5, 2.9])
        lower, upper, state = heading_bounds_array(phi, rho, 1.0, 2.0)
        self.assertEqual(state[0], FULL)
        self.assertEqual(state[2], EMPTY)
        scalar = heading_bounds(1.0, 2.0, 1.0, 2.0)
        self.assertAlmostEqual(lower[1], scalar.lower)
        self.assertAlmostEqual(upper[1], scalar.upper)

    def test_agrees_with_circle_intersection(self):
        rng = np.random.default_rng(11)
        n = 10_000
        phi = rng.uniform(0, TWO_PI, n)
        rho = rng.uniform(0, 6, n)
        offset = np.where(rng.random(n) < 0.1, 0.0, rng.uniform(0, 3, n))
        radius = rng.uniform(0.5, 3, n)
        theta = rng.uniform(0, TWO_PI, n)
        cx = rho * np.cos(phi) + offset * np.cos(theta)
        cy = rho * np.sin(phi) + offset * np.sin(theta)
        dist = np.hypot(cx, cy)
        checked = 0
        for i in range(n):
            if abs(dist[i] - radius[i]) < 1e-9:
                continue
            interval = heading_bounds(phi[i], rho[i], offset[i], radius[i])
            self.assertEqual(interval.contains(theta[i]), bool(dist[i] <= radius[i]), i)
            checked += 1
        self.assertGreater(checked, 9_900)
