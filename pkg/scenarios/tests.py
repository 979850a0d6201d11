import dataclasses
import math
import tempfile
from pathlib import Path

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, tag
from rest_framework import serializers

from geometry.polar import Configuration

from .loader import dump_scenario, library_names, load_scenario, parse_scenario, resolve_scenario_path
from .specs import AccuracySpec, ScenarioSpec, SmpcScenarioSpec, VehicleMotion
from .studies import (
    accuracy_study, median_of_means, overtaking_comparison, run_poc_scenario, runtime_benchmark,
)
from .uncertainty import LogisticUncertainty, horizon_sigma, logistic_sigma


class UncertaintyTests(SimpleTestCase):
    """Test the logistic and horizon uncertainty models"""

    def setUp(self):
        self.model = LogisticUncertainty(gamma=1.0, d0=1.0, sigma_max=(1.0, 1.0, 1.0))

    def test_midpoint(self):
        for value in logistic_sigma(1.0, self.model):
            self.assertAlmostEqual(value, 0.5)

    def test_saturation(self):
        for value in logistic_sigma(1e4, self.model):
            self.assertAlmostEqual(value, 1.0)

    def test_example_distance(self):
        for value in self.model.sigma(3.0):
            self.assertAlmostEqual(value, 0.880797, places=6)

    def test_invalid_sigma_max(self):
        with self.assertRaises(ValidationError):
            LogisticUncertainty(sigma_max=(1.0, 0.0, 1.0))

    def test_horizon_sigma(self):
        self.assertEqual(horizon_sigma((0.1, 0.2, 0.3), (0.3, 0.3, 0.3), 0), (0.1, 0.2, 0.3))
        for value in horizon_sigma((0.1, 0.1, 0.1), (0.3, 0.3, 0.3), 10):
            self.assertAlmostEqual(value, 3.1)
        self.assertEqual(horizon_sigma((0.5, 0.5, 0.5), (0.0, 0.0, 0.0), 7), (0.5, 0.5, 0.5))

    def test_negative_steps_rejected(self):
        with self.assertRaises(ValidationError):
            horizon_sigma((0.1, 0.1, 0.1), (0.1, 0.1, 0.1), -1)


class ScenarioFileTests(SimpleTestCase):
    """Test the scenario library and its YAML round trip"""

    def test_library_contents(self):
        self.assertEqual(
            library_names(),
            ['accuracy', 'intersection_crash', 'intersection_pass', 'oncoming_pass', 'overtaking'],
        )

    def test_intersection_crash_values(self):
        spec = load_scenario('intersection_crash')
        self.assertIsInstance(spec, ScenarioSpec)
        self.assertEqual(spec.ego.start, Configuration(0.0, 4.0, 0.0))
        self.assertEqual(spec.obj.start, Configuration(4.0, 0.0, math.pi / 2))
        self.assertEqual((spec.ego.v, spec.obj.v), (1.0, 1.0))
        self.assertEqual(spec.uncertainty, LogisticUncertainty(1.0, 1.0, (1.0, 1.0, 1.0)))
        self.assertEqual(spec.ego_footprint.length, 4.5)

    def test_overtaking_values(self):
        spec = load_scenario('overtaking', kind='smpc')
        self.assertIsInstance(spec, SmpcScenarioSpec)
        self.assertEqual(sorted(spec.levels), ['high', 'low', 'moderate'])
        cfg = spec.smpc_config('moderate')
        self.assertEqual(cfg.growth, (0.3, 0.3, 0.3))
        self.assertEqual(cfg.weights, (1.0, 1.0, 10.0, 10.0))
        path = spec.build_path()
        self.assertAlmostEqual(path.length, 400.0)
        self.assertAlmostEqual(path.arc_per_lambda, 0.2)

    def test_accuracy_values(self):
        spec = load_scenario('accuracy')
        self.assertIsInstance(spec, AccuracySpec)
        self.assertEqual(spec.levels['moderate'], (1.5, 1.5, 1.5))
        self.assertEqual(spec.repetitions, 10_000)

    def test_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            for name in library_names():
                with self.subTest(name=name):
                    spec = load_scenario(name)
                    path = dump_scenario(spec, Path(tmp) / f'{name}.yaml')
                    self.assertEqual(load_scenario(path), spec)

    def test_json_payload_parses(self):
        spec = load_scenario('oncoming_pass')
        self.assertEqual(parse_scenario(spec.to_json()), spec)

    def test_kind_mismatch(self):
        with self.assertRaises(ValidationError):
            load_scenario('overtaking', kind='poc')

    def test_unknown_name(self):
        with self.assertRaises(ValidationError) as ctx:
            resolve_scenario_path('no_such_scenario')
        self.assertEqual(ctx.exception.code, 'unknown_scenario')

    def test_invalid_payloads(self):
        base = load_scenario('intersection_crash').to_json()
        broken = [
            {**base, 'steps': 0},
            {**base, 'uncertainty': {'gamma': 1.0, 'd0': 1.0, 'sigma_max': [1.0, 0.0, 1.0]}},
            {**base, 'ego': {'start': [0.0, 4.0]}},
            {**base, 'ego_footprint': [2.0, 4.5]},
        ]
        for payload in broken:
            with self.subTest(payload=payload), self.assertRaises(serializers.ValidationError):
                parse_scenario(payload)

    def test_unknown_level(self):
        payload = {**load_scenario('overtaking').to_json(), 'level': 'extreme'}
        with self.assertRaises(serializers.ValidationError):
            parse_scenario(payload)

    def test_unknown_kind(self):
        with self.assertRaises(ValidationError):
            parse_scenario({'kind': 'weather', 'name': 'x'})

    def test_constant_motion_is_linear(self):
        motion = VehicleMotion(Configuration(1.0, 2.0, math.pi / 6), v=1.5)
        scripted = motion.scripted(0.1)
        for k in (1, 10, 100):
            cfg = scripted.at(k)
            self.assertAlmostEqual(cfg.x, 1.0 + 0.15 * k * math.cos(math.pi / 6))
            self.assertAlmostEqual(cfg.y, 2.0 + 0.15 * k * math.sin(math.pi / 6))
            self.assertEqual(cfg.theta, math.pi / 6)


class StudyTests(SimpleTestCase):
    """Test the experiments on shortened settings"""

    def test_median_of_means(self):
        self.assertEqual(median_of_means([1, 1, 1, 100, 1, 1], 3), 1.0)

    def test_intersection_crash(self):
        spec = dataclasses.replace(load_scenario('intersection_crash'), steps=60)
        report = run_poc_scenario(spec, circle_counts=(1, 3), oracle_samples=10_000, seed=1)
        self.assertEqual(len(report.times), 60)
        self.assertGreater(report.peak(3), 0.9)
        self.assertGreater(max(report.oracle), 0.9)
        self.assertLessEqual(report.delta_e(3), report.delta_e(1))
        self.assertGreaterEqual(report.delta_e(3), -3 * report.max_oracle_std - 5e-3)
        self.assertEqual(len(list(report.table())), 60)
        self.assertEqual(len(report.columns()), 9)
        summary = report.summary()
        self.assertIn('1-3', summary['peak_gap'])

    def test_scenario_is_seeded(self):
        spec = dataclasses.replace(load_scenario('oncoming_pass'), steps=20)
        first = run_poc_scenario(spec, circle_counts=(3,), oracle_samples=2_000, seed=5)
        second = run_poc_scenario(spec, circle_counts=(3,), oracle_samples=2_000, seed=5)
        self.assertEqual(first.oracle, second.oracle)
        self.assertEqual(first.analytic, second.analytic)

    def test_runtime_benchmark(self):
        report = runtime_benchmark(
            circle_counts=(1, 3), sample_counts=(100, 10_000), evaluations=30, batches=3, seed=0
        )
        self.assertEqual([row['circles'] for row in report.analytic], [1, 3])
        self.assertEqual([row['samples'] for row in report.mcs], [100, 10_000])
        self.assertTrue(all(row['eval_ms'] > 0 for row in report.analytic + report.mcs))
        self.assertGreater(report.speedup(), 0)
        self.assertIn('speedup_3_circles_vs_1e4_samples', report.summary())

    def test_accuracy_study(self):
        spec = dataclasses.replace(
            load_scenario('accuracy'),
            levels={'low': (0.5, 0.5, 0.5), 'moderate': (1.5, 1.5, 1.5)},
            circle_counts=(1, 2, 3),
        )
        report = accuracy_study(spec, repetitions=60, sample_counts=(100, 10_000), seed=2)
        self.assertEqual(report.levels(), ['low', 'moderate'])
        for level in report.levels():
            self.assertTrue(report.covers_mcs(level))
            self.assertTrue(5 <= report.dispersion_ratio(level) <= 20)
        self.assertEqual(report.monotone_violations('low'), [])
        self.assertEqual(len(report.rows), 2 * (3 + 2))

    def test_overtaking_comparison_short(self):
        spec = load_scenario('overtaking')
        report = overtaking_comparison(
            spec, levels=['low'], mcs_runs=2, mcs_samples=200, seed=0, steps=3,
            grid_levels=(20, 40),
        )
        self.assertTrue(report.repeat_identical['low'])
        self.assertEqual(report.analytic['low'].steps, 3)
        self.assertEqual(len(report.mcs), 2)
        stems = [stem for stem, _ in report.logs()]
        self.assertEqual(stems, ['analytic_low', 'mcs_moderate_run0', 'mcs_moderate_run1'])
        self.assertIn('mcs_min_pairwise_gap', report.summary())

    @tag('slow')
    def test_library_scenarios_over_approximate(self):
        for name in ('intersection_crash', 'intersection_pass', 'oncoming_pass'):
            with self.subTest(name=name):
                report = run_poc_scenario(
                    load_scenario(name), circle_counts=(1, 2, 3), oracle_samples=100_000, seed=0
                )
                for n in (1, 2, 3):
                    self.assertGreaterEqual(report.delta_e(n), -3 * report.max_oracle_std)
                self.assertLessEqual(report.delta_e(3), report.delta_e(1))

    @tag('slow')
    def test_oncoming_pass_circle_gap(self):
        report = run_poc_scenario(
            load_scenario('oncoming_pass'), circle_counts=(2, 3), oracle_samples=100_000, seed=0
        )
        self.assertGreaterEqual(report.peak_gap(2, 3), 0.05)

    @tag('slow')
    def test_analytic_is_ten_times_faster_than_sampling(self):
        report = runtime_benchmark(
            circle_counts=(3,), sample_counts=(10_000,), evaluations=1_000, batches=5, grid=20, seed=0
        )
        self.assertGreaterEqual(report.speedup(circles=3, samples=10_000), 10)

    @tag('slow')
    def test_sampled_overtaking_runs_diverge(self):
        spec = load_scenario('overtaking')
        report = overtaking_comparison(spec, levels=[spec.level], repeat=False, include_mcs=True)
        self.assertEqual(len(report.mcs), spec.mcs_runs)
        self.assertGreater(report.mcs_min_pairwise_gap(), 0.1)
        self.assertGreaterEqual(report.mcs_infeasible_runs(), 1)

    @tag('slow')
    def test_overtaking_levels(self):
        report = overtaking_comparison(load_scenario('overtaking'), include_mcs=False)
        distances = report.min_distances()
        for level, log in report.analytic.items():
            self.assertEqual(log.infeasible_steps, 0, level)
            self.assertLessEqual(log.max_poc(), 0.2 + 1e-6)
            self.assertTrue(report.repeat_identical[level])
        self.assertLessEqual(distances['low'], distances['moderate'])
        self.assertLessEqual(distances['moderate'], distances['high'])
