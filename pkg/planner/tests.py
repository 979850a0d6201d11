import math
from types import SimpleNamespace

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, tag

from collision.estimator import init_estimator_bank
from geometry.polar import Configuration
from geometry.shapes import RectangleFootprint

from .dynamics import ControlInput, EgoState, output, rollout, unicycle_step
from .path import (
    ReferencePath, advance_progress, localize_on_path, path_error, stage_cost,
)
from .simulation import ScriptedObject, predicted_beliefs, receding_horizon_run
from .smpc import AnalyticPocBackend, PlanStatus, SmpcConfig, SmpcProblem, solve_smpc

CAR = RectangleFootprint(4.5, 2.0)
WEIGHTS = (1.0, 1.0, 10.0, 10.0)


class ConstantBackend:
    name = 'constant'
    gradient_step = None

    def __init__(self, value):
        self.value = value

    def __call__(self, belief):
        return self.value


def straight_path(length=60.0):
    return ReferencePath.straight((0.0, 0.0), 0.0, length, v_ref=6.0)


def world_beliefs(x, y, config):
    obj = ScriptedObject(Configuration(x, y, 0.0), 0.0, 0.0, config.sample_time)
    return predicted_beliefs(obj, 0, config)


class UnicycleTests(SimpleTestCase):
    """Test the forward-Euler unicycle"""

    def test_straight_step(self):
        z = unicycle_step(EgoState(0, 0, 0), ControlInput(1, 0), 0.2)
        self.assertAlmostEqual(z.x, 0.2)
        self.assertAlmostEqual(z.y, 0.0)
        self.assertAlmostEqual(z.theta, 0.0)

    def test_step_along_y(self):
        z = unicycle_step(EgoState(0, 0, math.pi / 2), ControlInput(1, 0), 0.2)
        self.assertAlmostEqual(z.x, 0.0)
        self.assertAlmostEqual(z.y, 0.2)
        self.assertAlmostEqual(z.theta, math.pi / 2)

    def test_zero_speed_only_turns(self):
        z = unicycle_step(EgoState(1, 2, 0.3), ControlInput(0, 0.5), 0.2)
        self.assertEqual((z.x, z.y), (1, 2))
        self.assertAlmostEqual(z.theta, 0.4)

    def test_rollout_matches_steps(self):
        inputs = [(1.0, 0.2), (2.0, -0.1), (0.5, 0.0)]
        states = rollout(EgoState(0, 0, 0), inputs, 0.2)
        z = EgoState(0, 0, 0)
        for v, omega in inputs:
            z = unicycle_step(z, ControlInput(v, omega), 0.2)
        np.testing.assert_allclose(states[-1], z.as_array())
        self.assertEqual(states.shape, (4, 3))

    def test_non_finite_state_rejected(self):
        with self.assertRaises(ValidationError):
            EgoState(math.nan, 0, 0)

    def test_input_box(self):
        self.assertTrue(ControlInput(10, -1).within((0, 10), (-1, 1)))
        self.assertFalse(ControlInput(10.5, 0).within((0, 10), (-1, 1)))
        self.assertTrue(ControlInput(10 + 1e-13, 0).within((0, 10), (-1, 1), tol=1e-12))

    def test_output_map(self):
        cfg, speed = output(EgoState(1.0, 2.0, 0.3), ControlInput(4.0, 0.1))
        self.assertEqual(cfg, Configuration(1.0, 2.0, 0.3))
        self.assertEqual(speed, 4.0)


class ReferencePathTests(SimpleTestCase):
    """Test localization, progress and the path-following error"""

    def test_localize_on_sample(self):
        path = straight_path()
        lam = localize_on_path(path, Configuration(path.x[300], path.y[300]))
        self.assertEqual(lam, path.lambdas[300])

    def test_localize_tie_takes_smaller_lambda(self):
        path = ReferencePath(
            lambdas=np.array([0.0, 1.0, 2.0]),
            x=np.array([0.0, 1.0, 2.0]),
            y=np.zeros(3),
            theta=np.zeros(3),
            v_ref=1.0,
            arc_per_lambda=1.0,
        )
        self.assertEqual(localize_on_path(path, Configuration(0.5, 0.0)), 0.0)

    def test_localize_finds_perpendicular_foot(self):
        path = ReferencePath.straight((0.0, 0.0), 0.0, 10.0, v_ref=6.0)
        lam = localize_on_path(path, Configuration(3.7, 1.0, 0.0))
        self.assertAlmostEqual(path.point(lam)[0], 3.7, delta=1e-6)

    def test_lambda_scaling(self):
        path = straight_path(10.0)
        self.assertAlmostEqual(path.domain[1], 50.0)
        self.assertAlmostEqual(path.length, 10.0)

    def test_waypoint_validation(self):
        with self.assertRaises(ValidationError):
            ReferencePath.from_waypoints([(0, 0)], v_ref=1.0)
        with self.assertRaises(ValidationError) as ctx:
            ReferencePath.from_waypoints([(0, 0), (0, 0), (1, 0)], v_ref=1.0)
        self.assertEqual(ctx.exception.code, 'irregular_path')

    def test_polyline_heading(self):
        path = ReferencePath.from_waypoints([(0, 0), (10, 0), (10, 10)], v_ref=1.0)
        self.assertAlmostEqual(path.point(10.0)[2], 0.0)
        self.assertAlmostEqual(path.point(path.domain[1])[2], math.pi / 2)

    def test_advance_progress(self):
        self.assertAlmostEqual(advance_progress(3.0, 6.0, 0.4, 0.4), 9.0)
        self.assertAlmostEqual(advance_progress(3.0, 6.0, math.pi / 2, 0.0), 3.0)
        self.assertAlmostEqual(advance_progress(0.0, 6.0, 0.1, 0.0), 5.97002, places=5)

    def test_advance_progress_clipped(self):
        self.assertEqual(advance_progress(9.0, 6.0, 0.0, 0.0, (0.0, 10.0)), 10.0)

    def test_aligned_progress_matches_reference_speed(self):
        path = straight_path()
        lam = 0.0
        for _ in range(5):
            lam = advance_progress(lam, path.v_ref, 0.0, 0.0, path.domain)
        self.assertAlmostEqual(lam, 5 * path.v_ref)

    def test_path_error(self):
        path = straight_path()
        np.testing.assert_allclose(
            path_error(Configuration(1.2, 0.0, 0.0), 6.0, path, 6.0), np.zeros(4), atol=1e-12
        )
        np.testing.assert_allclose(
            path_error(Configuration(1.2, 1.0, 0.0), 6.0, path, 6.0), [0, 1, 0, 0], atol=1e-12
        )
        e = path_error(Configuration(1.2, 0.0, 2 * math.pi), 6.0, path, 6.0)
        self.assertAlmostEqual(e[2], 0.0)

    def test_stage_cost(self):
        self.assertEqual(stage_cost(np.zeros(4), WEIGHTS), 0.0)
        self.assertEqual(stage_cost([1, 0, 0, 0], WEIGHTS), 1.0)
        self.assertEqual(stage_cost([0, 0, 0, 1], WEIGHTS), 10.0)
        self.assertEqual(stage_cost([0, 0, 0, 1], np.diag(WEIGHTS)), 10.0)


class SmpcConfigTests(SimpleTestCase):

    def test_defaults_follow_overtaking_setup(self):
        cfg = SmpcConfig()
        self.assertEqual(cfg.horizon, 10)
        self.assertEqual(cfg.sample_time, 0.2)
        self.assertEqual(cfg.weights, WEIGHTS)
        self.assertTrue(cfg.chance_constrained)
        self.assertEqual(len(cfg.bounds), 20)

    def test_invalid_values(self):
        for kwargs in ({'horizon': 0}, {'sample_time': 0}, {'weights': (1, 1, 0, 1)},
                       {'v_bounds': (5, 1)}, {'poc_tolerance': 0}):
            with self.subTest(**kwargs), self.assertRaises(ValidationError):
                SmpcConfig(**kwargs)

    def test_tolerance_of_one_disables_constraint(self):
        self.assertFalse(SmpcConfig(poc_tolerance=1.0).chance_constrained)


class SolveSmpcTests(SimpleTestCase):
    """Test the chance-constrained path-following planner"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.bank = init_estimator_bank(CAR, CAR, 3, 3, levels=(20, 40))
        cls.backend = AnalyticPocBackend(cls.bank)

    def test_unconstrained_tracking(self):
        cfg = SmpcConfig()
        path = straight_path()
        plan = solve_smpc(
            EgoState(0, 0, 0), 0.0, world_beliefs(500.0, 500.0, cfg), self.backend, cfg, path
        )
        self.assertNotEqual(plan.status, PlanStatus.INFEASIBLE)
        x, y, theta = plan.states[-1]
        terminal = path_error(Configuration(x, y, theta), plan.inputs[-1, 0], path, plan.progress[-1])
        self.assertLess(np.linalg.norm(terminal), 1e-3)
        np.testing.assert_allclose(plan.poc, 0.0)

    def test_vacuous_tolerance_ignores_object(self):
        path = straight_path()
        free = SmpcConfig(poc_tolerance=1.0)
        blocked = solve_smpc(
            EgoState(0, 0, 0), 0.0, world_beliefs(8.0, 0.0, free), self.backend, free, path
        )
        open_road = solve_smpc(
            EgoState(0, 0, 0), 0.0, world_beliefs(500.0, 500.0, free), self.backend, free, path
        )
        np.testing.assert_allclose(blocked.inputs, open_road.inputs, atol=1e-6)
        self.assertGreater(blocked.poc.max(), 0.2)

    def test_blocked_path_respects_tolerance(self):
        cfg = SmpcConfig(horizon=6)
        plan = solve_smpc(
            EgoState(0, 0, 0), 0.0, world_beliefs(8.0, 0.0, cfg), self.backend, cfg, straight_path()
        )
        self.assertTrue(plan.feasible)
        self.assertTrue((plan.poc <= cfg.poc_tolerance + 1e-6).all())
        self.assertTrue((plan.inputs[:, 0] >= 0).all())
        self.assertTrue((plan.inputs[:, 0] <= 10).all())

    def test_identical_inputs_identical_plans(self):
        cfg = SmpcConfig(horizon=6)
        beliefs = world_beliefs(8.0, 0.0, cfg)
        first = solve_smpc(EgoState(0, 0, 0), 0.0, beliefs, self.backend, cfg, straight_path())
        second = solve_smpc(EgoState(0, 0, 0), 0.0, beliefs, self.backend, cfg, straight_path())
        self.assertTrue(np.array_equal(first.inputs, second.inputs))
        self.assertTrue(np.array_equal(first.poc, second.poc))
        self.assertEqual(first.status, second.status)

    def test_uncertifiable_plan_is_infeasible(self):
        cfg = SmpcConfig(horizon=3)
        plan = solve_smpc(
            EgoState(0, 0, 0), 0.0, world_beliefs(500.0, 0.0, cfg),
            ConstantBackend(0.5), cfg, straight_path(),
        )
        self.assertEqual(plan.status, PlanStatus.INFEASIBLE)
        self.assertFalse(plan.feasible)
        np.testing.assert_allclose(plan.poc, 0.5)

    def test_inputs_outside_box_are_not_certified(self):
        cfg = SmpcConfig(horizon=3)
        problem = SmpcProblem(
            EgoState(0, 0, 0), 0.0, world_beliefs(500.0, 0.0, cfg), ConstantBackend(0.0), cfg,
            straight_path(),
        )
        inside = SimpleNamespace(inputs=np.array([[5.0, 0.0]] * 3), poc=np.zeros(3))
        too_fast = SimpleNamespace(
            inputs=np.array([[5.0, 0.0], [10.5, 0.0], [5.0, 0.0]]), poc=np.zeros(3)
        )
        self.assertTrue(problem.certified(inside))
        self.assertFalse(problem.certified(too_fast))

    def test_belief_count_must_match_horizon(self):
        cfg = SmpcConfig(horizon=4)
        with self.assertRaises(ValidationError):
            solve_smpc(
                EgoState(0, 0, 0), 0.0, world_beliefs(500.0, 0.0, SmpcConfig(horizon=3)),
                self.backend, cfg, straight_path(),
            )


class RecedingHorizonTests(SimpleTestCase):
    """Test the closed loop"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.backend = AnalyticPocBackend(init_estimator_bank(CAR, CAR, 3, 3, levels=(20,)))

    def test_scripted_object_moves_linearly(self):
        obj = ScriptedObject(Configuration(20.0, 10.0, 0.0), 2.0, 0.0, 0.2)
        for k in (0, 1, 7, 30):
            cfg = obj.at(k)
            self.assertAlmostEqual(cfg.x, 20.0 + 0.4 * k)
            self.assertEqual(cfg.y, 10.0)
        self.assertEqual(len(obj.predict(3, 10)), 10)

    def test_horizon_beliefs_grow(self):
        cfg = SmpcConfig(sigma0=(0.1, 0.1, 0.1), growth=(0.3, 0.3, 0.3))
        beliefs = world_beliefs(0.0, 0.0, cfg)
        np.testing.assert_allclose(beliefs[0].sigma, (0.4, 0.4, 0.4))
        np.testing.assert_allclose(beliefs[-1].sigma, (3.1, 3.1, 3.1))

    def test_static_world_tracking(self):
        cfg = SmpcConfig()
        obj = ScriptedObject(Configuration(500.0, 500.0, 0.0), 0.0, 0.0, cfg.sample_time)
        log = receding_horizon_run(EgoState(0, 0, 0), straight_path(), obj, self.backend, cfg, 15)
        self.assertEqual(log.steps, 15)
        self.assertEqual(log.infeasible_steps, 0)
        for row in log.rows:
            self.assertLess(abs(row['y_e']), 1e-2)
            self.assertLess(abs(row['v_e'] - 6.0), 1e-2)

    def test_repeat_runs_identical(self):
        cfg = SmpcConfig()
        runs = []
        for _ in range(2):
            obj = ScriptedObject(Configuration(500.0, 500.0, 0.0), 0.0, 0.0, cfg.sample_time)
            runs.append(receding_horizon_run(EgoState(0, 0.5, 0), straight_path(), obj, self.backend, cfg, 5))
        self.assertEqual(runs[0].rows, runs[1].rows)

    def test_stops_on_infeasible(self):
        cfg = SmpcConfig(horizon=3)
        obj = ScriptedObject(Configuration(500.0, 0.0, 0.0), 0.0, 0.0, cfg.sample_time)
        log = receding_horizon_run(EgoState(0, 0, 0), straight_path(), obj, ConstantBackend(0.5), cfg, 5)
        self.assertEqual(log.steps, 1)
        self.assertEqual(log.infeasible_steps, 1)
        self.assertFalse(log.completed)
        self.assertEqual(log.rows[0]['status'], 'infeasible')

    def test_continues_when_asked(self):
        cfg = SmpcConfig(horizon=3)
        obj = ScriptedObject(Configuration(500.0, 0.0, 0.0), 0.0, 0.0, cfg.sample_time)
        log = receding_horizon_run(
            EgoState(0, 0, 0), straight_path(), obj, ConstantBackend(0.5), cfg, 3,
            stop_on_infeasible=False,
        )
        self.assertEqual(log.steps, 3)
        self.assertEqual(log.infeasible_steps, 3)

    @tag('slow')
    def test_overtaking_low_uncertainty(self):
        cfg = SmpcConfig(sigma0=(0.1, 0.1, 0.1), growth=(0.01, 0.01, 0.01))
        path = ReferencePath.straight((0.0, 10.0), 0.0, 400.0, v_ref=6.0)
        obj = ScriptedObject(Configuration(20.0, 10.0, 0.0), 2.0, 0.0, cfg.sample_time)
        backend = AnalyticPocBackend(init_estimator_bank(CAR, CAR, 3, 3))
        log = receding_horizon_run(EgoState(0, 10, 0), path, obj, backend, cfg, 60)
        self.assertEqual(log.infeasible_steps, 0)
        self.assertTrue(log.completed)
        self.assertLessEqual(log.max_poc(), 0.2 + 1e-6)
