"""
Path-following stochastic MPC with a per-step collision-probability
constraint.

The optimal control problem is solved by single shooting over the input
sequence with SLSQP. The chance constraint is evaluated by a POC backend, and
every plan is certified against it again after the solver returns.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from django.db import models
from scipy.optimize import minimize

from collision.gaussian import HeadingTruncation
from collision.oracle import mcs_poc
from geometry.polar import Configuration, wrap_to_pi

from .dynamics import ControlInput, EgoState, rollout
from .path import advance_progress, path_error, stage_cost

logger = logging.getLogger(__name__)

# beliefs further than this many sigmas outside rho_bar contribute nothing
FAR_FIELD_SIGMAS = 10.0


class PlanStatus(models.TextChoices):
    OPTIMAL = 'optimal', 'Optimal'
    FEASIBLE = 'feasible', 'Feasible (suboptimal)'
    INFEASIBLE = 'infeasible', 'Infeasible'


@dataclass(frozen=True)
class SmpcConfig:
    horizon: int = 10
    sample_time: float = 0.2
    weights: tuple = (1.0, 1.0, 10.0, 10.0)
    poc_tolerance: float = 0.2
    v_bounds: tuple = (0.0, 10.0)
    omega_bounds: tuple = (-1.0, 1.0)
    sigma0: tuple = (0.1, 0.1, 0.1)
    growth: tuple = (0.01, 0.01, 0.01)
    tightening: float = 1e-3
    fd_step: float = 1e-4
    tolerance: float = 1e-4
    certify_slack: float = 1e-6
    max_iter: int = 100

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValidationError('horizon must be a positive integer', code='invalid_config')
        if not self.sample_time > 0:
            raise ValidationError('sample_time must be positive', code='invalid_config')
        if len(self.weights) != 4 or min(self.weights) <= 0:
            raise ValidationError('weights must be four positive numbers', code='invalid_config')
        if not 0 < self.poc_tolerance:
            raise ValidationError('poc_tolerance must be positive', code='invalid_config')
        for name in ('v_bounds', 'omega_bounds'):
            low, high = getattr(self, name)
            if low > high:
                raise ValidationError(
                    '%(field)s lower bound exceeds upper bound', code='invalid_config',
                    params={'field': name},
                )
        if min(self.sigma0) <= 0 or min(self.growth) < 0:
            raise ValidationError('sigma0 must be positive and growth non-negative', code='invalid_config')

    @property
    def chance_constrained(self):
        """A tolerance of 1 or more makes the collision constraint vacuous."""
        return self.poc_tolerance < 1.0

    @property
    def bounds(self):
        return [self.v_bounds, self.omega_bounds] * self.horizon


@dataclass
class PlanResult:
    inputs: np.ndarray
    states: np.ndarray
    progress: np.ndarray
    poc: np.ndarray
    status: str
    cost: float
    start: str = ''
    iterations: int = 0
    message: str = ''

    @property
    def feasible(self):
        return self.status != PlanStatus.INFEASIBLE

    @property
    def first_input(self):
        return tuple(float(v) for v in self.inputs[0])


class AnalyticPocBackend:
    """POC of ego-frame beliefs from a ``PocEstimator`` or ``PocEstimatorBank``."""

    name = 'analytic'
    gradient_step = None

    def __init__(self, estimator, trunc=None):
        self.estimator = estimator
        self.trunc = trunc or HeadingTruncation()

    def __call__(self, belief):
        if math.hypot(belief.mu[0], belief.mu[1]) - FAR_FIELD_SIGMAS * belief.sigma_max > self.estimator.rho_bar:
            return 0.0
        return self.estimator.estimate(belief, self.trunc)


class MonteCarloPocBackend:
    """Rectangle Monte-Carlo POC; every call draws fresh samples from ``sampler``."""

    name = 'mcs'
    # counts are piecewise constant in the inputs; 1e-4 steps would see no change
    gradient_step = 0.05

    def __init__(self, ego_fp, obj_fp, n_samples, sampler):
        self.ego_fp = ego_fp
        self.obj_fp = obj_fp
        self.n_samples = n_samples
        self.sampler = sampler
        self.reach = math.hypot(0.5 * ego_fp.length, 0.5 * ego_fp.width) + math.hypot(
            0.5 * obj_fp.length, 0.5 * obj_fp.width)

    def __call__(self, belief):
        if math.hypot(belief.mu[0], belief.mu[1]) - FAR_FIELD_SIGMAS * belief.sigma_max > self.reach:
            return 0.0
        return mcs_poc(self.ego_fp, self.obj_fp, belief, self.n_samples, self.sampler).estimate


class SmpcProblem:
    """
    One planning problem: initial state and progress, world-frame object
    beliefs for the steps k+1..k+N_P and the path to follow.
    """

    def __init__(self, z0, lam0, beliefs, backend, config, path):
        if len(beliefs) != config.horizon:
            raise ValidationError(
                'expected %(want)s beliefs, got %(got)s', code='invalid_beliefs',
                params={'want': config.horizon, 'got': len(beliefs)},
            )
        self.z0 = z0
        self.lam0 = lam0
        self.beliefs = list(beliefs)
        self.backend = backend
        self.config = config
        self.path = path
        self.weights = np.asarray(config.weights, dtype=float)
        self._cache_key = None
        self._cache = None

    def simulate(self, u_flat):
        """States, progress values and stage errors of an input sequence."""
        key = np.asarray(u_flat, dtype=float).tobytes()
        if key == self._cache_key:
            return self._cache
        inputs = np.asarray(u_flat, dtype=float).reshape(-1, 2)
        states = rollout(self.z0, inputs, self.config.sample_time)
        lambdas = np.empty(len(inputs) + 1)
        lambdas[0] = self.lam0
        errors = np.empty((len(inputs), 4))
        domain = self.path.domain
        for n, (v, _) in enumerate(inputs):
            theta_p = self.path.point(lambdas[n])[2]
            lambdas[n + 1] = advance_progress(lambdas[n], v, states[n, 2], theta_p, domain)
            x, y, theta = states[n + 1]
            errors[n] = path_error(Configuration(x, y, theta), v, self.path, lambdas[n + 1])
        self._cache_key, self._cache = key, (states, lambdas, errors)
        return self._cache

    def cost(self, u_flat):
        _, _, errors = self.simulate(u_flat)
        return float(sum(stage_cost(e, self.weights) for e in errors))

    def cost_gradient(self, u_flat):
        u = np.asarray(u_flat, dtype=float)
        h = self.config.fd_step
        grad = np.empty_like(u)
        for j in range(len(u)):
            step = np.zeros_like(u)
            step[j] = h
            grad[j] = (self.cost(u + step) - self.cost(u - step)) / (2 * h)
        return grad

    def _poc_from(self, states, first):
        values = np.zeros(self.config.horizon)
        for n in range(first, self.config.horizon):
            x, y, theta = states[n + 1]
            relative = self.beliefs[n].relative_to(Configuration(x, y, theta))
            values[n] = self.backend(relative)
        return values

    def poc(self, u_flat):
        states, _, _ = self.simulate(u_flat)
        return self._poc_from(states, 0)

    def constraint(self, u_flat):
        margin = self.config.poc_tolerance - self.config.tightening
        return margin - self.poc(u_flat)

    def constraint_jacobian(self, u_flat):
        """Central differences; input m only moves the POC of steps m+1 onwards."""
        u = np.asarray(u_flat, dtype=float)
        h = self.backend.gradient_step or self.config.fd_step
        n_steps = self.config.horizon
        jac = np.zeros((n_steps, len(u)))
        for j in range(len(u)):
            first = j // 2
            step = np.zeros_like(u)
            step[j] = h
            plus = self._poc_from(rollout(self.z0, (u + step).reshape(-1, 2), self.config.sample_time), first)
            minus = self._poc_from(rollout(self.z0, (u - step).reshape(-1, 2), self.config.sample_time), first)
            jac[:, j] = -(plus - minus) / (2 * h)
        return jac

    def project(self, u_flat):
        bounds = np.asarray(self.config.bounds, dtype=float)
        return np.clip(np.asarray(u_flat, dtype=float), bounds[:, 0], bounds[:, 1])

    def evaluate(self, u_flat, status, start='', iterations=0, message=''):
        u = self.project(u_flat)
        states, lambdas, _ = self.simulate(u)
        return PlanResult(
            inputs=u.reshape(-1, 2).copy(),
            states=states.copy(),
            progress=lambdas.copy(),
            poc=self.poc(u),
            status=status,
            cost=self.cost(u),
            start=start,
            iterations=iterations,
            message=message,
        )

    def certified(self, plan):
        """Re-check the chance constraint and input boxes outside the solver."""
        cfg = self.config
        in_box = all(
            ControlInput(v, omega).within(cfg.v_bounds, cfg.omega_bounds, tol=1e-12)
            for v, omega in np.asarray(plan.inputs).reshape(-1, 2)
        )
        if not cfg.chance_constrained:
            return bool(in_box)
        return bool(in_box and (plan.poc <= cfg.poc_tolerance + cfg.certify_slack).all())

    # starting points

    def braking_guess(self):
        return np.tile([self.config.v_bounds[0], 0.0], self.config.horizon)

    def tracking_guess(self):
        """Reference speed with a heading and lateral-offset correction."""
        cfg = self.config
        v = min(max(self.path.v_ref, cfg.v_bounds[0]), cfg.v_bounds[1])
        lookahead = max(5 * v * cfg.sample_time, 1.0)
        z, lam = self.z0, self.lam0
        guess = []
        for _ in range(cfg.horizon):
            x_p, y_p, theta_p = self.path.point(lam)
            lateral = -math.sin(theta_p) * (z.x - x_p) + math.cos(theta_p) * (z.y - y_p)
            heading_error = wrap_to_pi(z.theta - theta_p) + math.atan2(lateral, lookahead)
            omega = min(max(-heading_error / (2 * cfg.sample_time), cfg.omega_bounds[0]), cfg.omega_bounds[1])
            guess.extend((v, omega))
            lam = advance_progress(lam, v, z.theta, theta_p, self.path.domain)
            z = EgoState(
                z.x + cfg.sample_time * v * math.cos(z.theta),
                z.y + cfg.sample_time * v * math.sin(z.theta),
                z.theta + cfg.sample_time * omega,
            )
        return np.asarray(guess)


def shift_plan(inputs):
    """Previous plan moved one step forward, last input repeated."""
    inputs = np.asarray(inputs, dtype=float).reshape(-1, 2)
    return np.vstack((inputs[1:], inputs[-1:])).ravel()


def solve_smpc(z_k, lam_k, object_beliefs, backend, config, path, warm_start=None):
    """
    Plan an input sequence. Starting points are tried in a fixed order (warm
    start, reference tracking, braking); the first plan that certifies wins.
    Without a certified plan the least-violating one is returned as
    infeasible.
    """
    problem = SmpcProblem(z_k, lam_k, object_beliefs, backend, config, path)
    starts = []
    if warm_start is not None:
        starts.append(('warm', problem.project(shift_plan(warm_start))))
    starts.append(('track', problem.tracking_guess()))
    starts.append(('brake', problem.braking_guess()))

    constraints = []
    if config.chance_constrained:
        constraints.append({
            'type': 'ineq', 'fun': problem.constraint, 'jac': problem.constraint_jacobian,
        })

    fallback = None
    for name, u0 in starts:
        result = minimize(
            problem.cost, u0, jac=problem.cost_gradient, method='SLSQP',
            bounds=config.bounds, constraints=constraints,
            options={'maxiter': config.max_iter, 'ftol': config.tolerance * 1e-4},
        )
        status = PlanStatus.OPTIMAL if result.success else PlanStatus.FEASIBLE
        plan = problem.evaluate(result.x, status, name, int(result.nit), str(result.message))
        if problem.certified(plan):
            if name != starts[0][0]:
                logger.warning('SMPC certified from %s start after earlier starts failed', name)
            return plan
        violation = float(np.max(plan.poc) - config.poc_tolerance)
        if fallback is None or violation < fallback[0]:
            fallback = (violation, plan)
        logger.debug('SMPC start %s not certified (max POC excess %.3g)', name, violation)

    # unsolved starting points that already certify
    for name, u0 in starts:
        plan = problem.evaluate(u0, PlanStatus.FEASIBLE, name, 0, 'starting point')
        if problem.certified(plan):
            logger.warning('SMPC solver did not converge; using the %s starting point', name)
            return plan

    plan = fallback[1]
    plan.status = PlanStatus.INFEASIBLE
    logger.warning(
        'SMPC infeasible: no start satisfies POC <= %.3f (best max POC %.4f)',
        config.poc_tolerance, float(np.max(plan.poc)),
    )
    return plan
