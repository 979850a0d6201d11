"""
Closed-loop simulation: the SMPC re-planned at every step against a scripted
object.
"""
import logging
import math
from dataclasses import dataclass, field

from collision.gaussian import GaussianBelief
from scenarios.uncertainty import horizon_sigma

from .dynamics import ControlInput, EgoState, output, unicycle_step
from .path import localize_on_path
from .smpc import PlanStatus, solve_smpc

logger = logging.getLogger(__name__)

LOG_COLUMNS = (
    't', 'x_e', 'y_e', 'theta_e', 'v_e', 'omega_e', 'lambda', 'poc', 'cost', 'status',
    'x_o', 'y_o', 'theta_o',
)


class ScriptedObject:
    """Object driving at constant (v, omega) with the ego's unicycle model."""

    def __init__(self, initial, v, omega, sample_time):
        self.initial = initial
        self.v = float(v)
        self.omega = float(omega)
        self.sample_time = float(sample_time)
        self._states = [EgoState.from_configuration(initial)]

    def at(self, k):
        """Configuration after ``k`` steps."""
        control = ControlInput(self.v, self.omega)
        while len(self._states) <= k:
            self._states.append(unicycle_step(self._states[-1], control, self.sample_time))
        return self._states[k].configuration()

    def predict(self, k, horizon):
        return [self.at(k + n) for n in range(1, horizon + 1)]


@dataclass
class RunLog:
    rows: list = field(default_factory=list)
    infeasible_steps: int = 0
    min_distance: float = math.inf
    completed: bool = True

    @property
    def steps(self):
        return len(self.rows)

    def positions(self):
        return [(row['x_e'], row['y_e']) for row in self.rows]

    def max_poc(self):
        return max((row['poc'] for row in self.rows), default=0.0)

    def summary(self):
        return {
            'steps': self.steps,
            'infeasible_steps': self.infeasible_steps,
            'min_distance': self.min_distance,
            'max_poc': self.max_poc(),
            'completed': self.completed,
        }


def predicted_beliefs(obj, k, config):
    """World-frame beliefs over the object for steps k+1..k+N_P."""
    beliefs = []
    for n, cfg in enumerate(obj.predict(k, config.horizon), start=1):
        beliefs.append(GaussianBelief(
            mu=cfg.as_tuple(),
            sigma=horizon_sigma(config.sigma0, config.growth, n),
        ))
    return beliefs


def receding_horizon_run(z0, path, obj, backend, config, steps, stop_on_infeasible=True):
    """
    Run ``steps`` planning cycles. Each cycle localizes the ego on the path,
    solves the SMPC and applies the first input of the plan. With
    ``stop_on_infeasible`` the run ends at the first infeasible cycle;
    otherwise the least-violating plan is applied and the run continues.
    """
    log = RunLog()
    z = z0
    warm = None
    for k in range(steps):
        ego_cfg = z.configuration()
        obj_cfg = obj.at(k)
        log.min_distance = min(log.min_distance, math.hypot(ego_cfg.x - obj_cfg.x, ego_cfg.y - obj_cfg.y))
        lam = localize_on_path(path, ego_cfg)
        plan = solve_smpc(z, lam, predicted_beliefs(obj, k, config), backend, config, path, warm)
        u = ControlInput(*plan.first_input)
        ego_out, speed = output(z, u)
        log.rows.append({
            't': k * config.sample_time,
            'x_e': ego_out.x,
            'y_e': ego_out.y,
            'theta_e': ego_out.theta,
            'v_e': speed,
            'omega_e': u.omega,
            'lambda': lam,
            'poc': float(plan.poc.max()),
            'cost': plan.cost,
            'status': str(plan.status),
            'x_o': obj_cfg.x,
            'y_o': obj_cfg.y,
            'theta_o': obj_cfg.theta,
        })
        if plan.status == PlanStatus.INFEASIBLE:
            log.infeasible_steps += 1
            if stop_on_infeasible:
                logger.warning('Run stopped at step %s: SMPC infeasible', k)
                log.completed = False
                break
        warm = plan.inputs
        z = unicycle_step(z, u, config.sample_time)
    logger.info(
        'Receding-horizon run: %s steps, %s infeasible, min distance %.3f m',
        log.steps, log.infeasible_steps, log.min_distance,
    )
    return log


def rows_as_table(log):
    return [[row[column] for column in LOG_COLUMNS] for row in log.rows]
