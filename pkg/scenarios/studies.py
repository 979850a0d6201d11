"""
The experiments: POC along scripted encounters, the runtime benchmark, the
accuracy study and the overtaking comparison.

Each study returns a report object that carries its CSV tables and a JSON
summary; the management commands only write them out.
"""
import itertools
import logging
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from collision.estimator import init_estimator, init_estimator_bank
from collision.gaussian import GaussianBelief, HeadingTruncation
from collision.oracle import SeededSampler, mcs_poc
from core.conf import engine_settings
from planner.dynamics import EgoState
from planner.simulation import LOG_COLUMNS, receding_horizon_run, rows_as_table
from planner.smpc import AnalyticPocBackend, MonteCarloPocBackend

from .specs import CAR
from .uncertainty import logistic_sigma

logger = logging.getLogger(__name__)

WARMUP_EVALUATIONS = 10


def _clock_ms(func, *args):
    started = time.perf_counter()
    value = func(*args)
    return value, 1e3 * (time.perf_counter() - started)


def median_of_means(samples, batches):
    """Median over ``batches`` contiguous batch means."""
    chunks = [chunk for chunk in np.array_split(np.asarray(samples, dtype=float), batches) if len(chunk)]
    return float(statistics.median(float(chunk.mean()) for chunk in chunks))


# POC along a scenario

@dataclass
class ErrorReport:
    name: str
    steps: int
    sample_time: float
    circle_counts: tuple
    oracle_samples: int
    seed: int
    times: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    sigmas: list = field(default_factory=list)
    analytic: dict = field(default_factory=dict)
    oracle: list = field(default_factory=list)
    oracle_std: list = field(default_factory=list)
    init_ms: dict = field(default_factory=dict)
    eval_ms: dict = field(default_factory=dict)
    oracle_ms: float = 0.0

    @property
    def max_oracle_std(self):
        return max(self.oracle_std, default=0.0)

    def delta_e(self, n):
        """Mean over the run of analytic minus oracle POC."""
        return float(np.mean(np.asarray(self.analytic[n]) - np.asarray(self.oracle)))

    def peak(self, n):
        return float(max(self.analytic[n]))

    def peak_gap(self, coarse, fine):
        """Largest step-wise excess of the ``coarse`` curve over the ``fine`` one."""
        return float(np.max(np.asarray(self.analytic[coarse]) - np.asarray(self.analytic[fine])))

    def over_approximates(self, k=3.0):
        return all(self.delta_e(n) >= -k * self.max_oracle_std for n in self.circle_counts)

    def columns(self):
        return (
            ('t', 'distance', 'sigma_x', 'sigma_y', 'sigma_theta')
            + tuple(f'poc_{n}' for n in self.circle_counts)
            + ('oracle', 'oracle_std')
        )

    def table(self):
        for k in range(len(self.times)):
            yield (
                [self.times[k], self.distances[k], *self.sigmas[k]]
                + [self.analytic[n][k] for n in self.circle_counts]
                + [self.oracle[k], self.oracle_std[k]]
            )

    def summary(self):
        ordered = sorted(self.circle_counts)
        return {
            'name': self.name,
            'steps': self.steps,
            'sample_time': self.sample_time,
            'oracle_samples': self.oracle_samples,
            'seed': self.seed,
            'delta_e': {str(n): self.delta_e(n) for n in self.circle_counts},
            'peak_poc': {str(n): self.peak(n) for n in self.circle_counts},
            'peak_oracle': float(max(self.oracle, default=0.0)),
            'peak_gap': {
                f'{coarse}-{fine}': self.peak_gap(coarse, fine)
                for coarse, fine in zip(ordered, ordered[1:])
            },
            'max_oracle_std': self.max_oracle_std,
            'over_approximates': self.over_approximates(),
            'init_ms': {str(n): v for n, v in self.init_ms.items()},
            'eval_ms': {str(n): v for n, v in self.eval_ms.items()},
            'oracle_ms': self.oracle_ms,
        }


def run_poc_scenario(spec, circle_counts=(1, 2, 3), oracle_samples=None, seed=None, levels=None):
    """
    Propagate both vehicles, take the ground-truth relative configuration as
    the belief mean with a distance-dependent spread, and compare each
    circle count against the rectangle oracle.
    """
    settings = engine_settings()
    oracle_samples = int(oracle_samples or settings['ORACLE_SAMPLES'])
    seed = int(settings['SEED'] if seed is None else seed)
    circle_counts = tuple(circle_counts)
    if not circle_counts:
        raise ValidationError('at least one circle count is required', code='invalid_circle_count')

    report = ErrorReport(
        name=spec.name, steps=spec.steps, sample_time=spec.sample_time,
        circle_counts=circle_counts, oracle_samples=oracle_samples, seed=seed,
    )
    banks = {}
    for n in circle_counts:
        banks[n], report.init_ms[n] = _clock_ms(
            init_estimator_bank, spec.ego_footprint, spec.obj_footprint, n, n, levels
        )
        report.analytic[n] = []
    eval_ms = {n: 0.0 for n in circle_counts}
    sampler = SeededSampler(seed)
    ego = spec.ego.scripted(spec.sample_time)
    obj = spec.obj.scripted(spec.sample_time)
    trunc = HeadingTruncation(settings['N_BETA'])

    for k in range(spec.steps):
        ego_cfg, obj_cfg = ego.at(k), obj.at(k)
        distance = math.hypot(ego_cfg.x - obj_cfg.x, ego_cfg.y - obj_cfg.y)
        sigma = logistic_sigma(distance, spec.uncertainty)
        belief = GaussianBelief(mu=obj_cfg.as_tuple(), sigma=sigma).relative_to(ego_cfg)
        report.times.append(k * spec.sample_time)
        report.distances.append(distance)
        report.sigmas.append(belief.sigma)
        for n in circle_counts:
            poc, elapsed = _clock_ms(banks[n].estimate, belief, trunc)
            report.analytic[n].append(poc)
            eval_ms[n] += elapsed
        result, elapsed = _clock_ms(
            mcs_poc, spec.ego_footprint, spec.obj_footprint, belief, oracle_samples, sampler
        )
        report.oracle.append(result.estimate)
        report.oracle_std.append(result.std_error)
        report.oracle_ms += elapsed

    report.eval_ms = {n: total / spec.steps for n, total in eval_ms.items()}
    report.oracle_ms /= spec.steps
    logger.info(
        'Scenario %s: %s steps, delta_e %s',
        spec.name, spec.steps, {n: round(report.delta_e(n), 5) for n in circle_counts},
    )
    return report


# runtime benchmark

@dataclass
class BenchReport:
    evaluations: int
    batches: int
    grid: int
    seed: int
    analytic: list = field(default_factory=list)
    mcs: list = field(default_factory=list)

    ANALYTIC_COLUMNS = ('circles', 'grid', 'init_ms', 'eval_ms', 'evaluations')
    MCS_COLUMNS = ('samples', 'eval_ms', 'evaluations')

    def analytic_ms(self, circles):
        return next(row['eval_ms'] for row in self.analytic if row['circles'] == circles)

    def mcs_ms(self, samples):
        return next(row['eval_ms'] for row in self.mcs if row['samples'] == samples)

    def speedup(self, circles=3, samples=10_000):
        """How many times faster the analytic evaluation is than the oracle."""
        try:
            return self.mcs_ms(samples) / self.analytic_ms(circles)
        except (StopIteration, ZeroDivisionError):
            return None

    def summary(self):
        return {
            'evaluations': self.evaluations,
            'batches': self.batches,
            'grid': self.grid,
            'seed': self.seed,
            'analytic_eval_ms': {str(row['circles']): row['eval_ms'] for row in self.analytic},
            'mcs_eval_ms': {str(row['samples']): row['eval_ms'] for row in self.mcs},
            'speedup_3_circles_vs_1e4_samples': self.speedup(),
        }


def random_beliefs(sampler, count, reach=8.0, sigma_range=(0.5, 2.5)):
    """Beliefs with uniformly drawn means and spreads."""
    xy = sampler.uniform(-reach, reach, (count, 2))
    theta = sampler.uniform(0.0, 2 * math.pi, count)
    sigma = sampler.uniform(sigma_range[0], sigma_range[1], (count, 3))
    return [
        GaussianBelief(mu=(xy[i, 0], xy[i, 1], theta[i]), sigma=tuple(sigma[i]))
        for i in range(count)
    ]


def _timed_evaluations(func, beliefs):
    for belief in beliefs[:WARMUP_EVALUATIONS]:
        func(belief)
    timings = []
    for belief in beliefs:
        started = time.perf_counter()
        func(belief)
        timings.append(1e3 * (time.perf_counter() - started))
    return timings


def runtime_benchmark(circle_counts=(1, 2, 3, 4, 5, 6), sample_counts=(100, 1_000, 10_000, 100_000, 1_000_000),
                      evaluations=1_000, batches=5, grid=None, seed=None, ego_fp=None, obj_fp=None,
                      sigma_range=(0.5, 2.5)):
    """
    Time estimator initialisation, analytic evaluation and the oracle on the
    same random beliefs. Spreads are drawn from ``sigma_range``, by default the
    low to high uncertainty levels of the accuracy study. The oracle runs at
    most 10^7 samples per sample count in total, so large sample counts use
    fewer evaluations.
    """
    settings = engine_settings()
    grid = int(grid or settings['GRID_SAMPLES'])
    seed = int(settings['SEED'] if seed is None else seed)
    ego_fp, obj_fp = ego_fp or CAR, obj_fp or CAR
    belief_sampler, oracle_sampler = SeededSampler(seed).spawn(2)
    beliefs = random_beliefs(belief_sampler, evaluations, sigma_range=sigma_range)
    trunc = HeadingTruncation(settings['N_BETA'])
    report = BenchReport(evaluations=evaluations, batches=batches, grid=grid, seed=seed)

    for n in circle_counts:
        est, init_ms = _clock_ms(init_estimator, ego_fp, obj_fp, n, n, grid)
        timings = _timed_evaluations(lambda b: est.estimate(b, trunc), beliefs)
        report.analytic.append({
            'circles': n, 'grid': grid, 'init_ms': init_ms,
            'eval_ms': median_of_means(timings, batches), 'evaluations': len(timings),
        })
        logger.info('Benchmark: %s circles, %.4f ms per evaluation', n, report.analytic[-1]['eval_ms'])

    for samples in sample_counts:
        count = max(batches, min(evaluations, 10_000_000 // samples))
        timings = _timed_evaluations(
            lambda b: mcs_poc(ego_fp, obj_fp, b, samples, oracle_sampler), beliefs[:count]
        )
        report.mcs.append({
            'samples': samples, 'eval_ms': median_of_means(timings, min(batches, count)),
            'evaluations': count,
        })
        logger.info('Benchmark: MCS %s samples, %.4f ms per evaluation', samples, report.mcs[-1]['eval_ms'])
    return report


# accuracy study

@dataclass
class AccuracyReport:
    name: str
    repetitions: int
    seed: int
    rows: list = field(default_factory=list)

    COLUMNS = ('level', 'method', 'circles', 'samples', 'poc', 'std', 'lower_2sigma', 'upper_2sigma')

    def analytic(self, level):
        return {row['circles']: row['poc'] for row in self.rows
                if row['level'] == level and row['method'] == 'analytic'}

    def mcs(self, level):
        return {row['samples']: row for row in self.rows
                if row['level'] == level and row['method'] == 'mcs'}

    def levels(self):
        return list(dict.fromkeys(row['level'] for row in self.rows))

    def dispersion_ratio(self, level):
        """Spread of the smallest sample count over that of the largest."""
        mcs = self.mcs(level)
        if len(mcs) < 2:
            return None
        low, high = mcs[min(mcs)], mcs[max(mcs)]
        return low['std'] / high['std'] if high['std'] > 0 else None

    def covers_mcs(self, level):
        """Whether every analytic value is above every MCS mean minus two std."""
        floor = max(row['lower_2sigma'] for row in self.mcs(level).values())
        return all(poc >= floor for poc in self.analytic(level).values())

    def monotone_violations(self, level, tolerance=1e-3):
        """Circle counts whose POC rose by more than ``tolerance`` over the previous count."""
        analytic = self.analytic(level)
        counts = sorted(analytic)
        return [n for prev, n in zip(counts, counts[1:]) if analytic[n] > analytic[prev] + tolerance]

    def summary(self):
        return {
            'name': self.name,
            'repetitions': self.repetitions,
            'seed': self.seed,
            'levels': {
                level: {
                    'analytic': {str(n): poc for n, poc in self.analytic(level).items()},
                    'mcs_mean': {str(s): row['poc'] for s, row in self.mcs(level).items()},
                    'mcs_std': {str(s): row['std'] for s, row in self.mcs(level).items()},
                    'dispersion_ratio': self.dispersion_ratio(level),
                    'covers_mcs': self.covers_mcs(level),
                    'monotone_violations': self.monotone_violations(level),
                }
                for level in self.levels()
            },
        }


def accuracy_study(spec, repetitions=None, sample_counts=None, seed=None, levels=None):
    """
    Analytic POC per circle count against repeated oracle estimates at each
    uncertainty level of ``spec``.
    """
    settings = engine_settings()
    repetitions = int(repetitions or spec.repetitions)
    sample_counts = tuple(sample_counts or spec.sample_counts)
    seed = int(settings['SEED'] if seed is None else seed)
    trunc = HeadingTruncation(settings['N_BETA'])
    banks = {
        n: init_estimator_bank(spec.ego_footprint, spec.obj_footprint, n, n, levels)
        for n in spec.circle_counts
    }
    samplers = iter(SeededSampler(seed).spawn(len(spec.levels) * len(sample_counts)))
    report = AccuracyReport(name=spec.name, repetitions=repetitions, seed=seed)

    for level, sigma in spec.levels.items():
        belief = GaussianBelief(mu=spec.obj.as_tuple(), sigma=sigma).relative_to(spec.ego)
        for n, bank in banks.items():
            report.rows.append({
                'level': level, 'method': 'analytic', 'circles': n, 'samples': None,
                'poc': bank.estimate(belief, trunc), 'std': 0.0,
                'lower_2sigma': None, 'upper_2sigma': None,
            })
        for samples in sample_counts:
            sampler = next(samplers)
            estimates = np.array([
                mcs_poc(spec.ego_footprint, spec.obj_footprint, belief, samples, sampler).estimate
                for _ in range(repetitions)
            ])
            mean, std = float(estimates.mean()), float(estimates.std(ddof=1))
            report.rows.append({
                'level': level, 'method': 'mcs', 'circles': None, 'samples': samples,
                'poc': mean, 'std': std,
                'lower_2sigma': mean - 2 * std, 'upper_2sigma': mean + 2 * std,
            })
        logger.info('Accuracy level %s done (%s repetitions)', level, repetitions)
    return report


# overtaking comparison

@dataclass
class OvertakingReport:
    name: str
    analytic: dict = field(default_factory=dict)
    repeat_identical: dict = field(default_factory=dict)
    mcs: list = field(default_factory=list)
    mcs_level: str = ''
    mcs_samples: int = 0
    seed: int = 0

    COLUMNS = LOG_COLUMNS

    def min_distances(self):
        return {level: log.min_distance for level, log in self.analytic.items()}

    def mcs_infeasible_runs(self):
        return sum(1 for log in self.mcs if log.infeasible_steps)

    def mcs_min_pairwise_gap(self):
        """Smallest, over run pairs, of the largest pointwise distance between trajectories."""
        gaps = []
        for a, b in itertools.combinations(self.mcs, 2):
            n = min(a.steps, b.steps)
            if n == 0:
                continue
            pa, pb = np.asarray(a.positions()[:n]), np.asarray(b.positions()[:n])
            gaps.append(float(np.max(np.hypot(*(pa - pb).T))))
        return min(gaps) if gaps else None

    def logs(self):
        """(file stem, log) of every run."""
        for level, log in self.analytic.items():
            yield f'analytic_{level}', log
        for i, log in enumerate(self.mcs):
            yield f'mcs_{self.mcs_level}_run{i}', log

    def summary(self):
        return {
            'name': self.name,
            'analytic': {level: log.summary() for level, log in self.analytic.items()},
            'analytic_repeat_identical': self.repeat_identical,
            'mcs_level': self.mcs_level,
            'mcs_samples': self.mcs_samples,
            'seed': self.seed,
            'mcs': [log.summary() for log in self.mcs],
            'mcs_infeasible_runs': self.mcs_infeasible_runs(),
            'mcs_min_pairwise_gap': self.mcs_min_pairwise_gap(),
        }


def smpc_backend(spec, backend='analytic', sampler=None, samples=None, levels=None):
    if backend == 'analytic':
        return AnalyticPocBackend(init_estimator_bank(spec.ego_footprint, spec.obj_footprint, 3, 3, levels))
    if backend == 'mcs':
        return MonteCarloPocBackend(
            spec.ego_footprint, spec.obj_footprint, int(samples or spec.mcs_samples),
            sampler or SeededSampler(spec.seed),
        )
    raise ValidationError("unknown backend '%(name)s'", code='invalid_backend', params={'name': backend})


def run_smpc_scenario(spec, backend, level=None, steps=None, stop_on_infeasible=True):
    """One closed-loop run of ``spec`` at uncertainty ``level``."""
    if level is not None and level not in spec.levels:
        raise ValidationError(
            "unknown level '%(level)s'", code='invalid_level', params={'level': level}
        )
    return receding_horizon_run(
        EgoState.from_configuration(spec.ego_start), spec.build_path(), spec.scripted_object(),
        backend, spec.smpc_config(level), int(steps or spec.steps), stop_on_infeasible,
    )


def overtaking_comparison(spec, levels=None, mcs_runs=None, mcs_samples=None, seed=None,
                          repeat=True, include_mcs=True, steps=None, grid_levels=None):
    """
    Closed-loop runs with the analytic backend at every uncertainty level
    (optionally twice, to check they repeat exactly) and seeded Monte-Carlo
    runs at the scenario's default level. Monte-Carlo runs continue past
    infeasible steps so that trajectories can be compared over the full run.
    """
    levels = list(levels or spec.levels)
    seed = int(spec.seed if seed is None else seed)
    mcs_runs = int(mcs_runs or spec.mcs_runs)
    mcs_samples = int(mcs_samples or spec.mcs_samples)
    analytic = smpc_backend(spec, 'analytic', levels=grid_levels)
    report = OvertakingReport(name=spec.name, mcs_level=spec.level, mcs_samples=mcs_samples, seed=seed)

    for level in levels:
        log = run_smpc_scenario(spec, analytic, level, steps)
        report.analytic[level] = log
        if repeat:
            again = run_smpc_scenario(spec, analytic, level, steps)
            report.repeat_identical[level] = rows_as_table(again) == rows_as_table(log)

    if include_mcs:
        for i, sampler in enumerate(SeededSampler(seed).spawn(mcs_runs)):
            backend = smpc_backend(spec, 'mcs', sampler=sampler, samples=mcs_samples)
            report.mcs.append(run_smpc_scenario(spec, backend, spec.level, steps, stop_on_infeasible=False))
            logger.info('MCS overtaking run %s: %s infeasible steps', i, report.mcs[-1].infeasible_steps)
    return report
