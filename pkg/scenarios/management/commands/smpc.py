"""
One closed-loop SMPC run.

Usage:
    python manage.py smpc --spec overtaking --level low
    python manage.py smpc --spec overtaking --backend mcs --samples 1000 --seed 4 --out output/mcs
"""
from core.commands import EngineCommand
from core.models import RunRecord

from collision.oracle import SeededSampler
from planner.simulation import LOG_COLUMNS
from scenarios.loader import load_scenario
from scenarios.serializers import SmpcRunSerializer
from scenarios.studies import run_smpc_scenario, smpc_backend


class Command(EngineCommand):
    help = 'Run the chance-constrained path-following MPC on a scenario'
    command_name = RunRecord.Command.SMPC
    writes_files = True

    def add_engine_arguments(self, parser):
        parser.add_argument('--spec', default='overtaking', help='SMPC scenario file or library name')
        parser.add_argument(
            '--backend',
            choices=SmpcRunSerializer.BACKENDS,
            help='POC constraint evaluated analytically or by sampling (default: analytic)'
        )
        parser.add_argument('--level', help='Uncertainty level of the scenario (default: the scenario\'s level)')
        parser.add_argument('--steps', type=int, help='Planning steps (default: from the scenario file)')
        parser.add_argument('--samples', type=int, help='MCS samples per POC evaluation (default: from the scenario file)')
        parser.add_argument('--seed', type=int, help='MCS seed (default: from the scenario file)')
        parser.add_argument(
            '--continue-infeasible',
            action='store_true',
            dest='continue_infeasible',
            help='Keep running after an infeasible step'
        )

    def run(self, options, manifest):
        data = self.validated(SmpcRunSerializer, {
            name: options[name] for name in ('backend', 'level', 'steps', 'samples', 'seed')
        })
        spec = load_scenario(options['spec'], kind='smpc')
        seed = data.get('seed', spec.seed)
        backend = smpc_backend(spec, data['backend'], sampler=SeededSampler(seed), samples=data.get('samples'))
        level = data.get('level', spec.level)
        log = run_smpc_scenario(
            spec, backend, level, data.get('steps'),
            stop_on_infeasible=not options['continue_infeasible'],
        )
        summary = {'backend': data['backend'], 'level': level, **log.summary()}
        manifest.seed = seed if data['backend'] == 'mcs' else None
        manifest.config = {
            'scenario': spec.to_json(),
            'backend': data['backend'],
            'level': level,
            'steps': data.get('steps', spec.steps),
            'samples': data.get('samples', spec.mcs_samples),
        }
        manifest.summary = summary
        if log.infeasible_steps:
            manifest.status = RunRecord.RunStatus.INFEASIBLE
        self.write_csv(manifest, options, 'trajectory.csv', LOG_COLUMNS, log.rows)
        self.write_json(manifest, options, 'summary.json', summary)
        return summary
