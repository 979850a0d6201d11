"""
Analytic SMPC at every uncertainty level against seeded Monte-Carlo runs.

Usage:
    python manage.py overtaking
    python manage.py overtaking --runs 8 --samples 1000 --seed 0 --out output/overtaking
"""
from core.commands import EngineCommand
from core.models import RunRecord

from planner.simulation import LOG_COLUMNS
from scenarios.loader import load_scenario
from scenarios.serializers import SmpcRunSerializer
from scenarios.studies import overtaking_comparison


class Command(EngineCommand):
    help = 'Compare overtaking with analytic and Monte-Carlo POC constraints'
    command_name = RunRecord.Command.OVERTAKING
    writes_files = True

    def add_engine_arguments(self, parser):
        parser.add_argument('--spec', default='overtaking', help='SMPC scenario file or library name')
        parser.add_argument('--runs', type=int, help='Seeded Monte-Carlo runs (default: from the scenario file)')
        parser.add_argument('--samples', type=int, help='MCS samples per POC evaluation (default: from the scenario file)')
        parser.add_argument('--steps', type=int, help='Planning steps per run (default: from the scenario file)')
        parser.add_argument('--seed', type=int, help='Seed of the Monte-Carlo runs (default: from the scenario file)')
        parser.add_argument('--skip-mcs', action='store_true', dest='skip_mcs', help='Only run the analytic backend')

    def run(self, options, manifest):
        data = self.validated(SmpcRunSerializer, {
            name: options[name] for name in ('runs', 'samples', 'steps', 'seed')
        })
        spec = load_scenario(options['spec'], kind='smpc')
        report = overtaking_comparison(
            spec,
            mcs_runs=data.get('runs'),
            mcs_samples=data.get('samples'),
            seed=data.get('seed'),
            include_mcs=not options['skip_mcs'],
            steps=data.get('steps'),
        )
        summary = report.summary()
        manifest.seed = report.seed
        manifest.config = {
            'scenario': spec.to_json(),
            'runs': 0 if options['skip_mcs'] else len(report.mcs),
            'samples': report.mcs_samples,
            'steps': data.get('steps', spec.steps),
        }
        manifest.summary = summary
        if any(log.infeasible_steps for log in report.analytic.values()):
            manifest.status = RunRecord.RunStatus.INFEASIBLE
        for stem, log in report.logs():
            self.write_csv(manifest, options, f'{stem}.csv', LOG_COLUMNS, log.rows)
        self.write_json(manifest, options, 'summary.json', summary)
        return summary
