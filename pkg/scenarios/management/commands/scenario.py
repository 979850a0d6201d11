"""
Analytic POC against the rectangle oracle along a scripted encounter.

Usage:
    python manage.py scenario --spec intersection_crash
    python manage.py scenario --spec path/to/scenario.yaml --circles 1,2,3 \\
        --oracle-samples 1000000 --seed 3 --out output/crash
"""
from core.commands import EngineCommand
from core.models import RunRecord

from scenarios.loader import load_scenario
from scenarios.serializers import ScenarioRunSerializer
from scenarios.studies import run_poc_scenario


class Command(EngineCommand):
    help = 'Compare analytic POC per circle count with the Monte-Carlo oracle along a scenario'
    command_name = RunRecord.Command.SCENARIO
    writes_files = True

    def add_engine_arguments(self, parser):
        parser.add_argument(
            '--spec',
            required=True,
            help='Scenario file or library name (intersection_crash, intersection_pass, oncoming_pass)'
        )
        parser.add_argument('--circles', help='Circle counts to compare (default: 1,2,3)')
        parser.add_argument(
            '--oracle-samples',
            type=int,
            dest='oracle_samples',
            help='Oracle samples per step (default: POC_ENGINE ORACLE_SAMPLES)'
        )
        parser.add_argument('--seed', type=int, help='Oracle seed (default: $POC_SEED or 0)')

    def run(self, options, manifest):
        data = self.validated(ScenarioRunSerializer, {
            'circles': options['circles'],
            'oracle_samples': options['oracle_samples'],
            'seed': options['seed'],
        })
        spec = load_scenario(options['spec'], kind='poc')
        report = run_poc_scenario(
            spec,
            circle_counts=data.get('circles', (1, 2, 3)),
            oracle_samples=data.get('oracle_samples'),
            seed=data.get('seed'),
        )
        summary = report.summary()
        manifest.seed = report.seed
        manifest.config = {
            'scenario': spec.to_json(),
            'circles': list(report.circle_counts),
            'oracle_samples': report.oracle_samples,
        }
        manifest.summary = summary
        self.write_csv(manifest, options, f'{spec.name}.csv', report.columns(), report.table())
        self.write_json(manifest, options, 'summary.json', summary)
        return summary
