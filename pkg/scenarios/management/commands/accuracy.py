"""
Analytic POC per circle count against repeated oracle estimates.

Usage:
    python manage.py accuracy
    python manage.py accuracy --repetitions 1000 --samples 1000,100000 --out output/accuracy
"""
from core.commands import EngineCommand
from core.models import RunRecord

from scenarios.loader import load_scenario
from scenarios.serializers import AccuracyRunSerializer
from scenarios.studies import AccuracyReport, accuracy_study


class Command(EngineCommand):
    help = 'Spread of repeated Monte-Carlo estimates around the analytic POC'
    command_name = RunRecord.Command.ACCURACY
    writes_files = True

    def add_engine_arguments(self, parser):
        parser.add_argument('--spec', default='accuracy', help='Accuracy scenario file or library name')
        parser.add_argument('--repetitions', type=int, help='Oracle repetitions per cell (default: from the scenario file)')
        parser.add_argument('--samples', help='Oracle sample counts (default: from the scenario file)')
        parser.add_argument('--seed', type=int, help='Oracle seed (default: $POC_SEED or 0)')

    def run(self, options, manifest):
        data = self.validated(AccuracyRunSerializer, {
            name: options[name] for name in ('repetitions', 'samples', 'seed')
        })
        spec = load_scenario(options['spec'], kind='accuracy')
        report = accuracy_study(
            spec,
            repetitions=data.get('repetitions'),
            sample_counts=data.get('samples'),
            seed=data.get('seed'),
        )
        summary = report.summary()
        manifest.seed = report.seed
        manifest.config = {'scenario': spec.to_json(), 'repetitions': report.repetitions}
        manifest.summary = summary
        self.write_csv(manifest, options, 'accuracy.csv', AccuracyReport.COLUMNS, report.rows)
        self.write_json(manifest, options, 'summary.json', summary)
        return summary
