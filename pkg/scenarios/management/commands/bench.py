"""
Runtime of estimator initialisation, analytic evaluation and the oracle.

Usage:
    python manage.py bench
    python manage.py bench --circles 1,3 --samples 1000,10000 --evaluations 200 --out output/bench
"""
from core.commands import EngineCommand
from core.models import RunRecord

from scenarios.serializers import BenchSerializer
from scenarios.studies import BenchReport, runtime_benchmark


class Command(EngineCommand):
    help = 'Benchmark analytic POC evaluation against Monte-Carlo sampling'
    command_name = RunRecord.Command.BENCH
    writes_files = True

    def add_engine_arguments(self, parser):
        parser.add_argument('--circles', help='Circle counts (default: 1,2,3,4,5,6)')
        parser.add_argument('--samples', help='MCS sample counts (default: 100,...,1000000)')
        parser.add_argument(
            '--evaluations',
            type=int,
            help='Random beliefs per configuration (default: 1000)'
        )
        parser.add_argument('--batches', type=int, help='Batches for median-of-means (default: 5)')
        parser.add_argument('--grid', type=int, help='Grid samples per axis (default: POC_ENGINE GRID_SAMPLES)')
        parser.add_argument('--seed', type=int, help='Seed of the random beliefs (default: $POC_SEED or 0)')

    def run(self, options, manifest):
        data = self.validated(BenchSerializer, {
            name: options[name] for name in ('circles', 'samples', 'evaluations', 'batches', 'grid', 'seed')
        })
        report = runtime_benchmark(
            circle_counts=data['circles'],
            sample_counts=data['samples'],
            evaluations=data['evaluations'],
            batches=data['batches'],
            grid=data.get('grid'),
            seed=data.get('seed'),
        )
        summary = report.summary()
        manifest.seed = report.seed
        manifest.config = {
            'circles': list(data['circles']),
            'samples': list(data['samples']),
            'evaluations': report.evaluations,
            'batches': report.batches,
            'grid': report.grid,
        }
        manifest.summary = summary
        self.write_csv(manifest, options, 'analytic.csv', BenchReport.ANALYTIC_COLUMNS, report.analytic)
        self.write_csv(manifest, options, 'mcs.csv', BenchReport.MCS_COLUMNS, report.mcs)
        self.write_json(manifest, options, 'summary.json', summary)
        return summary
