"""
Monte-Carlo collision probability (ground truth for the analytic estimate).

Usage:
    python manage.py oracle --mu 2.5,2.5,0 --sigma 1.5,1.5,1.5 --samples 1000000 --seed 7
    python manage.py oracle --mu 2.5,2.5,0 --sigma 1.5,1.5,1.5 --geometry circles
"""
from core.commands import EngineCommand
from core.models import RunRecord

from collision.serializers import OracleRequestSerializer
from collision.services import evaluate_oracle

from .poc import add_belief_arguments, belief_options


class Command(EngineCommand):
    help = 'Estimate the collision probability by Monte-Carlo sampling'
    command_name = RunRecord.Command.ORACLE

    def add_engine_arguments(self, parser):
        add_belief_arguments(parser)
        parser.add_argument(
            '--samples',
            type=int,
            help='Number of sampled configurations (default: POC_ENGINE ORACLE_SAMPLES)'
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Sampler seed (default: $POC_SEED or 0)'
        )
        parser.add_argument(
            '--geometry',
            choices=OracleRequestSerializer.GEOMETRY_CHOICES,
            help='Test exact rectangles or circle covers (default: rectangle)'
        )

    def run(self, options, manifest):
        data = self.validated(OracleRequestSerializer, {
            **belief_options(options),
            'samples': options['samples'],
            'seed': options['seed'],
            'geometry': options['geometry'],
        })
        payload = evaluate_oracle(data)
        manifest.seed = data['seed']
        manifest.config = payload['config']
        manifest.summary = {'estimate': payload['estimate'], 'std_error': payload['std_error']}
        return payload
