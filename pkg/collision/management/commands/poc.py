"""
Analytic multi-circle collision probability of one object belief.

Usage:
    python manage.py poc --mu 2.5,2.5,0 --sigma 1.5,1.5,1.5
    python manage.py poc --ego 4.5x2 --obj 4.5x2 --circles 3,3 --grid 20 \\
        --mu=-3,1,0.2 --sigma 0.5,0.5,0.3 --nbeta 3
"""
from core.commands import EngineCommand
from core.models import RunRecord

from collision.serializers import PocRequestSerializer
from collision.services import evaluate_poc


def add_belief_arguments(parser):
    parser.add_argument('--ego', help='Ego footprint "LxW" (default: 4.5x2)')
    parser.add_argument('--obj', help='Object footprint "LxW" (default: 4.5x2)')
    parser.add_argument('--circles', help='Circle counts "E,O" (default: POC_ENGINE CIRCLES)')
    parser.add_argument('--mu', required=True, help='Object mean "x,y,theta" in the ego frame (use --mu=-1,... for negatives)')
    parser.add_argument('--sigma', required=True, help='Standard deviations "sx,sy,stheta", all > 0')


def belief_options(options):
    return {name: options.get(name) for name in ('ego', 'obj', 'circles', 'mu', 'sigma')}


class Command(EngineCommand):
    help = 'Estimate the over-approximated collision probability of one object belief'
    command_name = RunRecord.Command.POC

    def add_engine_arguments(self, parser):
        add_belief_arguments(parser)
        parser.add_argument(
            '--grid',
            type=int,
            help='Grid samples per polar axis (default: POC_ENGINE GRID_SAMPLES)'
        )
        parser.add_argument(
            '--nbeta',
            type=int,
            help='Wrapped-Gaussian truncation N_beta >= 3 (default: 3)'
        )

    def run(self, options, manifest):
        data = self.validated(PocRequestSerializer, {
            **belief_options(options), 'grid': options['grid'], 'nbeta': options['nbeta'],
        })
        payload = evaluate_poc(data)
        manifest.config = payload['config']
        manifest.summary = {'poc': payload['poc']}
        return payload
