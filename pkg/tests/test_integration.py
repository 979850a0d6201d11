"""
Integration tests for the engine commands.
Each test drives a management command end to end and checks its exit code,
stdout payload and the files it leaves behind.
"""
import csv
import dataclasses
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from core.models import RunRecord
from geometry.polar import Configuration
from scenarios.loader import dump_scenario, load_scenario
from scenarios.specs import VehicleMotion

FAST_ENGINE = {'GRID_LEVELS': (20, 40), 'ORACLE_SAMPLES': 2_000}


def read_csv(path):
    with open(path, encoding='utf-8', newline='') as handle:
        return list(csv.reader(handle))


@override_settings(POC_ENGINE=FAST_ENGINE)
class EngineCommandIntegrationTest(TestCase):
    """
    Integration tests for the command line surface
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_command(self, *args, **options):
        stdout = StringIO()
        call_command(*args, stdout=stdout, stderr=StringIO(), **options)
        return json.loads(stdout.getvalue())

    def test_poc_prints_probability(self):
        payload = self.run_command('poc', mu='2.5,2.5,0', sigma='1.5,1.5,1.5')
        self.assertTrue(0.0 < payload['poc'] <= 1.0)
        self.assertEqual(payload['schema_version'], '1.0')
        self.assertNotIn('manifest', payload)

    def test_poc_with_out_writes_manifest(self):
        payload = self.run_command('poc', mu='2.5,2.5,0', sigma='1.5,1.5,1.5', out=str(self.out))
        manifest = json.loads((self.out / 'manifest.json').read_text(encoding='utf-8'))
        self.assertEqual(manifest['command'], 'poc')
        self.assertEqual(manifest['summary']['poc'], payload['poc'])
        self.assertTrue((self.out / 'result.json').is_file())

    def test_invalid_input_exits_with_2(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('poc', mu='0,0,0', sigma='0,1,1', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
        with self.assertRaises(CommandError) as ctx:
            call_command('scenario', spec='no_such_scenario', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_oracle_is_seeded(self):
        first = self.run_command('oracle', mu='2.5,2.5,0', sigma='1.5,1.5,1.5', samples=5_000, seed=9)
        second = self.run_command('oracle', mu='2.5,2.5,0', sigma='1.5,1.5,1.5', samples=5_000, seed=9)
        self.assertEqual(first['estimate'], second['estimate'])
        self.assertEqual(first['seed'], 9)

    def test_record_stores_manifest(self):
        payload = self.run_command('poc', mu='2.5,2.5,0', sigma='1.5,1.5,1.5', record=True)
        record = RunRecord.objects.get(pk=payload['record_id'])
        self.assertEqual(record.command, RunRecord.Command.POC)
        self.assertTrue(record.succeeded)

    def test_record_stores_failed_run(self):
        with mock.patch('collision.management.commands.poc.evaluate_poc', side_effect=RuntimeError('boom')):
            with self.assertRaises(CommandError) as ctx:
                call_command('poc', mu='2.5,2.5,0', sigma='1.5,1.5,1.5', record=True, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 3)
        record = RunRecord.objects.get()
        self.assertEqual(record.status, RunRecord.RunStatus.FAILED)
        self.assertEqual(record.summary['error'], 'boom')
        self.assertFalse(record.succeeded)

    def test_record_stores_invalid_run(self):
        with self.assertRaises(CommandError):
            call_command('smpc', spec='overtaking', level='extreme', record=True, stdout=StringIO())
        record = RunRecord.objects.get()
        self.assertEqual(record.command, RunRecord.Command.SMPC)
        self.assertEqual(record.status, RunRecord.RunStatus.FAILED)

    def test_failed_run_without_record_stores_nothing(self):
        with self.assertRaises(CommandError):
            call_command('poc', mu='0,0,0', sigma='0,1,1', stdout=StringIO())
        self.assertFalse(RunRecord.objects.exists())

    def test_scenario_writes_csv(self):
        spec = dataclasses.replace(load_scenario('intersection_crash'), steps=10)
        path = dump_scenario(spec, self.out / 'short.yaml')
        self.run_command('scenario', spec=str(path), circles='1,3', oracle_samples=1_000, out=str(self.out / 'run'))
        rows = read_csv(self.out / 'run' / 'intersection_crash.csv')
        self.assertEqual(len(rows), 11)
        self.assertEqual(rows[0][0], 't')
        self.assertTrue((self.out / 'run' / 'summary.json').is_file())
        self.assertTrue((self.out / 'run' / 'manifest.json').is_file())

    def test_smpc_is_reproducible(self):
        for name in ('a', 'b'):
            self.run_command('smpc', spec='overtaking', level='low', steps=3, out=str(self.out / name))
        first = (self.out / 'a' / 'trajectory.csv').read_bytes()
        second = (self.out / 'b' / 'trajectory.csv').read_bytes()
        self.assertEqual(first, second)
        rows = read_csv(self.out / 'a' / 'trajectory.csv')
        self.assertEqual(rows[0][:4], ['t', 'x_e', 'y_e', 'theta_e'])
        self.assertEqual(len(rows), 4)

    def test_smpc_infeasible_exits_with_1(self):
        spec = dataclasses.replace(
            load_scenario('overtaking'),
            obj=VehicleMotion(Configuration(2.0, 10.0, 0.0)),
            level='low',
            steps=3,
            poc_tolerance=0.01,
        )
        path = dump_scenario(spec, self.out / 'blocked.yaml')
        with self.assertRaises(CommandError) as ctx:
            call_command('smpc', spec=str(path), out=str(self.out / 'run'), stdout=StringIO(), stderr=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
        summary = json.loads((self.out / 'run' / 'summary.json').read_text(encoding='utf-8'))
        self.assertEqual(summary['infeasible_steps'], 1)
        self.assertFalse(summary['completed'])

    def test_unknown_level_exits_with_2(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('smpc', spec='overtaking', level='extreme', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_bench_writes_both_tables(self):
        payload = self.run_command(
            'bench', circles='1,2', samples='100,1000', evaluations=6, batches=2, out=str(self.out)
        )
        self.assertIn('speedup_3_circles_vs_1e4_samples', payload)
        self.assertEqual(read_csv(self.out / 'analytic.csv')[0], ['circles', 'grid', 'init_ms', 'eval_ms', 'evaluations'])
        self.assertEqual(len(read_csv(self.out / 'mcs.csv')), 3)

    def test_bench_rejects_more_batches_than_evaluations(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('bench', evaluations=3, batches=5, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_accuracy_writes_table(self):
        spec = dataclasses.replace(
            load_scenario('accuracy'), levels={'low': (0.5, 0.5, 0.5)}, circle_counts=(1, 2),
        )
        path = dump_scenario(spec, self.out / 'accuracy.yaml')
        self.run_command('accuracy', spec=str(path), repetitions=4, samples='200', out=str(self.out / 'run'))
        rows = read_csv(self.out / 'run' / 'accuracy.csv')
        self.assertEqual(rows[0][:3], ['level', 'method', 'circles'])
        self.assertEqual(len(rows), 1 + 2 + 1)
