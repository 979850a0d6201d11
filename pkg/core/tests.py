import csv
import json
import tempfile
from pathlib import Path

from django.contrib.auth import get_user_model
from django.test import SimpleTestCase, TestCase, override_settings
from rest_framework import status
from rest_framework.test import APITestCase

from .commands import format_errors
from .conf import DEFAULTS, engine_settings
from .manifest import SCHEMA_VERSION, RunManifest, dumps, write_csv
from .models import RunRecord


class EngineSettingsTests(SimpleTestCase):
    """Test the POC_ENGINE settings merge"""

    @override_settings(POC_ENGINE={'SEED': 7})
    def test_override_keeps_defaults(self):
        resolved = engine_settings()
        self.assertEqual(resolved['SEED'], 7)
        self.assertEqual(resolved['N_BETA'], DEFAULTS['N_BETA'])

    @override_settings(POC_ENGINE={})
    def test_defaults(self):
        self.assertEqual(engine_settings()['CIRCLES'], (3, 3))


class ManifestTests(SimpleTestCase):
    """Test manifests and the CSV writer"""

    def test_manifest_round_trip(self):
        manifest = RunManifest(command='poc', config={'grid': 20}, seed=3)
        with tempfile.TemporaryDirectory() as tmp:
            path = manifest.write(tmp)
            payload = json.loads(path.read_text(encoding='utf-8'))
        self.assertEqual(payload['command'], 'poc')
        self.assertEqual(payload['seed'], 3)
        self.assertEqual(payload['schema_version'], SCHEMA_VERSION)
        self.assertIn('numpy', payload['versions'])

    def test_csv_columns_and_floats(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(
                Path(tmp) / 'nested' / 'rows.csv',
                ('t', 'poc'),
                [{'poc': 0.1, 't': 0}, (1, 1e-20)],
            )
            raw = path.read_bytes()
            with path.open(encoding='utf-8', newline='') as handle:
                rows = list(csv.reader(handle))
        self.assertNotIn(b'\r\n', raw)
        self.assertEqual(rows, [['t', 'poc'], ['0', '0.1'], ['1', '1e-20']])

    def test_dumps_handles_numpy(self):
        import numpy as np
        self.assertEqual(json.loads(dumps({'a': np.float64(0.5), 'b': np.arange(2)})), {'a': 0.5, 'b': [0, 1]})

    def test_format_errors(self):
        detail = {'sigma': ['must be positive'], 'non_field_errors': ['bad belief']}
        self.assertEqual(format_errors(detail), ['sigma: must be positive', 'bad belief'])


class RunRecordModelTests(TestCase):
    """Test cases for stored run manifests"""

    def test_from_manifest(self):
        manifest = RunManifest(command='smpc', config={'level': 'low'}, seed=0, status='INFEASIBLE')
        manifest.summary = {'infeasible_steps': 2}
        record = RunRecord.from_manifest(manifest)
        self.assertEqual(record.command, RunRecord.Command.SMPC)
        self.assertFalse(record.succeeded)
        self.assertEqual(record.config, {'level': 'low'})
        self.assertEqual(str(record), f'SMPC run #{record.pk} (Completed with infeasible steps)')


class RunRecordAPITests(APITestCase):
    """Test cases for the run listing"""

    def setUp(self):
        self.poc = RunRecord.from_manifest(RunManifest(command='poc', config={}))
        self.smpc = RunRecord.from_manifest(
            RunManifest(command='smpc', config={}, seed=4, status='INFEASIBLE')
        )

    def test_list_runs(self):
        response = self.client.get('/api/runs/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['count'], 2)

    def test_filter_by_command(self):
        response = self.client.get('/api/runs/', {'command': 'smpc'})
        self.assertEqual([row['id'] for row in response.data['results']], [self.smpc.pk])

    def test_filter_by_status(self):
        response = self.client.get('/api/runs/', {'status': 'SUCCESS'})
        self.assertEqual([row['id'] for row in response.data['results']], [self.poc.pk])

    def test_detail(self):
        response = self.client.get(f'/api/runs/{self.smpc.pk}/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['seed'], 4)
        self.assertFalse(response.data['succeeded'])

    def test_missing_run(self):
        response = self.client.get('/api/runs/9999/')
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)

    def test_delete_requires_staff(self):
        response = self.client.delete(f'/api/runs/{self.poc.pk}/')
        self.assertIn(response.status_code, (status.HTTP_401_UNAUTHORIZED, status.HTTP_403_FORBIDDEN))
        self.assertTrue(RunRecord.objects.filter(pk=self.poc.pk).exists())

    def test_staff_can_delete(self):
        staff = get_user_model().objects.create_user('ops', password='RunPass123!', is_staff=True)
        self.client.force_authenticate(user=staff)
        response = self.client.delete(f'/api/runs/{self.poc.pk}/')
        self.assertEqual(response.status_code, status.HTTP_204_NO_CONTENT)
        self.assertFalse(RunRecord.objects.filter(pk=self.poc.pk).exists())
