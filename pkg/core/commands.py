"""
Base class of the engine's management commands.

Subclasses implement ``run(options, manifest)`` and return the JSON payload
printed on stdout. The base class maps failures onto exit codes, writes the
manifest next to any written artefact and optionally records the run.

Exit codes:
    0  success
    1  SMPC run completed with infeasible steps
    2  invalid input
    3  internal error
"""
import logging
import time
from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from .conf import engine_settings
from .manifest import SCHEMA_VERSION, RunManifest, dumps, write_csv, write_json
from .models import RunRecord

logger = logging.getLogger(__name__)

EXIT_INFEASIBLE = 1
EXIT_INVALID = 2
EXIT_INTERNAL = 3


def format_errors(detail, prefix=''):
    """Flatten DRF error detail into 'field: message' strings."""
    if isinstance(detail, dict):
        messages = []
        for key, value in detail.items():
            name = key if key != 'non_field_errors' else ''
            messages.extend(format_errors(value, f'{prefix}{name}.' if name else prefix))
        return messages
    if isinstance(detail, list):
        messages = []
        for item in detail:
            messages.extend(format_errors(item, prefix))
        return messages
    label = prefix.rstrip('.')
    return [f'{label}: {detail}' if label else str(detail)]


class EngineCommand(BaseCommand):
    """Shared flags, error handling and manifest plumbing."""

    command_name = None
    writes_files = False

    def add_arguments(self, parser):
        self.add_engine_arguments(parser)
        parser.add_argument(
            '--out',
            default=None,
            help=(
                'Directory for output files and manifest.json'
                + (f" (default: $POC_OUTPUT_DIR/{self.command_name})" if self.writes_files else '')
            ),
        )
        parser.add_argument(
            '--record',
            action='store_true',
            help='Also store the run manifest in the database'
        )

    def add_engine_arguments(self, parser):
        pass

    def run(self, options, manifest):
        raise NotImplementedError

    def output_dir(self, options):
        if options.get('out'):
            return Path(options['out'])
        if self.writes_files:
            return Path(engine_settings()['OUTPUT_DIR']) / self.command_name
        return None

    def write_csv(self, manifest, options, name, columns, rows):
        path = write_csv(self.output_dir(options) / name, columns, rows)
        manifest.add_output(path)
        return path

    def write_json(self, manifest, options, name, payload):
        path = write_json(self.output_dir(options) / name, payload)
        manifest.add_output(path)
        return path

    def validated(self, serializer_class, data):
        """Run a DRF serializer over command-line values (``None`` means unset)."""
        serializer = serializer_class(data={k: v for k, v in data.items() if v is not None})
        serializer.is_valid(raise_exception=True)
        return serializer.validated_data

    def record_failure(self, manifest, options, started, message):
        """Store a FAILED run record when ``--record`` is set."""
        if not options.get('record'):
            return
        manifest.status = RunRecord.RunStatus.FAILED
        manifest.wall_clock_s = time.perf_counter() - started
        manifest.summary = {**manifest.summary, 'error': message}
        try:
            RunRecord.from_manifest(manifest)
        except Exception:
            logger.exception('Could not record failed %s run', self.command_name)

    def handle(self, *args, **options):
        started = time.perf_counter()
        manifest = RunManifest(command=self.command_name, config={})
        try:
            payload = self.run(options, manifest)
        except CommandError as exc:
            self.record_failure(manifest, options, started, str(exc))
            raise
        except serializers.ValidationError as exc:
            message = '; '.join(format_errors(exc.detail))
            self.record_failure(manifest, options, started, message)
            raise CommandError(message, returncode=EXIT_INVALID)
        except ValidationError as exc:
            message = '; '.join(exc.messages)
            self.record_failure(manifest, options, started, message)
            raise CommandError(message, returncode=EXIT_INVALID)
        except Exception as exc:
            logger.exception('%s failed', self.command_name)
            self.record_failure(manifest, options, started, str(exc))
            raise CommandError(f'internal error: {exc}', returncode=EXIT_INTERNAL)

        manifest.wall_clock_s = time.perf_counter() - started
        payload = {'schema_version': SCHEMA_VERSION, **payload}
        out_dir = self.output_dir(options)
        if out_dir is not None:
            if not manifest.outputs:
                self.write_json(manifest, options, 'result.json', payload)
            payload['manifest'] = str(manifest.write(out_dir))
        if options.get('record'):
            record = RunRecord.from_manifest(manifest)
            payload['record_id'] = record.pk

        self.stdout.write(dumps(payload))
        if out_dir is not None:
            self.stderr.write(self.style.SUCCESS(
                f'{self.command_name}: wrote {len(manifest.outputs)} file(s) to {out_dir}'
            ))
        if manifest.status == RunRecord.RunStatus.INFEASIBLE:
            raise CommandError(
                f'{self.command_name} completed with infeasible planning steps',
                returncode=EXIT_INFEASIBLE,
            )
