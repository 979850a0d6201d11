"""
Reading and writing scenario files.

Scenario files are YAML; JSON files load as well. ``resolve_scenario_path``
also accepts the bare name of a file in the bundled library, e.g.
``intersection_crash``.
"""
import logging
from pathlib import Path

import yaml
from django.core.exceptions import ValidationError

from .serializers import SCENARIO_SERIALIZERS

logger = logging.getLogger(__name__)

LIBRARY_DIR = Path(__file__).resolve().parent / 'library'


def library_names():
    return sorted(path.stem for path in LIBRARY_DIR.glob('*.yaml'))


def resolve_scenario_path(value):
    path = Path(value)
    if path.is_file():
        return path
    candidate = LIBRARY_DIR / f'{value}.yaml'
    if candidate.is_file():
        return candidate
    raise ValidationError(
        "scenario '%(value)s' is neither a file nor one of %(names)s",
        code='unknown_scenario',
        params={'value': value, 'names': ', '.join(library_names())},
    )


def parse_scenario(payload, kind=None):
    """Validate a decoded scenario mapping and build its spec."""
    if not isinstance(payload, dict):
        raise ValidationError('a scenario file must contain a mapping', code='invalid_scenario')
    found = payload.get('kind')
    if found not in SCENARIO_SERIALIZERS:
        raise ValidationError(
            "unknown scenario kind '%(kind)s'", code='invalid_scenario', params={'kind': found}
        )
    if kind is not None and found != kind:
        raise ValidationError(
            "expected a '%(expected)s' scenario, got '%(kind)s'",
            code='invalid_scenario',
            params={'expected': kind, 'kind': found},
        )
    serializer = SCENARIO_SERIALIZERS[found](data=payload)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def load_scenario(path, kind=None):
    path = resolve_scenario_path(path)
    try:
        with open(path, encoding='utf-8') as handle:
            payload = yaml.safe_load(handle)
    except yaml.YAMLError as exc:
        raise ValidationError(
            'could not parse %(path)s: %(error)s',
            code='invalid_scenario',
            params={'path': path, 'error': exc},
        )
    spec = parse_scenario(payload, kind)
    logger.debug('Loaded %s scenario %s from %s', spec.kind, spec.name, path)
    return spec


def dump_scenario(spec, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        yaml.safe_dump(spec.to_json(), handle, sort_keys=False)
    return path
