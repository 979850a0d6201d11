"""
Run manifests and the JSON/CSV writers every engine command uses.

JSON and CSV files are UTF-8 with LF line endings and '.' decimals.
"""
import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

logger = logging.getLogger(__name__)

SCHEMA_VERSION = '1.0'

TRACKED_PACKAGES = ('numpy', 'scipy', 'Django', 'djangorestframework', 'PyYAML')


def package_versions():
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


@dataclass
class RunManifest:
    """Inputs, outputs and environment of one command run."""
    command: str
    config: dict
    seed: int = None
    status: str = 'SUCCESS'
    outputs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    versions: dict = field(default_factory=package_versions)
    wall_clock_s: float = 0.0
    schema_version: str = SCHEMA_VERSION
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec='seconds')
    )

    def to_json(self):
        return asdict(self)

    def add_output(self, path):
        self.outputs.append(str(path))

    def write(self, directory):
        path = Path(directory) / 'manifest.json'
        write_json(path, self.to_json())
        return path


def jsonable(value):
    """``json`` fallback for numpy scalars and arrays."""
    if hasattr(value, 'tolist'):
        return value.tolist()
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


def dumps(payload):
    return json.dumps(payload, indent=2, default=jsonable)


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        json.dump(payload, handle, indent=2, default=jsonable)
        handle.write('\n')
    logger.debug('Wrote %s', path)
    return path


def write_csv(path, columns, rows):
    """Write ``rows`` (mappings or sequences) under the fixed ``columns`` order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row[name] for name in columns]
            writer.writerow([_cell(value) for value in row])
    logger.debug('Wrote %s (%d columns)', path, len(columns))
    return path


def _cell(value):
    if isinstance(value, float):
        return repr(float(value))
    return value
