"""
Experiment definitions. Each spec is plain data; ``scenarios.loader`` reads
and writes them as YAML and ``scenarios.serializers`` validates them.
"""
from dataclasses import dataclass, field
from typing import ClassVar

from geometry.polar import Configuration
from geometry.shapes import RectangleFootprint
from planner.path import ReferencePath
from planner.simulation import ScriptedObject
from planner.smpc import SmpcConfig

from .uncertainty import LogisticUncertainty

CAR = RectangleFootprint(4.5, 2.0)


def _footprint_json(fp):
    return [fp.length, fp.width]


@dataclass(frozen=True)
class VehicleMotion:
    """Initial configuration and the constant (v, omega) a vehicle keeps."""
    start: Configuration
    v: float = 0.0
    omega: float = 0.0

    def scripted(self, sample_time):
        return ScriptedObject(self.start, self.v, self.omega, sample_time)

    def to_json(self):
        return {'start': list(self.start.as_tuple()), 'v': self.v, 'omega': self.omega}


@dataclass(frozen=True)
class ScenarioSpec:
    """Two vehicles driving at constant inputs, evaluated step by step."""
    kind: ClassVar[str] = 'poc'

    name: str
    ego: VehicleMotion
    obj: VehicleMotion
    steps: int
    uncertainty: LogisticUncertainty
    sample_time: float = 0.1
    ego_footprint: RectangleFootprint = CAR
    obj_footprint: RectangleFootprint = CAR
    description: str = ''

    def to_json(self):
        return {
            'kind': self.kind,
            'name': self.name,
            'description': self.description,
            'ego_footprint': _footprint_json(self.ego_footprint),
            'obj_footprint': _footprint_json(self.obj_footprint),
            'sample_time': self.sample_time,
            'steps': self.steps,
            'ego': self.ego.to_json(),
            'obj': self.obj.to_json(),
            'uncertainty': self.uncertainty.to_json(),
        }


@dataclass(frozen=True)
class AccuracySpec:
    """Fixed relative configuration evaluated at several uncertainty levels."""
    kind: ClassVar[str] = 'accuracy'

    name: str
    ego: Configuration
    obj: Configuration
    levels: dict
    circle_counts: tuple = (1, 2, 3, 4, 5, 6)
    sample_counts: tuple = (1_000, 10_000, 100_000)
    repetitions: int = 10_000
    ego_footprint: RectangleFootprint = CAR
    obj_footprint: RectangleFootprint = CAR
    description: str = ''

    def to_json(self):
        return {
            'kind': self.kind,
            'name': self.name,
            'description': self.description,
            'ego_footprint': _footprint_json(self.ego_footprint),
            'obj_footprint': _footprint_json(self.obj_footprint),
            'ego': list(self.ego.as_tuple()),
            'obj': list(self.obj.as_tuple()),
            'levels': {name: list(sigma) for name, sigma in self.levels.items()},
            'circle_counts': list(self.circle_counts),
            'sample_counts': list(self.sample_counts),
            'repetitions': self.repetitions,
        }


@dataclass(frozen=True)
class UncertaintyLevel:
    """Initial object spread and its per-step growth over the horizon."""
    sigma0: tuple
    growth: tuple

    def to_json(self):
        return {'sigma0': list(self.sigma0), 'growth': list(self.growth)}


@dataclass(frozen=True)
class SmpcScenarioSpec:
    """Ego following a reference path past a scripted object."""
    kind: ClassVar[str] = 'smpc'

    name: str
    waypoints: tuple
    v_ref: float
    ego_start: Configuration
    obj: VehicleMotion
    steps: int
    levels: dict = field(default_factory=dict)
    level: str = 'low'
    horizon: int = 10
    sample_time: float = 0.2
    weights: tuple = (1.0, 1.0, 10.0, 10.0)
    poc_tolerance: float = 0.2
    v_bounds: tuple = (0.0, 10.0)
    omega_bounds: tuple = (-1.0, 1.0)
    mcs_samples: int = 1_000
    mcs_runs: int = 8
    seed: int = 0
    ego_footprint: RectangleFootprint = CAR
    obj_footprint: RectangleFootprint = CAR
    description: str = ''

    def build_path(self):
        # one unit of progress is one sample time of arc
        return ReferencePath.from_waypoints(self.waypoints, self.v_ref, arc_per_lambda=self.sample_time)

    def smpc_config(self, level=None):
        chosen = self.levels[level or self.level]
        return SmpcConfig(
            horizon=self.horizon,
            sample_time=self.sample_time,
            weights=tuple(self.weights),
            poc_tolerance=self.poc_tolerance,
            v_bounds=tuple(self.v_bounds),
            omega_bounds=tuple(self.omega_bounds),
            sigma0=tuple(chosen.sigma0),
            growth=tuple(chosen.growth),
        )

    def scripted_object(self):
        return self.obj.scripted(self.sample_time)

    def to_json(self):
        return {
            'kind': self.kind,
            'name': self.name,
            'description': self.description,
            'ego_footprint': _footprint_json(self.ego_footprint),
            'obj_footprint': _footprint_json(self.obj_footprint),
            'path': {'waypoints': [list(p) for p in self.waypoints], 'v_ref': self.v_ref},
            'ego_start': list(self.ego_start.as_tuple()),
            'obj': self.obj.to_json(),
            'steps': self.steps,
            'horizon': self.horizon,
            'sample_time': self.sample_time,
            'weights': list(self.weights),
            'poc_tolerance': self.poc_tolerance,
            'v_bounds': list(self.v_bounds),
            'omega_bounds': list(self.omega_bounds),
            'levels': {name: level.to_json() for name, level in self.levels.items()},
            'level': self.level,
            'mcs_samples': self.mcs_samples,
            'mcs_runs': self.mcs_runs,
            'seed': self.seed,
        }
