from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from collision.serializers import FloatListField, FootprintField
from geometry.polar import Configuration
from planner.smpc import SmpcConfig

from .specs import (
    CAR, AccuracySpec, ScenarioSpec, SmpcScenarioSpec, UncertaintyLevel, VehicleMotion,
)
from .uncertainty import LogisticUncertainty


def _positive(values, name):
    if min(values) <= 0:
        raise serializers.ValidationError(f'{name} entries must be strictly positive')
    return values


class ConfigurationField(FloatListField):
    """Configuration "x,y,theta" or [x, y, theta]."""

    def __init__(self, **kwargs):
        super().__init__(size=3, **kwargs)

    def to_internal_value(self, data):
        return Configuration(*super().to_internal_value(data))

    def to_representation(self, value):
        return list(value.as_tuple())


class IntegerListField(serializers.ListField):
    """Integers as a list or a comma separated string."""
    child = serializers.IntegerField(min_value=1)

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [part for part in data.replace(' ', '').split(',') if part]
        return tuple(super().to_internal_value(data))


class VehicleMotionSerializer(serializers.Serializer):
    start = ConfigurationField(help_text='Initial configuration (x, y, theta)')
    v = serializers.FloatField(default=0.0, help_text='Constant speed')
    omega = serializers.FloatField(default=0.0, help_text='Constant turn rate')


class LogisticUncertaintySerializer(serializers.Serializer):
    gamma = serializers.FloatField(default=1.0)
    d0 = serializers.FloatField(default=1.0)
    sigma_max = FloatListField(size=3)

    def validate_sigma_max(self, value):
        return _positive(value, 'sigma_max')


class UncertaintyLevelSerializer(serializers.Serializer):
    sigma0 = FloatListField(size=3)
    growth = FloatListField(size=3)

    def validate_sigma0(self, value):
        return _positive(value, 'sigma0')

    def validate_growth(self, value):
        if min(value) < 0:
            raise serializers.ValidationError('growth entries must be non-negative')
        return value


class ScenarioFileSerializer(serializers.Serializer):
    """
    Fields every scenario file shares
    """
    KINDS = ('poc', 'accuracy', 'smpc')

    kind = serializers.ChoiceField(choices=KINDS)
    name = serializers.CharField(max_length=100)
    description = serializers.CharField(default='', allow_blank=True)
    ego_footprint = FootprintField(default=CAR)
    obj_footprint = FootprintField(default=CAR)


class PocScenarioSerializer(ScenarioFileSerializer):
    """
    Two vehicles at constant inputs with a distance-dependent belief
    """
    ego = VehicleMotionSerializer()
    obj = VehicleMotionSerializer()
    steps = serializers.IntegerField(min_value=1)
    sample_time = serializers.FloatField(default=0.1)
    uncertainty = LogisticUncertaintySerializer()

    def validate_sample_time(self, value):
        if value <= 0:
            raise serializers.ValidationError('sample_time must be positive')
        return value

    def create(self, validated_data):
        data = dict(validated_data)
        data.pop('kind')
        data['ego'] = VehicleMotion(**data['ego'])
        data['obj'] = VehicleMotion(**data['obj'])
        data['uncertainty'] = LogisticUncertainty(**data['uncertainty'])
        return ScenarioSpec(**data)


class AccuracyScenarioSerializer(ScenarioFileSerializer):
    """
    One relative configuration at several uncertainty levels
    """
    ego = ConfigurationField()
    obj = ConfigurationField()
    levels = serializers.DictField(child=FloatListField(size=3), allow_empty=False)
    circle_counts = IntegerListField(min_length=1)
    sample_counts = IntegerListField(min_length=1)
    repetitions = serializers.IntegerField(min_value=2)

    def validate_levels(self, value):
        for name, sigma in value.items():
            _positive(sigma, f'levels.{name}')
        return value

    def create(self, validated_data):
        data = dict(validated_data)
        data.pop('kind')
        data['levels'] = {name: tuple(sigma) for name, sigma in data['levels'].items()}
        return AccuracySpec(**data)


class PathSerializer(serializers.Serializer):
    waypoints = serializers.ListField(child=FloatListField(size=2), min_length=2)
    v_ref = serializers.FloatField(min_value=0.0)


class SmpcScenarioSerializer(ScenarioFileSerializer):
    """
    Path following past a scripted object, one entry per uncertainty level
    """
    path = PathSerializer()
    ego_start = ConfigurationField()
    obj = VehicleMotionSerializer()
    steps = serializers.IntegerField(min_value=1)
    horizon = serializers.IntegerField(min_value=1, default=10)
    sample_time = serializers.FloatField(default=0.2)
    weights = FloatListField(size=4, default=(1.0, 1.0, 10.0, 10.0))
    poc_tolerance = serializers.FloatField(default=0.2)
    v_bounds = FloatListField(size=2, default=(0.0, 10.0))
    omega_bounds = FloatListField(size=2, default=(-1.0, 1.0))
    levels = serializers.DictField(child=UncertaintyLevelSerializer(), allow_empty=False)
    level = serializers.CharField(default='low')
    mcs_samples = serializers.IntegerField(min_value=1, default=1_000)
    mcs_runs = serializers.IntegerField(min_value=1, default=8)
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate(self, attrs):
        if attrs['level'] not in attrs['levels']:
            raise serializers.ValidationError({
                'level': f"unknown level '{attrs['level']}', expected one of {sorted(attrs['levels'])}"
            })
        for name, level in attrs['levels'].items():
            try:
                SmpcConfig(
                    horizon=attrs['horizon'], sample_time=attrs['sample_time'],
                    weights=attrs['weights'], poc_tolerance=attrs['poc_tolerance'],
                    v_bounds=attrs['v_bounds'], omega_bounds=attrs['omega_bounds'],
                    sigma0=level['sigma0'], growth=level['growth'],
                )
            except DjangoValidationError as exc:
                raise serializers.ValidationError(exc.messages)
        return attrs

    def create(self, validated_data):
        data = dict(validated_data)
        data.pop('kind')
        path = data.pop('path')
        data['waypoints'] = tuple(tuple(p) for p in path['waypoints'])
        data['v_ref'] = path['v_ref']
        data['obj'] = VehicleMotion(**data['obj'])
        data['levels'] = {
            name: UncertaintyLevel(tuple(level['sigma0']), tuple(level['growth']))
            for name, level in data['levels'].items()
        }
        return SmpcScenarioSpec(**data)


SCENARIO_SERIALIZERS = {
    'poc': PocScenarioSerializer,
    'accuracy': AccuracyScenarioSerializer,
    'smpc': SmpcScenarioSerializer,
}


class ScenarioRunSerializer(serializers.Serializer):
    """Options of the ``scenario`` command"""
    circles = IntegerListField(required=False)
    oracle_samples = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)


class BenchSerializer(serializers.Serializer):
    """Options of the ``bench`` command"""
    circles = IntegerListField(default=(1, 2, 3, 4, 5, 6))
    samples = IntegerListField(default=(100, 1_000, 10_000, 100_000, 1_000_000))
    evaluations = serializers.IntegerField(min_value=3, default=1_000)
    batches = serializers.IntegerField(min_value=1, default=5)
    grid = serializers.IntegerField(min_value=2, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)

    def validate(self, attrs):
        if attrs['batches'] > attrs['evaluations']:
            raise serializers.ValidationError({'batches': 'cannot exceed the number of evaluations'})
        return attrs


class AccuracyRunSerializer(serializers.Serializer):
    """Options of the ``accuracy`` command"""
    repetitions = serializers.IntegerField(min_value=2, required=False)
    samples = IntegerListField(required=False)
    seed = serializers.IntegerField(min_value=0, required=False)


class SmpcRunSerializer(serializers.Serializer):
    """Options of the ``smpc`` and ``overtaking`` commands"""
    BACKENDS = ('analytic', 'mcs')

    backend = serializers.ChoiceField(choices=BACKENDS, default='analytic')
    level = serializers.CharField(required=False)
    steps = serializers.IntegerField(min_value=1, required=False)
    samples = serializers.IntegerField(min_value=1, required=False)
    runs = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
