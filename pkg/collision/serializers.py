from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from core.conf import engine_settings
from geometry.shapes import RectangleFootprint

from .gaussian import GaussianBelief


def _at_most(value, key, label):
    limit = int(engine_settings()[key])
    if value > limit:
        raise serializers.ValidationError(f'{label} must be at most {limit}, got {value}')
    return value


def _split(value, separators):
    if isinstance(value, str):
        text = value.strip()
        for sep in separators:
            text = text.replace(sep, ',')
        return [part for part in text.split(',') if part.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return None


class FootprintField(serializers.Field):
    """
    Rectangle footprint given as "LxW", [L, W] or {"length": L, "width": W}.
    """
    default_error_messages = {
        'invalid': 'Expected a footprint as "LxW", [L, W] or {"length": L, "width": W}.',
    }

    def to_internal_value(self, data):
        if isinstance(data, dict):
            parts = [data.get('length'), data.get('width')]
        else:
            parts = _split(data, ('x', 'X', '×'))
        try:
            length, width = (float(p) for p in parts)
        except (TypeError, ValueError):
            self.fail('invalid')
        try:
            return RectangleFootprint(length, width)
        except DjangoValidationError as exc:
            raise serializers.ValidationError(exc.messages)

    def to_representation(self, value):
        return {'length': value.length, 'width': value.width}


class FloatListField(serializers.Field):
    """Fixed-length list of floats, also accepted as a comma separated string."""
    default_error_messages = {
        'invalid': 'Expected {size} comma separated numbers.',
    }

    def __init__(self, size=3, **kwargs):
        self.size = size
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        parts = _split(data, ())
        try:
            values = tuple(float(p) for p in parts)
        except (TypeError, ValueError):
            self.fail('invalid', size=self.size)
        if len(values) != self.size:
            self.fail('invalid', size=self.size)
        return values

    def to_representation(self, value):
        return list(value)


class CircleCountsField(serializers.Field):
    """Ego and object circle counts as "E,O" or [E, O]."""
    default_error_messages = {
        'invalid': 'Expected two positive integers "E,O".',
    }

    def to_internal_value(self, data):
        parts = _split(data, ())
        try:
            counts = tuple(int(p) for p in parts)
        except (TypeError, ValueError):
            self.fail('invalid')
        if len(counts) != 2 or min(counts) < 1:
            self.fail('invalid')
        return counts

    def to_representation(self, value):
        return list(value)


class BeliefSerializer(serializers.Serializer):
    """
    Gaussian belief over the object configuration in the ego frame
    """
    mu = FloatListField(help_text='Mean (x, y, theta)')
    sigma = FloatListField(help_text='Standard deviations (sx, sy, stheta), all > 0')

    def validate_sigma(self, value):
        """Validate that every standard deviation is strictly positive"""
        for axis, entry in zip(('x', 'y', 'theta'), value):
            if entry <= 0:
                raise serializers.ValidationError(
                    f'sigma_{axis} must be strictly positive, got {entry:g}'
                )
        return value

    def validate(self, attrs):
        try:
            attrs['belief'] = GaussianBelief(mu=attrs['mu'], sigma=attrs['sigma'])
        except DjangoValidationError as exc:
            raise serializers.ValidationError(exc.messages)
        return attrs


class PocRequestSerializer(BeliefSerializer):
    """
    Analytic POC request: footprints, circle counts, grid and belief
    """
    ego = FootprintField(default=RectangleFootprint(4.5, 2.0), help_text='Ego footprint "LxW"')
    obj = FootprintField(default=RectangleFootprint(4.5, 2.0), help_text='Object footprint "LxW"')
    circles = CircleCountsField(required=False, help_text='Circle counts "E,O"')
    grid = serializers.IntegerField(required=False, min_value=2, help_text='Grid samples per axis')
    nbeta = serializers.IntegerField(required=False, min_value=3, help_text='Wrapped-Gaussian truncation')

    def validate_circles(self, value):
        _at_most(max(value), 'MAX_CIRCLES', 'circle count')
        return value

    def validate_grid(self, value):
        return _at_most(value, 'MAX_GRID_SAMPLES', 'grid')

    def validate(self, attrs):
        attrs = super().validate(attrs)
        defaults = engine_settings()
        attrs.setdefault('circles', tuple(defaults['CIRCLES']))
        attrs.setdefault('grid', defaults['GRID_SAMPLES'])
        attrs.setdefault('nbeta', defaults['N_BETA'])
        return attrs


class OracleRequestSerializer(PocRequestSerializer):
    """
    Monte-Carlo oracle request
    """
    GEOMETRY_CHOICES = ('rectangle', 'circles')

    samples = serializers.IntegerField(required=False, min_value=1, help_text='Number of samples')
    seed = serializers.IntegerField(required=False, min_value=0, help_text='Sampler seed')
    geometry = serializers.ChoiceField(
        choices=GEOMETRY_CHOICES,
        default='rectangle',
        help_text='Collision test on the exact rectangles or on the circle covers'
    )

    def validate_samples(self, value):
        return _at_most(value, 'MAX_ORACLE_SAMPLES', 'samples')

    def validate(self, attrs):
        attrs = super().validate(attrs)
        defaults = engine_settings()
        attrs.setdefault('samples', int(defaults['ORACLE_SAMPLES']))
        attrs.setdefault('seed', int(defaults['SEED']))
        return attrs


class PocResultSerializer(serializers.Serializer):
    """Analytic POC response"""
    schema_version = serializers.CharField()
    poc = serializers.FloatField()
    init_ms = serializers.FloatField()
    eval_ms = serializers.FloatField()
    rho_bar = serializers.FloatField()
    config = serializers.DictField()


class OracleResultSerializer(serializers.Serializer):
    """Monte-Carlo oracle response"""
    schema_version = serializers.CharField()
    estimate = serializers.FloatField()
    n = serializers.IntegerField()
    std_error = serializers.FloatField()
    seed = serializers.IntegerField()
    eval_ms = serializers.FloatField()
    config = serializers.DictField()
