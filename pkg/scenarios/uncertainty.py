"""Object uncertainty models used by the scenarios and the planner."""
import math
from dataclasses import dataclass

from django.core.exceptions import ValidationError


@dataclass(frozen=True)
class LogisticUncertainty:
    """
    Distance-dependent spread: sigma(d) = sigma_max / (1 + exp(-gamma (d - d0))).

    Far objects are uncertain, close objects are well observed.
    """
    gamma: float = 1.0
    d0: float = 1.0
    sigma_max: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, 'sigma_max', tuple(float(s) for s in self.sigma_max))
        if len(self.sigma_max) != 3 or min(self.sigma_max) <= 0:
            raise ValidationError(
                'sigma_max must be three positive numbers', code='invalid_uncertainty'
            )
        if not (math.isfinite(self.gamma) and math.isfinite(self.d0)):
            raise ValidationError('gamma and d0 must be finite', code='invalid_uncertainty')

    def sigma(self, distance):
        return logistic_sigma(distance, self)

    def to_json(self):
        return {'gamma': self.gamma, 'd0': self.d0, 'sigma_max': list(self.sigma_max)}


def logistic_sigma(distance, model):
    exponent = -model.gamma * (distance - model.d0)
    # exp overflows long before the factor stops being zero
    factor = 0.0 if exponent > 700 else 1.0 / (1.0 + math.exp(exponent))
    return tuple(s * factor for s in model.sigma_max)


def horizon_sigma(sigma0, growth, steps_ahead):
    """Standard deviations ``steps_ahead`` prediction steps out: sigma0 + n * growth."""
    if steps_ahead < 0:
        raise ValidationError('steps_ahead must be non-negative', code='invalid_uncertainty')
    return tuple(s + steps_ahead * q for s, q in zip(sigma0, growth))
