"""
Request handling shared by the ``poc``/``oracle`` commands and the API views.
Both take the validated data of the request serializers.
"""
import time

from core.manifest import SCHEMA_VERSION
from geometry.shapes import cover_rectangle

from .estimator import cached_estimator
from .gaussian import HeadingTruncation
from .oracle import SeededSampler, mcs_poc, mcs_poc_circles


def _config(data, **extra):
    config = {
        'ego': str(data['ego']),
        'obj': str(data['obj']),
        'circles': list(data['circles']),
        'mu': list(data['mu']),
        'sigma': list(data['sigma']),
    }
    config.update(extra)
    return config


def evaluate_poc(data):
    n_ego, n_obj = data['circles']
    started = time.perf_counter()
    est = cached_estimator(data['ego'], data['obj'], n_ego, n_obj, data['grid'])
    initialised = time.perf_counter()
    poc = est.estimate(data['belief'], HeadingTruncation(data['nbeta']))
    finished = time.perf_counter()
    return {
        'schema_version': SCHEMA_VERSION,
        'poc': poc,
        'init_ms': 1e3 * (initialised - started),
        'eval_ms': 1e3 * (finished - initialised),
        'rho_bar': est.rho_bar,
        'config': _config(data, grid=data['grid'], nbeta=data['nbeta']),
    }


def evaluate_oracle(data):
    sampler = SeededSampler(data['seed'])
    started = time.perf_counter()
    if data['geometry'] == 'circles':
        n_ego, n_obj = data['circles']
        result = mcs_poc_circles(
            cover_rectangle(data['ego'], n_ego), cover_rectangle(data['obj'], n_obj),
            data['belief'], data['samples'], sampler,
        )
    else:
        result = mcs_poc(data['ego'], data['obj'], data['belief'], data['samples'], sampler)
    payload = {'schema_version': SCHEMA_VERSION, **result.to_json()}
    payload['eval_ms'] = 1e3 * (time.perf_counter() - started)
    payload['config'] = _config(data, samples=data['samples'], seed=data['seed'],
                                geometry=data['geometry'])
    return payload
