from django.conf import settings

DEFAULTS = {
    'GRID_SAMPLES': 20,
    'GRID_LEVELS': (20, 40, 80, 160),
    'N_BETA': 3,
    'CIRCLES': (3, 3),
    'ORACLE_SAMPLES': 100_000,
    'SEED': 0,
    'OUTPUT_DIR': 'output',
    'CACHE_INTERVALS': False,
    'MAX_GRID_SAMPLES': 400,
    'MAX_ORACLE_SAMPLES': 10_000_000,
    'MAX_CIRCLES': 16,
}


def engine_settings():
    """Engine defaults merged with ``settings.POC_ENGINE``."""
    resolved = dict(DEFAULTS)
    resolved.update(getattr(settings, 'POC_ENGINE', {}))
    return resolved
