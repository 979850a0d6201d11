#!/usr/bin/env python
"""
Entry point of the engine commands (poc, oracle, scenario, bench, accuracy,
smpc, overtaking) and of Django's administrative tasks.
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the engine's dependencies with "
            "`pip install -r requirements.txt` inside an activated virtual environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
