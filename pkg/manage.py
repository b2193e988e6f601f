#!/usr/bin/env python
"""Command-line entry point for the Toda shock-wave lab."""
import os
import sys


def main():
    """Run lab and administrative commands."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'todalab.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages from requirements.txt "
            "into the active environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
