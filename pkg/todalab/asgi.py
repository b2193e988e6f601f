"""
ASGI config for the todalab project (serves the run log and JSON endpoints).
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'todalab.settings')

application = get_asgi_application()
