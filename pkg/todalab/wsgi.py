"""
WSGI config for the todalab project (serves the run log and JSON endpoints).
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'todalab.settings')

application = get_wsgi_application()
