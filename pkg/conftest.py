"""Configure Django for pytest the same way manage.py does."""
import os
import sys
from pathlib import Path

import django

BASE_DIR = Path(__file__).resolve().parent

sys.path.insert(0, str(BASE_DIR / "apps"))
sys.path.insert(0, str(BASE_DIR))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "minmax_config.settings")
django.setup()
