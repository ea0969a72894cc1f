"""
Django settings for the minmax torus toolkit.

The project has no database, URL routing or templates; Django is used for its
settings layer, app registry, management commands and test runner.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path
from decouple import config, Csv
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config("DJANGO_SECRET_KEY", default="minmax-local-key")

DEBUG = config("DJANGO_DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "rest_framework",
    "core",
    "apps.uniformize",
    "apps.replacement",
    "apps.tightening",
    "apps.bubbles",
    "apps.runner",
]

MIDDLEWARE = []

# Numerical work only; nothing is persisted in a database.
DATABASES = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

REST_FRAMEWORK = {
    "UNAUTHENTICATED_USER": None,
}


# Pipeline defaults. Every key can be overridden with MINMAX_<KEY> in the
# environment, then by a config file, then by command-line flags.
MINMAX = {
    "GRID_SIZE": config("MINMAX_GRID_SIZE", default=64, cast=int),
    "TIME_SAMPLES": config("MINMAX_TIME_SAMPLES", default=64, cast=int),
    "EPSILON_1": config("MINMAX_EPSILON_1", default=0.5, cast=float),
    # Unset means epsilon_1 / 12.
    "EPSILON_0": config("MINMAX_EPSILON_0", default=None, cast=lambda v: None if v in (None, "") else float(v)),
    "EPSILON_SU": config("MINMAX_EPSILON_SU", default=1.0, cast=float),
    "DELTA": config("MINMAX_DELTA", default=1e-4, cast=float),
    "DELTA_0": config("MINMAX_DELTA_0", default=1e-2, cast=float),
    "DELTA_DECAY": config("MINMAX_DELTA_DECAY", default=0.5, cast=float),
    "SOLVER_TOL": config("MINMAX_SOLVER_TOL", default=1e-10, cast=float),
    "SOLVER_MAX_ITER": config("MINMAX_SOLVER_MAX_ITER", default=10000, cast=int),
    "REPLACE_TOL": config("MINMAX_REPLACE_TOL", default=1e-8, cast=float),
    "REPLACE_MAX_ITER": config("MINMAX_REPLACE_MAX_ITER", default=20000, cast=int),
    "PROBE_REPLACE_TOL": config("MINMAX_PROBE_REPLACE_TOL", default=1e-7, cast=float),
    "JACOBIAN_FLOOR": config("MINMAX_JACOBIAN_FLOOR", default=1e-8, cast=float),
    "NOISE_FLOOR": config("MINMAX_NOISE_FLOOR", default=1e-8, cast=float),
    "THREADS": config("MINMAX_THREADS", default=1, cast=int),
    "SEED": config("MINMAX_SEED", default=0, cast=int),
    "TARGET": config("MINMAX_TARGET", default="sphere3"),
    "SCENARIO": config("MINMAX_SCENARIO", default="clifford"),
    "OUTPUT_DIR": config("MINMAX_OUTPUT_DIR", default=str(BASE_DIR / "runs")),
    "ROUNDS": config("MINMAX_ROUNDS", default=5, cast=int),
    "SMOOTH_WIDTH": config("MINMAX_SMOOTH_WIDTH", default=0.0, cast=float),
    "PATCH_CENTER": config("MINMAX_PATCH_CENTER", default="0.25,0.25", cast=Csv(float)),
    "PATCH_RADIUS": config("MINMAX_PATCH_RADIUS", default=0.04, cast=float),
    "CONTINUITY_FACTOR": config("MINMAX_CONTINUITY_FACTOR", default=0.1, cast=float),
    "HOMOTOPY_SAMPLES": config("MINMAX_HOMOTOPY_SAMPLES", default=3, cast=int),
    "PROPERTY_STAR_SAMPLES": config("MINMAX_PROPERTY_STAR_SAMPLES", default=8, cast=int),
    "DEGENERATE_THRESHOLD": config("MINMAX_DEGENERATE_THRESHOLD", default=50.0, cast=float),
    "TREND_WINDOW": config("MINMAX_TREND_WINDOW", default=5, cast=int),
    "CAUCHY_TOL": config("MINMAX_CAUCHY_TOL", default=1e-2, cast=float),
    "BUBBLE_RADIUS_FACTOR": config("MINMAX_BUBBLE_RADIUS_FACTOR", default=16.0, cast=float),
    "NECK_DELTA": config("MINMAX_NECK_DELTA", default=0.05, cast=float),
    "NU": config("MINMAX_NU", default=0.1, cast=float),
}


# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(asctime)s %(levelname)s %(name)s %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "core": {
            "handlers": ["console"],
            "level": config("MINMAX_LOG_LEVEL", default="INFO"),
            "propagate": False,
        },
        "apps": {
            "handlers": ["console"],
            "level": config("MINMAX_LOG_LEVEL", default="INFO"),
            "propagate": False,
        },
    },
}

# Keep BLAS from oversubscribing when the worker pool is used.
os.environ.setdefault("OMP_NUM_THREADS", "1")
