"""
Settings for the ktree_search project.

Holds the Django configuration of the reference scoring service together with
the engine defaults the CLI starts from. Every value can be overridden through
the environment.

For more information on Django settings, see
https://docs.djangoproject.com/en/4.2/topics/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("SECRET_KEY", "django-insecure-ktree-scoring-service-development-key")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv("DEBUG", "True").lower() == "true"

ALLOWED_HOSTS = os.getenv("ALLOWED_HOSTS", "localhost,127.0.0.1,0.0.0.0").split(",")


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # Third party apps
    "rest_framework",
    "drf_spectacular",
    # Local apps
    "scoring",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
]

ROOT_URLCONF = "ktree_search.urls"

WSGI_APPLICATION = "ktree_search.wsgi.application"

# The scoring service is stateless; no database is configured.
DATABASES = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Django REST Framework Configuration
REST_FRAMEWORK = {
    "DEFAULT_AUTHENTICATION_CLASSES": [],
    "DEFAULT_PERMISSION_CLASSES": [
        "rest_framework.permissions.AllowAny",
    ],
    "UNAUTHENTICATED_USER": None,
    "DEFAULT_RENDERER_CLASSES": [
        "rest_framework.renderers.JSONRenderer",
    ],
    "DEFAULT_PARSER_CLASSES": [
        "rest_framework.parsers.JSONParser",
    ],
    "DEFAULT_SCHEMA_CLASS": "drf_spectacular.openapi.AutoSchema",
}

# API Documentation Configuration
SPECTACULAR_SETTINGS = {
    "TITLE": "ktree scoring API",
    "DESCRIPTION": "Pairwise text scoring service used by interaction-mode tree search",
    "VERSION": "0.1.0",
    "SERVE_INCLUDE_SCHEMA": False,
}

# Scoring service configuration
SCORING_SERVICE = {
    "BATCH_LIMIT": int(os.getenv("SCORING_BATCH_LIMIT", "256")),
}


# Engine defaults (CLI run configuration starts from these)
KTREE = {
    "SEED": int(os.getenv("KTREE_SEED", "0")),
    "BRANCHING": int(os.getenv("KTREE_BRANCHING", "5")),
    "LEAF_CAPACITY": int(os.getenv("KTREE_LEAF_CAPACITY", "16")),
    "REP_COUNT": int(os.getenv("KTREE_REP_COUNT", "3")),
    "MAX_ITER": int(os.getenv("KTREE_MAX_ITER", "50")),
    "TOL": float(os.getenv("KTREE_TOL", "1e-4")),
    "BEAM_WIDTH": os.getenv("KTREE_BEAM_WIDTH", "20"),  # integer or "inf"
    "TOP_N": int(os.getenv("KTREE_TOP_N", "20")),
    "EVAL_CUTOFF": int(os.getenv("KTREE_EVAL_CUTOFF", "20")),
    "SCORER_URL": os.getenv("KTREE_SCORER_URL", ""),
    "SCORER_TIMEOUT_MS": int(os.getenv("KTREE_SCORER_TIMEOUT_MS", "10000")),
    "SCORER_MAX_RETRIES": int(os.getenv("KTREE_SCORER_MAX_RETRIES", "3")),
    "SCORER_BATCH_LIMIT": int(os.getenv("KTREE_SCORER_BATCH_LIMIT", "64")),
    "SCORER_RETRY_BACKOFF_MS": int(os.getenv("KTREE_SCORER_RETRY_BACKOFF_MS", "100")),
}


# Logging Configuration
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {process:d} {thread:d} {message}",
            "style": "{",
        },
        "simple": {
            "format": "{levelname} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
            "stream": "ext://sys.stderr",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.getenv("KTREE_LOG_LEVEL", "INFO"),
    },
}
