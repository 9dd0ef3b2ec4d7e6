"""
Django settings for the tradeflow project.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# No request handling happens in this project; the key only satisfies Django.
SECRET_KEY = os.getenv("SECRET_KEY", "tradeflow-local-only")

DEBUG = os.getenv("DEBUG", "False") == "True"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Third party apps
    'rest_framework',

    # Local apps
    'core',
    'exchange',
    'analytic',
    'integrator',
    'steady',
    'money',
    'region',
    'cli',
]

# Scenarios and results live in plain files; nothing is persisted.
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Logging

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in ['core', 'exchange', 'analytic', 'integrator', 'steady', 'money', 'region', 'cli']
    },
}


# Tradeflow Configuration

# Caps the region-scan process pool; unset lets the executor decide.
TRADEFLOW_THREADS = int(os.getenv("TRADEFLOW_THREADS", "0")) or None

# `simulate --both` fails above this sup-norm discrepancy.
TRADEFLOW_DISCREPANCY_LIMIT = float(os.getenv("TRADEFLOW_DISCREPANCY_LIMIT", "1e-6"))

# Chatter guard for piecewise closed-form simulation.
TRADEFLOW_MAX_SEGMENTS = int(os.getenv("TRADEFLOW_MAX_SEGMENTS", str(10**6)))
