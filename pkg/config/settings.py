from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config("SECRET_KEY", default="insecure-metrology-dev-key")

DEBUG = config("DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = config(
    "ALLOWED_HOSTS",
    default="localhost",
    cast=lambda hosts: [host.strip() for host in hosts.split(",")],
)

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "rest_framework",
    # Project Apps
    "common.apps.CommonConfig",
    "metrology.apps.MetrologyConfig",
]


# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": config("DATABASE_PATH", default=str(BASE_DIR / "db.sqlite3")),
    }
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

# Default primary key field type
# https://docs.djangoproject.com/en/4.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging
# Console logging goes to stderr; stdout carries CSV/JSON output.

LOG_LEVEL = config("LOG_LEVEL", default="INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s %(message)s"},
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "metrology": {"handlers": ["console"], "level": LOG_LEVEL},
        "common": {"handlers": ["console"], "level": LOG_LEVEL},
    },
}


# Metrology engine

# Full-state oracle guard: d**N must not exceed 2**METROLOGY_DENSE_QUBIT_LIMIT
METROLOGY_DENSE_QUBIT_LIMIT = config("METROLOGY_DENSE_QUBIT_LIMIT", default=12, cast=int)

# Largest party count for dense multi-copy observables (collective X2, k-copy states)
METROLOGY_TWIRL_PARTY_LIMIT = config("METROLOGY_TWIRL_PARTY_LIMIT", default=6, cast=int)

# No signal once Var(M) / |d<M>/dtheta|^2 exceeds 1 / METROLOGY_SIGNAL_ATOL**2
METROLOGY_SIGNAL_ATOL = config("METROLOGY_SIGNAL_ATOL", default=1e-9, cast=float)

METROLOGY_MC_STREAMS = config("METROLOGY_MC_STREAMS", default=4, cast=int)

METROLOGY_WORKERS = config("METROLOGY_WORKERS", default=4, cast=int)

METROLOGY_DEFAULT_SEED = config("METROLOGY_DEFAULT_SEED", default=7, cast=int)

METROLOGY_VERSION = config("METROLOGY_VERSION", default="0.1.0")
