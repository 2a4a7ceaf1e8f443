import os

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROJECT_DIR = os.path.dirname(os.path.abspath(__file__))
SECRETS = os.path.join(PROJECT_DIR, 'secrets')

# SECURITY WARNING: keep the secret key used in production secret!
# The key only signs admin sessions; simulations never touch it.
if os.getenv('DJANGO_SECRET_KEY', None):
    SECRET_KEY = os.environ['DJANGO_SECRET_KEY']
elif os.path.exists(os.path.join(SECRETS, 'django_secret.key')):
    with open(os.path.join(SECRETS, 'django_secret.key'), 'r') as f:
        SECRET_KEY = f.readline().strip()
else:
    SECRET_KEY = 'skjump-local-development-key'

DEBUG = os.getenv('SKJUMP_DEBUG', '1') == '1'

ALLOWED_HOSTS = [
    'localhost',
    '127.0.0.1',
]

# Application definitions
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'rest_framework',  # Read-only API over the run registry
    'api',
    'dynamics',
    'noise',
    'integrate',
    'stats',
    'experiments',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'skjump.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'skjump.wsgi.application'

# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases
# Only the run registry is stored here.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('SKJUMP_DATABASE',
                          os.path.join(BASE_DIR, 'skjump.sqlite3')),
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/
LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

# Validation messages are rendered in worker processes that never call
# django.setup(); the null translation backend keeps that safe.
USE_I18N = False

USE_TZ = True

STATIC_URL = '/static/'

# Rest API Settings
REST_FRAMEWORK = {
    'DEFAULT_PAGINATION_CLASS': 'rest_framework.pagination.PageNumberPagination',
    'PAGE_SIZE': 10,
    'DEFAULT_PERMISSION_CLASSES': (
        'rest_framework.permissions.AllowAny',
    ),
}

# Simulation settings, read through skjump.conf.sim_settings
SKJUMP = {
    'DELTA_LOG': 1e-6,
    'TOL_ASSUME': 1e-9,
    'M_COMP': 32,
    'M_XI': 16,
    'ASSUMPTION_MARKS': 64,
    'FD_REL_TOL': 1e-5,
    'KS_COEFFICIENT': 1.36,
    'NOISE_FLOOR_MARGIN': 5.0,
    'SK_STABILITY_RATIO': 10.0,
    'CHUNK_SIZE': 500,
    'ORACLE_PATHS': 50,
    'ORACLE_R_POINTS': 10,
}

# Logging
# https://docs.djangoproject.com/en/4.2/topics/logging/
LOG_LEVEL = os.getenv('SKJUMP_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
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
        'dynamics': {'handlers': ['console'], 'level': LOG_LEVEL},
        'noise': {'handlers': ['console'], 'level': LOG_LEVEL},
        'integrate': {'handlers': ['console'], 'level': LOG_LEVEL},
        'stats': {'handlers': ['console'], 'level': LOG_LEVEL},
        'experiments': {'handlers': ['console'], 'level': LOG_LEVEL},
    },
}
