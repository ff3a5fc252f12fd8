"""
Django settings for the TraceSearch project.

TraceSearch has no web surface: Django supplies settings, app loading,
management commands and the test runner. Everything below is read once at
startup and then treated as read-only configuration.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Initialise environ
env = environ.Env(
    W5H_LOG_LEVEL=(str, 'INFO'),
    W5H_THREADS=(int, 1),
    W5H_SEED=(int, 42),
)
environ.Env.read_env(BASE_DIR / '.env')

SECRET_KEY = env('SECRET_KEY', default='tracesearch-local-only')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    #MY APPS
    'core.apps.CoreConfig',
    'ingest.apps.IngestConfig',
    'entity_resolution.apps.EntityResolutionConfig',
    'frequency_index.apps.FrequencyIndexConfig',
    'text_index.apps.TextIndexConfig',
    'search.apps.SearchConfig',
    'evaluation.apps.EvaluationConfig',
    'synth.apps.SynthConfig',
]


# Database
# No subcommand touches the database; the default only keeps Django's
# checks and test runner happy.

DATABASES = {
    'default': env.db('DATABASE_URL', default=f'sqlite:///{BASE_DIR / "db.sqlite3"}'),
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': env('W5H_LOG_LEVEL'),
    },
}


# w5h search defaults
# Overridden by a --config JSON file, which is in turn overridden by flags.

W5H = {
    'paths': {
        'corpus': 'corpus.jsonl',
        'index': 'index',
        'geocache': '',
        'dictionary': str(BASE_DIR / 'ingest' / 'fixtures' / 'dictionary.json'),
        'entities': 'entities.json',
    },
    'k1': 1.2,
    'b': 0.75,
    'field_weights': {
        'what': 1.0,
        'who': 1.0,
        'when': 1.0,
        'where': 1.0,
        'how': 1.0,
    },
    'term_weights': {
        'group': 1.0,
        'user': 1.0,
        'user_src': 0.001,
        'user_time': 1.0,
        'user_time_src': 0.001,
        'group_time': 1.0,
        'location': 1.0,
        'when': 1.0,
        'how': 1.0,
        'what': 1.0,
    },
    'role_weights': {},
    'groups': [1, 2, 3, 4, 5],
    'seed': env('W5H_SEED'),
    'scorers': ['w5hf', 'fieldbm25', 'bm25', 'tfidf'],
    'threads': env('W5H_THREADS'),
}
