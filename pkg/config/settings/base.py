"""
Configuración base para Galerkin Lab.
Este archivo contiene las configuraciones compartidas para todos los entornos (dev, prod).
El proyecto no usa base de datos ni vistas: Django aporta el registro de apps,
los comandos de gestión (CLI del laboratorio) y la configuración de logging.
"""

from pathlib import Path
from django.utils.translation import gettext_lazy as _
import environ

# 🔹 1. INICIALIZACIÓN DE ENTORNO
env = environ.Env(
    DEBUG=(bool, False),
    LAB_THREADS=(int, 1),
    LAB_OUTPUT_DIR=(str, ''),
)

# 🔹 2. DIRECTORIOS Y PATHS
BASE_DIR = Path(__file__).resolve().parent.parent.parent
LOGS_DIR = BASE_DIR / 'logs'
LOGS_DIR.mkdir(exist_ok=True)

# 🔹 3. SEGURIDAD GENERAL
SECRET_KEY = env('DJANGO_SECRET_KEY', default=None)
if not SECRET_KEY:
    SECRET_KEY = 'insecure-dev-key-for-testing-only'  # Sin superficie web; solo requerido por Django

DEBUG = env('DEBUG')
ALLOWED_HOSTS: list[str] = []

# 🔹 4. APLICACIONES INSTALADAS
INSTALLED_APPS = [
    'apps.spectrum.apps.SpectrumConfig',
    'apps.fields.apps.FieldsConfig',
    'apps.polytope.apps.PolytopeConfig',
    'apps.simulation.apps.SimulationConfig',
    'apps.effective.apps.EffectiveConfig',
    'apps.experiments.apps.ExperimentsConfig',
    'apps.lab.apps.LabConfig',
]

# 🔹 5. BASE DE DATOS (no se persiste nada; los artefactos van a disco)
DATABASES: dict = {}

# 🔹 6. INTERNACIONALIZACIÓN
LANGUAGE_CODE = 'es-mx'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True
LANGUAGES = [
    ('es-mx', _('Español (México)')),
    ('en', _('English')),
]

# 🔹 7. CAMPO AUTOMÁTICO
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# 🔹 8. LOGGING
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {module} {funcName} {lineno} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
        'json': {
            '()': 'pythonjsonlogger.json.JsonFormatter',
            'format': '%(levelname)s %(asctime)s %(name)s %(module)s %(funcName)s %(lineno)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG' if DEBUG else 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': LOGS_DIR / 'lab.log',
            'maxBytes': 10 * 1024 * 1024,  # 10MB
            'backupCount': 5,
            'formatter': 'json',
        },
        'runs': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': LOGS_DIR / 'runs.log',
            'maxBytes': 10 * 1024 * 1024,
            'backupCount': 5,
            'formatter': 'json',
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'WARNING',
            'propagate': False,
        },
        'apps': {
            'handlers': ['console', 'file'],
            'level': 'DEBUG' if DEBUG else 'INFO',
            'propagate': False,
        },
        'apps.lab.runs': {
            'handlers': ['runs'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}

# 🔹 9. LABORATORIO: VALORES POR DEFECTO
# Sistema de referencia n=4 sobre el toro delgado de aspecto 0.7.
LAB_DEFAULT_SPECTRUM = {
    'aspect': 0.7,
    'wavevectors': [[0, 1], [1, 0], [1, 1], [0, 2]],
}
LAB_DEFAULT_PARAMS = {
    'a': 1.0,
    'delta': [0.0, 0.0, 0.0, 0.0],
    'kappa': 0.5,
    'eps': 0.5,
}
LAB_DEFAULT_SIM = {
    'h': 0.05,
    'fast_substep_factor': 0.2,
    't_end': 2100.0,
    'burn_in': 100.0,
    'seed': 20240611,
    'record_stride': 1,
    'midpoint_tol': 1e-12,
    'midpoint_max_iter': 50,
}
LAB_Q_GRID_SIZE = 2048
LAB_CODE_VERSION = '1.0.0'

# Único override por entorno del comportamiento de una corrida: el directorio de salida.
LAB_OUTPUT_DIR = Path(env('LAB_OUTPUT_DIR') or (BASE_DIR / 'artifacts'))
LAB_THREADS = env('LAB_THREADS')
