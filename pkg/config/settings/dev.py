"""
Configuración para el entorno de desarrollo de Galerkin Lab.
Extiende base.py con logging detallado y un directorio de artefactos local.
"""

from .base import *
from decouple import config

# 🔹 1. DEBUG
DEBUG = True

# 🔹 2. LOGGING (nivel detallado para desarrollo)
LOGGING['loggers']['django']['level'] = 'INFO'
LOGGING['loggers']['apps']['level'] = 'DEBUG'
LOGGING['handlers']['console']['level'] = config('LAB_CONSOLE_LEVEL', default='WARNING')

# 🔹 3. PARALELISMO (un hilo por defecto para corridas reproducibles y pruebas rápidas)
LAB_THREADS = config('LAB_THREADS', cast=int, default=1)
