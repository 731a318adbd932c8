from pathlib import Path
from .base import *                     # noqa: F403
from dotenv import load_dotenv
from decouple import config
import logging

load_dotenv()                           # Carga las variables del .env

# ─────────────── 1. DEBUG ───────────────
DEBUG: bool = False

# ─────────────── 2. PARALELISMO ───────────────
LAB_THREADS: int = config("LAB_THREADS", cast=int, default=4)

# ─────────────── 3. ARTEFACTOS ───────────────
LAB_OUTPUT_DIR = Path(config("LAB_OUTPUT_DIR", default=str(BASE_DIR / "artifacts")))  # noqa: F405

# ─────────────── 4. LOGGING ───────────────
LOGGING["loggers"]["django"]["level"] = "WARNING"        # noqa: F405
LOGGING["loggers"]["apps"]["level"] = "INFO"             # noqa: F405
LOGGING["handlers"]["file"]["filename"] = BASE_DIR / "logs/production.log"  # noqa: F405

# ─────────────── 5. VALIDACIÓN FINAL ───────────────
logger = logging.getLogger(__name__)
logger.info("✅ Settings de producción cargados correctamente · DEBUG=%s", DEBUG)
