"""
Eventos estructurados de corrida.

Cada artefacto escrito, cada chequeo evaluado y cada incidente del
integrador (partición del paso rápido, aborto de trayectoria, reflexión en
la frontera, advertencia de autocorrelación) se emite como una línea JSON en
el logger 'apps.lab.runs'.
"""

import logging

run_logger = logging.getLogger("apps.lab.runs")


def log_event(event: str, level: int = logging.INFO, **fields) -> None:
    run_logger.log(level, event, extra={"event": event, **fields})
