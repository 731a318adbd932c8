"""
Validaciones de la configuración de integración.
"""

import logging

import numpy as np
from django.utils.translation import gettext_lazy as _

from apps.simulation.exceptions import InvalidSimConfigException, NonFiniteException
from apps.simulation.types import SimConfig

logger = logging.getLogger(__name__)


class SimulationValidator:

    @staticmethod
    def validate_config(cfg: SimConfig) -> None:
        """
        Raises:
            InvalidSimConfigException: Si algún paso, tolerancia o ventana es inválido.
        """
        rules = [
            (cfg.h > 0, _("h must be positive (outer step).")),
            (cfg.fast_substep_factor > 0, _("fast_substep_factor must be positive.")),
            (cfg.t_end > 0, _("t_end must be positive.")),
            (0 <= cfg.burn_in < cfg.t_end, _("burn_in must lie in [0, t_end).")),
            (cfg.midpoint_tol > 0, _("midpoint_tol must be positive.")),
            (cfg.midpoint_max_iter >= 1, _("midpoint_max_iter must be at least 1.")),
            (cfg.record_stride >= 1, _("record_stride must be at least 1.")),
        ]
        for ok, message in rules:
            if not ok:
                logger.warning(f"Configuración de simulación rechazada: {message}")
                raise InvalidSimConfigException(message)

    @staticmethod
    def validate_finite(x: np.ndarray, time: float, last_finite: np.ndarray) -> None:
        if not np.all(np.isfinite(x)):
            logger.error(f"Estado no finito en t={time}; último estado finito: {last_finite.tolist()}")
            raise NonFiniteException(state=last_finite.copy(), time=time)
