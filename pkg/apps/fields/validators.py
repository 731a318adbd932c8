"""
Validaciones de los campos vectoriales.
"""

import logging

from django.utils.translation import gettext_lazy as _

from apps.fields.exceptions import (
    IndexOutOfRangeException,
    InvalidTriadSettingsException,
    NotTorusSourcedException,
)
from apps.fields.types import StirringFamily
from apps.spectrum.enums import SpectrumSource
from apps.spectrum.types import Spectrum

logger = logging.getLogger(__name__)


class FieldValidator:

    @staticmethod
    def validate_torus_source(s: Spectrum) -> None:
        if s.source is not SpectrumSource.TORUS or s.torus is None:
            logger.warning("Se pidieron tríadas de Galerkin sobre un espectro explícito")
            raise NotTorusSourcedException()

    @staticmethod
    def validate_field_index(f: StirringFamily, m: int) -> None:
        """
        Valida 0 ≤ m < M.

        Raises:
            IndexOutOfRangeException: Si el índice no corresponde a ningún campo.
        """
        if not (0 <= int(m) < f.M):
            logger.warning(f"Índice de campo {m} fuera de [0, {f.M})")
            raise IndexOutOfRangeException(
                _("Field index %(m)s is outside [0, %(M)s).") % {'m': m, 'M': f.M}
            )

    @staticmethod
    def validate_synthetic(density: float, magnitude: float) -> None:
        if not (0.0 < density <= 1.0):
            logger.warning(f"Densidad de tríadas inválida: {density}")
            raise InvalidTriadSettingsException(_("density must lie in (0, 1]."))
        if not (magnitude > 0.0):
            logger.warning(f"Magnitud de tríadas inválida: {magnitude}")
            raise InvalidTriadSettingsException(_("magnitude must be > 0."))
