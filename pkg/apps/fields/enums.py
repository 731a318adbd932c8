"""
Enumeradores de los campos vectoriales.
"""

from enum import Enum
from django.utils.translation import gettext_lazy as _


class ModeKind(Enum):
    """Fase de la autofunción asociada a cada índice: coseno primero, seno después."""
    COS = "cos"
    SIN = "sin"

    @classmethod
    def values(cls):
        return [item.value for item in cls]


class TriadSource(Enum):
    GALERKIN = _("Galerkin (toro)")
    SYNTHETIC = _("Sintético")

    @classmethod
    def values(cls):
        return [item.name for item in cls]

    @classmethod
    def choices(cls):
        return [(item.name, str(item.value)) for item in cls]
