"""
Enumeradores del módulo de politopos.
"""

from enum import Enum
from django.utils.translation import gettext_lazy as _


class QMethod(Enum):
    """Ruta de cálculo de q: centroide exacto o Monte-Carlo."""
    EXACT = _("Exacto")
    MONTE_CARLO = _("Monte-Carlo")

    @classmethod
    def values(cls):
        return [item.name for item in cls]

    @classmethod
    def choices(cls):
        return [(item.name, str(item.value)) for item in cls]


class SamplerKind(Enum):
    REJECTION = "rejection"
    HIT_AND_RUN = "hit_and_run"

    @classmethod
    def values(cls):
        return [item.value for item in cls]
