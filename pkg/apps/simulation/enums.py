"""
Enumeradores de la integración temporal.
"""

from enum import Enum
from django.utils.translation import gettext_lazy as _


class SimMode(Enum):
    """
    FULL: Strang (OU exacto + punto medio rápido). FAST_ONLY: solo el flujo rápido.
    REFERENCE: Heun de Stratonovich. FORCING_ONLY: ε = ∞, OU exacto sin deriva ni agitación.
    EFFECTIVE: difusión efectiva en el cono.
    """
    FULL = "full"
    FAST_ONLY = "fast"
    REFERENCE = "reference"
    FORCING_ONLY = "forcing"
    EFFECTIVE = "effective"

    @classmethod
    def values(cls):
        return [item.value for item in cls]

    @classmethod
    def choices(cls):
        return [(item.value, item.name.replace("_", " ").title()) for item in cls]


class ReferenceScheme(Enum):
    HEUN = _("Heun (Stratonovich)")
    EULER_ITO = _("Euler–Maruyama (Itô)")

    @classmethod
    def values(cls):
        return [item.name for item in cls]
