"""
Enumeradores del núcleo espectral.
"""

from enum import Enum
from django.utils.translation import gettext_lazy as _


class SpectrumSource(Enum):
    """Origen del espectro: toro delgado con vectores de onda, o lista explícita de μ."""
    TORUS = _("Toro")
    EXPLICIT = _("Explícito")

    @classmethod
    def values(cls):
        return [item.name for item in cls]

    @classmethod
    def choices(cls):
        return [(item.name, str(item.value)) for item in cls]


class StateClass(Enum):
    """
    Clasificación de un estado frente al conjunto bueno (cociente lejos de todo λ).
    """
    GOOD = _("Bueno")
    UNTAMED = _("Indómito")

    @classmethod
    def values(cls):
        return [item.name for item in cls]

    @classmethod
    def choices(cls):
        return [(item.name, str(item.value)) for item in cls]


class MomentFamily(Enum):
    """Familias de cotas de momentos: en U (presupuestos B₁) o en V (presupuestos B₀)."""
    U = "U"
    V = "V"

    @classmethod
    def values(cls):
        return [item.name for item in cls]
