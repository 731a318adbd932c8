"""
Excepciones de la difusión efectiva.
"""

from django.utils.translation import gettext_lazy as _


class EffectiveException(Exception):
    """
    Excepción base de la difusión efectiva.
    """
    def __init__(self, mensaje=_("Error en la difusión efectiva.")):
        self.mensaje = mensaje
        super().__init__(str(mensaje))


class NotPSDException(EffectiveException):
    """
    La matriz de difusión tiene un menor negativo más allá de la tolerancia −10⁻¹²·traza.
    """
    def __init__(self, mensaje=_("La matriz de difusión no es semidefinida positiva.")):
        super().__init__(mensaje)


class StuckAtBoundaryException(EffectiveException):
    """
    Ni las 12 particiones ni la reflexión devolvieron la propuesta al interior del cono.
    """
    def __init__(self, mensaje=_("El paso efectivo quedó fuera del cono tras la reflexión."), point=None):
        self.point = point
        super().__init__(mensaje)
