"""
Excepciones del politopo sectorial y de los coeficientes q.
"""

from django.utils.translation import gettext_lazy as _


class PolytopeException(Exception):
    """
    Excepción base del módulo de politopos.
    """
    def __init__(self, mensaje=_("Error en el cálculo del politopo.")):
        self.mensaje = mensaje
        super().__init__(str(mensaje))


class OutsideConeException(PolytopeException):
    """
    El punto (u, v) no cumple 0 ≤ v ≤ u ≤ λ_N·v.
    """
    def __init__(self, mensaje=_("El punto (u, v) está fuera del cono.")):
        super().__init__(mensaje)


class DimensionTooHighException(PolytopeException):
    """La ruta exacta (envolvente convexa) está limitada a dimensión ≤ 8."""
    def __init__(self, mensaje=_("Dimensión demasiado alta para el cálculo exacto del politopo.")):
        super().__init__(mensaje)


class DegeneratePolytopeException(PolytopeException):
    def __init__(self, mensaje=_("Politopo degenerado: no tiene interior.")):
        super().__init__(mensaje)


class NegativeRadialException(PolytopeException):
    """
    Las coordenadas radiales s₁ o s₂ derivadas de σ son negativas: σ está fuera del politopo.
    """
    def __init__(self, mensaje=_("Coordenada radial negativa: σ fuera del politopo.")):
        super().__init__(mensaje)


class RatioOutOfRangeException(PolytopeException):
    def __init__(self, mensaje=_("Los cocientes de la tabla deben estar ordenados dentro de [1, λ_N].")):
        super().__init__(mensaje)
