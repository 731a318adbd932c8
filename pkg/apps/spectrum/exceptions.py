"""
Excepciones del núcleo espectral.
Cubren la construcción del espectro, la compatibilidad de dimensiones y las
funciones analíticas escalares (serie Φ). Las lanzan services.py y
validators.py; los comandos del laboratorio las traducen a un JSON de fallo.
"""

from django.utils.translation import gettext_lazy as _


class SpectrumException(Exception):
    """
    Excepción base del núcleo espectral.
    Permite la captura genérica en servicios y comandos.
    """
    def __init__(self, mensaje=_("Error en el núcleo espectral.")):
        self.mensaje = mensaje
        super().__init__(str(mensaje))


class DegenerateSpectrumException(SpectrumException):
    """
    Dos autovalores coinciden, μ₁ ≠ 1 o la escalera no es estrictamente creciente.
    """
    def __init__(self, mensaje=_("Espectro degenerado: los autovalores deben ser distintos y crecientes.")):
        super().__init__(mensaje)


class TooFewModesException(SpectrumException):
    """El espectro necesita al menos cuatro pares de modos."""
    def __init__(self, mensaje=_("Se requieren al menos n = 4 pares de modos.")):
        super().__init__(mensaje)


class BadAspectException(SpectrumException):
    def __init__(self, mensaje=_("El aspecto del toro debe estar en (0, 1].")):
        super().__init__(mensaje)


class InvalidParamsException(SpectrumException):
    """
    Parámetros del modelo fuera de rango (a, δ, κ, ε).
    """
    def __init__(self, mensaje=_("Parámetros del modelo inválidos.")):
        super().__init__(mensaje)


class DimensionMismatchException(SpectrumException):
    def __init__(self, mensaje=_("La dimensión del estado no coincide con el espectro.")):
        super().__init__(mensaje)


class ZeroStateException(SpectrumException):
    """
    El estado es nulo y el cociente |x|²/|x|²₋₁ no está definido.
    """
    def __init__(self, mensaje=_("Estado nulo: el cociente enstrofía/energía no está definido.")):
        super().__init__(mensaje)


class DivergentSeriesException(SpectrumException):
    """
    La serie Φ(z, b, b′) diverge (z·b′ ≥ 1) o no converge dentro del tope de términos.
    """
    def __init__(self, mensaje=_("Serie divergente: se requiere z·b′ < 1.")):
        super().__init__(mensaje)
