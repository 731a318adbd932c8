"""
Excepciones del arnés de verificación.
Un chequeo que no pasa NO es una excepción: se reporta con passed=False.
Estas excepciones cubren entradas que no permiten evaluar el chequeo.
"""

from django.utils.translation import gettext_lazy as _


class ExperimentsException(Exception):
    """
    Excepción base del arnés de verificación.
    """
    def __init__(self, mensaje=_("Error en el arnés de verificación.")):
        self.mensaje = mensaje
        super().__init__(str(mensaje))


class TooShortException(ExperimentsException):
    """
    La serie posterior al burn-in tiene menos muestras de las necesarias para 32 lotes.
    """
    def __init__(self, mensaje=_("Serie demasiado corta para estimar medias estacionarias.")):
        super().__init__(mensaje)


class TooFewSamplesException(ExperimentsException):
    def __init__(self, mensaje=_("Muestras insuficientes para el estimador.")):
        super().__init__(mensaje)


class NotGoodStateException(ExperimentsException):
    """
    El estado inicial de la prueba de equilibrio no pertenece al conjunto bueno.
    """
    def __init__(self, mensaje=_("El estado inicial no es bueno para los umbrales dados.")):
        super().__init__(mensaje)


class InvalidSweepException(ExperimentsException):
    """
    La rejilla de ε del barrido no es descendente o tiene menos de tres valores.
    """
    def __init__(self, mensaje=_("Rejilla de ε inválida para el barrido invíscido.")):
        super().__init__(mensaje)
