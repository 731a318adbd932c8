"""
Excepciones de los campos vectoriales.
Las lanzan services.py (tensor de tríadas, familia de agitación) y validators.py.
"""

from django.utils.translation import gettext_lazy as _


class FieldsException(Exception):
    """
    Excepción base de los campos vectoriales.
    """
    def __init__(self, mensaje=_("Error en los campos vectoriales.")):
        self.mensaje = mensaje
        super().__init__(str(mensaje))


class NotTorusSourcedException(FieldsException):
    """
    El tensor de Galerkin necesita vectores de onda; un espectro explícito no los tiene.
    """
    def __init__(self, mensaje=_("El espectro no proviene del toro: no hay vectores de onda para las tríadas.")):
        super().__init__(mensaje)


class IndexOutOfRangeException(FieldsException):
    def __init__(self, mensaje=_("Índice de campo de agitación fuera de rango.")):
        super().__init__(mensaje)


class InvalidTriadSettingsException(FieldsException):
    """Densidad o magnitud inválidas para un tensor sintético."""
    def __init__(self, mensaje=_("Parámetros del tensor sintético inválidos.")):
        super().__init__(mensaje)
