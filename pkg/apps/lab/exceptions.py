"""
Excepciones de la capa de comandos del laboratorio.
Los errores de validación del documento de configuración se reportan como
django.core.exceptions.ValidationError con la ruta del campo; aquí quedan
los fallos de lectura y de escritura de artefactos.
"""

from django.utils.translation import gettext_lazy as _


class LabException(Exception):
    """
    Excepción base de la capa de comandos.
    """
    def __init__(self, mensaje=_("Error en el laboratorio.")):
        self.mensaje = mensaje
        super().__init__(str(mensaje))


class ParseException(LabException):
    """
    El documento de configuración no es JSON válido o no es un objeto.
    """
    def __init__(self, mensaje=_("No se pudo leer el documento de configuración.")):
        super().__init__(mensaje)


class ArtifactIoException(LabException):
    """
    No se pudo escribir un artefacto o el manifiesto.
    """
    def __init__(self, mensaje=_("Error de E/S al escribir artefactos."), path=None):
        self.path = path
        super().__init__(mensaje)


class UnknownCommandException(LabException):
    def __init__(self, mensaje=_("Comando de laboratorio desconocido.")):
        super().__init__(mensaje)
