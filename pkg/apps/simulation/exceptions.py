"""
Excepciones de la integración temporal.
MidpointDivergedException la atrapa el propio integrador para partir el paso;
las demás se propagan hasta el comando que lanzó la corrida.
"""

from django.utils.translation import gettext_lazy as _


class SimulationException(Exception):
    """
    Excepción base de la integración temporal.
    """
    def __init__(self, mensaje=_("Error en la integración de la trayectoria.")):
        self.mensaje = mensaje
        super().__init__(str(mensaje))


class MidpointDivergedException(SimulationException):
    """
    La iteración del punto medio no convergió dentro de midpoint_max_iter.
    """
    def __init__(self, mensaje=_("La iteración del punto medio no convergió.")):
        super().__init__(mensaje)


class TrajectoryAbortedException(SimulationException):
    """
    Se agotaron las 8 particiones del paso rápido; la trayectoria se aborta.
    """
    def __init__(self, mensaje=_("Trayectoria abortada tras agotar las particiones del paso rápido."), state=None, time=None):
        self.state = state
        self.time = time
        super().__init__(mensaje)


class NonFiniteException(SimulationException):
    def __init__(self, mensaje=_("El estado dejó de ser finito."), state=None, time=None):
        self.state = state
        self.time = time
        super().__init__(mensaje)


class InvalidSimConfigException(SimulationException):
    def __init__(self, mensaje=_("Configuración de simulación inválida.")):
        super().__init__(mensaje)
