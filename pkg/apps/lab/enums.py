"""
Enumeradores de la capa de comandos.
"""

from enum import Enum


class LabCommand(Enum):
    """Subcomando del laboratorio; el valor es también el subdirectorio de salida."""
    SPECTRUM = "spectrum"
    DRIFT_TABLE = "drift-table"
    QTABLE = "qtable"
    SIMULATE = "simulate"
    CHECK = "check"
    INVISCID = "inviscid"
    CONDENSATION = "condensation"
    EQUILIBRATE = "equilibrate"

    @classmethod
    def values(cls):
        return [item.value for item in cls]

    @classmethod
    def choices(cls):
        return [(item.value, item.name.replace("_", " ").title()) for item in cls]
