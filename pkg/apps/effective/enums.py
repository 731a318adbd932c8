"""
Enumeradores de la difusión efectiva.
"""

from enum import Enum


class BoundaryRay(Enum):
    """Rayo de la frontera del cono violado por una propuesta."""
    LOWER = "u = v"
    UPPER = "u = λ_N v"

    @classmethod
    def values(cls):
        return [item.value for item in cls]


class QSourceKind(Enum):
    EXACT = "exact"
    RAY_TABLE = "ray_table"

    @classmethod
    def values(cls):
        return [item.value for item in cls]

    @classmethod
    def choices(cls):
        return [(item.value, item.name.replace("_", " ").title()) for item in cls]
