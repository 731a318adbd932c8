"""
Enumeradores del arnés de verificación.
"""

from enum import Enum


class CheckName(Enum):
    """Nombre estable de cada chequeo en los reportes JSON."""
    MOMENT_IDENTITIES = "moment_identities"
    EXPONENTIAL_BOUND = "exponential_bound"
    POWER_MOMENTS = "power_moments"
    GENERATOR_IDENTITY = "generator_identity"
    EFFECTIVE_GENERATOR_IDENTITY = "effective_generator_identity"
    GAUSSIAN_MODES = "gaussian_modes"
    CONDITIONAL_CONSISTENCY = "conditional_consistency"
    CONSERVATION = "conservation"
    CONDENSATION = "condensation"
    EQUILIBRATION = "equilibration"
    INVISCID = "inviscid"
    UNTAMED_FRACTION = "untamed_fraction"
    TIME_REGULARITY = "time_regularity"
    FORCING_ONLY_REFERENCE = "forcing_only_reference"
    BOUNDARY_MOMENT_STABILITY = "boundary_moment_stability"

    @classmethod
    def values(cls):
        return [item.value for item in cls]

    @classmethod
    def choices(cls):
        return [(item.value, item.name.replace("_", " ").title()) for item in cls]
