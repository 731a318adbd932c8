from apps.experiments.services.checks import CheckService
from apps.experiments.services.distances import DistanceService
from apps.experiments.services.equilibration import EquilibrationService
from apps.experiments.services.stationary import StationaryService
from apps.experiments.services.sweeps import SweepService

__all__ = [
    "CheckService",
    "DistanceService",
    "EquilibrationService",
    "StationaryService",
    "SweepService",
]
