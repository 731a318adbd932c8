from apps.lab.services.config import ConfigService
from apps.lab.services.pipelines import LabService
from apps.lab.services.reports import ReportService

__all__ = [
    "ConfigService",
    "LabService",
    "ReportService",
]
