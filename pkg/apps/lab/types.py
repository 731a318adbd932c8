"""
apps.lab.types
--------------
Results of one lab command before they are written to disk.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

from apps.experiments.types import CheckReport
from apps.simulation.types import PathRecorder


@dataclass
class RunResults:
    """
    Tables become CSV files, documents become JSON files and reports are
    collected into checks.json; names are file stems.
    """
    command: str
    config_hash: Optional[str] = None
    seed: Optional[int] = None
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    documents: Dict[str, Any] = field(default_factory=dict)
    reports: List[CheckReport] = field(default_factory=list)
    snapshots: Dict[str, PathRecorder] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports if report.gated)
