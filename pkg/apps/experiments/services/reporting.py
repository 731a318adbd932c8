"""
Construcción uniforme de reportes de chequeo.
"""

import logging
from typing import Optional

import numpy as np

from apps.experiments.enums import CheckName
from apps.experiments.types import CheckReport, inputs_hash
from apps.runlog import log_event

Z_GATE = 3.0


def z_score(diff, se):
    """diff/se elementwise; zero SE gives 0 on exact agreement and ±inf otherwise."""
    diff = np.asarray(diff, dtype=float)
    se = np.asarray(se, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.sign(diff) * np.inf))


def build_report(check: CheckName, payload: dict, estimate, se, bound, z, passed: bool,
                 details: Optional[dict] = None, gated: bool = True) -> CheckReport:
    report = CheckReport(
        check=check,
        inputs_hash=inputs_hash(payload),
        estimate=estimate,
        se=se,
        bound=bound,
        z=z,
        passed=bool(passed),
        details=details or {},
        gated=gated,
    )
    log_event("check", logging.INFO if report.passed else logging.WARNING, check=check.value, passed=report.passed)
    return report
