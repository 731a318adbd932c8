"""
apps.experiments.types
----------------------
Estimates with standard errors, the stationary summary and the uniform
check report {check, inputs_hash, estimate, se, bound, z, pass, details}.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from apps.experiments.enums import CheckName

Number = Union[float, List[float], None]


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become None."""
    if isinstance(value, Enum):
        return to_jsonable(value.value)
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        if hasattr(value, "as_dict"):
            return to_jsonable(value.as_dict())
        return to_jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return str(value) if value is not None else None


def stable_dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":"), allow_nan=False)


def inputs_hash(payload: Any) -> str:
    return hashlib.sha256(stable_dumps(payload).encode("utf-8")).hexdigest()


def digest_arrays(*arrays) -> str:
    """SHA-256 over the float64 bytes of each array, in order."""
    sha = hashlib.sha256()
    for arr in arrays:
        data = np.ascontiguousarray(np.asarray(arr, dtype=float))
        sha.update(str(data.shape).encode("ascii"))
        sha.update(data.tobytes())
    return sha.hexdigest()


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    n: int = 0

    def z(self, target: float) -> float:
        diff = self.value - target
        if self.se > 0:
            return diff / self.se
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(self.value * factor, abs(factor) * self.se, self.n)

    def as_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "n": self.n}


@dataclass(frozen=True)
class StationarySummary:
    mean_u: Estimate
    mean_v: Estimate
    mean_t: Estimate
    mean_u_minus_v: Estimate
    n_samples: int
    burn_in: float
    tau_u: float
    batch_length: int
    autocorr_warning: bool
    exp_moment_checks: List[tuple] = field(default_factory=list)
    untamed_fraction: Optional[Estimate] = None
    config_hash: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "mean_u": self.mean_u.as_dict(),
            "mean_v": self.mean_v.as_dict(),
            "mean_t": self.mean_t.as_dict(),
            "mean_u_minus_v": self.mean_u_minus_v.as_dict(),
            "n_samples": self.n_samples,
            "burn_in": self.burn_in,
            "tau_u": self.tau_u,
            "batch_length": self.batch_length,
            "autocorr_warning": self.autocorr_warning,
            "exp_moment_checks": [
                {"z": z, "empirical": emp, "phi_bound": bound, "pass": ok} for z, emp, bound, ok in self.exp_moment_checks
            ],
            "untamed_fraction": None if self.untamed_fraction is None else self.untamed_fraction.as_dict(),
            "config_hash": self.config_hash,
        }


@dataclass(frozen=True)
class CheckReport:
    check: CheckName
    inputs_hash: str
    estimate: Number
    se: Number
    bound: Number
    z: Number
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    gated: bool = True

    def as_dict(self) -> dict:
        return {
            "check": self.check.value,
            "inputs_hash": self.inputs_hash,
            "estimate": to_jsonable(self.estimate),
            "se": to_jsonable(self.se),
            "bound": to_jsonable(self.bound),
            "z": to_jsonable(self.z),
            "pass": bool(self.passed),
            "details": to_jsonable(self.details),
        }


@dataclass(frozen=True)
class InviscidReport:
    eps_grid: Sequence[float]
    distances: Sequence[Estimate]
    mean_gaps: Sequence[float]
    monotone_flag: bool
    gap_monotone_flag: bool
    sample_sizes: Dict[str, Any]
    kappa_probe: Optional[Dict[str, Any]] = None
    inputs_hash: str = ""
    h: Optional[float] = None
    fast_substeps: Sequence[int] = ()

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            "eps": list(self.eps_grid),
            "distance": [d.value for d in self.distances],
            "se": [d.se for d in self.distances],
            "mean_gap": list(self.mean_gaps),
        })
        # step resolution per eps, for reading the sweep against h-refinement
        if self.fast_substeps:
            frame["h"] = self.h
            frame["fast_substeps"] = list(self.fast_substeps)
        return frame

    def as_report(self) -> CheckReport:
        first, last = self.distances[0], self.distances[-1]
        combined = math.hypot(first.se, last.se)
        return CheckReport(
            check=CheckName.INVISCID,
            inputs_hash=self.inputs_hash,
            estimate=[d.value for d in self.distances],
            se=[d.se for d in self.distances],
            bound=None,
            z=(first.value - last.value) / combined if combined > 0 else None,
            passed=self.monotone_flag,
            details={
                "eps_grid": list(self.eps_grid),
                "mean_gaps": list(self.mean_gaps),
                "gap_monotone": self.gap_monotone_flag,
                "sample_sizes": self.sample_sizes,
                "kappa_probe": self.kappa_probe,
                "h": self.h,
                "fast_substeps": list(self.fast_substeps),
            },
        )
