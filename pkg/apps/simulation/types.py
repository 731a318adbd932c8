"""
apps.simulation.types
---------------------
Run configuration, the assembled Galerkin system and the path recorder
returned by every simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from apps.fields.types import FastOperator, StirringFamily, TriadTensor
from apps.simulation.enums import SimMode
from apps.spectrum.types import ModelParams, Spectrum


@dataclass(frozen=True)
class SimConfig:
    h: float = 0.05
    fast_substep_factor: float = 0.2
    t_end: float = 2100.0
    burn_in: float = 100.0
    seed: int = 20240611
    midpoint_tol: float = 1e-12
    midpoint_max_iter: int = 50
    record_stride: int = 1
    mode: SimMode = SimMode.FULL
    keep_states: bool = False

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.h))

    def with_updates(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    """Everything a trajectory needs besides its state and its random stream."""
    spectrum: Spectrum
    params: ModelParams
    triads: TriadTensor
    family: StirringFamily
    operator: FastOperator

    @property
    def N(self) -> int:
        return self.spectrum.N

    def fast_weights(self, dt: float, d_beta: np.ndarray, drift_sign: int = 1):
        """(owner weights, rotation angles) of the fast field integrated over dt with increments dβ."""
        p = self.params
        stir = np.sqrt(p.kappa / p.eps)
        weights = self.operator.owner_weights(drift_sign * dt / p.eps, stir, d_beta)
        angles = stir * d_beta[self.family.n_triples:]
        return weights, angles


@dataclass
class IntegratorStats:
    halvings: int = 0
    max_depth: int = 0
    iterations: int = 0
    fast_steps: int = 0
    reflections: int = 0
    conservation_max: float = 0.0

    def as_dict(self) -> dict:
        return {
            "halvings": self.halvings,
            "max_depth": self.max_depth,
            "iterations": self.iterations,
            "fast_steps": self.fast_steps,
            "reflections": self.reflections,
            "conservation_max": self.conservation_max,
        }


@dataclass(frozen=True, eq=False)
class PathRecorder:
    """
    Observables recorded at stride. `states` is only kept when asked for;
    `flags` marks reflected steps of the effective simulator.
    """
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t_obs: np.ndarray
    burn_in: float = 0.0
    states: Optional[np.ndarray] = None
    flags: Optional[np.ndarray] = None
    stats: IntegratorStats = field(default_factory=IntegratorStats)

    def __post_init__(self):
        for name in ("times", "u", "v", "t_obs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        lengths = {len(self.times), len(self.u), len(self.v), len(self.t_obs)}
        if self.states is not None:
            lengths.add(len(self.states))
        if self.flags is not None:
            lengths.add(len(self.flags))
        if len(lengths) != 1:
            raise ValueError(f"Longitudes inconsistentes en el registro: {sorted(lengths)}")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("Los tiempos del registro deben ser estrictamente crecientes")

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.v > 0, self.u / np.where(self.v > 0, self.v, 1.0), np.nan)

    @property
    def burn_in_mask(self) -> np.ndarray:
        return self.times < self.burn_in

    def stationary(self) -> "PathRecorder":
        """Recorder restricted to t ≥ burn_in."""
        keep = ~self.burn_in_mask
        return PathRecorder(
            times=self.times[keep],
            u=self.u[keep],
            v=self.v[keep],
            t_obs=self.t_obs[keep],
            burn_in=self.burn_in,
            states=None if self.states is None else self.states[keep],
            flags=None if self.flags is None else self.flags[keep],
            stats=self.stats,
        )

    def summary(self) -> dict:
        tail = self.stationary()
        return {
            "samples": len(tail),
            "mean_u": float(np.mean(tail.u)) if len(tail) else float("nan"),
            "mean_v": float(np.mean(tail.v)) if len(tail) else float("nan"),
            "mean_t": float(np.mean(tail.t_obs)) if len(tail) else float("nan"),
            **self.stats.as_dict(),
        }
