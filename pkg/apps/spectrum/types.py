"""
apps.spectrum.types
-------------------
Immutable value types shared by every lab module: the eigenvalue ladder, the
model parameters, observables, cone points and forcing budgets.

Arrays stored on these types are flagged read-only at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from apps.spectrum.enums import SpectrumSource


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TorusSource:
    """Wavevectors on the thin torus (R/2π·aspect Z) × (R/2π Z), sorted by eigenvalue."""
    aspect: float
    wavevectors: Tuple[Tuple[int, int], ...]
    raw_eigenvalues: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Paired eigenvalue ladder 1 = λ₁ = λ₂ < λ₃ = λ₄ < … < λ_{N−1} = λ_N.

    `mu` holds the n distinct values; `lam` the N = 2n expanded ones, so that
    lam[2i] = lam[2i+1] = mu[i] with zero-based indices.
    """
    mu: np.ndarray
    source: SpectrumSource
    torus: Optional[TorusSource] = None
    lam: np.ndarray = field(init=False)

    def __post_init__(self):
        mu = _frozen(self.mu)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lam", _frozen(np.repeat(mu, 2)))

    @property
    def n(self) -> int:
        return int(self.mu.shape[0])

    @property
    def N(self) -> int:
        return 2 * self.n

    @property
    def lam_max(self) -> float:
        return float(self.mu[-1])

    @property
    def inv_lam(self) -> np.ndarray:
        return 1.0 / self.lam

    def __eq__(self, other) -> bool:
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (
            self.source == other.source
            and self.torus == other.torus
            and np.array_equal(self.mu, other.mu)
        )

    def __hash__(self) -> int:
        return hash((self.source, self.torus, self.mu.tobytes()))


@dataclass(frozen=True, eq=False)
class ModelParams:
    """
    Forcing variance `a`, pairwise damping perturbations `delta` (one per pair),
    stirring strength `kappa` and timescale `eps`.
    """
    a: float
    delta: np.ndarray
    kappa: float
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "delta", _frozen(self.delta))

    @property
    def delta_modes(self) -> np.ndarray:
        """δ_ℓ expanded pairwise to length N."""
        return np.repeat(self.delta, 2)

    @property
    def mode_variances(self) -> np.ndarray:
        """Per-mode variance a(1+δ_ℓ)/2 of the forcing-only stationary Gaussian."""
        return 0.5 * self.a * (1.0 + self.delta_modes)

    def with_updates(self, **changes) -> "ModelParams":
        values = {"a": self.a, "delta": self.delta, "kappa": self.kappa, "eps": self.eps}
        values.update(changes)
        return ModelParams(**values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelParams):
            return NotImplemented
        return (
            (self.a, self.kappa, self.eps) == (other.a, other.kappa, other.eps)
            and np.array_equal(self.delta, other.delta)
        )

    def __hash__(self) -> int:
        return hash((self.a, self.kappa, self.eps, self.delta.tobytes()))


@dataclass(frozen=True)
class Observables:
    u: float
    v: float
    t_obs: float

    @property
    def ratio(self) -> float:
        return self.u / self.v if self.v > 0 else float("nan")


@dataclass(frozen=True)
class ConePoint:
    """Enstrophy-energy pair (u, v), meant to lie in C = {0 ≤ v ≤ u ≤ λ_N v}."""
    u: float
    v: float

    def in_cone(self, lam_max: float, rel_tol: float = 1e-12) -> bool:
        slack = rel_tol * max(abs(self.u), abs(self.v), 1e-300)
        return (
            self.v >= -slack
            and self.u >= self.v - slack
            and self.u <= lam_max * self.v + lam_max * slack
        )

    def is_interior(self, lam_max: float) -> bool:
        return self.v > 0 and self.v < self.u < lam_max * self.v

    @property
    def ratio(self) -> float:
        return self.u / self.v if self.v > 0 else float("nan")

    def scaled(self, factor: float) -> "ConePoint":
        return ConePoint(self.u * factor, self.v * factor)


@dataclass(frozen=True)
class ForcingBudgets:
    b0: float
    b0_prime: float
    b1: float
    b1_prime: float
    b_minus1: float

