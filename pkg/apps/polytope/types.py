"""
apps.polytope.types
-------------------
Sector polytope in inequality form, averaged coefficients q and the ray
table that serves q(u, v) = v·q(u/v, 1) by interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from apps.polytope.enums import QMethod, SamplerKind
from apps.spectrum.types import ConePoint


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SectorPolytope:
    """
    σ = (s₃, …, s_n) ≥ 0 with c1·σ ≤ u − v and c2·σ ≥ u − μ₂v, where
    c1_i = 1 − 1/μ_i and c2_i = 1 − μ₂/μ_i. On the cone boundary the set
    collapses to `point`.
    """
    u: float
    v: float
    mu: np.ndarray
    sector: int
    point: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "mu", _frozen(self.mu))
        if self.point is not None:
            object.__setattr__(self, "point", _frozen(self.point))

    @property
    def dim(self) -> int:
        return int(self.mu.shape[0]) - 2

    @property
    def degenerate(self) -> bool:
        return self.point is not None

    @property
    def c1(self) -> np.ndarray:
        return 1.0 - 1.0 / self.mu[2:]

    @property
    def c2(self) -> np.ndarray:
        return 1.0 - self.mu[1] / self.mu[2:]

    @property
    def box_bounds(self) -> np.ndarray:
        return (self.u - self.v) / self.c1

    @property
    def halfspaces(self):
        """(A, b) with A·σ ≤ b: nonnegativity rows, then the two slab constraints."""
        d = self.dim
        A = np.vstack([-np.eye(d), self.c1[None, :], -self.c2[None, :]])
        b = np.concatenate([np.zeros(d), [self.u - self.v, -(self.u - self.mu[1] * self.v)]])
        return A, b

    def radial(self, sigma: np.ndarray) -> np.ndarray:
        """
        Full pair radii (s₁, …, s_n) for σ of shape (d,) or (K, d).
        """
        sigma = np.asarray(sigma, dtype=float)
        mu2 = self.mu[1]
        s1 = (-self.u + mu2 * self.v + sigma @ self.c2) / (mu2 - 1.0)
        s2 = (self.u - self.v - sigma @ self.c1) / (1.0 - 1.0 / mu2)
        return np.concatenate([np.stack([s1, s2], axis=-1), sigma], axis=-1)


@dataclass(frozen=True, eq=False)
class QValues:
    q: np.ndarray
    volume: float
    method: QMethod
    std_errors: Optional[np.ndarray] = None
    samples: int = 0
    sampler: Optional[SamplerKind] = None

    def __post_init__(self):
        object.__setattr__(self, "q", _frozen(self.q))
        if self.std_errors is not None:
            object.__setattr__(self, "std_errors", _frozen(self.std_errors))


class QSource(Protocol):
    def q(self, w: ConePoint) -> np.ndarray: ...

    def q_batch(self, u: np.ndarray, v: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class QRayTable:
    """
    Rows q(r, 1) on a sorted ratio grid in [1, λ_N]. Between grid points each
    column is interpolated linearly in r; the homogeneous scaling by v is exact.
    """
    ratios: np.ndarray
    sectors: np.ndarray
    rows: np.ndarray
    volumes: np.ndarray
    method: QMethod
    std_errors: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("ratios", "rows", "volumes"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        sectors = np.array(self.sectors, dtype=np.int64)
        sectors.setflags(write=False)
        object.__setattr__(self, "sectors", sectors)
        if self.std_errors is not None:
            object.__setattr__(self, "std_errors", _frozen(self.std_errors))

    def q_batch(self, u, v) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        safe_v = np.where(v > 0, v, 1.0)
        r = np.clip(u / safe_v, self.ratios[0], self.ratios[-1])
        hi = np.clip(np.searchsorted(self.ratios, r, side="right"), 1, len(self.ratios) - 1)
        lo = hi - 1
        span = self.ratios[hi] - self.ratios[lo]
        frac = ((r - self.ratios[lo]) / span)[:, None]
        interp = self.rows[lo] * (1.0 - frac) + self.rows[hi] * frac
        return np.where((v > 0)[:, None], interp * v[:, None], 0.0)

    def q(self, w: ConePoint) -> np.ndarray:
        return self.q_batch(w.u, w.v)[0]
