"""
apps.fields.types
-----------------
Sparse triad tensor, the ordered stirring family and the fused quadratic
operator used by the fast integrator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from apps.fields.enums import ModeKind, TriadSource


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModeLabel:
    index: int
    wavevector: Tuple[int, int]
    kind: ModeKind


@dataclass(frozen=True, eq=False)
class TriadTensor:
    """
    Stored entries (a, b, c, t) with a < b; every other ordering follows from
    t_{a,b,c} = −t_{b,a,c} and t_{a,b,c} = t_{c,a,b}. Indices are zero-based and
    every stored triple has pairwise distinct indices.
    """
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    t: np.ndarray
    N: int
    source: TriadSource
    mode_basis: Optional[Tuple[ModeLabel, ...]] = None

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int64))
        object.__setattr__(self, "t", _frozen(self.t, float))

    @property
    def size(self) -> int:
        return int(self.t.shape[0])

    @property
    def entries(self) -> List[Tuple[int, int, int, float]]:
        return [(int(a), int(b), int(c), float(t)) for a, b, c, t in zip(self.a, self.b, self.c, self.t)]

    @cached_property
    def _lookup(self) -> Dict[Tuple[int, int, int], float]:
        return {(a, b, c): t for a, b, c, t in self.entries}

    def value(self, a: int, b: int, c: int) -> float:
        """t_{a,b,c} for any ordering, reconstructed from the stored a < b half."""
        if a == b:
            return 0.0
        if a < b:
            return self._lookup.get((a, b, c), 0.0)
        return -self._lookup.get((b, a, c), 0.0)

    def scaled(self, factor: float) -> "TriadTensor":
        return TriadTensor(self.a, self.b, self.c, self.t * factor, self.N, self.source, self.mode_basis)


@dataclass(frozen=True, eq=False)
class StirringFamily:
    """
    Triples J = (k, l, m) with λ_k < λ_l < λ_m in lexicographic order, followed by
    one rotation per eigenvalue pair. Field index m ∈ [0, M) is zero-based.
    """
    triples: np.ndarray
    n_rotations: int

    def __post_init__(self):
        object.__setattr__(self, "triples", _frozen(np.reshape(self.triples, (-1, 3)), np.int64))

    @property
    def n_triples(self) -> int:
        return int(self.triples.shape[0])

    @property
    def M(self) -> int:
        return self.n_triples + self.n_rotations

    @property
    def N(self) -> int:
        return 2 * self.n_rotations


@dataclass(frozen=True)
class StirringRank:
    """Smallest eigenvalue of the projected stirring Gram form at a state."""
    value: float
    complement_dim: int
    degenerate: bool


@dataclass(frozen=True, eq=False)
class QuadraticTerms:
    """
    Flat list of quadratic contributions coef·x_a·x_b → component c, grouped by
    an owner index so that each owner can be weighted independently.
    """
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    coef: np.ndarray
    owner: np.ndarray
    n_owners: int

    def __post_init__(self):
        for name in ("a", "b", "c", "owner"):
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int64))
        object.__setattr__(self, "coef", _frozen(self.coef, float))

    def apply(self, x: np.ndarray, owner_weights: np.ndarray, N: int) -> np.ndarray:
        w = self.coef * owner_weights[self.owner]
        return np.bincount(self.c, weights=w * x[self.a] * x[self.b], minlength=N)

    def jacobian(self, x: np.ndarray, owner_weights: np.ndarray, N: int) -> np.ndarray:
        w = self.coef * owner_weights[self.owner]
        flat = np.bincount(self.c * N + self.a, weights=w * x[self.b], minlength=N * N)
        flat += np.bincount(self.c * N + self.b, weights=w * x[self.a], minlength=N * N)
        return flat.reshape(N, N)


@dataclass(frozen=True, eq=False)
class FastOperator:
    """
    The fast vector field (1/ε)·b(z)·dt + √(κ/ε)·Σ Z_m(z)·Δβ_m as one evaluation.

    Owner 0 of `quadratic` is the triad drift; owners 1..|J| are the stirring
    triples. Rotations act blockwise on (z_{2i}, z_{2i+1}).
    """
    quadratic: QuadraticTerms
    n_triples: int
    n_rotations: int

    @property
    def N(self) -> int:
        return 2 * self.n_rotations

    def owner_weights(self, drift_scale: float, stir_scale: float, increments: np.ndarray) -> np.ndarray:
        weights = np.empty(1 + self.n_triples)
        weights[0] = drift_scale
        weights[1:] = stir_scale * increments[: self.n_triples]
        return weights

    def apply(self, z: np.ndarray, owner_weights: np.ndarray, angles: np.ndarray) -> np.ndarray:
        out = self.quadratic.apply(z, owner_weights, self.N)
        out[0::2] += angles * z[1::2]
        out[1::2] -= angles * z[0::2]
        return out

    def jacobian(self, z: np.ndarray, owner_weights: np.ndarray, angles: np.ndarray) -> np.ndarray:
        jac = self.quadratic.jacobian(z, owner_weights, self.N)
        pairs = np.arange(self.n_rotations)
        jac[2 * pairs, 2 * pairs + 1] += angles
        jac[2 * pairs + 1, 2 * pairs] -= angles
        return jac
