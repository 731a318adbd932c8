"""
apps.effective.types
--------------------
Coefficients of the effective generator at a cone point, the outcome of one
cone-respecting step and the boundary integrability exponents.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from apps.effective.enums import BoundaryRay
from apps.spectrum.types import ConePoint


@dataclass(frozen=True)
class EffectiveCoefficients:
    """
    Generator a11∂²_u + 2a12∂²_uv + a22∂²_v + drift_u∂_u + drift_v∂_v at `at`.
    """
    a11: float
    a12: float
    a22: float
    drift_u: float
    drift_v: float
    at: ConePoint

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @property
    def determinant(self) -> float:
        return self.a11 * self.a22 - self.a12 ** 2

    @property
    def drift(self) -> np.ndarray:
        return np.array([self.drift_u, self.drift_v])


@dataclass(frozen=True)
class EffectiveStep:
    point: ConePoint
    h_used: float
    halvings: int = 0
    reflected: bool = False
    ray: Optional[BoundaryRay] = None


@dataclass(frozen=True)
class AdmissibleExponents:
    """Largest α, β with a 10⁻⁹ margin; a value ≤ 0 carries no integrability certificate."""
    alpha_max: float
    beta_max: float

    @property
    def alpha_available(self) -> bool:
        return self.alpha_max > 0

    @property
    def beta_available(self) -> bool:
        return self.beta_max > 0

    def as_dict(self) -> dict:
        return {
            "alpha_max": self.alpha_max if self.alpha_available else "NotAvailable",
            "beta_max": self.beta_max if self.beta_available else "NotAvailable",
        }
