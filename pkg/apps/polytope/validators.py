"""
Validaciones del módulo de politopos: pertenencia al cono y rejillas de cocientes.
"""

import logging

import numpy as np
from django.utils.translation import gettext_lazy as _

from apps.polytope.exceptions import (
    DimensionTooHighException,
    OutsideConeException,
    RatioOutOfRangeException,
)
from apps.spectrum.types import ConePoint, Spectrum

logger = logging.getLogger(__name__)

MAX_EXACT_DIM = 8


class PolytopeValidator:

    @staticmethod
    def validate_cone_point(w: ConePoint, s: Spectrum) -> None:
        """
        Raises:
            OutsideConeException: Si (u, v) no cumple 0 ≤ v ≤ u ≤ λ_N·v.
        """
        if not (np.isfinite(w.u) and np.isfinite(w.v)) or not w.in_cone(s.lam_max):
            logger.warning(f"Punto fuera del cono: (u, v) = ({w.u}, {w.v}), λ_N = {s.lam_max}")
            raise OutsideConeException(
                _("(u, v) = (%(u)s, %(v)s) is outside the cone 0 ≤ v ≤ u ≤ %(lam)s·v.") % {
                    'u': w.u, 'v': w.v, 'lam': s.lam_max,
                }
            )

    @staticmethod
    def validate_exact_dim(dim: int) -> None:
        if dim > MAX_EXACT_DIM:
            logger.info(f"Dimensión {dim} > {MAX_EXACT_DIM}: se usa Monte-Carlo")
            raise DimensionTooHighException()

    @staticmethod
    def validate_ratio_grid(ratios: np.ndarray, s: Spectrum) -> None:
        """
        Valida una rejilla ordenada de cocientes dentro de [1, λ_N].

        Raises:
            RatioOutOfRangeException: Si la rejilla no es creciente o sale del intervalo.
        """
        if ratios.ndim != 1 or ratios.size < 2:
            logger.warning(f"Rejilla de cocientes con forma {ratios.shape}")
            raise RatioOutOfRangeException(_("The ratio grid needs at least two points."))
        if np.any(np.diff(ratios) <= 0) or ratios[0] < 1.0 or ratios[-1] > s.lam_max:
            logger.warning(f"Rejilla de cocientes inválida: [{ratios[0]}, {ratios[-1]}] con λ_N={s.lam_max}")
            raise RatioOutOfRangeException()
