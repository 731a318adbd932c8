"""
Validaciones centralizadas del núcleo espectral.
Cada regla registra una advertencia con el valor ofensivo y luego lanza la
excepción de dominio correspondiente. Consumido por services.py y por los
esquemas de configuración de apps.lab.
"""

import logging
from typing import Sequence, Tuple

import numpy as np
from django.utils.translation import gettext_lazy as _

from apps.spectrum.exceptions import (
    BadAspectException,
    DegenerateSpectrumException,
    DimensionMismatchException,
    InvalidParamsException,
    TooFewModesException,
)
from apps.spectrum.types import Spectrum

logger = logging.getLogger(__name__)

MIN_PAIRS = 4


class SpectrumValidator:
    """
    Reglas de la escalera espectral y de los parámetros del modelo.
    """

    @staticmethod
    def validate_aspect(aspect: float) -> None:
        if not (0.0 < aspect <= 1.0) or not np.isfinite(aspect):
            logger.warning(f"Aspecto fuera de rango: {aspect}")
            raise BadAspectException(
                _("El aspecto del toro debe estar en (0, 1]; se recibió %(aspect)s.") % {'aspect': aspect}
            )

    @staticmethod
    def validate_wavevectors(wavevectors: Sequence[Tuple[int, int]]) -> None:
        """
        Valida que los vectores de onda sean no nulos y distintos dos a dos.

        Raises:
            DegenerateSpectrumException: Si hay un vector nulo o repetido.
        """
        seen = set()
        for k in wavevectors:
            key = (int(k[0]), int(k[1]))
            if key == (0, 0):
                logger.warning("Vector de onda nulo en la selección de modos")
                raise DegenerateSpectrumException(_("El vector de onda (0, 0) no genera un modo."))
            if key in seen:
                logger.warning(f"Vector de onda repetido: {key}")
                raise DegenerateSpectrumException(
                    _("Vector de onda repetido: %(k)s.") % {'k': key}
                )
            seen.add(key)

    @staticmethod
    def validate_ladder(mu: np.ndarray) -> None:
        """
        Valida μ₁ = 1, crecimiento estricto y n ≥ 4.

        Raises:
            DegenerateSpectrumException: Empates o μ₁ ≠ 1.
            TooFewModesException: Menos de cuatro pares.
        """
        if mu.ndim != 1 or not np.all(np.isfinite(mu)):
            logger.warning(f"Escalera espectral inválida: {mu}")
            raise DegenerateSpectrumException()
        if mu.size and mu[0] != 1.0:
            logger.warning(f"μ₁ = {mu[0]} ≠ 1")
            raise DegenerateSpectrumException(_("El primer autovalor normalizado debe ser exactamente 1."))
        if np.any(np.diff(mu) <= 0):
            logger.warning(f"Escalera no estrictamente creciente: {mu}")
            raise DegenerateSpectrumException()
        if mu.size < MIN_PAIRS:
            logger.warning(f"Solo {mu.size} pares de modos")
            raise TooFewModesException()

    @staticmethod
    def validate_forcing(a: float) -> None:
        if not (a > 0) or not np.isfinite(a):
            logger.warning(f"Varianza de forzamiento inválida: a={a}")
            raise InvalidParamsException(_("a must be > 0 (forcing variance scale)."))

    @staticmethod
    def validate_delta_range(delta: np.ndarray) -> None:
        if np.any(delta <= -1.0) or np.any(delta > 0.0):
            logger.warning(f"delta fuera de (−1, 0]: {delta}")
            raise InvalidParamsException(_("delta must lie in (-1, 0] (damping perturbation range)."))

    @staticmethod
    def validate_delta_shape(delta: np.ndarray, n: int) -> None:
        if delta.shape != (n,):
            logger.warning(f"delta con forma {delta.shape}, se esperaba ({n},)")
            raise InvalidParamsException(
                _("delta must list one value per eigenvalue pair (%(n)s values).") % {'n': n}
            )

    @staticmethod
    def validate_kappa(kappa: float) -> None:
        if not (0.0 < kappa <= 1.0):
            logger.warning(f"kappa fuera de (0, 1]: {kappa}")
            raise InvalidParamsException(_("kappa must lie in (0, 1] (stirring strength)."))

    @staticmethod
    def validate_eps(eps: float) -> None:
        if not (eps > 0) or not np.isfinite(eps):
            logger.warning(f"eps inválido: {eps}")
            raise InvalidParamsException(_("eps must be > 0 (fast timescale)."))

    @staticmethod
    def validate_params(a: float, delta: np.ndarray, kappa: float, eps: float, n: int) -> None:
        """
        Valida a > 0, δ ∈ (−1, 0] por par, κ ∈ (0, 1] y ε > 0.
        Cada regla también se usa por separado en los esquemas de configuración.

        Raises:
            InvalidParamsException: Con el nombre del parámetro y su rango.
        """
        SpectrumValidator.validate_forcing(a)
        SpectrumValidator.validate_delta_shape(delta, n)
        SpectrumValidator.validate_delta_range(delta)
        SpectrumValidator.validate_kappa(kappa)
        SpectrumValidator.validate_eps(eps)

    @staticmethod
    def validate_state(x: np.ndarray, s: Spectrum) -> np.ndarray:
        """
        Valida que el estado tenga longitud N y entradas finitas.

        Returns:
            np.ndarray: El estado como arreglo float64.
        """
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1:] != (s.N,):
            logger.warning(f"Estado de forma {arr.shape} para N={s.N}")
            raise DimensionMismatchException(
                _("Se esperaba un estado de longitud %(N)s, se recibió %(shape)s.") % {
                    'N': s.N, 'shape': arr.shape
                }
            )
        if not np.all(np.isfinite(arr)):
            logger.warning("Estado con entradas no finitas")
            raise DimensionMismatchException(_("El estado contiene entradas no finitas."))
        return arr
