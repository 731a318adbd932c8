"""
Validaciones de la difusión efectiva.
"""

import logging

from django.utils.translation import gettext_lazy as _

from apps.effective.exceptions import NotPSDException
from apps.effective.types import EffectiveCoefficients

logger = logging.getLogger(__name__)

PSD_RTOL = 1e-12


class EffectiveValidator:

    @staticmethod
    def validate_psd(c: EffectiveCoefficients) -> None:
        """
        Raises:
            NotPSDException: Si a11, a22 o el determinante caen por debajo de −10⁻¹²·traza.
        """
        trace = c.a11 + c.a22
        slack = PSD_RTOL * abs(trace)
        if c.a11 < -slack or c.a22 < -slack or c.determinant < -slack * abs(trace):
            logger.warning(f"Matriz de difusión no PSD en {c.at}: a11={c.a11}, a12={c.a12}, a22={c.a22}")
            raise NotPSDException(
                _("Diffusion matrix [[%(a11)s, %(a12)s], [%(a12)s, %(a22)s]] is not positive semidefinite.") % {
                    'a11': c.a11, 'a12': c.a12, 'a22': c.a22,
                }
            )
