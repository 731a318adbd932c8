"""
apps.lab.services.config
------------------------
Reading, validating and re-emitting run configuration documents, and
building the model objects a pipeline needs from a validated RunConfig.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError as DjangoValidationError
from django.utils.translation import gettext_lazy as _
from pydantic import ValidationError

from apps.experiments.types import inputs_hash, stable_dumps
from apps.fields.services import TriadService
from apps.lab.exceptions import ParseException
from apps.lab.schemas import RunConfig
from apps.polytope.enums import QMethod
from apps.polytope.services import QService
from apps.polytope.types import QSource
from apps.simulation.services import SimulationService
from apps.simulation.types import GalerkinSystem
from apps.spectrum.exceptions import InvalidParamsException
from apps.spectrum.services import SpectrumService
from apps.spectrum.types import ModelParams
from apps.spectrum.validators import SpectrumValidator

logger = logging.getLogger(__name__)


def _with_defaults(payload: dict) -> dict:
    """Fill absent blocks and keys from the LAB_DEFAULT_* settings."""
    merged = dict(payload)
    merged.setdefault("spectrum", copy.deepcopy(settings.LAB_DEFAULT_SPECTRUM))
    # delta follows the spectrum size, so it is filled after validation
    param_defaults = {k: v for k, v in settings.LAB_DEFAULT_PARAMS.items() if k != "delta"}
    for key, defaults in (("params", param_defaults), ("sim", settings.LAB_DEFAULT_SIM)):
        block = merged.get(key, {})
        if isinstance(block, dict):
            merged[key] = {**copy.deepcopy(defaults), **block}
    return merged


def _field_errors(exc: ValidationError) -> dict:
    errors = {}
    for err in exc.errors():
        path = ".".join(str(part) for part in err["loc"]) or "config"
        cause = (err.get("ctx") or {}).get("error")
        errors.setdefault(path, []).append(str(cause) if cause is not None else err["msg"])
    return errors


class ConfigService:

    @staticmethod
    def parse_config(text: str) -> RunConfig:
        """
        Parse and validate a JSON run configuration, filling documented defaults.

        Args:
            text (str): JSON document with optional blocks spectrum, params, sim, experiment, output.

        Returns:
            RunConfig: Validated configuration; params.delta is always explicit.

        Raises:
            ParseException: If the text is not a JSON object.
            DjangoValidationError: One entry per offending field path, e.g. "params.kappa".
        """
        try:
            payload = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            logger.warning(f"Configuración no es JSON válido: {exc}")
            raise ParseException(
                _("Invalid JSON at line %(line)s, column %(col)s: %(msg)s") % {
                    'line': exc.lineno, 'col': exc.colno, 'msg': exc.msg,
                }
            ) from exc
        if not isinstance(payload, dict):
            logger.warning(f"Configuración de tipo {type(payload).__name__}")
            raise ParseException(_("The configuration document must be a JSON object."))

        try:
            cfg = RunConfig.model_validate(_with_defaults(payload))
        except ValidationError as exc:
            errors = _field_errors(exc)
            logger.warning(f"Configuración rechazada: {errors}")
            raise DjangoValidationError(errors) from exc

        s = cfg.spectrum.spectrum
        if cfg.params.delta is None:
            cfg.params.delta = [0.0] * s.n
        try:
            SpectrumValidator.validate_delta_shape(np.asarray(cfg.params.delta, dtype=float), s.n)
        except InvalidParamsException as exc:
            raise DjangoValidationError({"params.delta": [str(exc.mensaje)]}) from exc
        return cfg

    @staticmethod
    def load_config(path: Optional[Path]) -> RunConfig:
        """
        Raises:
            ParseException: If the file cannot be read.
        """
        if path is None:
            return ConfigService.parse_config("{}")
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            logger.error(f"No se pudo leer la configuración {path}: {exc}")
            raise ParseException(_("Cannot read configuration file %(path)s.") % {'path': path}) from exc
        return ConfigService.parse_config(text)

    @staticmethod
    def dump_config(cfg: RunConfig) -> str:
        """Canonical JSON of a validated configuration; parse_config inverts it."""
        return stable_dumps(cfg.model_dump(mode="json")) + "\n"

    @staticmethod
    def config_hash(cfg: RunConfig) -> str:
        return inputs_hash(cfg.model_dump(mode="json"))

    @staticmethod
    def build_params(cfg: RunConfig) -> ModelParams:
        p = cfg.params
        return SpectrumService.make_params(p.a, p.delta, p.kappa, p.eps, cfg.spectrum.spectrum)

    @staticmethod
    def build_system(cfg: RunConfig, p: Optional[ModelParams] = None) -> GalerkinSystem:
        """Galerkin triads for torus spectra; the synthetic block replaces them when present."""
        s = cfg.spectrum.spectrum
        p = p if p is not None else ConfigService.build_params(cfg)
        triads = None
        synthetic = cfg.spectrum.synthetic_triads
        if synthetic is not None:
            triads = TriadService.synthetic_triads(synthetic.seed, synthetic.density, synthetic.magnitude, s)
        return SimulationService.assemble(s, p, triads)

    @staticmethod
    def build_q_source(cfg: RunConfig) -> QSource:
        s = cfg.spectrum.spectrum
        exp = cfg.experiment
        method = QMethod.EXACT if exp.q_method == "exact" else QMethod.MONTE_CARLO
        return QService.q_ray_table(s, QService.default_ratios(s, exp.q_grid_size), method, exp.q_samples,
                                    seed=cfg.sim.seed)

    @staticmethod
    def with_seed(cfg: RunConfig, seed: Optional[int]) -> RunConfig:
        """Copy of cfg with sim.seed replaced, validated like a parsed document."""
        if seed is None:
            return cfg
        payload = cfg.model_dump(mode="json")
        payload["sim"]["seed"] = seed
        return ConfigService.parse_config(json.dumps(payload))
