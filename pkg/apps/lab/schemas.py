"""
apps.lab.schemas
----------------
Pydantic models of the run configuration document. Every block rejects
unknown keys; numeric ranges reuse the domain validators so the messages
match the ones raised by the services.
"""

from typing import List, Literal, Optional, Tuple

import numpy as np
from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from apps.simulation.enums import ReferenceScheme, SimMode
from apps.simulation.exceptions import SimulationException
from apps.simulation.types import SimConfig
from apps.simulation.validators import SimulationValidator
from apps.spectrum.exceptions import SpectrumException
from apps.spectrum.services import SpectrumService
from apps.spectrum.types import Spectrum
from apps.spectrum.validators import SpectrumValidator

U64_MAX = 2 ** 64 - 1


def _domain_rule(rule, value):
    """Run a domain validator and surface its message as a pydantic ValueError."""
    try:
        rule(value)
    except SpectrumException as exc:
        raise ValueError(str(exc.mensaje)) from exc
    return value


class LabBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SyntheticTriadsBlock(LabBlock):
    """Random triad tensor for spectra without wavevectors."""
    seed: int = Field(0, ge=0, le=U64_MAX, description="Root seed of the synthetic tensor")
    density: float = Field(0.5, gt=0.0, le=1.0, description="Fraction of admissible triples kept")
    magnitude: float = Field(1.0, gt=0.0, description="Scale of the random coefficients")


class SpectrumBlock(LabBlock):
    """Either a torus (aspect + wavevectors) or an explicit list of distinct eigenvalues mu."""
    aspect: Optional[float] = Field(None, description="Torus aspect in (0, 1]")
    wavevectors: Optional[List[Tuple[int, int]]] = Field(None, description="Integer wavevectors, one per pair")
    mu: Optional[List[float]] = Field(None, description="Explicit ladder with mu[0] = 1")
    synthetic_triads: Optional[SyntheticTriadsBlock] = None

    _spectrum: Optional[Spectrum] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def build(self):
        torus = self.aspect is not None or self.wavevectors is not None
        if torus and self.mu is not None:
            raise ValueError("Give either aspect + wavevectors or mu, not both.")
        if torus and (self.aspect is None or self.wavevectors is None):
            raise ValueError("A torus spectrum needs both aspect and wavevectors.")
        if not torus and self.mu is None:
            raise ValueError("A spectrum needs aspect + wavevectors or mu.")
        try:
            if torus:
                self._spectrum = SpectrumService.build_torus_spectrum(self.aspect, self.wavevectors)
            else:
                self._spectrum = SpectrumService.explicit_spectrum(self.mu)
        except SpectrumException as exc:
            raise ValueError(str(exc.mensaje)) from exc
        return self

    @property
    def spectrum(self) -> Spectrum:
        return self._spectrum


class ParamsBlock(LabBlock):
    a: float = Field(..., description="Forcing variance scale")
    delta: Optional[List[float]] = Field(None, description="Damping perturbation per eigenvalue pair; zeros when omitted")
    kappa: float = Field(..., description="Stirring strength")
    eps: float = Field(..., description="Fast timescale")

    @field_validator("a")
    @classmethod
    def check_a(cls, value):
        return _domain_rule(SpectrumValidator.validate_forcing, value)

    @field_validator("delta")
    @classmethod
    def check_delta(cls, value):
        if value is None:
            return value
        _domain_rule(SpectrumValidator.validate_delta_range, np.asarray(value, dtype=float))
        return value

    @field_validator("kappa")
    @classmethod
    def check_kappa(cls, value):
        return _domain_rule(SpectrumValidator.validate_kappa, value)

    @field_validator("eps")
    @classmethod
    def check_eps(cls, value):
        return _domain_rule(SpectrumValidator.validate_eps, value)


class SimBlock(LabBlock):
    h: float
    fast_substep_factor: float
    t_end: float
    burn_in: float
    seed: int = Field(..., ge=0, le=U64_MAX)
    record_stride: int
    midpoint_tol: float
    midpoint_max_iter: int
    mode: Literal["full", "fast", "reference", "forcing", "effective"] = "full"
    keep_states: bool = False

    @model_validator(mode="after")
    def check_config(self):
        try:
            SimulationValidator.validate_config(self.to_config())
        except SimulationException as exc:
            raise ValueError(str(exc.mensaje)) from exc
        return self

    def to_config(self, **changes) -> SimConfig:
        values = self.model_dump()
        values["mode"] = SimMode(values["mode"])
        values.update(changes)
        return SimConfig(**values)


class ExperimentBlock(LabBlock):
    """Knobs of the experiment pipelines; every command reads only its own."""
    eps_grid: List[float] = Field(default_factory=lambda: [0.4, 0.1, 0.025])
    kappa_probe: Optional[float] = Field(0.25, gt=0.0, le=1.0)
    probe_eps: Optional[float] = Field(None, gt=0.0)
    eta: float = Field(0.02, gt=0.0, lt=1.0)
    u_min: float = Field(1e-3, gt=0.0)
    u_max: float = Field(1e3, gt=0.0)
    z_values: Optional[List[float]] = Field(None, description="V-family exponents; 0.5/B0' when omitted")
    l0: Optional[List[int]] = Field(None, description="Condensation cut-offs to report; 3..N when omitted")
    q_grid_size: int = Field(default_factory=lambda: settings.LAB_Q_GRID_SIZE, ge=2)
    q_method: Literal["exact", "monte_carlo"] = "exact"
    q_samples: int = Field(200_000, ge=100)
    members: int = Field(512, ge=1)
    t_grid: List[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    w0: Tuple[float, float] = (2.0, 1.0)
    m_max: int = Field(3, ge=1)
    monomials: List[Tuple[int, int]] = Field(default_factory=lambda: [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    lags: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.4, 0.8])
    consistency_draws: int = Field(1_000_000, ge=1000)
    conservation_steps: int = Field(10_000, ge=1)
    reference_scheme: Literal["heun", "euler_ito"] = "heun"

    @model_validator(mode="after")
    def check_ranges(self):
        if self.u_min >= self.u_max:
            raise ValueError("u_min must be smaller than u_max.")
        if any(t < 0 for t in self.t_grid) or not self.t_grid:
            raise ValueError("t_grid must be a non-empty list of non-negative times.")
        if any(i < 0 or j < 0 for i, j in self.monomials):
            raise ValueError("monomial exponents must be non-negative.")
        return self

    @property
    def scheme(self) -> ReferenceScheme:
        return ReferenceScheme[self.reference_scheme.upper()]


class OutputBlock(LabBlock):
    directory: Optional[str] = Field(None, description="Overrides LAB_OUTPUT_DIR")
    formats: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])
    snapshot: bool = Field(False, description="Also write full-state snapshots where a run keeps them")


class RunConfig(LabBlock):
    spectrum: SpectrumBlock
    params: ParamsBlock
    sim: SimBlock
    experiment: ExperimentBlock = Field(default_factory=ExperimentBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)
