"""
apps.effective.services
-----------------------
The averaged (u, v) diffusion: generator coefficients from q, the 2×2
diffusion factor, a cone-respecting Euler–Maruyama step, stationary runs and
the admissible boundary exponents.
"""

import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np
from django.conf import settings

from apps.effective.enums import BoundaryRay
from apps.effective.exceptions import StuckAtBoundaryException
from apps.effective.types import AdmissibleExponents, EffectiveCoefficients, EffectiveStep
from apps.effective.validators import EffectiveValidator
from apps.polytope.services import QService
from apps.polytope.types import QSource
from apps.polytope.validators import PolytopeValidator
from apps.runlog import log_event
from apps.simulation.types import IntegratorStats, PathRecorder, SimConfig
from apps.simulation.validators import SimulationValidator
from apps.spectrum.services import BoundService, GeneratorCalculus
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ConePoint, ModelParams, Spectrum

logger = logging.getLogger(__name__)

MAX_STEP_HALVINGS = 12
EXPONENT_MARGIN = 1e-9


@lru_cache(maxsize=8)
def _ray_table(s: Spectrum, size: int) -> QSource:
    return QService.q_ray_table(s, QService.default_ratios(s, size))


def default_q_source(s: Spectrum) -> QSource:
    """Exact ray table on LAB_Q_GRID_SIZE ratios, built once per spectrum and grid size."""
    return _ray_table(s, int(settings.LAB_Q_GRID_SIZE))


def _interior(u: float, v: float, lam_max: float) -> bool:
    return v > 0 and v < u < lam_max * v


def _reflect(w: np.ndarray, direction: np.ndarray) -> np.ndarray:
    d = direction / np.linalg.norm(direction)
    return 2.0 * float(w @ d) * d - w


class EffectiveService:

    @staticmethod
    def effective_coefficients(w: ConePoint, p: ModelParams, s: Spectrum, q_source: QSource) -> EffectiveCoefficients:
        """
        Coefficients of the averaged generator at w.

        a11 = 2aΣλ(1+δ)q, a12 = 2aΣ(1+δ)q, a22 = 2aΣ(1+δ)q/λ,
        drift_u = B₁ − 2Σλq, drift_v = B₀ − 2Σq.

        Raises:
            OutsideConeException: If w ∉ C.
        """
        PolytopeValidator.validate_cone_point(w, s)
        q = np.asarray(q_source.q(w), dtype=float)
        weight = 1.0 + p.delta_modes
        budgets = BoundService.forcing_budgets(p, s)
        return EffectiveCoefficients(
            a11=2.0 * p.a * math.fsum(s.lam * weight * q),
            a12=2.0 * p.a * math.fsum(weight * q),
            a22=2.0 * p.a * math.fsum(weight * q / s.lam),
            drift_u=budgets.b1 - 2.0 * math.fsum(s.lam * q),
            drift_v=budgets.b0 - 2.0 * math.fsum(q),
            at=w,
        )

    @staticmethod
    def diffusion_factor(c: EffectiveCoefficients) -> np.ndarray:
        """
        Lower-triangular F with F·Fᵀ = 2·[[a11, a12], [a12, a22]].

        Raises:
            NotPSDException: If the matrix is indefinite beyond −10⁻¹²·trace.
        """
        EffectiveValidator.validate_psd(c)
        a11 = max(c.a11, 0.0)
        if a11 == 0.0:
            return np.array([[0.0, 0.0], [0.0, math.sqrt(2.0 * max(c.a22, 0.0))]])
        f11 = math.sqrt(2.0 * a11)
        f21 = 2.0 * c.a12 / f11
        f22 = math.sqrt(max(2.0 * c.determinant / a11, 0.0))
        return np.array([[f11, 0.0], [f21, f22]])

    @staticmethod
    def effective_step(w: ConePoint, h: float, p: ModelParams, s: Spectrum, q_source: QSource,
                       rng: np.random.Generator, xi: Optional[np.ndarray] = None) -> EffectiveStep:
        """
        Euler–Maruyama proposal w′ = w + drift·h + F·√h·ξ kept inside the open cone.

        A proposal outside the cone is retried with the same ξ and half the step,
        up to twelve times; the last proposal is then reflected across the
        violated ray and the step is flagged.

        Raises:
            StuckAtBoundaryException: If the reflected point is still outside.
        """
        coeffs = EffectiveService.effective_coefficients(w, p, s, q_source)
        factor = EffectiveService.diffusion_factor(coeffs)
        xi = rng.standard_normal(2) if xi is None else np.asarray(xi, dtype=float)
        noise = factor @ xi
        base = np.array([w.u, w.v])
        lam_max = s.lam_max

        tau = h
        for halvings in range(MAX_STEP_HALVINGS + 1):
            proposal = base + coeffs.drift * tau + noise * math.sqrt(tau)
            if _interior(proposal[0], proposal[1], lam_max):
                return EffectiveStep(ConePoint(float(proposal[0]), float(proposal[1])), tau, halvings)
            if halvings < MAX_STEP_HALVINGS:
                tau *= 0.5

        lower = proposal[0] - proposal[1] <= 0
        upper = lam_max * proposal[1] - proposal[0] <= 0
        if lower == upper:
            log_event("boundary_stuck", logging.ERROR, u=w.u, v=w.v, h=h)
            raise StuckAtBoundaryException(point=proposal)
        ray = BoundaryRay.LOWER if lower else BoundaryRay.UPPER
        direction = np.array([1.0, 1.0]) if lower else np.array([lam_max, 1.0])
        reflected = _reflect(proposal, direction)
        if not _interior(reflected[0], reflected[1], lam_max):
            log_event("boundary_stuck", logging.ERROR, u=w.u, v=w.v, h=h, ray=ray.value)
            raise StuckAtBoundaryException(point=reflected)
        log_event("boundary_reflection", logging.WARNING, u=w.u, v=w.v, h=tau, ray=ray.value)
        return EffectiveStep(ConePoint(float(reflected[0]), float(reflected[1])), tau, MAX_STEP_HALVINGS, True, ray)

    @staticmethod
    def initial_point(p: ModelParams, s: Spectrum) -> ConePoint:
        """(B₀/2, B₀/(2r̄)) on the mid ray r̄ = (1 + λ_N)/2."""
        b0 = BoundService.forcing_budgets(p, s).b0
        r_mid = 0.5 * (1.0 + s.lam_max)
        return ConePoint(0.5 * b0, 0.5 * b0 / r_mid)

    @staticmethod
    def simulate_effective(cfg: SimConfig, p: ModelParams, s: Spectrum, q_source: Optional[QSource] = None,
                           w0: Optional[ConePoint] = None, rng: Optional[np.random.Generator] = None) -> PathRecorder:
        """
        Stationary run of the averaged diffusion on the outer grid k·h.

        Each outer step is covered by as many cone-respecting steps as the
        halvings require. The recorder's T column holds Σλ_ℓq_ℓ(W) and its
        flags mark outer steps that needed a reflection.
        """
        SimulationValidator.validate_config(cfg)
        q_source = q_source if q_source is not None else default_q_source(s)
        rng = rng or derive_stream(cfg.seed, 0)
        w = w0 or EffectiveService.initial_point(p, s)
        PolytopeValidator.validate_cone_point(w, s)

        stats = IntegratorStats()
        points, flags = [(w.u, w.v)], [False]
        reflected_since_record = False
        for step in range(1, cfg.n_steps + 1):
            remaining = cfg.h
            while remaining > 1e-12 * cfg.h:
                result = EffectiveService.effective_step(w, remaining, p, s, q_source, rng)
                w = result.point
                remaining -= result.h_used
                stats.halvings += result.halvings
                stats.max_depth = max(stats.max_depth, result.halvings)
                if result.reflected:
                    stats.reflections += 1
                    reflected_since_record = True
            if step % cfg.record_stride == 0:
                points.append((w.u, w.v))
                flags.append(reflected_since_record)
                reflected_since_record = False

        uv = np.array(points)
        t_obs = q_source.q_batch(uv[:, 0], uv[:, 1]) @ s.lam
        times = np.concatenate([[0.0], np.arange(1, len(points)) * cfg.record_stride * cfg.h])
        logger.info(f"Difusión efectiva: {cfg.n_steps} pasos, {stats.reflections} reflexiones")
        return PathRecorder(times=times, u=uv[:, 0], v=uv[:, 1], t_obs=t_obs, burn_in=cfg.burn_in,
                            flags=np.array(flags), stats=stats)

    @staticmethod
    def admissible_exponents(p: ModelParams, s: Spectrum) -> AdmissibleExponents:
        """
        Largest α, β with 2(2α+1)·max_ℓ c_ℓ < Σ_ℓ c_ℓ, for c_ℓ = (λ_ℓ − 1)(1+δ_ℓ)
        and c_ℓ = (λ_N − λ_ℓ)(1+δ_ℓ) respectively, minus a 10⁻⁹ margin.
        """
        weight = 1.0 + p.delta_modes

        def largest(c: np.ndarray) -> float:
            return 0.5 * (math.fsum(c) / (2.0 * float(np.max(c))) - 1.0) - EXPONENT_MARGIN

        exponents = AdmissibleExponents(
            alpha_max=largest((s.lam - 1.0) * weight),
            beta_max=largest((s.lam_max - s.lam) * weight),
        )
        if not (exponents.alpha_available and exponents.beta_available):
            logger.info(f"Exponentes de frontera sin certificado: {exponents.as_dict()}")
        return exponents

    @staticmethod
    def effective_generator(u, v, i: int, j: int, p: ModelParams, s: Spectrum, q_source: QSource) -> np.ndarray:
        """Ã(u^i v^j) at each (u, v): the forcing generator with x_ℓ² replaced by q_ℓ(u, v)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        q = q_source.q_batch(u, v)
        sums = GeneratorCalculus.weighted_sums(q, p, s)
        budgets = BoundService.forcing_budgets(p, s)
        return GeneratorCalculus.apply_monomial(i, j, u, v, q @ s.lam, sums, p, budgets)
