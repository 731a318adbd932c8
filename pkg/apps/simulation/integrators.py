"""
apps.simulation.integrators
---------------------------
Single-step maps: the exact Ornstein-Uhlenbeck transition, the Stratonovich
implicit midpoint for the fast flow (with Brownian-bridge step splitting),
the Strang composition of both, and the Heun / Euler–Itô references.

Noise layout of one outer step: N normals for the first OU half step, M
increments per fast substep in field order, N normals for the second half.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np

from apps.fields.services import StirringService
from apps.runlog import log_event
from apps.simulation.exceptions import MidpointDivergedException, TrajectoryAbortedException
from apps.simulation.types import GalerkinSystem, IntegratorStats, SimConfig
from apps.simulation.validators import SimulationValidator
from apps.spectrum.types import ModelParams, Spectrum

logger = logging.getLogger(__name__)

MAX_HALVINGS = 8
CONSERVATION_FACTOR = 10.0


class OrnsteinUhlenbeck:

    @staticmethod
    def step(x: np.ndarray, tau: float, p: ModelParams, s: Spectrum, rng: np.random.Generator,
             xi: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Exact transition over tau: x ← e^{−λτ}x + σ√(1 − e^{−2λτ})·ξ with σ² = a(1+δ)/2.

        Args:
            xi (np.ndarray, optional): Standard normals to use instead of drawing N from rng.
        """
        if xi is None:
            xi = rng.standard_normal(s.N)
        decay = np.exp(-s.lam * tau)
        spread = np.sqrt(p.mode_variances * -np.expm1(-2.0 * s.lam * tau))
        return decay * x + spread * xi


class MidpointIntegrator:
    """
    z⁺ = x + F((x + z⁺)/2) where F(y) = (dt/ε)·b(y) + √(κ/ε)·Σ Z_m(y)·Δβ_m.

    Every fast field is orthogonal to its argument in both inner products, so
    the midpoint rule keeps U and V up to the solver tolerance.
    """

    @staticmethod
    def solve(x: np.ndarray, dt: float, d_beta: np.ndarray, system: GalerkinSystem, tol: float,
              max_iter: int, drift_sign: int = 1, stats: Optional[IntegratorStats] = None) -> np.ndarray:
        """
        Newton iteration on G(z) = z − x − F((x+z)/2) started from the explicit Euler guess.

        Raises:
            MidpointDivergedException: If no convergence within max_iter or a non-finite iterate.
        """
        op = system.operator
        weights, angles = system.fast_weights(dt, d_beta, drift_sign)
        identity = np.eye(system.N)
        scale = tol * (1.0 + float(np.max(np.abs(x))))
        z = x + op.apply(x, weights, angles)
        for iteration in range(1, max_iter + 1):
            mid = 0.5 * (x + z)
            residual = z - x - op.apply(mid, weights, angles)
            try:
                delta = np.linalg.solve(identity - 0.5 * op.jacobian(mid, weights, angles), residual)
            except np.linalg.LinAlgError:
                raise MidpointDivergedException()
            z = z - delta
            if not np.all(np.isfinite(z)):
                raise MidpointDivergedException()
            if np.max(np.abs(delta)) <= scale:
                if stats is not None:
                    stats.iterations += iteration
                return x + op.apply(0.5 * (x + z), weights, angles)
        raise MidpointDivergedException()

    @staticmethod
    def fast_midpoint_step(x: np.ndarray, dt: float, system: GalerkinSystem, rng: np.random.Generator,
                           tol: float = 1e-12, max_iter: int = 50, drift_sign: int = 1) -> np.ndarray:
        """
        One midpoint step with fresh increments Δβ ~ N(0, dt). No splitting on failure.

        Raises:
            MidpointDivergedException
        """
        d_beta = math.sqrt(dt) * rng.standard_normal(system.family.M)
        return MidpointIntegrator.solve(x, dt, d_beta, system, tol, max_iter, drift_sign)

    @staticmethod
    def advance(x: np.ndarray, dt: float, d_beta: np.ndarray, system: GalerkinSystem, cfg: SimConfig,
                rng: np.random.Generator, stats: IntegratorStats, drift_sign: int = 1,
                depth: int = 0, time: float = 0.0) -> np.ndarray:
        """
        Midpoint step over dt with given increments; on divergence the step is
        split in two by a Brownian bridge, at most eight levels deep.

        Raises:
            TrajectoryAbortedException: After exhausting the halvings.
        """
        try:
            z = MidpointIntegrator.solve(x, dt, d_beta, system, cfg.midpoint_tol, cfg.midpoint_max_iter,
                                         drift_sign, stats)
        except MidpointDivergedException:
            if depth >= MAX_HALVINGS:
                log_event("trajectory_abort", logging.ERROR, time=time, dt=dt, state=x.tolist())
                raise TrajectoryAbortedException(state=x.copy(), time=time)
            stats.halvings += 1
            stats.max_depth = max(stats.max_depth, depth + 1)
            log_event("midpoint_halving", logging.WARNING, time=time, dt=dt, depth=depth + 1)
            first = 0.5 * d_beta + math.sqrt(dt / 4.0) * rng.standard_normal(d_beta.shape[0])
            half = 0.5 * dt
            y = MidpointIntegrator.advance(x, half, first, system, cfg, rng, stats, drift_sign, depth + 1, time)
            return MidpointIntegrator.advance(y, half, d_beta - first, system, cfg, rng, stats, drift_sign,
                                              depth + 1, time + half)

        stats.fast_steps += 1
        MidpointIntegrator._audit(x, z, system.spectrum, cfg.midpoint_tol, stats, time)
        return z

    @staticmethod
    def fast_increment(x: np.ndarray, dt: float, system: GalerkinSystem, cfg: SimConfig, rng: np.random.Generator,
                       stats: IntegratorStats, drift_sign: int = 1, time: float = 0.0) -> np.ndarray:
        d_beta = math.sqrt(dt) * rng.standard_normal(system.family.M)
        return MidpointIntegrator.advance(x, dt, d_beta, system, cfg, rng, stats, drift_sign, 0, time)

    @staticmethod
    def _audit(x: np.ndarray, z: np.ndarray, s: Spectrum, tol: float, stats: IntegratorStats, time: float) -> None:
        x2, z2 = x * x, z * z
        u0 = math.fsum(x2)
        du = abs(math.fsum(z2) - u0)
        dv = abs(math.fsum(z2 * s.inv_lam) - math.fsum(x2 * s.inv_lam))
        drift = max(du, dv) / (1.0 + u0)
        stats.conservation_max = max(stats.conservation_max, drift)
        if drift > CONSERVATION_FACTOR * tol:
            log_event("conservation_breach", logging.WARNING, time=time, du=du, dv=dv, u=u0)


def fast_substeps(h: float, cfg: SimConfig, eps: float) -> int:
    """⌈h / (factor·ε)⌉ substeps, at least one."""
    return max(1, math.ceil(h / (cfg.fast_substep_factor * eps) - 1e-9))


class SplittingIntegrator:

    @staticmethod
    def strang_step(x: np.ndarray, h: float, cfg: SimConfig, system: GalerkinSystem, rng: np.random.Generator,
                    stats: Optional[IntegratorStats] = None, time: float = 0.0) -> np.ndarray:
        """
        OU over h/2, then ⌈h/(factor·ε)⌉ midpoint substeps covering h, then OU over h/2.

        Raises:
            TrajectoryAbortedException: Propagated from the fast substeps.
        """
        stats = stats if stats is not None else IntegratorStats()
        p, s = system.params, system.spectrum
        y = OrnsteinUhlenbeck.step(x, 0.5 * h, p, s, rng)
        k = fast_substeps(h, cfg, p.eps)
        dt = h / k
        for i in range(k):
            y = MidpointIntegrator.fast_increment(y, dt, system, cfg, rng, stats, time=time + i * dt)
        return OrnsteinUhlenbeck.step(y, 0.5 * h, p, s, rng)


class ReferenceIntegrator:
    """
    Explicit references for cross-validation. Noise columns are dW (N, forcing)
    followed by dβ (M, stirring), drawn in that order.
    """

    @staticmethod
    def heun_update(x: np.ndarray, h: float, drift: Callable, diffusion: Callable, dw: np.ndarray) -> np.ndarray:
        """Stratonovich Heun: Euler predictor, trapezoidal corrector in drift and diffusion."""
        f0, g0 = drift(x), diffusion(x)
        predictor = x + f0 * h + g0 @ dw
        f1, g1 = drift(predictor), diffusion(predictor)
        return x + 0.5 * (f0 + f1) * h + 0.5 * (g0 + g1) @ dw

    @staticmethod
    def _fields(system: GalerkinSystem, fast_only: bool):
        p, s = system.params, system.spectrum
        op = system.operator
        unit_weights = np.zeros(1 + system.family.n_triples)
        unit_weights[0] = 1.0
        no_angles = np.zeros(system.family.n_rotations)
        forcing = np.sqrt(p.a * s.lam * (1.0 + p.delta_modes))
        stir = math.sqrt(p.kappa / p.eps)

        def bilinear(x):
            return op.apply(x, unit_weights, no_angles) / p.eps

        def drift(x):
            return bilinear(x) if fast_only else bilinear(x) - s.lam * x

        def diffusion(x):
            g = np.zeros((s.N, s.N + system.family.M))
            if not fast_only:
                g[:, : s.N] = np.diag(forcing)
            g[:, s.N:] = stir * StirringService.fields_matrix(system.family, x, s).T
            return g

        return bilinear, drift, diffusion

    @staticmethod
    def _increments(h: float, system: GalerkinSystem, rng: np.random.Generator) -> np.ndarray:
        return math.sqrt(h) * rng.standard_normal(system.N + system.family.M)

    @staticmethod
    def heun_reference_step(x: np.ndarray, h: float, system: GalerkinSystem, rng: np.random.Generator,
                            fast_only: bool = False, dw: Optional[np.ndarray] = None, time: float = 0.0) -> np.ndarray:
        """
        Heun step of the full (or fast-only) Stratonovich system. Guidance: h ≤ 10⁻²·ε.

        Raises:
            NonFiniteException: If the step leaves the finite range.
        """
        _, drift, diffusion = ReferenceIntegrator._fields(system, fast_only)
        dw = ReferenceIntegrator._increments(h, system, rng) if dw is None else dw
        out = ReferenceIntegrator.heun_update(x, h, drift, diffusion, dw)
        SimulationValidator.validate_finite(out, time + h, x)
        return out

    @staticmethod
    def euler_ito_reference_step(x: np.ndarray, h: float, system: GalerkinSystem, rng: np.random.Generator,
                                 dw: Optional[np.ndarray] = None, time: float = 0.0) -> np.ndarray:
        """
        Euler–Maruyama on the Itô form with drift −Λx + b/ε + (κ/2ε)Σ DZ_m·Z_m.

        Raises:
            NonFiniteException
        """
        p, s = system.params, system.spectrum
        _, drift, diffusion = ReferenceIntegrator._fields(system, fast_only=False)
        dw = ReferenceIntegrator._increments(h, system, rng) if dw is None else dw
        correction = StirringService.ito_correction(system.family, x, p.kappa, p.eps, s)
        out = x + (drift(x) + correction) * h + diffusion(x) @ dw
        SimulationValidator.validate_finite(out, time + h, x)
        return out
