"""
apps.simulation.services
------------------------
Trajectory drivers for the full system, the fast-only flow, the explicit
references and the forcing-only (ε = ∞) process, plus the parallel ensemble
runner.
"""

import logging
import math
from typing import Callable, List, Optional

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from apps.fields.services import StirringService, TriadService
from apps.fields.types import TriadTensor
from apps.runlog import log_event
from apps.simulation.enums import ReferenceScheme, SimMode
from apps.simulation.integrators import (
    MidpointIntegrator,
    OrnsteinUhlenbeck,
    ReferenceIntegrator,
    SplittingIntegrator,
    fast_substeps,
)
from apps.simulation.types import GalerkinSystem, IntegratorStats, PathRecorder, SimConfig
from apps.simulation.validators import SimulationValidator
from apps.spectrum.exceptions import ZeroStateException
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ModelParams, Spectrum
from apps.spectrum.validators import SpectrumValidator

logger = logging.getLogger(__name__)


class _Recording:
    """Mutable buffers filled while stepping; frozen into a PathRecorder at the end."""

    def __init__(self, s: Spectrum, keep_states: bool):
        self.s = s
        self.keep_states = keep_states
        self.times: List[float] = []
        self.rows: List[np.ndarray] = []
        self.states: List[np.ndarray] = []

    def add(self, time: float, x: np.ndarray) -> None:
        sq = x * x
        self.times.append(time)
        self.rows.append(np.array([math.fsum(sq), math.fsum(sq * self.s.inv_lam), math.fsum(sq * self.s.lam)]))
        if self.keep_states:
            self.states.append(x.copy())

    def freeze(self, burn_in: float, stats: IntegratorStats) -> PathRecorder:
        obs = np.array(self.rows).reshape(-1, 3)
        return PathRecorder(
            times=np.array(self.times),
            u=obs[:, 0],
            v=obs[:, 1],
            t_obs=obs[:, 2],
            burn_in=burn_in,
            states=np.array(self.states).reshape(-1, self.s.N) if self.keep_states else None,
            stats=stats,
        )


class SimulationService:

    @staticmethod
    def assemble(s: Spectrum, p: ModelParams, triads: Optional[TriadTensor] = None) -> GalerkinSystem:
        """
        Build the fused fast operator. Without explicit triads the Galerkin
        tensor of the torus modes is used.

        Raises:
            NotTorusSourcedException: If no triads are given and the spectrum is explicit.
        """
        triads = triads if triads is not None else TriadService.galerkin_triads(s)
        family = StirringService.enumerate_stirring(s)
        operator = StirringService.fast_operator(triads, family, s)
        logger.debug(f"Sistema ensamblado: N={s.N}, tríadas={triads.size}, M={family.M}")
        return GalerkinSystem(spectrum=s, params=p, triads=triads, family=family, operator=operator)

    @staticmethod
    def draw_stationary_gaussian(p: ModelParams, s: Spectrum, rng: np.random.Generator) -> np.ndarray:
        """Sample of μ: independent centered normals with variance a(1+δ_ℓ)/2."""
        return np.sqrt(p.mode_variances) * rng.standard_normal(s.N)

    @staticmethod
    def simulate_full(cfg: SimConfig, system: GalerkinSystem, x0: Optional[np.ndarray] = None,
                      rng: Optional[np.random.Generator] = None) -> PathRecorder:
        """
        Run one trajectory of the mode in `cfg` and record observables at stride.

        Args:
            cfg (SimConfig): Step, horizon, burn-in and mode.
            system (GalerkinSystem): Assembled model.
            x0 (np.ndarray, optional): Initial state; drawn from μ when omitted.
            rng (np.random.Generator, optional): Trajectory stream; derived from cfg.seed when omitted.

        Returns:
            PathRecorder: Observables at t = 0, stride·h, 2·stride·h, …

        Raises:
            TrajectoryAbortedException: If the fast step cannot be resolved.
            NonFiniteException: If the state leaves the finite range.
        """
        SimulationValidator.validate_config(cfg)
        if cfg.mode is SimMode.FAST_ONLY:
            rng = rng or derive_stream(cfg.seed, 0)
            if x0 is None:
                x0 = SimulationService.draw_stationary_gaussian(system.params, system.spectrum, rng)
            return SimulationService.simulate_fast_only(x0, cfg.t_end, cfg, system, rng)
        if cfg.mode is SimMode.EFFECTIVE:
            from apps.effective.services import EffectiveService
            return EffectiveService.simulate_effective(cfg, system.params, system.spectrum)

        rng = rng or derive_stream(cfg.seed, 0)
        p, s = system.params, system.spectrum
        x = SimulationService.draw_stationary_gaussian(p, s, rng) if x0 is None else SpectrumValidator.validate_state(x0, s).copy()
        stats = IntegratorStats()
        rec = _Recording(s, cfg.keep_states)
        rec.add(0.0, x)
        logger.info(f"Trayectoria {cfg.mode.value}: h={cfg.h}, pasos={cfg.n_steps}, ε={p.eps}, κ={p.kappa}")

        for step in range(1, cfg.n_steps + 1):
            time = (step - 1) * cfg.h
            if cfg.mode is SimMode.FULL:
                y = SplittingIntegrator.strang_step(x, cfg.h, cfg, system, rng, stats, time)
            elif cfg.mode is SimMode.REFERENCE:
                y = ReferenceIntegrator.heun_reference_step(x, cfg.h, system, rng, time=time)
            else:
                y = OrnsteinUhlenbeck.step(x, cfg.h, p, s, rng)
            SimulationValidator.validate_finite(y, step * cfg.h, x)
            x = y
            if step % cfg.record_stride == 0:
                rec.add(step * cfg.h, x)

        recorder = rec.freeze(cfg.burn_in, stats)
        if stats.halvings:
            log_event("trajectory_summary", halvings=stats.halvings, max_depth=stats.max_depth)
        return recorder

    @staticmethod
    def simulate_reference(cfg: SimConfig, system: GalerkinSystem, scheme: ReferenceScheme,
                           x0: Optional[np.ndarray] = None, rng: Optional[np.random.Generator] = None) -> PathRecorder:
        """Explicit reference trajectory (Heun or Euler–Itô) with the outer step h."""
        SimulationValidator.validate_config(cfg)
        rng = rng or derive_stream(cfg.seed, 0)
        p, s = system.params, system.spectrum
        x = SimulationService.draw_stationary_gaussian(p, s, rng) if x0 is None else np.array(x0, dtype=float)
        step_fn = (ReferenceIntegrator.heun_reference_step if scheme is ReferenceScheme.HEUN
                   else ReferenceIntegrator.euler_ito_reference_step)
        rec = _Recording(s, cfg.keep_states)
        rec.add(0.0, x)
        for step in range(1, cfg.n_steps + 1):
            x = step_fn(x, cfg.h, system, rng, time=(step - 1) * cfg.h)
            if step % cfg.record_stride == 0:
                rec.add(step * cfg.h, x)
        return rec.freeze(cfg.burn_in, IntegratorStats())

    @staticmethod
    def simulate_fast_only(x0: np.ndarray, t_end: float, cfg: SimConfig, system: GalerkinSystem,
                           rng: np.random.Generator, drift_sign: int = 1) -> PathRecorder:
        """
        Fast flow alone, which stays on the fiber {|x|² = u₀, |x|²₋₁ = v₀}.

        drift_sign = −1 runs the dual flow with generator κ𝒟 − B; it has the same
        fibers and the same invariant law.

        Raises:
            ZeroStateException: If x0 = 0.
        """
        s = system.spectrum
        x = SpectrumValidator.validate_state(x0, s).copy()
        if not np.any(x):
            raise ZeroStateException()
        if drift_sign not in (1, -1):
            raise ValueError("drift_sign debe ser +1 o −1")
        k = fast_substeps(cfg.h, cfg, system.params.eps)
        dt = cfg.h / k
        n_steps = int(round(t_end / cfg.h))
        stats = IntegratorStats()
        rec = _Recording(s, cfg.keep_states)
        rec.add(0.0, x)
        for step in range(1, n_steps + 1):
            for i in range(k):
                time = (step - 1) * cfg.h + i * dt
                x = MidpointIntegrator.fast_increment(x, dt, system, cfg, rng, stats, drift_sign, time)
            if step % cfg.record_stride == 0:
                rec.add(step * cfg.h, x)
        return rec.freeze(cfg.burn_in if cfg.burn_in < t_end else 0.0, stats)

    @staticmethod
    def simulate_forcing_only(cfg: SimConfig, p: ModelParams, s: Spectrum,
                              rng: Optional[np.random.Generator] = None) -> PathRecorder:
        """ε = ∞: independent exact OU coordinates, no drift and no stirring."""
        SimulationValidator.validate_config(cfg)
        rng = rng or derive_stream(cfg.seed, 0)
        x = SimulationService.draw_stationary_gaussian(p, s, rng)
        rec = _Recording(s, cfg.keep_states)
        rec.add(0.0, x)
        for step in range(1, cfg.n_steps + 1):
            x = OrnsteinUhlenbeck.step(x, cfg.h, p, s, rng)
            if step % cfg.record_stride == 0:
                rec.add(step * cfg.h, x)
        return rec.freeze(cfg.burn_in, IntegratorStats())


def _member(worker: Callable, seed: int, index: int):
    import django
    from django.apps import apps

    if not apps.ready:
        django.setup()
    with threadpool_limits(limits=1):
        return worker(index, derive_stream(seed, index))


class EnsembleService:

    @staticmethod
    def run_ensemble(seed: int, n_members: int, worker: Callable, threads: int = 1) -> list:
        """
        Run `worker(index, rng)` for every member with rng = derive_stream(seed, index).

        Results come back in member order regardless of scheduling; workers pin
        BLAS to one thread so `threads` bounds the total parallelism.

        Args:
            seed (int): Root seed of the ensemble.
            n_members (int): Number of trajectories.
            worker (Callable): Picklable callable (index, rng) -> result.
            threads (int): joblib worker count.
        """
        logger.info(f"Ensamble: {n_members} miembros, {threads} hilos")
        return Parallel(n_jobs=max(1, int(threads)))(
            delayed(_member)(worker, seed, index) for index in range(n_members)
        )
