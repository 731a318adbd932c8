"""
apps.experiments.services.equilibration
---------------------------------------
Relaxation of the fast flow on one fiber: an ensemble of fast-only runs from
a good state, whose mean squared modes should approach q(u₀, v₀).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from apps.experiments.enums import CheckName
from apps.experiments.exceptions import NotGoodStateException
from apps.experiments.services.reporting import Z_GATE, build_report
from apps.experiments.types import CheckReport
from apps.polytope.services import LiftService, PolytopeService
from apps.polytope.types import QSource
from apps.simulation.services import EnsembleService, SimulationService
from apps.simulation.types import GalerkinSystem, SimConfig
from apps.spectrum.enums import StateClass
from apps.spectrum.services import ObservableService
from apps.spectrum.types import ConePoint, Spectrum

logger = logging.getLogger(__name__)

FINAL_RELATIVE_TOL = 0.05


@dataclass(frozen=True)
class _FastOnlyMember:
    """Picklable ensemble worker returning x² at the requested step indices."""
    system: GalerkinSystem
    cfg: SimConfig
    x0: np.ndarray
    indices: tuple

    def __call__(self, index: int, rng: np.random.Generator) -> np.ndarray:
        rec = SimulationService.simulate_fast_only(self.x0, self.cfg.t_end, self.cfg, self.system, rng)
        return rec.states[list(self.indices)] ** 2


class EquilibrationService:

    @staticmethod
    def centroid_state(w: ConePoint, s: Spectrum) -> np.ndarray:
        """State over w whose pair radii are the polytope centroid, all angles zero."""
        polytope = PolytopeService.build_polytope(w, s)
        _, centroid = PolytopeService.volume_centroid(polytope)
        return LiftService.lift_sample(centroid, np.zeros(s.n), w, s)

    @staticmethod
    def equilibration_test(x0, t_grid: Sequence[float], cfg: SimConfig, system: GalerkinSystem, q_source: QSource,
                           members: int = 512, u_min: float = 1e-3, u_max: float = 1e3, eta: float = 0.02,
                           threads: int = 1, seed: Optional[int] = None) -> CheckReport:
        """
        Ensemble mean of x_ℓ² at each t of the grid against q_ℓ(u₀, v₀).

        Reports the per-t maximum relative deviation and the decay rate fitted
        to log of the maximum absolute deviation. Passes iff the rate is
        positive and, at the last time, every mode is within
        max(5% relative, 3 SE) of q.

        Raises:
            NotGoodStateException: If x0 is not good for (u_min, u_max, eta).
        """
        s = system.spectrum
        x0 = np.asarray(x0, dtype=float)
        if ObservableService.classify_state(x0, s, u_min, u_max, eta) is StateClass.UNTAMED:
            logger.warning(f"Estado inicial no bueno para u∈[{u_min}, {u_max}], η={eta}")
            raise NotGoodStateException()
        obs = ObservableService.compute_observables(x0, s)
        q0 = np.asarray(q_source.q(ConePoint(obs.u, obs.v)), dtype=float)

        times = np.unique(np.asarray(t_grid, dtype=float))
        indices = tuple(int(round(t / cfg.h)) for t in times)
        run_cfg = cfg.with_updates(t_end=indices[-1] * cfg.h, burn_in=0.0, record_stride=1, keep_states=True)
        worker = _FastOnlyMember(system, run_cfg, x0, indices)
        squares = np.array(EnsembleService.run_ensemble(cfg.seed if seed is None else seed, members, worker, threads))

        mean = squares.mean(axis=0)
        se = squares.std(axis=0, ddof=1) / math.sqrt(members) if members > 1 else np.zeros_like(mean)
        deviation = np.abs(mean - q0)
        relative = deviation / q0
        max_dev = deviation.max(axis=1)

        positive = max_dev > 0
        fit = stats.linregress(times[positive], np.log(max_dev[positive])) if np.count_nonzero(positive) >= 2 else None
        rate = -float(fit.slope) if fit is not None else float("nan")

        tolerance = np.maximum(FINAL_RELATIVE_TOL * q0, Z_GATE * se[-1])
        final_ok = bool(np.all(deviation[-1] <= tolerance))
        passed = bool(rate > 0) and final_ok
        logger.info(f"Equilibrio: tasa ajustada {rate:.4g}, desviación final máxima {relative[-1].max():.3g}")
        return build_report(
            CheckName.EQUILIBRATION,
            {"x0": x0, "t_grid": times, "config": run_cfg, "params": system.params, "members": members},
            relative.max(axis=1).tolist(), None, None, None, passed,
            {
                "t_grid": times.tolist(),
                "q": q0.tolist(),
                "max_abs_deviation": max_dev.tolist(),
                "final_mean": mean[-1].tolist(),
                "final_se": se[-1].tolist(),
                "final_within_tolerance": final_ok,
                "decay_rate": rate,
                "members": members,
            },
        )
