"""
apps.experiments.services.sweeps
--------------------------------
Inviscid sweep: stationary (U, V) samples of the full system at decreasing ε
against one shared sample of the averaged diffusion.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from django.utils.translation import gettext_lazy as _

from apps.effective.services import EffectiveService, default_q_source
from apps.experiments.exceptions import InvalidSweepException
from apps.experiments.services.distances import DistanceService
from apps.experiments.services.stationary import StationaryService
from apps.experiments.types import InviscidReport, StationarySummary, inputs_hash
from apps.polytope.types import QSource
from apps.simulation.enums import SimMode
from apps.simulation.integrators import fast_substeps
from apps.simulation.services import EnsembleService, SimulationService
from apps.simulation.types import PathRecorder, SimConfig
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ModelParams, Spectrum

logger = logging.getLogger(__name__)

MIN_GRID = 3
EFFECTIVE_STREAM = 1_000_003


def _thinned(rec: PathRecorder):
    """Post-burn-in (U, V) rows at a stride of five autocorrelation times, plus the summary."""
    summary = StationaryService.estimate_stationary(rec)
    tail = rec.stationary()
    stride = StationaryService.thinning_stride(tail.u)
    return np.column_stack([tail.u, tail.v])[::stride], summary


@dataclass(frozen=True)
class _FullRun:
    """Picklable sweep worker: one full-system run per (ε, κ) pair."""
    cfg: SimConfig
    params: ModelParams
    spectrum: Spectrum
    settings_list: tuple

    def __call__(self, index: int, rng: np.random.Generator):
        eps, kappa = self.settings_list[index]
        p = self.params.with_updates(eps=eps, kappa=kappa)
        system = SimulationService.assemble(self.spectrum, p)
        rec = SimulationService.simulate_full(self.cfg, system, rng=rng)
        return _thinned(rec)


class SweepService:

    @staticmethod
    def validate_grid(eps_grid: Sequence[float]) -> np.ndarray:
        """
        Raises:
            InvalidSweepException: If the grid has fewer than three values or increases somewhere.
        """
        grid = np.asarray(eps_grid, dtype=float)
        if grid.shape[0] < MIN_GRID:
            logger.warning(f"Rejilla de ε demasiado corta: {grid.tolist()}")
            raise InvalidSweepException(_("The eps grid needs at least %(n)s values.") % {'n': MIN_GRID})
        if np.any(np.diff(grid) > 0) or np.any(grid <= 0):
            logger.warning(f"Rejilla de ε no descendente: {grid.tolist()}")
            raise InvalidSweepException(_("The eps grid must be positive and sorted in descending order."))
        return grid

    @staticmethod
    def inviscid_sweep(eps_grid: Sequence[float], cfg: SimConfig, p: ModelParams, s: Spectrum,
                       q_source: Optional[QSource] = None, kappa_probe: Optional[float] = 0.25,
                       probe_eps: Optional[float] = None, threads: int = 1) -> InviscidReport:
        """
        Energy distance and mean-gap between full-system and averaged samples per ε.

        The full runs and the κ probe run in parallel on streams (seed, index);
        the averaged diffusion runs once on its own stream. monotone_flag holds
        iff the first distance exceeds the last by more than one combined SE.

        Raises:
            InvalidSweepException: For a grid that is too short or not descending.
            TooFewSamplesException: If thinning leaves fewer than 100 samples.
        """
        grid = SweepService.validate_grid(eps_grid)
        full_cfg = cfg.with_updates(mode=SimMode.FULL, keep_states=False)
        runs = [(float(eps), p.kappa) for eps in grid]
        probe = None
        if kappa_probe is not None:
            probe = (float(probe_eps if probe_eps is not None else grid[len(grid) // 2]), float(kappa_probe))
            runs.append(probe)

        worker = _FullRun(full_cfg, p, s, tuple(runs))
        results = EnsembleService.run_ensemble(cfg.seed, len(runs), worker, threads)

        q_source = q_source if q_source is not None else default_q_source(s)
        eff_rec = EffectiveService.simulate_effective(full_cfg, p, s, q_source,
                                                      rng=derive_stream(cfg.seed, EFFECTIVE_STREAM))
        eff_samples, eff_summary = _thinned(eff_rec)

        def compare(samples: np.ndarray, summary: StationarySummary):
            distance = DistanceService.energy_distance(samples, eff_samples)
            gap = abs(2.0 * summary.mean_u_minus_v.value - 2.0 * eff_summary.mean_u_minus_v.value)
            return distance, gap

        distances, gaps, sizes = [], [], []
        for (samples, summary), (eps, _kappa) in zip(results[: len(grid)], runs):
            distance, gap = compare(samples, summary)
            distances.append(distance)
            gaps.append(gap)
            sizes.append(int(samples.shape[0]))
            logger.info(f"Barrido ε={eps}: distancia {distance.value:.4g} ± {distance.se:.2g}, brecha {gap:.4g}")

        probe_report = None
        if probe is not None:
            samples, summary = results[-1]
            distance, gap = compare(samples, summary)
            reference = int(np.argmin(np.abs(grid - probe[0])))
            probe_report = {
                "eps": probe[0],
                "kappa": probe[1],
                "distance": distance.value,
                "se": distance.se,
                "mean_gap": gap,
                "shift": distance.value - distances[reference].value,
                "shift_se": math.hypot(distance.se, distances[reference].se),
            }

        first, last = distances[0], distances[-1]
        monotone = (first.value - last.value) > math.hypot(first.se, last.se)
        return InviscidReport(
            eps_grid=grid.tolist(),
            distances=distances,
            mean_gaps=gaps,
            monotone_flag=bool(monotone),
            gap_monotone_flag=bool(gaps[-1] < gaps[0]),
            sample_sizes={"full": sizes, "effective": int(eff_samples.shape[0])},
            kappa_probe=probe_report,
            h=full_cfg.h,
            fast_substeps=[fast_substeps(full_cfg.h, full_cfg, float(eps)) for eps in grid],
            inputs_hash=inputs_hash({"eps_grid": grid, "config": full_cfg, "params": p, "spectrum": s.mu,
                                     "kappa_probe": kappa_probe, "probe_eps": probe_eps}),
        )
