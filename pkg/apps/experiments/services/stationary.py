"""
apps.experiments.services.stationary
------------------------------------
Batch-means estimation of stationary averages with an autocorrelation guard.
"""

import logging
import math
from typing import Callable, Iterable, Optional

import numpy as np
from statsmodels.tsa.stattools import acovf

from apps.experiments.exceptions import TooFewSamplesException, TooShortException
from apps.experiments.types import Estimate, StationarySummary
from apps.runlog import log_event
from apps.simulation.types import PathRecorder
from apps.spectrum.enums import MomentFamily
from apps.spectrum.services import BoundService, ObservableService
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ForcingBudgets, Spectrum

logger = logging.getLogger(__name__)

N_BATCHES = 32
MIN_SAMPLES = 64
SOKAL_WINDOW = 5.0
BATCH_TO_IAT = 50.0
BOOTSTRAP_RESAMPLES = 200
BOOTSTRAP_SEED = 7
MIN_UNTAMED_SAMPLES = 1000


class StationaryService:

    @staticmethod
    def batch_means(values, batches: int = N_BATCHES) -> Estimate:
        """
        Mean of the first batches·L samples with SE std(batch means)/√batches.

        Raises:
            TooShortException: If fewer than MIN_SAMPLES values are given.
        """
        x = np.asarray(values, dtype=float)
        if x.shape[0] < max(MIN_SAMPLES, batches):
            raise TooShortException()
        length = x.shape[0] // batches
        means = x[: batches * length].reshape(batches, length, *x.shape[1:]).mean(axis=1)
        value = means.mean(axis=0)
        se = means.std(axis=0, ddof=1) / math.sqrt(batches)
        if np.ndim(value) == 0:
            return Estimate(float(value), float(se), int(batches * length))
        return Estimate(value, se, int(batches * length))

    @staticmethod
    def batch_statistic(values, statistic: Callable[[np.ndarray], np.ndarray], batches: int = N_BATCHES) -> Estimate:
        """Statistic on the whole series; SE from its spread across the batches."""
        x = np.asarray(values, dtype=float)
        if x.shape[0] < max(MIN_SAMPLES, batches):
            raise TooShortException()
        length = x.shape[0] // batches
        trimmed = x[: batches * length]
        per_batch = np.array([statistic(chunk) for chunk in trimmed.reshape(batches, length, *x.shape[1:])])
        return Estimate(statistic(trimmed), per_batch.std(axis=0, ddof=1) / math.sqrt(batches), int(batches * length))

    @staticmethod
    def integrated_autocorr_time(values, window: float = SOKAL_WINDOW) -> float:
        """
        τ = 1 + 2Σ_{k≤M} ρ_k with the smallest M ≥ window·τ(M).

        A constant series has τ = 1.
        """
        x = np.asarray(values, dtype=float)
        if x.shape[0] < 2:
            return 1.0
        acov = acovf(x, adjusted=False, demean=True, fft=True, nlag=x.shape[0] // 2)
        if acov[0] <= 0:
            return 1.0
        rho = acov / acov[0]
        taus = 1.0 + 2.0 * np.cumsum(rho[1:])
        lags = np.arange(1, taus.shape[0] + 1)
        inside = lags >= window * taus
        if not np.any(inside):
            return float(taus[-1])
        return float(taus[np.argmax(inside)])

    @staticmethod
    def block_bootstrap_se(values, rng: Optional[np.random.Generator] = None,
                           resamples: int = BOOTSTRAP_RESAMPLES, batches: int = N_BATCHES) -> float:
        """Bootstrap SE of the mean, resampling contiguous batches."""
        x = np.asarray(values, dtype=float)
        if x.shape[0] < max(MIN_SAMPLES, batches):
            raise TooShortException()
        rng = rng or derive_stream(BOOTSTRAP_SEED)
        length = x.shape[0] // batches
        means = x[: batches * length].reshape(batches, length).mean(axis=1)
        picks = rng.integers(0, batches, size=(resamples, batches))
        return float(means[picks].mean(axis=1).std(ddof=1))

    @staticmethod
    def exponential_moment(u, v, t_obs, z: float, budgets: ForcingBudgets, family: MomentFamily,
                           rng: Optional[np.random.Generator] = None):
        """
        Empirical E[e^{zV}(1+U)] (V family) or E[e^{zU}(1+T)] (U family) against Φ.

        Returns:
            Tuple (Estimate, phi_bound).
        """
        u, v, t_obs = (np.asarray(a, dtype=float) for a in (u, v, t_obs))
        if family is MomentFamily.V:
            values = np.exp(z * v) * (1.0 + u)
            bound = BoundService.phi_bound(z, budgets.b0, budgets.b0_prime)
        else:
            values = np.exp(z * u) * (1.0 + t_obs)
            bound = BoundService.phi_bound(z, budgets.b1, budgets.b1_prime)
        se = StationaryService.block_bootstrap_se(values, rng)
        return Estimate(float(np.mean(values)), se, int(values.shape[0])), bound

    @staticmethod
    def untamed_fraction(u, v, s: Spectrum, u_min: float, u_max: float, eta: float) -> Estimate:
        """
        Fraction of samples outside the good set, with binomial SE.

        Raises:
            TooFewSamplesException: Below 10³ samples.
        """
        u = np.asarray(u, dtype=float)
        if u.shape[0] < MIN_UNTAMED_SAMPLES:
            raise TooFewSamplesException()
        good = ObservableService.good_mask(u, v, s, u_min, u_max, eta)
        fraction = 1.0 - float(np.mean(good))
        return Estimate(fraction, math.sqrt(fraction * (1.0 - fraction) / u.shape[0]), int(u.shape[0]))

    @staticmethod
    def untamed_fraction_of_states(states, s: Spectrum, u_min: float, u_max: float, eta: float) -> Estimate:
        u, v, _ = ObservableService.observables_batch(states, s)
        return StationaryService.untamed_fraction(u, v, s, u_min, u_max, eta)

    @staticmethod
    def estimate_stationary(rec: PathRecorder, burn_in: Optional[float] = None,
                            budgets: Optional[ForcingBudgets] = None, z_values: Iterable[float] = (),
                            s: Optional[Spectrum] = None, good: Optional[dict] = None,
                            config_hash: Optional[str] = None) -> StationarySummary:
        """
        Stationary means of U, V, T and U − V after burn-in.

        Args:
            rec (PathRecorder): Recorded run.
            burn_in (float): Overrides the recorder's burn-in when given.
            budgets (ForcingBudgets): Needed for the exponential checks.
            z_values: Exponents for the V-family exponential check.
            s (Spectrum), good (dict): Spectrum and {u_min, u_max, eta} for the untamed fraction.

        Raises:
            TooShortException: Fewer than 64 samples after burn-in.
        """
        cut = rec.burn_in if burn_in is None else float(burn_in)
        keep = rec.times >= cut
        n_samples = int(np.count_nonzero(keep))
        if n_samples < MIN_SAMPLES:
            logger.warning(f"Serie corta tras el burn-in: {n_samples} muestras")
            raise TooShortException()
        u, v, t_obs = rec.u[keep], rec.v[keep], rec.t_obs[keep]

        tau = StationaryService.integrated_autocorr_time(u)
        batch_length = n_samples // N_BATCHES
        warning = batch_length < BATCH_TO_IAT * tau
        if warning:
            log_event("autocorr_warning", logging.WARNING, batch_length=batch_length, tau_u=tau)

        exp_checks = []
        for z in z_values:
            estimate, bound = StationaryService.exponential_moment(u, v, t_obs, z, budgets, MomentFamily.V)
            exp_checks.append((float(z), estimate.value, bound, estimate.value <= bound + 3.0 * estimate.se))

        untamed = None
        if good is not None and s is not None and n_samples >= MIN_UNTAMED_SAMPLES:
            untamed = StationaryService.untamed_fraction(u, v, s, good["u_min"], good["u_max"], good["eta"])

        return StationarySummary(
            mean_u=StationaryService.batch_means(u),
            mean_v=StationaryService.batch_means(v),
            mean_t=StationaryService.batch_means(t_obs),
            mean_u_minus_v=StationaryService.batch_means(u - v),
            n_samples=n_samples,
            burn_in=cut,
            tau_u=tau,
            batch_length=batch_length,
            autocorr_warning=bool(warning),
            exp_moment_checks=exp_checks,
            untamed_fraction=untamed,
            config_hash=config_hash,
        )

    @staticmethod
    def thinning_stride(values) -> int:
        """Stride of 5 integrated autocorrelation times, at least 1."""
        return max(1, int(math.ceil(5.0 * StationaryService.integrated_autocorr_time(values))))
