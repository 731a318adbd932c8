"""
apps.experiments.services.checks
--------------------------------
Pass/fail checks of the stationary identities and bounds. Every report
carries the raw numbers (estimate, SE, bound, z) next to the verdict.
"""

import logging
import math
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from apps.effective.services import EffectiveService
from apps.experiments.enums import CheckName
from apps.experiments.services.stationary import StationaryService
from apps.experiments.services.reporting import Z_GATE, build_report, z_score
from apps.experiments.types import CheckReport, StationarySummary, digest_arrays
from apps.polytope.types import QSource
from apps.simulation.services import SimulationService
from apps.simulation.types import PathRecorder, SimConfig
from apps.spectrum.enums import MomentFamily
from apps.spectrum.services import BoundService, GeneratorCalculus, ObservableService
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ForcingBudgets, ModelParams, Spectrum

logger = logging.getLogger(__name__)

CONSERVATION_TOL = 1e-8
MIN_BIN_COUNT = 30
CONSISTENCY_PASS_FRACTION = 0.99
STABILITY_RANGE = (0.8, 1.25)
REGULARITY_FACTOR = 10.0


def _as_list(values):
    arr = np.asarray(values, dtype=float)
    return arr.tolist() if arr.ndim else float(arr)


class CheckService:

    @staticmethod
    def check_moment_identities(summary: StationarySummary, budgets: ForcingBudgets) -> CheckReport:
        """Pass iff 2Ê[U] = B₀ and 2Ê[T] = B₁, each within 3 SE."""
        estimate = [2.0 * summary.mean_u.value, 2.0 * summary.mean_t.value]
        se = [2.0 * summary.mean_u.se, 2.0 * summary.mean_t.se]
        bound = [budgets.b0, budgets.b1]
        z = z_score(np.subtract(estimate, bound), se)
        return build_report(
            CheckName.MOMENT_IDENTITIES,
            {"summary": summary, "budgets": budgets},
            estimate, se, bound, z.tolist(),
            bool(np.all(np.abs(z) <= Z_GATE)),
            {"observables": ["U", "T"], "n_samples": summary.n_samples, "autocorr_warning": summary.autocorr_warning},
        )

    @staticmethod
    def check_exponential_bound(u, v, t_obs, z: float, budgets: ForcingBudgets, family: MomentFamily,
                                rng: Optional[np.random.Generator] = None) -> CheckReport:
        """
        Empirical e^{zV}(1+U) (V family) or e^{zU}(1+T) (U family) against Φ.

        Raises:
            DivergentSeriesException: If z·B′ ≥ 1 for the chosen family.
        """
        estimate, bound = StationaryService.exponential_moment(u, v, t_obs, z, budgets, family, rng)
        return build_report(
            CheckName.EXPONENTIAL_BOUND,
            {"data": digest_arrays(u, v, t_obs), "z": z, "family": family, "budgets": budgets},
            estimate.value, estimate.se, bound, float(z_score(estimate.value - bound, estimate.se)),
            estimate.value <= bound + Z_GATE * estimate.se,
            {"family": family.value, "z_exponent": z, "n_samples": estimate.n},
        )

    @staticmethod
    def check_power_moments(u, v, t_obs, budgets: ForcingBudgets, m_max: int) -> CheckReport:
        """
        One-sided checks of E[U^m], E[T·U^m], E[V^m], E[U·V^m] against the
        product bounds, with 3 SE of slack.
        """
        u, v, t_obs = (np.asarray(a, dtype=float) for a in (u, v, t_obs))
        rows = []
        for family, plain, weighted in (
            (MomentFamily.U, lambda m: u ** m, lambda m: t_obs * u ** m),
            (MomentFamily.V, lambda m: v ** m, lambda m: u * v ** m),
        ):
            for m, bound_plain, bound_weighted in BoundService.power_moment_bounds(budgets, m_max, family):
                for kind, values, bound in (("plain", plain(m), bound_plain), ("weighted", weighted(m), bound_weighted)):
                    est = StationaryService.batch_means(values)
                    rows.append({
                        "family": family.value, "m": m, "kind": kind,
                        "estimate": est.value, "se": est.se, "bound": bound,
                        "z": float(z_score(est.value - bound, est.se)),
                        "pass": est.value <= bound + Z_GATE * est.se,
                    })
        frame = pd.DataFrame(rows)
        return build_report(
            CheckName.POWER_MOMENTS,
            {"data": digest_arrays(u, v, t_obs), "m_max": m_max, "budgets": budgets},
            frame["estimate"].tolist(), frame["se"].tolist(), frame["bound"].tolist(), frame["z"].tolist(),
            bool(frame["pass"].all()),
            {"rows": frame.to_dict(orient="records")},
        )

    @staticmethod
    def _identity(check: CheckName, values_by_monomial, payload: dict) -> CheckReport:
        estimates, ses = [], []
        for values in values_by_monomial:
            est = StationaryService.batch_means(values)
            estimates.append(est.value)
            ses.append(est.se)
        z = z_score(estimates, ses)
        return build_report(check, payload, estimates, ses, [0.0] * len(estimates), z.tolist(),
                            bool(np.all(np.abs(z) <= Z_GATE)), {"monomials": payload["monomials"]})

    @staticmethod
    def check_generator_identity(states, p: ModelParams, s: Spectrum, monomials: Sequence[Tuple[int, int]]) -> CheckReport:
        """Per monomial u^i v^j, Ê[L̃g] over stationary states must vanish within 3 SE."""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        budgets = BoundService.forcing_budgets(p, s)
        values = [GeneratorCalculus.generator_on_observables(states, i, j, p, s, budgets) for i, j in monomials]
        return CheckService._identity(
            CheckName.GENERATOR_IDENTITY, values,
            {"data": digest_arrays(states), "monomials": [list(m) for m in monomials], "params": p},
        )

    @staticmethod
    def check_effective_generator_identity(u, v, p: ModelParams, s: Spectrum, q_source: QSource,
                                           monomials: Sequence[Tuple[int, int]]) -> CheckReport:
        """Ê[Ãψ] over effective stationary samples, per monomial."""
        values = [EffectiveService.effective_generator(u, v, i, j, p, s, q_source) for i, j in monomials]
        return CheckService._identity(
            CheckName.EFFECTIVE_GENERATOR_IDENTITY, values,
            {"data": digest_arrays(u, v), "monomials": [list(m) for m in monomials], "params": p},
        )

    @staticmethod
    def check_gaussian_modes(states, p: ModelParams) -> CheckReport:
        """
        Per-mode second moment a(1+δ)/2 and excess kurtosis 0, each within 3
        batch-means SE. Only meaningful when the stationary law is Gaussian (δ≡0).
        """
        states = np.atleast_2d(np.asarray(states, dtype=float))
        second = StationaryService.batch_means(states ** 2)
        kurt = StationaryService.batch_statistic(states, lambda x: stats.kurtosis(x, axis=0, fisher=True))
        target = p.mode_variances
        z_second = z_score(second.value - target, second.se)
        z_kurt = z_score(kurt.value, kurt.se)
        passed = bool(np.all(np.abs(z_second) <= Z_GATE) and np.all(np.abs(z_kurt) <= Z_GATE))
        return build_report(
            CheckName.GAUSSIAN_MODES,
            {"data": digest_arrays(states), "params": p},
            _as_list(second.value), _as_list(second.se), target.tolist(), z_second.tolist(), passed,
            {"excess_kurtosis": _as_list(kurt.value), "kurtosis_se": _as_list(kurt.se), "kurtosis_z": z_kurt.tolist()},
        )

    @staticmethod
    def check_conditional_consistency(p: ModelParams, s: Spectrum, q_source: QSource, draws: int = 1_000_000,
                                      seed: int = 0, u_bins: int = 8, ratio_bins: int = 16) -> CheckReport:
        """
        Gaussian draws x ~ N(0, a/2·I) binned by (u, u/v): in each occupied bin
        the mean of x_ℓ² − q_ℓ(u, v) must vanish within 3 SE, for at least 99%
        of (bin, mode) cells.
        """
        rng = derive_stream(seed, 0)
        x = rng.standard_normal((draws, s.N)) * math.sqrt(0.5 * p.a)
        u, v, _ = ObservableService.observables_batch(x, s)
        residual = x ** 2 - q_source.q_batch(u, v)

        frame = pd.DataFrame(residual, columns=[f"mode_{l}" for l in range(s.N)])
        frame["u_bin"] = pd.qcut(u, u_bins, labels=False, duplicates="drop")
        frame["r_bin"] = pd.cut(u / v, np.linspace(1.0, s.lam_max, ratio_bins + 1), labels=False, include_lowest=True)
        grouped = frame.groupby(["u_bin", "r_bin"])
        counts = grouped.size()
        occupied = counts[counts >= MIN_BIN_COUNT].index
        means = grouped.mean().loc[occupied]
        ses = grouped.std(ddof=1).div(np.sqrt(counts), axis=0).loc[occupied]
        z = z_score(means.to_numpy(), ses.to_numpy())
        inside = np.abs(z) <= Z_GATE
        fraction = float(np.mean(inside))
        return build_report(
            CheckName.CONDITIONAL_CONSISTENCY,
            {"params": p, "spectrum": s.mu, "draws": draws, "seed": seed, "u_bins": u_bins, "ratio_bins": ratio_bins},
            fraction, None, CONSISTENCY_PASS_FRACTION, float(np.max(np.abs(z))) if z.size else None,
            fraction >= CONSISTENCY_PASS_FRACTION,
            {"occupied_bins": int(len(occupied)), "cells": int(inside.size), "a": p.a},
        )

    @staticmethod
    def check_conservation(rec: PathRecorder, tol: float = CONSERVATION_TOL) -> CheckReport:
        """Relative drift of U and V along a fast-only run."""
        drift_u = float(np.max(np.abs(rec.u - rec.u[0])) / rec.u[0])
        drift_v = float(np.max(np.abs(rec.v - rec.v[0])) / rec.v[0])
        return build_report(
            CheckName.CONSERVATION,
            {"data": digest_arrays(rec.u, rec.v), "tol": tol},
            [drift_u, drift_v], None, tol, None,
            max(drift_u, drift_v) <= tol,
            {"steps": len(rec) - 1, "stats": rec.stats.as_dict()},
        )

    @staticmethod
    def condensation_report(summary_eff: StationarySummary, budgets: ForcingBudgets, s: Spectrum) -> CheckReport:
        """
        Middle and loose condensation bounds for every ℓ₀ ∈ {3..N}, and the
        ε = ∞ comparison value B₀ − B₋₁.

        Pass iff 2Ê[U − V] ≤ min over ℓ₀ of the middle bound + 3 SE.
        """
        lam3 = float(s.lam[2])
        prefactor = lam3 / (lam3 - 1.0)
        spread = budgets.b1 - budgets.b0
        rows = []
        for l0 in range(3, s.N + 1):
            i0 = math.ceil(l0 / 2)
            head = spread / (float(s.lam[l0 - 1]) - 1.0)
            tail = math.fsum(budgets.b0 / (s.n - k) for k in range(1, i0 - 1))
            loose = head + prefactor * l0 / (s.N - l0) * budgets.b0 if l0 < s.N else math.inf
            rows.append({"l0": l0, "i0": i0, "middle": head + prefactor * tail, "loose": loose})
        best = min(row["middle"] for row in rows)
        gap = summary_eff.mean_u_minus_v.scaled(2.0)
        lam_f, lam_f_tilde = BoundService.effective_spectral_values(budgets)
        return build_report(
            CheckName.CONDENSATION,
            {"summary": summary_eff, "budgets": budgets, "spectrum": s.mu},
            gap.value, gap.se, best, float(z_score(gap.value - best, gap.se)),
            gap.value <= best + Z_GATE * gap.se,
            {
                "rows": rows,
                "middle_le_loose": all(row["middle"] <= row["loose"] for row in rows),
                "forcing_only_value": budgets.b0 - budgets.b_minus1,
                "lambda_f": lam_f,
                "lambda_f_tilde": lam_f_tilde,
            },
        )

    @staticmethod
    def time_regularity(rec: PathRecorder, lags: Iterable[float]) -> CheckReport:
        """
        Ê|U_{t+s} − U_s|⁴/t² and the same for V over a lag grid in model time.
        Passes iff the ratio at the smallest lag is within a factor 10 of the median.
        """
        tail = rec.stationary()
        dt = float(tail.times[1] - tail.times[0])
        table = []
        for lag in sorted(float(l) for l in lags):
            k = max(1, int(round(lag / dt)))
            if k >= len(tail):
                continue
            t = k * dt
            table.append({
                "lag": t,
                "u_ratio": float(np.mean(np.abs(tail.u[k:] - tail.u[:-k]) ** 4) / t ** 2),
                "v_ratio": float(np.mean(np.abs(tail.v[k:] - tail.v[:-k]) ** 4) / t ** 2),
            })
        frame = pd.DataFrame(table)
        passed = True
        for column in ("u_ratio", "v_ratio"):
            median = float(frame[column].median())
            first = float(frame[column].iloc[0])
            passed &= median / REGULARITY_FACTOR <= first <= median * REGULARITY_FACTOR
        constant = float(frame[["u_ratio", "v_ratio"]].to_numpy().max())
        return build_report(
            CheckName.TIME_REGULARITY,
            {"data": digest_arrays(tail.times, tail.u, tail.v), "lags": frame["lag"].tolist()},
            constant, None, None, None, passed,
            {"rows": frame.to_dict(orient="records")},
        )

    @staticmethod
    def forcing_only_reference(cfg: SimConfig, p: ModelParams, s: Spectrum) -> CheckReport:
        """ε = ∞ run: 2Ê[U − V] against B₀ − B₋₁ within 3 SE."""
        rec = SimulationService.simulate_forcing_only(cfg, p, s, derive_stream(cfg.seed, 0))
        summary = StationaryService.estimate_stationary(rec)
        budgets = BoundService.forcing_budgets(p, s)
        gap = summary.mean_u_minus_v.scaled(2.0)
        target = budgets.b0 - budgets.b_minus1
        z = float(z_score(gap.value - target, gap.se))
        return build_report(
            CheckName.FORCING_ONLY_REFERENCE,
            {"config": cfg, "params": p, "spectrum": s.mu},
            gap.value, gap.se, target, z, abs(z) <= Z_GATE,
            {"n_samples": summary.n_samples},
        )

    @staticmethod
    def boundary_moment_stability(u, v, alpha: float, beta: float, a: float, lam_max: float) -> CheckReport:
        """
        Ratios of first-half to full-sample means of (U−V)^{−α}, (λ_N·V − U)^{−β}
        and e^{V/(2a)}; each must lie in [0.8, 1.25]. Non-positive exponents are skipped.
        """
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        half = u.shape[0] // 2
        functionals = {"exp_v": np.exp(v / (2.0 * a))}
        if alpha > 0:
            functionals["lower"] = (u - v) ** (-alpha)
        if beta > 0:
            functionals["upper"] = (lam_max * v - u) ** (-beta)
        ratios = {name: float(np.mean(vals[:half]) / np.mean(vals)) for name, vals in functionals.items()}
        low, high = STABILITY_RANGE
        return build_report(
            CheckName.BOUNDARY_MOMENT_STABILITY,
            {"data": digest_arrays(u, v), "alpha": alpha, "beta": beta, "a": a},
            list(ratios.values()), None, list(STABILITY_RANGE), None,
            all(low <= r <= high for r in ratios.values()),
            {"ratios": ratios, "alpha": alpha, "beta": beta},
        )
