"""
apps.lab.services.pipelines
---------------------------
One pipeline per lab command. Each turns a validated RunConfig into a
RunResults (tables, documents, check reports); `dispatch` times the run,
emits the artifacts and returns the manifest.
"""

import dataclasses
import logging
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from django.conf import settings

from apps.effective.services import EffectiveService
from apps.experiments.enums import CheckName
from apps.experiments.exceptions import TooShortException
from apps.experiments.services import CheckService, EquilibrationService, StationaryService, SweepService
from apps.experiments.services.reporting import build_report
from apps.fields.services import TriadService
from apps.lab.enums import LabCommand
from apps.lab.exceptions import UnknownCommandException
from apps.lab.schemas import RunConfig
from apps.lab.services.config import ConfigService
from apps.lab.services.reports import ReportService
from apps.lab.types import RunResults
from apps.polytope.enums import QMethod
from apps.polytope.services import QService
from apps.simulation.enums import SimMode
from apps.simulation.services import SimulationService
from apps.simulation.writers import observable_frame
from apps.spectrum.enums import MomentFamily
from apps.spectrum.services import BoundService, ObservableService
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ConePoint

logger = logging.getLogger(__name__)

# stream keys below the run seed
TRAJECTORY_STREAM = 0
CONSERVATION_STREAM = 1
CONSERVATION_START_STREAM = 2


def _good(cfg: RunConfig) -> dict:
    exp = cfg.experiment
    return {"u_min": exp.u_min, "u_max": exp.u_max, "eta": exp.eta}


def _summary_or_none(rec, **kwargs):
    try:
        return StationaryService.estimate_stationary(rec, **kwargs)
    except TooShortException:
        logger.warning("Serie demasiado corta para el resumen estacionario; se omite")
        return None


def _sde_frame(rec, cfg: RunConfig) -> pd.DataFrame:
    s = cfg.spectrum.spectrum
    good = ObservableService.good_mask(rec.u, rec.v, s, **_good(cfg))
    return observable_frame(rec, good, "good_flag")


class LabService:

    @staticmethod
    def run_spectrum(cfg: RunConfig, **_options) -> RunResults:
        """Eigenvalue ladder, forcing budgets, effective spectral values and admissible exponents."""
        s = cfg.spectrum.spectrum
        p = ConfigService.build_params(cfg)
        budgets = BoundService.forcing_budgets(p, s)
        lam_f, lam_f_tilde = BoundService.effective_spectral_values(budgets)
        exponents = EffectiveService.admissible_exponents(p, s)

        table = {"index": np.arange(s.N), "pair": np.arange(s.N) // 2, "lambda": s.lam, "delta": p.delta_modes}
        if s.torus is not None:
            table["kx"] = np.repeat([k[0] for k in s.torus.wavevectors], 2)
            table["ky"] = np.repeat([k[1] for k in s.torus.wavevectors], 2)
        torus = None
        if s.torus is not None:
            torus = {
                "aspect": s.torus.aspect,
                "wavevectors": [list(k) for k in s.torus.wavevectors],
                "raw_eigenvalues": list(s.torus.raw_eigenvalues),
            }
        return RunResults(
            command=LabCommand.SPECTRUM.value,
            tables={"spectrum": pd.DataFrame(table)},
            documents={"spectrum": {
                "source": s.source.name.lower(),
                "n": s.n,
                "N": s.N,
                "mu": s.mu,
                "torus": torus,
                "budgets": dataclasses.asdict(budgets),
                "lambda_f": lam_f,
                "lambda_f_tilde": lam_f_tilde,
                "admissible_exponents": {"alpha_max": exponents.alpha_max, "beta_max": exponents.beta_max},
            }},
        )

    @staticmethod
    def run_drift_table(cfg: RunConfig, **_options) -> RunResults:
        """
        Triad tensor as {a, b, c, t} entries with a < b, plus the mode basis.

        Raises:
            NotTorusSourcedException: Explicit spectrum without a synthetic_triads block.
        """
        s = cfg.spectrum.spectrum
        synthetic = cfg.spectrum.synthetic_triads
        if synthetic is not None:
            triads = TriadService.synthetic_triads(synthetic.seed, synthetic.density, synthetic.magnitude, s)
        else:
            triads = TriadService.galerkin_triads(s)
        basis = None
        if triads.mode_basis is not None:
            basis = [{"index": m.index, "wavevector": list(m.wavevector), "kind": m.kind.value}
                     for m in triads.mode_basis]
        return RunResults(
            command=LabCommand.DRIFT_TABLE.value,
            documents={"drift_table": {
                "N": triads.N,
                "source": triads.source.name.lower(),
                "basis": basis,
                "entries": [{"a": a, "b": b, "c": c, "t": t} for a, b, c, t in triads.entries],
            }},
        )

    @staticmethod
    def run_qtable(cfg: RunConfig, ratios: Optional[int] = None, **_options) -> RunResults:
        """q(r, 1) on an evenly spaced ratio grid; stderr columns stay empty for the exact path."""
        s = cfg.spectrum.spectrum
        exp = cfg.experiment
        size = int(ratios) if ratios else exp.q_grid_size
        method = QMethod.EXACT if exp.q_method == "exact" else QMethod.MONTE_CARLO
        table = QService.q_ray_table(s, QService.default_ratios(s, size), method, exp.q_samples, seed=cfg.sim.seed)

        frame = pd.DataFrame({"ratio": table.ratios, "sector": table.sectors})
        for l in range(s.N):
            frame[f"q_{l + 1}"] = table.rows[:, l]
        frame["volume"] = table.volumes
        frame["method"] = method.name.lower()
        for l in range(s.N):
            frame[f"stderr_{l + 1}"] = table.std_errors[:, l] if table.std_errors is not None else np.nan
        return RunResults(command=LabCommand.QTABLE.value, tables={"qtable": frame})

    @staticmethod
    def run_simulate(cfg: RunConfig, mode: Optional[str] = None, **_options) -> RunResults:
        """One trajectory of the requested mode; observables CSV plus a run summary."""
        s = cfg.spectrum.spectrum
        p = ConfigService.build_params(cfg)
        sim_mode = SimMode(mode or cfg.sim.mode)
        keep = cfg.sim.keep_states or cfg.output.snapshot
        run_cfg = cfg.sim.to_config(mode=sim_mode, keep_states=keep)
        rng = derive_stream(run_cfg.seed, TRAJECTORY_STREAM)

        if sim_mode is SimMode.EFFECTIVE:
            rec = EffectiveService.simulate_effective(run_cfg, p, s, ConfigService.build_q_source(cfg), rng=rng)
            frame = observable_frame(rec, flag_name="reflected_flag")
        else:
            if sim_mode is SimMode.FORCING_ONLY:
                rec = SimulationService.simulate_forcing_only(run_cfg, p, s, rng)
            elif sim_mode is SimMode.REFERENCE:
                rec = SimulationService.simulate_reference(run_cfg, ConfigService.build_system(cfg, p),
                                                           cfg.experiment.scheme, rng=rng)
            else:
                rec = SimulationService.simulate_full(run_cfg, ConfigService.build_system(cfg, p), rng=rng)
            frame = _sde_frame(rec, cfg)

        summary = _summary_or_none(rec)
        results = RunResults(
            command=LabCommand.SIMULATE.value,
            tables={"observables": frame},
            documents={"run_summary": {
                "mode": sim_mode.value,
                "recorder": rec.summary(),
                "stationary": summary,
            }},
        )
        if cfg.output.snapshot and rec.states is not None:
            results.snapshots["states"] = rec
        return results

    @staticmethod
    def run_check(cfg: RunConfig, **_options) -> RunResults:
        """
        Full-system acceptance checks on one stationary run: moment identities,
        exponential and power-moment bounds, generator identity, Gaussian
        modes (δ ≡ 0 only), conditional consistency of q, fast-flow
        conservation, time regularity and the ε = ∞ reference.
        """
        s = cfg.spectrum.spectrum
        exp = cfg.experiment
        p = ConfigService.build_params(cfg)
        budgets = BoundService.forcing_budgets(p, s)
        system = ConfigService.build_system(cfg, p)
        run_cfg = cfg.sim.to_config(mode=SimMode.FULL, keep_states=True)

        rec = SimulationService.simulate_full(run_cfg, system, rng=derive_stream(run_cfg.seed, TRAJECTORY_STREAM))
        z_values = exp.z_values if exp.z_values is not None else [0.5 / budgets.b0_prime]
        summary = StationaryService.estimate_stationary(rec, budgets=budgets, z_values=z_values, s=s, good=_good(cfg),
                                                        config_hash=ConfigService.config_hash(cfg))
        tail = rec.stationary()

        reports = [CheckService.check_moment_identities(summary, budgets)]
        for z in z_values:
            reports.append(CheckService.check_exponential_bound(tail.u, tail.v, tail.t_obs, z, budgets, MomentFamily.V))
        reports.append(CheckService.check_exponential_bound(tail.u, tail.v, tail.t_obs, 0.5 / budgets.b1_prime,
                                                            budgets, MomentFamily.U))
        reports.append(CheckService.check_power_moments(tail.u, tail.v, tail.t_obs, budgets, exp.m_max))
        reports.append(CheckService.check_generator_identity(tail.states, p, s, exp.monomials))
        if not np.any(p.delta):
            reports.append(CheckService.check_gaussian_modes(tail.states, p))
        reports.append(CheckService.check_conditional_consistency(p, s, ConfigService.build_q_source(cfg),
                                                                  draws=exp.consistency_draws, seed=run_cfg.seed))

        fast_cfg = run_cfg.with_updates(mode=SimMode.FAST_ONLY, t_end=exp.conservation_steps * run_cfg.h,
                                        burn_in=0.0, keep_states=False, record_stride=1)
        x0 = SimulationService.draw_stationary_gaussian(p, s, derive_stream(run_cfg.seed, CONSERVATION_START_STREAM))
        fast_rec = SimulationService.simulate_fast_only(x0, fast_cfg.t_end, fast_cfg, system,
                                                        derive_stream(run_cfg.seed, CONSERVATION_STREAM))
        reports.append(CheckService.check_conservation(fast_rec))

        reports.append(dataclasses.replace(CheckService.time_regularity(rec, exp.lags), gated=False))
        reports.append(CheckService.forcing_only_reference(run_cfg.with_updates(mode=SimMode.FORCING_ONLY,
                                                                                keep_states=False), p, s))
        if summary.untamed_fraction is not None:
            fraction = summary.untamed_fraction
            reports.append(build_report(
                CheckName.UNTAMED_FRACTION, {"summary": summary, "good": _good(cfg)},
                fraction.value, fraction.se, None, None, True, _good(cfg), gated=False,
            ))

        return RunResults(
            command=LabCommand.CHECK.value,
            tables={"observables": _sde_frame(rec, cfg)},
            documents={"stationary_summary": summary},
            reports=reports,
        )

    @staticmethod
    def run_inviscid(cfg: RunConfig, eps: Optional[Sequence[float]] = None, threads: int = 1,
                     **_options) -> RunResults:
        """
        Raises:
            InvalidSweepException: For fewer than three ε values or an increasing grid.
        """
        exp = cfg.experiment
        grid = SweepService.validate_grid(list(eps) if eps else exp.eps_grid)
        s = cfg.spectrum.spectrum
        p = ConfigService.build_params(cfg)
        report = SweepService.inviscid_sweep(grid, cfg.sim.to_config(), p, s, ConfigService.build_q_source(cfg),
                                             kappa_probe=exp.kappa_probe, probe_eps=exp.probe_eps, threads=threads)
        return RunResults(
            command=LabCommand.INVISCID.value,
            tables={"inviscid": report.to_frame()},
            documents={"inviscid": {
                "monotone": report.monotone_flag,
                "gap_monotone": report.gap_monotone_flag,
                "sample_sizes": report.sample_sizes,
                "kappa_probe": report.kappa_probe,
            }},
            reports=[report.as_report()],
        )

    @staticmethod
    def run_condensation(cfg: RunConfig, **_options) -> RunResults:
        """
        Stationary averaged diffusion: condensation bounds, its own moment and
        generator identities and the boundary-moment stability.
        """
        s = cfg.spectrum.spectrum
        exp = cfg.experiment
        p = ConfigService.build_params(cfg)
        budgets = BoundService.forcing_budgets(p, s)
        q_source = ConfigService.build_q_source(cfg)
        run_cfg = cfg.sim.to_config(mode=SimMode.EFFECTIVE)
        rec = EffectiveService.simulate_effective(run_cfg, p, s, q_source,
                                                  rng=derive_stream(run_cfg.seed, TRAJECTORY_STREAM))
        summary = StationaryService.estimate_stationary(rec, config_hash=ConfigService.config_hash(cfg))
        tail = rec.stationary()
        exponents = EffectiveService.admissible_exponents(p, s)

        condensation = CheckService.condensation_report(summary, budgets, s)
        rows = pd.DataFrame(condensation.details["rows"])
        if exp.l0 is not None:
            rows = rows[rows["l0"].isin(exp.l0)]
        reports = [
            condensation,
            CheckService.check_moment_identities(summary, budgets),
            CheckService.check_effective_generator_identity(tail.u, tail.v, p, s, q_source, exp.monomials),
            CheckService.boundary_moment_stability(tail.u, tail.v, exponents.alpha_max, exponents.beta_max, p.a,
                                                   s.lam_max),
        ]
        return RunResults(
            command=LabCommand.CONDENSATION.value,
            tables={"condensation": rows.reset_index(drop=True),
                    "effective_observables": observable_frame(rec, flag_name="reflected_flag")},
            documents={"effective_summary": {
                "stationary": summary,
                "reflected_fraction": float(np.mean(rec.flags[1:])) if len(rec) > 1 else 0.0,
                "admissible_exponents": {"alpha_max": exponents.alpha_max, "beta_max": exponents.beta_max},
                "integrator": rec.stats.as_dict(),
            }},
            reports=reports,
        )

    @staticmethod
    def run_equilibrate(cfg: RunConfig, eta: Optional[float] = None, t_grid: Optional[Sequence[float]] = None,
                        threads: int = 1, **_options) -> RunResults:
        """
        Raises:
            NotGoodStateException: If the centroid state over w0 is not good for eta.
        """
        s = cfg.spectrum.spectrum
        exp = cfg.experiment
        p = ConfigService.build_params(cfg)
        system = ConfigService.build_system(cfg, p)
        x0 = EquilibrationService.centroid_state(ConePoint(*exp.w0), s)
        report = EquilibrationService.equilibration_test(
            x0, list(t_grid) if t_grid else exp.t_grid, cfg.sim.to_config(mode=SimMode.FAST_ONLY), system,
            ConfigService.build_q_source(cfg), members=exp.members, u_min=exp.u_min, u_max=exp.u_max,
            eta=exp.eta if eta is None else eta, threads=threads,
        )
        frame = pd.DataFrame({
            "t": report.details["t_grid"],
            "max_rel_deviation": report.estimate,
            "max_abs_deviation": report.details["max_abs_deviation"],
        })
        return RunResults(command=LabCommand.EQUILIBRATE.value, tables={"equilibration": frame}, reports=[report])

    @staticmethod
    def output_dir(cfg: RunConfig, command: LabCommand, out: Optional[Path] = None) -> Path:
        """--out, then output.directory, then LAB_OUTPUT_DIR; one subdirectory per command."""
        base = out or cfg.output.directory or settings.LAB_OUTPUT_DIR
        return Path(base) / command.value

    @staticmethod
    def dispatch(command, cfg: RunConfig, out: Optional[Path] = None, threads: Optional[int] = None,
                 **options) -> dict:
        """
        Run one command and emit its artifacts.

        Returns:
            dict: The manifest; manifest["pass"] is the exit criterion.

        Raises:
            UnknownCommandException: For a name outside LabCommand.
        """
        try:
            command = LabCommand(command)
        except ValueError as exc:
            raise UnknownCommandException() from exc
        threads = int(threads if threads is not None else settings.LAB_THREADS)
        logger.info(f"Comando {command.value}: semilla {cfg.sim.seed}, hilos {threads}")

        started = time.perf_counter()
        results = PIPELINES[command](cfg, threads=threads, **options)
        results.wall_time = time.perf_counter() - started
        results.config_hash = ConfigService.config_hash(cfg)
        results.seed = cfg.sim.seed
        results.documents["config"] = cfg.model_dump(mode="json")
        return ReportService.emit_report(results, LabService.output_dir(cfg, command, out), cfg.output.formats)

    @staticmethod
    def exit_status(manifest: dict) -> int:
        return 0 if manifest.get("pass") else 1


PIPELINES = {
    LabCommand.SPECTRUM: LabService.run_spectrum,
    LabCommand.DRIFT_TABLE: LabService.run_drift_table,
    LabCommand.QTABLE: LabService.run_qtable,
    LabCommand.SIMULATE: LabService.run_simulate,
    LabCommand.CHECK: LabService.run_check,
    LabCommand.INVISCID: LabService.run_inviscid,
    LabCommand.CONDENSATION: LabService.run_condensation,
    LabCommand.EQUILIBRATE: LabService.run_equilibrate,
}
