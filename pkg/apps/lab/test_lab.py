import io
import json

import numpy as np
import pandas as pd
import pytest
from django.conf import settings
from django.core.exceptions import ValidationError as DjangoValidationError
from django.core.management import call_command
from django.core.management.base import CommandError

from apps.experiments.enums import CheckName
from apps.experiments.types import CheckReport
from apps.lab.exceptions import ParseException
from apps.lab.services import ConfigService, LabService, ReportService
from apps.lab.types import RunResults
from apps.spectrum.services import BoundService

SHORT_SIM = {"t_end": 4.0, "burn_in": 1.0, "h": 0.05, "seed": 11}


def write_config(tmp_path, **blocks):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(blocks), encoding="utf-8")
    return path


def run(name, *args, **options):
    out = io.StringIO()
    call_command(name, *args, stdout=out, stderr=io.StringIO(), **options)
    return json.loads(out.getvalue())


def failing(name, **options):
    out = io.StringIO()
    with pytest.raises(CommandError):
        call_command(name, stdout=out, stderr=io.StringIO(), **options)
    return json.loads(out.getvalue())


def report(check, passed, gated=True):
    return CheckReport(check=check, inputs_hash="h", estimate=1.0, se=0.1, bound=1.0, z=0.0, passed=passed,
                       gated=gated)


# ── Configuración ──

def test_empty_document_gets_documented_defaults():
    cfg = ConfigService.parse_config("{}")
    s = cfg.spectrum.spectrum
    assert s.n == 4
    assert list(cfg.spectrum.wavevectors) == [(0, 1), (1, 0), (1, 1), (0, 2)]
    assert cfg.params.delta == [0.0] * 4
    assert (cfg.params.a, cfg.params.kappa, cfg.params.eps) == (1.0, 0.5, 0.5)
    assert cfg.sim.h == 0.05
    assert cfg.sim.seed == settings.LAB_DEFAULT_SIM["seed"]
    assert cfg.experiment.q_grid_size == settings.LAB_Q_GRID_SIZE
    assert cfg.experiment.eps_grid == [0.4, 0.1, 0.025]
    assert cfg.output.formats == ["csv", "json"]


def test_partial_blocks_are_merged_with_defaults():
    cfg = ConfigService.parse_config(json.dumps({"params": {"kappa": 0.25}, "sim": {"t_end": 10.0}}))
    assert cfg.params.kappa == 0.25
    assert cfg.params.eps == 0.5
    assert cfg.sim.t_end == 10.0
    assert cfg.sim.burn_in == settings.LAB_DEFAULT_SIM["burn_in"]


def test_positive_delta_is_rejected_with_its_range():
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"params": {"delta": [0.1, 0.0, 0.0, 0.0]}}))
    assert "(-1, 0]" in exc.value.message_dict["params.delta"][0]


def test_zero_kappa_is_rejected_with_its_range():
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"params": {"kappa": 0}}))
    assert "stirring strength" in exc.value.message_dict["params.kappa"][0]


def test_delta_length_must_match_the_pairs():
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"params": {"delta": [0.0, -0.5]}}))
    assert "4 values" in exc.value.message_dict["params.delta"][0]


def test_unknown_keys_are_rejected():
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"sim": {"stepsize": 0.1}}))
    assert "sim.stepsize" in exc.value.message_dict
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"plots": True}))
    assert "plots" in exc.value.message_dict


def test_spectrum_block_needs_exactly_one_source():
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"spectrum": {"aspect": 0.7, "mu": [1, 2, 3, 4]}}))
    assert "spectrum" in exc.value.message_dict
    with pytest.raises(DjangoValidationError):
        ConfigService.parse_config(json.dumps({"spectrum": {"aspect": 0.7}}))


def test_degenerate_spectrum_is_a_spectrum_error():
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"spectrum": {"mu": [1.0, 2.0, 2.0, 3.0]}}))
    assert "spectrum" in exc.value.message_dict


def test_explicit_spectrum_gets_zero_delta_of_its_size():
    cfg = ConfigService.parse_config(json.dumps({"spectrum": {"mu": [1.0, 1.7, 2.9, 4.2, 5.5]}}))
    assert cfg.params.delta == [0.0] * 5
    assert cfg.spectrum.spectrum.N == 10


def test_burn_in_must_precede_the_horizon():
    with pytest.raises(DjangoValidationError) as exc:
        ConfigService.parse_config(json.dumps({"sim": {"t_end": 10.0, "burn_in": 10.0}}))
    assert "burn_in" in exc.value.message_dict["sim"][0]


@pytest.mark.parametrize("text", ["{", "[1, 2]", "\"spectrum\""])
def test_malformed_documents_are_parse_errors(text):
    with pytest.raises(ParseException):
        ConfigService.parse_config(text)


def test_dumped_config_parses_back_to_itself():
    cfg = ConfigService.parse_config(json.dumps({
        "params": {"delta": [0.0, -0.3, -0.5, -0.7]},
        "sim": SHORT_SIM,
        "experiment": {"eps_grid": [0.5, 0.2, 0.1], "l0": [3, 5]},
    }))
    again = ConfigService.parse_config(ConfigService.dump_config(cfg))
    assert again.model_dump() == cfg.model_dump()
    assert ConfigService.dump_config(again) == ConfigService.dump_config(cfg)
    assert ConfigService.config_hash(again) == ConfigService.config_hash(cfg)


def test_seed_override_is_validated():
    cfg = ConfigService.parse_config("{}")
    assert ConfigService.with_seed(cfg, 99).sim.seed == 99
    assert ConfigService.with_seed(cfg, None) is cfg
    with pytest.raises(DjangoValidationError):
        ConfigService.with_seed(cfg, -1)


# ── Emisión de artefactos ──

def test_empty_results_give_an_empty_valid_manifest(tmp_path):
    manifest = ReportService.emit_report(RunResults(command="spectrum"), tmp_path)
    assert manifest["artifacts"] == []
    assert manifest["pass"] is True
    on_disk = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert on_disk == manifest
    assert on_disk["code_version"] == settings.LAB_CODE_VERSION


def test_same_results_emitted_twice_have_identical_hashes(tmp_path):
    def results():
        return RunResults(
            command="qtable",
            tables={"values": pd.DataFrame({"x": [0.1, 1.0 / 3.0], "n": [1, 2]})},
            documents={"meta": {"b": 2.0, "a": [1, np.float64(0.5)], "bad": float("nan")}},
            reports=[report(CheckName.CONSERVATION, True)],
        )

    first = ReportService.emit_report(results(), tmp_path / "one")
    second = ReportService.emit_report(results(), tmp_path / "two")
    assert first["artifacts"] == second["artifacts"]
    assert [a["name"] for a in first["artifacts"]] == ["checks.json", "meta.json", "values.csv"]


def test_csv_numbers_carry_seventeen_digits(tmp_path):
    results = RunResults(command="qtable", tables={"values": pd.DataFrame({"x": [0.1]})})
    ReportService.emit_report(results, tmp_path)
    text = (tmp_path / "values.csv").read_bytes()
    assert text == b"x\n0.10000000000000001\n"


def test_json_documents_are_sorted_and_newline_terminated(tmp_path):
    results = RunResults(command="spectrum", documents={"meta": {"b": 1, "a": float("inf")}})
    ReportService.emit_report(results, tmp_path)
    text = (tmp_path / "meta.json").read_text(encoding="utf-8")
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": None, "b": 1}


def test_failed_gated_check_sets_top_level_fail(tmp_path):
    results = RunResults(command="check", reports=[
        report(CheckName.MOMENT_IDENTITIES, True),
        report(CheckName.CONSERVATION, False),
    ])
    manifest = ReportService.emit_report(results, tmp_path)
    assert manifest["pass"] is False
    assert LabService.exit_status(manifest) == 1
    assert {c["check"]: c["pass"] for c in manifest["checks"]} == {
        "moment_identities": True, "conservation": False,
    }


def test_ungated_failure_does_not_fail_the_run(tmp_path):
    results = RunResults(command="check", reports=[report(CheckName.TIME_REGULARITY, False, gated=False)])
    manifest = ReportService.emit_report(results, tmp_path)
    assert manifest["pass"] is True
    assert LabService.exit_status(manifest) == 0


def test_csv_format_can_be_switched_off(tmp_path):
    results = RunResults(command="qtable", tables={"values": pd.DataFrame({"x": [1.0]})}, documents={"meta": {}})
    manifest = ReportService.emit_report(results, tmp_path, formats=["json"])
    assert [a["name"] for a in manifest["artifacts"]] == ["meta.json"]


# ── Comandos ──

def test_spectrum_command_writes_budgets(lab_output, torus_spectrum, params):
    summary = run("spectrum")
    assert summary["pass"] is True
    assert "spectrum.json" in summary["artifacts"]
    doc = json.loads((lab_output / "spectrum" / "spectrum.json").read_text(encoding="utf-8"))
    budgets = BoundService.forcing_budgets(params, torus_spectrum)
    assert doc["budgets"]["b0"] == pytest.approx(budgets.b0, rel=1e-15)
    assert doc["source"] == "torus"
    assert doc["lambda_f"] >= doc["lambda_f_tilde"]
    manifest = json.loads((lab_output / "spectrum" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == settings.LAB_DEFAULT_SIM["seed"]


def test_drift_table_lists_ordered_entries(lab_output):
    run("drift_table")
    doc = json.loads((lab_output / "drift-table" / "drift_table.json").read_text(encoding="utf-8"))
    assert doc["entries"]
    assert all(entry["a"] < entry["b"] for entry in doc["entries"])
    assert [m["kind"] for m in doc["basis"][:2]] == ["cos", "sin"]


def test_drift_table_needs_wavevectors(lab_output, tmp_path):
    path = write_config(tmp_path, spectrum={"mu": [1.0, 1.7, 2.9, 4.2]})
    payload = failing("drift_table", config=path)
    assert payload["pass"] is False
    assert payload["error"] == "NotTorusSourcedException"


def test_drift_table_uses_synthetic_triads_for_explicit_spectra(lab_output, tmp_path):
    path = write_config(tmp_path, spectrum={"mu": [1.0, 1.7, 2.9, 4.2], "synthetic_triads": {"seed": 3}})
    run("drift_table", config=path)
    doc = json.loads((lab_output / "drift-table" / "drift_table.json").read_text(encoding="utf-8"))
    assert doc["source"] == "synthetic"
    assert doc["basis"] is None


def test_qtable_columns_and_exact_stderr(lab_output):
    run("qtable", ratios=9)
    frame = pd.read_csv(lab_output / "qtable" / "qtable.csv")
    expected = (["ratio", "sector"] + [f"q_{l}" for l in range(1, 9)] + ["volume", "method"]
                + [f"stderr_{l}" for l in range(1, 9)])
    assert list(frame.columns) == expected
    assert len(frame) == 9
    assert frame["stderr_1"].isna().all()
    assert (frame["method"] == "exact").all()
    # Σq = u on the ray (r, 1)
    q = frame[[f"q_{l}" for l in range(1, 9)]].to_numpy()
    np.testing.assert_allclose(q.sum(axis=1), frame["ratio"], rtol=1e-9)


@pytest.mark.parametrize("mode", ["full", "effective"])
def test_simulate_is_byte_reproducible(tmp_path, mode):
    path = write_config(tmp_path, sim=SHORT_SIM, experiment={"q_grid_size": 33})
    first = run("simulate", config=path, mode=mode, out=tmp_path / "a")
    second = run("simulate", config=path, mode=mode, out=tmp_path / "b")
    assert first["config_hash"] == second["config_hash"]
    one = (tmp_path / "a" / "simulate" / "observables.csv").read_bytes()
    two = (tmp_path / "b" / "simulate" / "observables.csv").read_bytes()
    assert one == two
    manifest_a = json.loads((tmp_path / "a" / "simulate" / "manifest.json").read_text(encoding="utf-8"))
    manifest_b = json.loads((tmp_path / "b" / "simulate" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest_a["artifacts"] == manifest_b["artifacts"]


def test_simulate_seed_flag_changes_the_path(tmp_path):
    path = write_config(tmp_path, sim=SHORT_SIM)
    run("simulate", config=path, mode="forcing", out=tmp_path / "a")
    run("simulate", config=path, mode="forcing", seed=12, out=tmp_path / "b")
    one = pd.read_csv(tmp_path / "a" / "simulate" / "observables.csv")
    two = pd.read_csv(tmp_path / "b" / "simulate" / "observables.csv")
    assert not np.array_equal(one["U"], two["U"])


def test_fast_mode_keeps_both_invariants(lab_output, tmp_path):
    path = write_config(tmp_path, sim=SHORT_SIM)
    run("simulate", config=path, mode="fast")
    frame = pd.read_csv(lab_output / "simulate" / "observables.csv")
    assert list(frame.columns) == ["t", "U", "V", "T", "ratio", "good_flag"]
    np.testing.assert_allclose(frame["U"], frame["U"].iloc[0], rtol=1e-8)
    np.testing.assert_allclose(frame["V"], frame["V"].iloc[0], rtol=1e-8)


def test_effective_mode_flags_reflections(lab_output, tmp_path):
    path = write_config(tmp_path, sim=SHORT_SIM, experiment={"q_grid_size": 33})
    run("simulate", config=path, mode="effective")
    frame = pd.read_csv(lab_output / "simulate" / "observables.csv")
    assert frame.columns[-1] == "reflected_flag"
    assert np.all(frame["U"] >= frame["V"])


def test_inviscid_with_a_single_eps_fails_before_running(lab_output):
    payload = failing("inviscid", eps=[0.1])
    assert payload["error"] == "InvalidSweepException"
    assert not (lab_output / "inviscid").exists()


def test_invalid_config_file_fails_with_field_paths(lab_output, tmp_path):
    path = write_config(tmp_path, params={"kappa": 0})
    payload = failing("spectrum", config=path)
    assert payload["error"] == "ValidationError"
    assert "params.kappa" in payload["fields"]


def test_missing_config_file_is_a_parse_error(lab_output, tmp_path):
    payload = failing("spectrum", config=tmp_path / "missing.json")
    assert payload["error"] == "ParseException"


def test_equilibrate_reports_per_time_deviation(lab_output, tmp_path):
    path = write_config(tmp_path, sim={"h": 0.05, "seed": 5}, experiment={"q_grid_size": 65, "members": 2})
    cfg = ConfigService.load_config(path)
    results = LabService.run_equilibrate(cfg, t_grid=[0.0, 0.1, 0.2])
    frame = results.tables["equilibration"]
    assert frame["t"].tolist() == [0.0, 0.1, 0.2]
    assert results.reports[0].check is CheckName.EQUILIBRATION


def test_equilibrate_rejects_a_state_too_close_to_an_eigenvalue(lab_output, tmp_path):
    # u/v = 2 sits about 0.04 from λ ≈ 2.04 on the default torus
    path = write_config(tmp_path, experiment={"w0": [2.0, 1.0], "members": 2, "q_grid_size": 33})
    payload = failing("equilibrate", config=path, eta=0.5, t_grid=[0.0, 0.1])
    assert payload["error"] == "NotGoodStateException"


@pytest.mark.slow
def test_check_on_default_config_passes(lab_output):
    summary = run("check", threads=2)
    assert summary["pass"] is True
    verdicts = {c["check"]: c["pass"] for c in summary["checks"]}
    assert verdicts["moment_identities"] and verdicts["conservation"]


@pytest.mark.slow
def test_condensation_on_default_config_passes(lab_output):
    summary = run("condensation")
    assert summary["pass"] is True
    frame = pd.read_csv(lab_output / "condensation" / "condensation.csv")
    assert (frame["middle"] <= frame["loose"]).all()
