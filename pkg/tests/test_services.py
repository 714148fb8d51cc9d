import json
from pathlib import Path

import numpy as np
import pytest

from riemannwave.core.config import load_run_config, settings, validate_run_config
from riemannwave.core.exceptions import EXIT_CONSTRAINT, EXIT_OK
from riemannwave.numerics import spectral
from riemannwave.numerics.energy import series
from riemannwave.schemas.report import SweepMember
from riemannwave.services import output
from riemannwave.services.converge import run_convergence
from riemannwave.services.runner import initial_state, resolve_steps, run_simulation
from riemannwave.services.sweep import fit_slopes, ladder, run_sweep
from riemannwave.services.verification import REGISTRY, run_verification
from riemannwave.utils.stencils import max_abs_rate

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def make_config(epsilon=0.01, T_final=0.1, dt=0.025, max_j=1, **sections):
    data = {
        "grid": {"N": 32},
        "physics": {"epsilon": epsilon},
        "stepping": {"dt": dt, "T_final": T_final},
        "diagnostics": {"max_j": max_j},
    }
    for name, values in sections.items():
        data.setdefault(name, {}).update(values)
    return validate_run_config(data)


def test_resolve_steps_hits_t_final():
    config = make_config(T_final=0.1, dt=0.03)
    dt, n = resolve_steps(config, initial_state(config))
    assert n == 4
    assert dt == pytest.approx(0.025)
    assert resolve_steps(make_config(T_final=0.0), initial_state(config))[1] == 0


def test_flat_run_writes_zero_energies(tmp_path):
    result = run_simulation(make_config(epsilon=0.0), out_dir=tmp_path / "flat")
    s = result.summary
    assert s.exit_code == EXIT_OK
    assert s.status == "ok"
    assert s.reports == 5
    rows = output.read_report_rows(tmp_path / "flat" / output.CSV_NAME)
    assert len(rows) == 5
    for row in rows:
        assert row["E_0"] == 0 and row["frak_1"] == 0 and row["cal_1"] == 0
        assert row["E_2"] is None
    summary = json.loads((tmp_path / "flat" / output.SUMMARY_NAME).read_text())
    assert summary["max_rate_E"] == [0.0, 0.0]
    with np.load(tmp_path / "flat" / output.STATE_NAME) as saved:
        assert int(saved["N"]) == 32
        assert saved["t"] == pytest.approx(0.1)


def test_single_mode_run(tmp_path):
    config = make_config(epsilon=0.01, output={"formats": ["json"]})
    result = run_simulation(config, out_dir=tmp_path / "mode")
    s = result.summary
    assert s.exit_code == EXIT_OK
    assert s.norm_L_initial == pytest.approx(0.01, rel=1e-8)
    assert s.norm_L_max < 0.02
    assert s.min_a1 >= 1 - 1e-12
    assert not (tmp_path / "mode" / output.CSV_NAME).exists()
    assert (tmp_path / "mode" / output.SUMMARY_NAME).exists()


def test_steep_initial_data_fails_cleanly(tmp_path):
    result = run_simulation(make_config(epsilon=20.0), out_dir=tmp_path / "steep")
    assert result.summary.exit_code == 1
    assert result.summary.reports == 0
    assert result.final_state is None
    assert not (tmp_path / "steep" / output.STATE_NAME).exists()


def test_constraint_breach(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "residual_tolerance", -1.0)
    result = run_simulation(make_config(), out_dir=tmp_path / "breach", write=False)
    assert result.summary.exit_code == EXIT_CONSTRAINT
    assert result.summary.status == "constraint_breach"
    assert result.summary.reports == 1


def test_irregular_final_slice_is_left_out_of_rates():
    # 11 steps reported every 2: the last interval is a single step
    config = make_config(T_final=0.275, dt=0.025, max_j=0, diagnostics={"report_every": 2})
    result = run_simulation(config, write=False)
    assert [round(r.t, 6) for r in result.reports[-2:]] == [0.25, 0.275]
    regular = result.reports[:-1]
    assert result.summary.max_rate_E == pytest.approx([max_abs_rate(series(regular, "E", 0), 0.05)], rel=1e-9)
    assert result.summary.max_rate_frak == pytest.approx([max_abs_rate(series(regular, "frak", 0), 0.05)], rel=1e-9)


def test_ladder():
    assert ladder(0.08, 0.5, 3) == pytest.approx([0.08, 0.04, 0.02])
    with pytest.raises(ValueError):
        ladder(0.08, 0.5, 2)
    with pytest.raises(ValueError):
        ladder(0.08, 2.0, 3)


def test_slope_fit_on_synthetic_rates():
    members = [
        SweepMember(
            epsilon=eps,
            period_factor=1,
            exit_code=0,
            status="ok",
            max_rate_E=[eps**4],
            max_rate_frak=[3 * eps**5],
            max_rate_cal=[None],
            max_cal_minus_E=[0.0],
        )
        for eps in (0.08, 0.04, 0.02)
    ]
    members.append(SweepMember(epsilon=0.01, period_factor=1, exit_code=2, status="failed"))
    fits = {(f.quantity, f.j): f for f in fit_slopes(members, [1], 0)}
    assert fits[("E", 0)].slope == pytest.approx(4.0)
    assert fits[("frak", 0)].slope == pytest.approx(5.0)
    assert fits[("frak", 0)].n_points == 3
    assert fits[("cal", 0)].slope is None


def test_small_sweep(tmp_path):
    config = make_config(T_final=0.2, dt=0.025, max_j=0)
    result = run_sweep(config, 0.02, 0.5, 3, period_factors=(1, 2), workers=1, out_dir=tmp_path)
    assert result.exit_code == EXIT_OK
    assert len(result.members) == 6
    assert result.slope("E", 0, 2).n_points == 3
    assert (tmp_path / "sweep.json").exists()
    assert (tmp_path / "sweep.csv").read_text().startswith("quantity,j,period_factor")


@pytest.mark.slow
def test_packet_sweep_slopes(tmp_path):
    config = load_run_config(CONFIGS / "packet.cfg", {"diagnostics.max_j": 0})
    result = run_sweep(config, 0.08, 0.5, 3, workers=1, out_dir=tmp_path)
    assert result.exit_code == EXIT_OK
    assert result.slope("E", 0).slope == pytest.approx(4.0, abs=0.2)
    assert result.slope("frak", 0).slope == pytest.approx(5.0, abs=0.2)


def test_convergence_without_time():
    report = run_convergence(make_config(T_final=0.0))
    assert report.dt_rows == [] and report.n_rows == []


@pytest.mark.slow
def test_time_step_convergence_order(tmp_path):
    report = run_convergence(make_config(epsilon=0.05, T_final=0.5, dt=0.1), tmp_path)
    assert report.dt_order > 3.5
    assert len(report.n_rows) == 2
    assert (tmp_path / "converge.json").exists()


def test_registry_names_are_unique():
    names = [c.name for c in REGISTRY]
    assert len(names) == len(set(names))


def test_verification_subset(tmp_path):
    report = run_verification(seed=0, N=128, names=["paph", "q1", "hilbert_involution", "theta_one"], out_dir=tmp_path)
    assert report.passed, report.mandatory_failures
    assert [r.name for r in report.results] == ["hilbert_involution", "paph", "q1", "theta_one"]
    assert (tmp_path / "verify.json").exists()


def test_verification_detects_a_flipped_hilbert_sign(monkeypatch):
    monkeypatch.setattr(spectral, "_hilbert_multiplier", lambda grid: np.sign(grid.wavenumbers))
    report = run_verification(seed=0, N=128, names=["paph", "q1"])
    assert report.result("paph").passed
    assert not report.result("q1").passed
    assert not report.passed


@pytest.mark.slow
def test_full_suite_passes():
    report = run_verification(seed=0, N=256)
    assert report.passed, report.mandatory_failures
