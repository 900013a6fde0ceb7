import json

import numpy as np
import pytest

from solitonlab.geometry import killing_curvature_bound
from solitonlab.monitors import classify_completeness, dw_apriori_monitor
from solitonlab.runio import build_report, load_config, run_solve
from solitonlab.systems import (
    DancerWangAnsatz,
    ProblemSpec,
    TwoSummandsAnsatz,
    tr_ricci,
    u_second_derivative_identity,
)
from solitonlab.trajectory import solve_problem, standard_events


def test_samples_are_strictly_increasing_and_valid(shipped_runs):
    for name, traj in shipped_runs.items():
        assert np.all(np.diff(traj.ts) > 0), name
        assert np.all(traj.f > 0), name


def test_scalar_curvature_bound_along_trajectories(shipped_runs):
    # tr r <= (1/2) sum d_i b_i / f_i^2 with the ansatz's encoded Killing data
    for name in ("ts_complete_steady.json", "dw_complete_steady.json", "lpp_e1_c10.json"):
        traj = shipped_runs[name]
        dec = traj.spec.ansatz.decomposition()
        for st in traj.states[:: max(1, len(traj.states) // 200)]:
            bound = killing_curvature_bound(dec, st.f**2)
            assert tr_ricci(st, traj.spec.ansatz) <= bound + 1e-10 * (1 + abs(bound))


def test_uddot_identity_along_trajectory(shipped_runs):
    traj = shipped_runs["ts_e0_c1.json"]
    for st, udd in zip(traj.states, traj.udd):
        ident = u_second_derivative_identity(st, traj.spec)
        assert ident == pytest.approx(2.0 * udd, abs=1e-8 * (1.0 + 2.0 * abs(udd)))


def test_event_set_matches_ansatz():
    hopf = ProblemSpec(TwoSummandsAnsatz(3, 4, 6.0, 48.0, 12.0), 0.0, -1.0, (1.0,))
    names = [e.name for e in standard_events(hopf)]
    assert names == ["metric_degenerate", "shape_exit", "invariant_exit", "overflow"]
    # no ratio window exists when the discriminant is negative
    bad = ProblemSpec(TwoSummandsAnsatz(2, 2, 2.0, 2.0, 1.0), 0.0, 0.0, (1.0,))
    assert "invariant_exit" not in [e.name for e in standard_events(bad)]


def test_sweep_shows_verdict_boundary_in_C():
    # weakly negative constants exit the preserved set, strongly negative
    # ones survive the horizon
    a = DancerWangAnsatz((2, 2), (2, 2), (1, 1))
    weak = solve_problem(ProblemSpec(a, 0.0, -1.0, (1.0, 1.0)), t_max=50.0)
    strong = solve_problem(ProblemSpec(a, 0.0, -50.0, (1.0, 1.0)), t_max=50.0)
    assert classify_completeness(weak).kind in ("invariant_set_exit", "metric_degenerate")
    assert classify_completeness(strong).is_complete
    assert dw_apriori_monitor(strong).bound_ok_throughout


def test_report_embeds_anchor_strings(shipped_runs, tmp_path):
    cfg = load_config(
        {
            "system": "dancer_wang",
            "ansatz": {"d": [2], "p": [2], "q": [-2]},
            "epsilon": 0.0,
            "C": -2.0,
            "initial": [1.0],
            "integrator": {"t_max": 2.0},
        }
    )
    run_solve(cfg, str(tmp_path))
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["checks"], "report must list its checks"
    for entry in report["checks"]:
        assert entry.get("anchor"), entry
    assert "kahler" in report and "a_priori_bounds" in report


def test_monitor_toggles_limit_report(tmp_path):
    cfg = load_config(
        {
            "system": "two_summands",
            "ansatz": {"d1": 1, "d2": 2, "A1": 0.0, "A2": 6.0, "A3": 1.0},
            "epsilon": 0.0,
            "C": -1.0,
            "initial": 1.0,
            "integrator": {"t_max": 2.0},
            "monitors": ["conservation"],
        }
    )
    run_solve(cfg, str(tmp_path))
    report = json.loads((tmp_path / "report.json").read_text())
    assert "conservation" in report and "potential" not in report
