import numpy as np
import pytest

from solitonlab.integrator import EventSpec, IntegratorConfig, integrate
from solitonlab.monitors import comparison_ode_closed_form


def contracting_rhs(a):
    return lambda t, y: np.array([-a + y[0] ** 2 / 2.0])


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 8.0])
def test_tanh_closed_form_on_unit_interval(a):
    res = integrate(contracting_rhs(a), 0.0, [0.0], IntegratorConfig(t_max=5.0))
    assert res.termination == "reached_t_max"
    exact = comparison_ode_closed_form(a, 0.0, 0.0, 5.0)
    assert res.y_end[0] == pytest.approx(exact, abs=1e-9)


def test_spec_point_value():
    res = integrate(contracting_rhs(2.0), 0.0, [0.0], IntegratorConfig(t_max=1.0))
    assert res.y_end[0] == pytest.approx(-1.5231883119115297, abs=1e-9)


def test_zero_rhs_is_constant():
    res = integrate(lambda t, y: np.zeros(3), 0.0, [1.0, -2.0, 0.5], IntegratorConfig(t_max=4.0))
    assert res.termination == "reached_t_max"
    np.testing.assert_array_equal(res.y_end, [1.0, -2.0, 0.5])


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 8.0])
def test_event_time_matches_closed_form_inversion(a):
    y_target = -0.5 * np.sqrt(2.0 * a)
    ev = EventSpec("target", lambda t, y: y[0] - y_target, direction=-1, terminal=True)
    res = integrate(contracting_rhs(a), 0.0, [0.0], IntegratorConfig(t_max=5.0, events=(ev,)))
    assert res.termination == "event:target"
    t_exact = np.arctanh(0.5) / np.sqrt(a / 2.0)
    assert res.terminal_event.t == pytest.approx(t_exact, abs=1e-9)
    # the event point is the final sample
    assert res.ts[-1] == res.terminal_event.t


def test_event_reproducible_across_first_step_choices():
    ev = EventSpec("target", lambda t, y: y[0] + 1.0, direction=-1, terminal=True)
    times = []
    for h0 in (None, 1e-6, 3e-5, 1e-4):
        res = integrate(
            contracting_rhs(2.0), 0.0, [0.0], IntegratorConfig(t_max=5.0, events=(ev,), first_step=h0)
        )
        times.append(res.terminal_event.t)
    assert max(times) - min(times) < 1e-9


def test_non_terminal_event_recorded_and_run_continues():
    ev = EventSpec("marker", lambda t, y: y[0] + 1.0, direction=-1, terminal=False)
    res = integrate(contracting_rhs(2.0), 0.0, [0.0], IntegratorConfig(t_max=3.0, events=(ev,)))
    assert res.termination == "reached_t_max"
    assert len(res.events) == 1
    assert np.all(np.diff(res.ts) > 0)  # refined point inserted in order


def test_tolerance_halving_convergence():
    r1 = integrate(
        contracting_rhs(2.0), 0.0, [0.0], IntegratorConfig(t_max=5.0, rel_tol=1e-10, abs_tol=1e-12)
    )
    r2 = integrate(
        contracting_rhs(2.0), 0.0, [0.0], IntegratorConfig(t_max=5.0, rel_tol=5e-11, abs_tol=5e-13)
    )
    assert abs(r1.y_end[0] - r2.y_end[0]) < 10 * 1e-10


def test_bitwise_determinism():
    def run():
        return integrate(contracting_rhs(1.0), 0.0, [0.0], IntegratorConfig(t_max=5.0))

    a, b = run(), run()
    np.testing.assert_array_equal(a.ts, b.ts)
    np.testing.assert_array_equal(a.ys, b.ys)
    assert a.n_rhs == b.n_rhs


def test_dense_output_between_steps():
    res = integrate(contracting_rhs(2.0), 0.0, [0.0], IntegratorConfig(t_max=5.0))
    for t in (0.37, 1.94, 4.21):
        exact = comparison_ode_closed_form(2.0, 0.0, 0.0, t)
        assert res.sample_at(t)[0] == pytest.approx(exact, abs=1e-7)
    with pytest.raises(ValueError, match="span"):
        res.sample_at(7.0)


def test_max_steps_reports_step_failure():
    res = integrate(contracting_rhs(2.0), 0.0, [0.0], IntegratorConfig(t_max=5.0, max_steps=3))
    assert res.termination == "step_failure"
    assert res.n_accepted + res.n_rejected <= 3


def test_validity_callback_flags_invalid_state():
    # flow into y = 0 from above with a validity requirement y > 0.5:
    # steps get rejected and the run ends as state_invalid
    rhs = lambda t, y: np.array([-1.0])
    cfg = IntegratorConfig(t_max=10.0, validity=lambda y: bool(y[0] > 0.5))
    res = integrate(rhs, 0.0, [1.0], cfg)
    assert res.termination == "state_invalid"
    assert res.y_end[0] > 0.4


def test_stats_are_counted():
    res = integrate(contracting_rhs(8.0), 0.0, [0.0], IntegratorConfig(t_max=5.0))
    assert res.n_accepted == len(res.ts) - 1
    assert res.n_rhs >= 6 * res.n_accepted


def test_config_guards():
    with pytest.raises(ValueError, match="tolerances"):
        IntegratorConfig(t_max=1.0, rel_tol=0.0)
    with pytest.raises(ValueError, match="positive"):
        IntegratorConfig(t_max=-1.0)
