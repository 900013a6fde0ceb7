"""Launch + integrate composition with the standard event set.

The default events watch for metric degeneration (some f_i reaching zero),
loss of shape-operator positivity, exit from the ansatz's preserved set
(fibre/base ratio crossing its root, the circle-bundle a priori bounds, or
the warped-product ratio bound), and state overflow.  All of them are
terminal: past any of these the run no longer tracks the construction the
monitors reason about.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .integrator import EventSpec, IntegrationResult, IntegratorConfig, integrate
from .launch import default_delta, launch
from .systems import (
    DancerWangAnsatz,
    LuPagePopeAnsatz,
    ProblemSpec,
    SolitonState,
    TwoSummandsAnsatz,
    make_vector_rhs,
    u_dotdot_stable,
    unpack_state,
)

__all__ = ["Trajectory", "standard_events", "solve_problem", "dw_pair_bound_constant", "dw_omega_sq_bounds"]


def dw_pair_bound_constant(a: DancerWangAnsatz, initial) -> float:
    """The ratio ceiling: max over pairs of {Q_ij(0), sqrt((d_j+2)/d_j p_i/p_j)} + 1,
    collapsing to 1 for a single factor."""
    if a.m == 1:
        return 1.0
    vals = []
    for i in range(a.m):
        for j in range(a.m):
            if i == j:
                continue
            vals.append(initial[i] / initial[j])
            vals.append(np.sqrt((a.d[j] + 2.0) / a.d[j] * a.p[i] / a.p[j]))
    return float(max(vals)) + 1.0


def dw_omega_sq_bounds(a: DancerWangAnsatz, c0: float) -> np.ndarray:
    """Per-factor ceilings on omega_i^2 = (f/g_i)^2; infinite for degenerate
    factors with q_i = 0."""
    out = np.empty(a.m)
    pmin = min(a.p)
    for i in range(a.m):
        if a.q[i] == 0:
            out[i] = np.inf
        else:
            out[i] = 4.0 * pmin / (a.m * c0 * c0 * (a.d[i] + 2.0) * a.q[i] ** 2)
    return out


def _invariant_margin_fn(spec: ProblemSpec):
    """Scalar margin that is positive while the ansatz's preserved set holds
    and crosses zero on exit; None when the set has no finite description."""
    a = spec.ansatz
    k = len(a.dims)
    if isinstance(a, TwoSummandsAnsatz):
        mid = a.A2 / (2.0 * a.A3) * a.d1 / (2.0 * a.d1 + a.d2)
        disc = mid * mid - a.A1 / a.A3 * a.d2 / (2.0 * a.d1 + a.d2)
        if disc < 0:
            return None  # no cone-solution roots: no preserved window to watch
        omega2 = float(np.sqrt(mid + np.sqrt(disc)))

        def margin(t, y):
            return omega2 - y[0] / y[1]

        return margin
    if isinstance(a, LuPagePopeAnsatz):
        bound = 4.0 * a.p1 / ((a.d1 + 2.0) * a.q1**2)

        def margin(t, y):
            return bound - (y[0] / y[1]) ** 2

        return margin
    if isinstance(a, DancerWangAnsatz):
        c0 = dw_pair_bound_constant(a, spec.initial)
        w_bounds = dw_omega_sq_bounds(a, c0)

        def margin(t, y):
            f = y[0]
            g = y[1:k]
            m_w = float(np.min(w_bounds - (f / g) ** 2))
            if a.m == 1:
                return m_w
            ratios = g[:, None] / g[None, :]
            return min(m_w, float(np.min(c0 - ratios)))

        return margin
    raise TypeError(f"unknown ansatz type {type(a)!r}")


def standard_events(spec: ProblemSpec) -> tuple[EventSpec, ...]:
    k = len(spec.ansatz.dims)
    events = [
        EventSpec("metric_degenerate", lambda t, y: float(np.min(y[:k])), -1, True),
        EventSpec("shape_exit", lambda t, y: float(np.min(y[k : 2 * k])), -1, True),
        EventSpec("overflow", lambda t, y: 1e12 - float(np.max(np.abs(y))), -1, True),
    ]
    margin = _invariant_margin_fn(spec)
    if margin is not None:
        events.insert(2, EventSpec("invariant_exit", margin, -1, True))
    return tuple(events)


@dataclass
class Trajectory:
    """An integrated run: samples, termination verdict material, stats."""

    spec: ProblemSpec
    delta: float
    result: IntegrationResult

    @property
    def termination(self) -> str:
        return self.result.termination

    @property
    def ts(self) -> np.ndarray:
        return self.result.ts

    @cached_property
    def f(self) -> np.ndarray:
        k = len(self.spec.ansatz.dims)
        return self.result.ys[:, :k]

    @cached_property
    def df(self) -> np.ndarray:
        k = len(self.spec.ansatz.dims)
        return self.result.ys[:, k : 2 * k]

    @property
    def u(self) -> np.ndarray:
        k = len(self.spec.ansatz.dims)
        return self.result.ys[:, 2 * k]

    @property
    def du(self) -> np.ndarray:
        k = len(self.spec.ansatz.dims)
        return self.result.ys[:, 2 * k + 1]

    @cached_property
    def udd(self) -> np.ndarray:
        return np.array(
            [u_dotdot_stable(s, self.spec.ansatz, self.spec.epsilon) for s in self.states]
        )

    @cached_property
    def states(self) -> list[SolitonState]:
        return [
            unpack_state(t, y, self.spec.ansatz) for t, y in zip(self.result.ts, self.result.ys)
        ]

    def state_at(self, t: float) -> SolitonState:
        return unpack_state(t, self.result.sample_at(t), self.spec.ansatz)

    @property
    def reached_horizon(self) -> bool:
        return self.termination == "reached_t_max"


def solve_problem(
    spec: ProblemSpec,
    t_max: float = 100.0,
    rel_tol: float = 1e-11,
    abs_tol: float = 1e-13,
    max_steps: int = 200_000,
    max_step: float = np.inf,
    delta: float | None = None,
    events: tuple[EventSpec, ...] | None = None,
) -> Trajectory:
    """Launch at small t = delta and integrate with the standard event set."""
    delta = default_delta(spec) if delta is None else float(delta)
    state0 = launch(spec, delta)
    k = len(spec.ansatz.dims)
    cfg = IntegratorConfig(
        t_max=t_max,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        max_step=max_step,
        max_steps=max_steps,
        events=standard_events(spec) if events is None else events,
        validity=lambda y: bool(np.all(np.isfinite(y)) and np.all(y[:k] > 0.0)),
    )
    rhs = make_vector_rhs(spec.ansatz, spec.epsilon)
    y0 = np.concatenate((state0.f, state0.df, [state0.u, state0.du]))
    result = integrate(rhs, state0.t, y0, cfg)
    return Trajectory(spec=spec, delta=delta, result=result)
