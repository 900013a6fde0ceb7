"""Taylor launch of a trajectory off the singular orbit.

The flow is singular at t = 0, so integration starts from a state at small
t = delta built from the smoothness conditions: the collapsing component is
odd with unit slope, the surviving components are even with the second
derivatives the flow forces on them, and the potential carries
uddot(0) = C / (d_S + 1).

The series data alone is second order, which is not good enough for the
conservation law: the first integral
uddot + (-udot + tr L) udot - eps u is exactly conserved by the flow, so a
launch-state error of size eta contaminates every later sample by the same
eta.  When the collapsing sphere has dimension > 1 the truncated series
leaves an O(1) offset (the missing third-order fibre coefficient).  The
launcher therefore closes the series with an exact projection: the fibre
derivative is solved (quadratic equation, closed form) so that the
conservation residual at the launch state is zero to rounding.
"""

from __future__ import annotations

import numpy as np

from .systems import (
    DancerWangAnsatz,
    LuPagePopeAnsatz,
    ProblemSpec,
    SolitonState,
    TwoSummandsAnsatz,
    conservation_residual,
    u_dotdot_stable,
)

__all__ = [
    "default_delta",
    "launch",
    "launch_two_summands",
    "launch_dancer_wang",
    "launch_lpp",
]


def default_delta(spec: ProblemSpec) -> float:
    """Launch offset.

    Circle-fibre systems use 1e-4 * min(1, sizes).  Collapsing-sphere
    systems use 1e-3: their conserved quantity reacts to the fibre
    derivative like d1(d1-1)/f1^2, so below delta ~ 1e-3 one ulp of that
    state component already moves the conservation residual by more than
    the 1e-8 budget, and integration noise dominates any series gain.
    """
    base = min(1.0, min(spec.initial))
    if isinstance(spec.ansatz, TwoSummandsAnsatz) and spec.ansatz.d1 > 1:
        return 1e-3 * base
    return 1e-4 * base


def _check(spec: ProblemSpec, delta: float):
    if delta <= 0:
        raise ValueError("launch delta must be positive")
    # C <= 0, eps >= 0, sizes > 0 are enforced by ProblemSpec itself.


def _residual(state: SolitonState, spec: ProblemSpec) -> float:
    return conservation_residual(state, u_dotdot_stable(state, spec.ansatz, spec.epsilon), spec)


def _with_component(state: SolitonState, which: str, value: float) -> SolitonState:
    if which == "fibre":
        df = state.df.copy()
        df[0] = value
        return SolitonState(t=state.t, f=state.f, df=df, u=state.u, du=state.du)
    return SolitonState(t=state.t, f=state.f, df=state.df, u=state.u, du=value)


def _zero_residual_in(state: SolitonState, spec: ProblemSpec, which: str, h: float):
    """Shift one state component so the conservation residual vanishes.

    The residual is an exactly quadratic polynomial in either the fibre
    derivative or udot, so the shift solves qa D^2 + R' D + R = 0; the root
    of smaller magnitude is the physical one (cancellation-safe form)."""
    w0 = state.df[0] if which == "fibre" else state.du
    r_minus = _residual(_with_component(state, which, w0 - h), spec)
    r_mid = _residual(state, spec)
    r_plus = _residual(_with_component(state, which, w0 + h), spec)
    qa = (r_minus - 2.0 * r_mid + r_plus) / (2.0 * h * h)
    slope = (r_plus - r_minus) / (2.0 * h)
    disc = slope * slope - 4.0 * qa * r_mid
    if disc < 0:
        return state
    denom = slope + np.copysign(np.sqrt(disc), slope)
    if denom == 0.0:
        return state
    out = _with_component(state, which, w0 - 2.0 * r_mid / denom)
    # one Newton polish against interpolation rounding
    r_new = _residual(out, spec)
    d_slope = slope + 2.0 * qa * (-2.0 * r_mid / denom)
    if d_slope != 0.0 and np.isfinite(r_new):
        out = _with_component(state, which, (out.df[0] if which == "fibre" else out.du) - r_new / d_slope)
    return out


def _project_conservation(state: SolitonState, spec: ProblemSpec) -> SolitonState:
    """Close the launch series against the conservation first integral.

    The bulk of the series defect is the missing third-order fibre
    coefficient, so the fibre derivative is corrected first.  Because the
    residual's sensitivity to the fibre derivative grows like 1/delta^2,
    one ulp of that component still leaves a small remainder; it is
    absorbed into udot, whose sensitivity is only O(1/delta), leaving the
    residual at rounding level.  Both shifts are O(delta^2) relative.
    """
    out = _zero_residual_in(state, spec, "fibre", 0.5 * max(1.0, abs(state.df[0])))
    scale = abs(out.du) + abs(out.df[0] / out.f[0]) * 1e-6 + 1e-9
    return _zero_residual_in(out, spec, "du", scale)


def _finish(state: SolitonState, spec: ProblemSpec, project: bool) -> SolitonState:
    return _project_conservation(state, spec) if project else state


def launch_two_summands(spec: ProblemSpec, delta: float, project: bool = True) -> SolitonState:
    """State at t = delta for the fibre/base system.

    f1 is odd with unit slope; f2 is even with
    (d1 + 1) fddot2(0) / f2(0) = eps/2 + A2 / (d2 fbar^2); the potential
    starts with uddot(0) = C / (d1 + 1).
    """
    a = spec.ansatz
    if not isinstance(a, TwoSummandsAnsatz):
        raise TypeError("spec does not hold a two-summands ansatz")
    _check(spec, delta)
    fbar = spec.initial[0]
    udd0 = spec.C / (a.d1 + 1.0)
    fdd2 = fbar * (spec.epsilon / 2.0 + a.A2 / (a.d2 * fbar**2)) / (a.d1 + 1.0)
    state = SolitonState(
        t=delta,
        f=np.array([delta, fbar + 0.5 * delta**2 * fdd2]),
        df=np.array([1.0, delta * fdd2]),
        u=0.5 * delta**2 * udd0,
        du=delta * udd0,
    )
    return _finish(state, spec, project)


def launch_dancer_wang(spec: ProblemSpec, delta: float, project: bool = True) -> SolitonState:
    """State at t = delta for the circle-bundle system: f odd with unit
    slope, 2 gddot_i(0) / g_i(0) = eps/2 + p_i / g_i(0)^2, uddot(0) = C/2."""
    a = spec.ansatz
    if not isinstance(a, DancerWangAnsatz):
        raise TypeError("spec does not hold a Dancer-Wang ansatz")
    _check(spec, delta)
    gbar = np.asarray(spec.initial, dtype=float)
    p = np.asarray(a.p, dtype=float)
    gdd = gbar * (spec.epsilon / 2.0 + p / gbar**2) / 2.0
    udd0 = spec.C / 2.0
    state = SolitonState(
        t=delta,
        f=np.concatenate(([delta], gbar + 0.5 * delta**2 * gdd)),
        df=np.concatenate(([1.0], delta * gdd)),
        u=0.5 * delta**2 * udd0,
        du=delta * udd0,
    )
    return _finish(state, spec, project)


def launch_lpp(spec: ProblemSpec, delta: float, project: bool = True) -> SolitonState:
    """Like the circle-bundle launch with the warped Einstein factor using
    2 gddot2(0) / g2(0) = eps/2 + (d2 - 1) / g2(0)^2."""
    a = spec.ansatz
    if not isinstance(a, LuPagePopeAnsatz):
        raise TypeError("spec does not hold a Lu-Page-Pope ansatz")
    _check(spec, delta)
    g1bar, g2bar = spec.initial
    gdd1 = g1bar * (spec.epsilon / 2.0 + a.p1 / g1bar**2) / 2.0
    gdd2 = g2bar * (spec.epsilon / 2.0 + (a.d2 - 1.0) / g2bar**2) / 2.0
    udd0 = spec.C / 2.0
    state = SolitonState(
        t=delta,
        f=np.array([delta, g1bar + 0.5 * delta**2 * gdd1, g2bar + 0.5 * delta**2 * gdd2]),
        df=np.array([1.0, delta * gdd1, delta * gdd2]),
        u=0.5 * delta**2 * udd0,
        du=delta * udd0,
    )
    return _finish(state, spec, project)


def launch(spec: ProblemSpec, delta: float | None = None, project: bool = True) -> SolitonState:
    delta = default_delta(spec) if delta is None else float(delta)
    if isinstance(spec.ansatz, TwoSummandsAnsatz):
        return launch_two_summands(spec, delta, project)
    if isinstance(spec.ansatz, DancerWangAnsatz):
        return launch_dancer_wang(spec, delta, project)
    if isinstance(spec.ansatz, LuPagePopeAnsatz):
        return launch_lpp(spec, delta, project)
    raise TypeError(f"unknown ansatz type {type(spec.ansatz)!r}")
