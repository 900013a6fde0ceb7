"""Trajectory diagnostics: preserved sets, potential monotonicity,
asymptotics, a priori bounds, growth probing and run classification.

Every report carries an ``anchor``, a one-line statement of the property
being checked, which is embedded verbatim in emitted JSON so a report can
be read without the code at hand.  A verdict of ``numerically_complete``
is an operational statement -- the run reached its horizon with every
monitored invariant intact -- never a claim of mathematical completeness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .systems import (
    DancerWangAnsatz,
    LuPagePopeAnsatz,
    ProblemSpec,
    SolitonState,
    TwoSummandsAnsatz,
    conservation_residual,
    conservation_residual_curvature,
    kahler_residual,
    tr_L,
    u_second_derivative_identity,
)
from .trajectory import Trajectory, dw_omega_sq_bounds, dw_pair_bound_constant, solve_problem

__all__ = [
    "TwoSummandsDiagnostics",
    "two_summands_roots",
    "quartic_ratio_polynomial",
    "c0_zero_predicates",
    "comparison_ode_closed_form",
    "LocusReport",
    "locus_membership",
    "locus_report",
    "PotentialReport",
    "potential_report",
    "AsymptoteReport",
    "asymptote_check",
    "ConservationReport",
    "conservation_report",
    "OmegaReport",
    "two_summands_omega_monitor",
    "DWBoundReport",
    "dw_apriori_monitor",
    "LppBoundReport",
    "lpp_bound_monitor",
    "KahlerReport",
    "kahler_report",
    "Verdict",
    "classify_completeness",
    "GrowthProbeReport",
    "growth_probe",
    "ProbeRangeError",
    "curvature_budget_at_launch",
]


# -- two-summands root structure ---------------------------------------------


@dataclass
class TwoSummandsDiagnostics:
    anchor: str
    D: float
    omega1: float | None
    omega2: float | None
    omega1_sq_below_quarter: bool | None
    omega2_sq_below_half: bool | None
    quartic_residuals: tuple[float, float] | None


def quartic_ratio_polynomial(a: TwoSummandsAnsatz, omega: float) -> float:
    """A1/d1 - (A2/d2) w^2 + A3 (1/d1 + 2/d2) w^4, the forcing polynomial of
    the fibre/base ratio equation; its positive zeros bound the preserved
    window."""
    return (
        a.A1 / a.d1
        - a.A2 / a.d2 * omega**2
        + a.A3 * (1.0 / a.d1 + 2.0 / a.d2) * omega**4
    )


def two_summands_roots(a: TwoSummandsAnsatz) -> TwoSummandsDiagnostics:
    """Discriminant and the two nonnegative roots of the ratio polynomial.

    D = (A2/(2 A3) d1/(2d1+d2))^2 - (A1/A3) d2/(2d1+d2); for D >= 0 the
    squared roots are mid -+ sqrt(D).  Also evaluates the classical checks
    omega1^2 < A2/(4 A3) and omega2^2 < A2/(2 A3).
    """
    mid = a.A2 / (2.0 * a.A3) * a.d1 / (2.0 * a.d1 + a.d2)
    D = mid * mid - a.A1 / a.A3 * a.d2 / (2.0 * a.d1 + a.d2)
    anchor = "ratio polynomial roots bounding the preserved fibre/base window"
    if D < 0:
        return TwoSummandsDiagnostics(anchor, float(D), None, None, None, None, None)
    sq = np.sqrt(D)
    w1_sq, w2_sq = mid - sq, mid + sq
    w1 = float(np.sqrt(max(w1_sq, 0.0)))
    w2 = float(np.sqrt(w2_sq))
    return TwoSummandsDiagnostics(
        anchor=anchor,
        D=float(D),
        omega1=w1,
        omega2=w2,
        omega1_sq_below_quarter=bool(w1_sq < a.A2 / (4.0 * a.A3)),
        omega2_sq_below_half=bool(w2_sq < a.A2 / (2.0 * a.A3)),
        quartic_residuals=(
            float(quartic_ratio_polynomial(a, w1)),
            float(quartic_ratio_polynomial(a, w2)),
        ),
    )


def c0_zero_predicates(a: TwoSummandsAnsatz) -> dict:
    """Parameter tests under which even C = 0 trajectories stay complete:
    (d1+1) A2^2 > 4 d1 d2 (2d1+d2) A3 in general and A2^2 > 2 d2 (d2+2) A3
    for a collapsing circle."""
    return {
        "anchor": "parameter windows where the zero conservation constant already suffices",
        "general": bool((a.d1 + 1) * a.A2**2 > 4.0 * a.d1 * a.d2 * (2 * a.d1 + a.d2) * a.A3),
        "circle_fibre": bool(a.A2**2 > 2.0 * a.d2 * (a.d2 + 2) * a.A3),
    }


def comparison_ode_closed_form(a: float, y_star: float, s_star: float, s) -> float | np.ndarray:
    """Solution of y' = -a + y^2/2, y(s_star) = y_star:
    sqrt(2a) tanh(sqrt(a/2)(s_star - s) + arctanh(y_star / sqrt(2a))).
    Requires a > 0 and -a + y_star^2/2 < 0."""
    if a <= 0:
        raise ValueError("comparison coefficient a must be positive")
    if -a + y_star**2 / 2.0 >= 0:
        raise ValueError("initial value outside the contracting branch")
    root = np.sqrt(2.0 * a)
    return root * np.tanh(np.sqrt(a / 2.0) * (s_star - s) + np.arctanh(y_star / root))


# -- locus membership ----------------------------------------------------------


@dataclass
class LocusReport:
    anchor: str
    mean_curvature_ratio: float
    curvature_ratio: float
    classification: str
    tol: float


def locus_membership(state: SolitonState, spec: ProblemSpec, tol: float = 1e-7) -> LocusReport:
    """Position relative to the preserved trajectory loci.

    Evaluates q1 = tr L / (-udot + tr L) and
    q2 = (tr L^2 + tr r)/(-udot + tr L)^2 + (n-1)(eps/2)/( -udot + tr L)^2
    and classifies: both < 1 exactly characterises the locus holding every
    complete steady/expanding trajectory, both = 1 the nonpositively-curved
    Einstein one.  Both are computed through the conserved combination so
    they stay meaningful arbitrarily close to the singular orbit.
    """
    anchor = "membership of the preserved strict-soliton / Einstein trajectory loci"
    H = -state.du + tr_L(state, spec.ansatz)
    if H <= 0:
        return LocusReport(anchor, np.nan, np.nan, "not_classifiable", tol)
    q1 = 1.0 + state.du / H
    r4 = conservation_residual_curvature(state, spec)
    q2 = 1.0 + (r4 + spec.C + spec.epsilon * state.u) / (H * H)
    if abs(q1 - 1.0) <= tol and abs(q2 - 1.0) <= tol:
        cls = "einstein"
    elif q1 < 1.0 and q2 < 1.0:
        cls = "strict"
    else:
        cls = "outside"
    return LocusReport(anchor, float(q1), float(q2), cls, tol)


@dataclass
class LocusSeriesReport:
    anchor: str
    classifications: list[str]
    max_einstein_residual: float
    strict_throughout: bool
    einstein_throughout: bool


def locus_report(traj: Trajectory, tol: float = 1e-7) -> LocusSeriesReport:
    rows = [locus_membership(s, traj.spec, tol) for s in traj.states]
    eins = max(
        (max(abs(r.mean_curvature_ratio - 1.0), abs(r.curvature_ratio - 1.0)) for r in rows),
        default=np.nan,
    )
    cls = [r.classification for r in rows]
    return LocusSeriesReport(
        anchor="preserved-locus membership along the whole trajectory",
        classifications=cls,
        max_einstein_residual=float(eins),
        strict_throughout=all(c == "strict" for c in cls),
        einstein_throughout=all(c == "einstein" for c in cls),
    )


# -- potential monotonicity ------------------------------------------------------


@dataclass
class PotentialReport:
    anchor: str
    trivial_potential: bool
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def potential_report(traj: Trajectory, l_nonzero_tol: float = 1e-12) -> PotentialReport:
    """For C < 0 (and eps >= 0): u < 0 and udot < 0 at every sample past the
    launch slice, and uddot < 0 whenever eps > 0, or eps = 0 with a
    nonvanishing shape operator."""
    spec = traj.spec
    anchor = "strict decay of the soliton potential along any C < 0 trajectory"
    if spec.C >= 0:
        # a C = 0 seed keeps u identically zero up to integration residue
        trivial = bool(np.max(np.abs(traj.du)) <= 1e-7 and np.max(np.abs(traj.u)) <= 1e-7)
        return PotentialReport(anchor=anchor, trivial_potential=trivial)
    report = PotentialReport(anchor=anchor, trivial_potential=False)
    zmax = np.max(np.abs(traj.df / traj.f), axis=1)
    for i, t in enumerate(traj.ts):
        if t <= traj.delta:
            continue
        bad = {}
        if traj.u[i] >= 0:
            bad["u"] = float(traj.u[i])
        if traj.du[i] >= 0:
            bad["du"] = float(traj.du[i])
        concavity_applies = spec.epsilon > 0 or zmax[i] > l_nonzero_tol
        if concavity_applies and traj.udd[i] >= 0:
            bad["udd"] = float(traj.udd[i])
        if bad:
            bad["t"] = float(t)
            report.violations.append(bad)
    return report


# -- asymptotics -----------------------------------------------------------------


@dataclass
class AsymptoteReport:
    anchor: str
    kind: str
    terminal_slope: float | None = None
    terminal_slope_target: float | None = None
    terminal_slope_abs_error: float | None = None
    terminal_udd: float | None = None
    upper_bound_violations: int | None = None
    lower_bound_violations: int | None = None
    lower_bound_window_start: float | None = None


def asymptote_check(traj: Trajectory, max_t0_grid: int = 256) -> AsymptoteReport:
    """Steady runs: how far -udot(t_end) sits from sqrt(-C) and how flat
    uddot has become.  Expanding runs: the bound
    -udot(t) < (eps/2) t + sqrt(-C) at every sample, plus the windowed
    lower bound with prefactor 9/10 for grid times t0 > 2 sqrt(5/eps)
    (reported only; classification never depends on it)."""
    spec = traj.spec
    slope = -traj.du
    if spec.epsilon == 0:
        target = float(np.sqrt(-spec.C))
        return AsymptoteReport(
            anchor="steady potential slope approaching sqrt(-C) with vanishing uddot",
            kind="steady",
            terminal_slope=float(slope[-1]),
            terminal_slope_target=target,
            terminal_slope_abs_error=float(abs(slope[-1] - target)),
            terminal_udd=float(traj.udd[-1]),
        )
    eps = spec.epsilon
    upper = eps / 2.0 * traj.ts + np.sqrt(-spec.C)
    n_upper = int(np.sum(slope >= upper))
    # windowed lower bound
    K = np.sqrt(spec.orbit_dim * eps / 2.0) + np.sqrt(-spec.C)
    window = 2.0 * np.sqrt(5.0 / eps)
    phi = slope / (eps / 2.0 * traj.ts + K)
    idx = np.nonzero(traj.ts > window)[0]
    n_lower = 0
    if idx.size:
        suffix_min = np.minimum.accumulate(phi[::-1])[::-1]
        sel = idx if idx.size <= max_t0_grid else idx[:: max(1, idx.size // max_t0_grid)]
        n_lower = int(np.sum(suffix_min[sel] < 0.9 * phi[sel]))
    return AsymptoteReport(
        anchor="expanding potential slope pinched between the linear barrier and its windowed fraction",
        kind="expanding",
        upper_bound_violations=n_upper,
        lower_bound_violations=n_lower,
        lower_bound_window_start=float(window),
    )


# -- conservation ---------------------------------------------------------------


@dataclass
class ConservationReport:
    anchor: str
    max_abs_residual: float
    max_abs_residual_curvature: float
    max_variant_disagreement: float
    tolerance: float
    ok: bool


def conservation_report(traj: Trajectory, tol_scale: float = 1e-8) -> ConservationReport:
    spec = traj.spec
    r3 = np.array(
        [conservation_residual(s, u, spec) for s, u in zip(traj.states, traj.udd)]
    )
    r4 = np.array([conservation_residual_curvature(s, spec) for s in traj.states])
    tol = tol_scale * (1.0 + abs(spec.C))
    m3 = float(np.max(np.abs(r3)))
    return ConservationReport(
        anchor="first integral uddot + (-udot + tr L) udot - C - eps u vanishing along the flow",
        max_abs_residual=m3,
        max_abs_residual_curvature=float(np.max(np.abs(r4))),
        max_variant_disagreement=float(np.max(np.abs(r3 - r4))),
        tolerance=tol,
        ok=bool(m3 <= tol),
    )


# -- ansatz-specific invariant sets -----------------------------------------------


@dataclass
class OmegaReport:
    anchor: str
    no_root_regime: bool
    omega2: float | None
    max_omega: float
    max_domega: float
    domega_bound: float
    domega_ok: bool | None
    below_root_throughout: bool | None


def two_summands_omega_monitor(traj: Trajectory, tol: float = 1e-6) -> OmegaReport:
    """Ratio omega = f1/f2: slope never exceeding its launch value 1/fbar
    while omega sits in [0, omega2], and omega staying below omega2."""
    a = traj.spec.ansatz
    if not isinstance(a, TwoSummandsAnsatz):
        raise TypeError("omega monitor applies to the two-summands system")
    fbar = traj.spec.initial[0]
    diag = two_summands_roots(a)
    omega = traj.f[:, 0] / traj.f[:, 1]
    domega = omega * (traj.df[:, 0] / traj.f[:, 0] - traj.df[:, 1] / traj.f[:, 1])
    bound = 1.0 / fbar
    anchor = "fibre/base ratio slope capped by its launch value inside the preserved window"
    if diag.D < 0:
        return OmegaReport(
            anchor=anchor,
            no_root_regime=True,
            omega2=None,
            max_omega=float(np.max(omega)),
            max_domega=float(np.max(domega)),
            domega_bound=bound,
            domega_ok=None,
            below_root_throughout=None,
        )
    in_window = (omega >= 0.0) & (omega <= diag.omega2)
    max_do = float(np.max(domega[in_window])) if np.any(in_window) else -np.inf
    return OmegaReport(
        anchor=anchor,
        no_root_regime=False,
        omega2=diag.omega2,
        max_omega=float(np.max(omega)),
        max_domega=max_do,
        domega_bound=bound,
        domega_ok=bool(max_do <= bound * (1.0 + tol)),
        below_root_throughout=bool(np.max(omega) < diag.omega2),
    )


@dataclass
class DWBoundReport:
    anchor: str
    c0: float
    omega_sq_bounds: list[float]
    bound_ok_throughout: bool
    first_violation_t: float | None
    max_qdot: float | None
    qdot_ceiling: float | None
    qdot_ok: bool | None
    key_estimate_ok: bool


def dw_apriori_monitor(traj: Trajectory, tol: float = 1e-9) -> DWBoundReport:
    """Circle-bundle a priori bounds: omega_i^2 below its ceiling and all
    ratios g_i/g_j below the pair constant, the ratio-slope ceiling
    sqrt(p_i / ((d_i - 1) g_j(0)^2)), and the key curvature estimate
    p_i/g_i^2 - (q_i^2/2) f^2/g_i^4 >= d_i p_i / ((d_i+2) g_i^2) while the
    bounds hold."""
    spec = traj.spec
    a = spec.ansatz
    if not isinstance(a, DancerWangAnsatz):
        raise TypeError("a priori bound monitor applies to the circle-bundle system")
    c0 = dw_pair_bound_constant(a, spec.initial)
    w_bounds = dw_omega_sq_bounds(a, c0)
    f = traj.f[:, 0]
    g = traj.f[:, 1:]
    dg = traj.df[:, 1:]
    omega_sq = (f[:, None] / g) ** 2
    ok_w = np.all(omega_sq <= w_bounds[None, :] + tol, axis=1)
    if a.m > 1:
        ratios = g[:, :, None] / g[:, None, :]
        ok_q = np.all(ratios <= c0 + tol, axis=(1, 2))
    else:
        ok_q = np.ones(len(f), dtype=bool)
    bound_ok = ok_w & ok_q
    first_bad = None if bool(np.all(bound_ok)) else float(traj.ts[int(np.argmin(bound_ok))])

    max_qdot = qdot_ceiling = qdot_ok = None
    if a.m > 1:
        z = dg / g
        ceilings, rates = [], []
        for i in range(a.m):
            for j in range(a.m):
                if i == j or a.d[i] <= 1:
                    continue
                q_ij = g[:, i] / g[:, j]
                dq_ij = q_ij * (z[:, i] - z[:, j])
                rates.append(np.max(dq_ij[bound_ok]) if np.any(bound_ok) else -np.inf)
                ceilings.append(np.sqrt(a.p[i] / ((a.d[i] - 1.0) * spec.initial[j] ** 2)))
        if rates:
            # the ceiling is per-pair; report the worst margin
            margins = [c - r for c, r in zip(ceilings, rates)]
            worst = int(np.argmin(margins))
            max_qdot = float(rates[worst])
            qdot_ceiling = float(ceilings[worst])
            qdot_ok = bool(margins[worst] >= -tol)

    key_ok = True
    p = np.asarray(a.p, dtype=float)
    q = np.asarray(a.q, dtype=float)
    d = np.asarray(a.d, dtype=float)
    lhs = p / g**2 - q**2 / 2.0 * (f[:, None] ** 2) / g**4
    rhs = d * p / (d + 2.0) / g**2
    key_ok = bool(np.all(lhs[bound_ok] >= rhs[bound_ok] - tol))
    return DWBoundReport(
        anchor="circle-bundle a priori bounds on f/g_i and g_i/g_j with slope and curvature consequences",
        c0=float(c0),
        omega_sq_bounds=[float(v) for v in w_bounds],
        bound_ok_throughout=bool(np.all(bound_ok)),
        first_violation_t=first_bad,
        max_qdot=max_qdot,
        qdot_ceiling=qdot_ceiling,
        qdot_ok=qdot_ok,
        key_estimate_ok=key_ok,
    )


@dataclass
class LppBoundReport:
    anchor: str
    bound: float
    max_omega1_sq: float
    ok: bool


def lpp_bound_monitor(traj: Trajectory, tol: float = 1e-9) -> LppBoundReport:
    a = traj.spec.ansatz
    if not isinstance(a, LuPagePopeAnsatz):
        raise TypeError("bound monitor applies to the warped-product system")
    bound = 4.0 * a.p1 / ((a.d1 + 2.0) * a.q1**2)
    omega1_sq = (traj.f[:, 0] / traj.f[:, 1]) ** 2
    mx = float(np.max(omega1_sq))
    return LppBoundReport(
        anchor="warped-product ratio bound omega1^2 < 4 p1 / ((d1+2) q1^2)",
        bound=float(bound),
        max_omega1_sq=mx,
        ok=bool(mx < bound + tol),
    )


@dataclass
class KahlerReport:
    anchor: str
    max_abs_residual: float
    per_factor_max: list[float]
    on_locus: bool


def kahler_report(traj: Trajectory, tol: float = 1e-6) -> KahlerReport:
    a = traj.spec.ansatz
    if not isinstance(a, DancerWangAnsatz):
        raise TypeError("Kaehler residual applies to the circle-bundle system")
    res = np.array([kahler_residual(s, a) for s in traj.states])
    per = np.max(np.abs(res), axis=0)
    return KahlerReport(
        anchor="first-order condition d/dt g_i^2 = -q_i f cutting the preserved Kaehler locus",
        max_abs_residual=float(np.max(per)),
        per_factor_max=[float(v) for v in per],
        on_locus=bool(np.max(per) <= tol),
    )


# -- classification --------------------------------------------------------------


@dataclass
class Verdict:
    kind: str
    t_star: float | None
    reasons: list[str]
    note: str = (
        "numerically_complete is a horizon verdict: the run reached t_max with "
        "every monitored invariant intact; it is evidence, not a completeness proof"
    )

    @property
    def is_complete(self) -> bool:
        return self.kind == "numerically_complete"


def classify_completeness(traj: Trajectory, conservation_tol_scale: float = 1e-8) -> Verdict:
    """Sort a finished run into numerically_complete / invariant_set_exit /
    metric_degenerate / inconclusive.

    Completeness requires the horizon, the ansatz's preserved set at every
    sample, strictly positive shape eigenvalues, and the conservation
    residual within tolerance.
    """
    spec = traj.spec
    term = traj.termination
    if term == "event:metric_degenerate" or term == "state_invalid":
        return Verdict("metric_degenerate", float(traj.ts[-1]), [term])
    if term in ("event:shape_exit", "event:invariant_exit"):
        return Verdict("invariant_set_exit", float(traj.ts[-1]), [term])
    if term != "reached_t_max":
        return Verdict("inconclusive", float(traj.ts[-1]), [term])

    reasons = []
    cons = conservation_report(traj, conservation_tol_scale)
    if not cons.ok:
        reasons.append(
            f"conservation residual {cons.max_abs_residual:.3e} above {cons.tolerance:.3e}"
        )
    if not np.all(traj.df > 0.0):
        reasons.append("shape operator lost positivity at some sample")
    a = spec.ansatz
    if isinstance(a, TwoSummandsAnsatz):
        diag = two_summands_roots(a)
        if diag.D < 0:
            reasons.append("no preserved window exists (negative discriminant)")
        else:
            if not bool(np.max(traj.f[:, 0] / traj.f[:, 1]) < diag.omega2):
                reasons.append("fibre/base ratio reached its root")
    elif isinstance(a, DancerWangAnsatz):
        if not dw_apriori_monitor(traj).bound_ok_throughout:
            reasons.append("a priori bound violated at some sample")
    elif isinstance(a, LuPagePopeAnsatz):
        if not lpp_bound_monitor(traj).ok:
            reasons.append("ratio bound violated at some sample")
    if reasons:
        return Verdict("inconclusive", None, reasons)
    return Verdict("numerically_complete", None, [])


# -- growth probe -----------------------------------------------------------------


class ProbeRangeError(RuntimeError):
    """No sampled conservation constant reached the requested slope."""


@dataclass
class GrowthProbeReport:
    anchor: str
    c: float
    tau: float
    c_star: float
    empirical_C0: float
    bracket: tuple[float | None, float]
    samples: list[tuple[float, float]]
    excluded: list[float]
    monotone: bool


def curvature_budget_at_launch(spec: ProblemSpec, delta: float | None = None) -> float:
    """The trace of the Killing-type curvature budget at the launch slice:
    sum A_i / f_i^2 for the two-summands system, sum d_i p_i / g_i(0)^2 for
    circle bundles (the warped factor contributing d2 (d2 - 1) / g2(0)^2)."""
    from .launch import default_delta, launch

    a = spec.ansatz
    if isinstance(a, TwoSummandsAnsatz):
        state = launch(spec, default_delta(spec) if delta is None else delta)
        return float(a.A1 / state.f[0] ** 2 + a.A2 / state.f[1] ** 2)
    if isinstance(a, DancerWangAnsatz):
        return float(
            sum(d * p / g**2 for d, p, g in zip(a.d, a.p, spec.initial))
        )
    if isinstance(a, LuPagePopeAnsatz):
        g1, g2 = spec.initial
        return float(a.d1 * a.p1 / g1**2 + a.d2 * (a.d2 - 1.0) / g2**2)
    raise TypeError(f"unknown ansatz type {type(a)!r}")


def growth_probe(
    spec: ProblemSpec,
    c: float,
    tau: float,
    rel_tol: float = 1e-11,
    abs_tol: float = 1e-13,
    delta: float | None = None,
    c_start: float = -0.125,
    c_limit: float = -1e9,
    bracket_rel: float = 0.01,
    map_fn=map,
) -> GrowthProbeReport:
    """Bracket the weakest conservation constant driving -udot(tau) >= c.

    Scans a geometric grid of C values, then bisects in log|C| until the
    fail/success bracket is 1% tight.  Runs whose shape operator loses
    positivity before tau are excluded and reported.  ``map_fn`` lets the
    caller evaluate grid points concurrently; results are merged in grid
    order either way.
    """
    if c <= 0 or tau <= 0:
        raise ValueError("slope target c and probe time tau must be positive")

    def slope_of(C):
        t = solve_problem(spec.with_C(C), t_max=tau, rel_tol=rel_tol, abs_tol=abs_tol, delta=delta)
        if not t.reached_horizon or not np.all(t.df > 0.0):
            return None
        return float(-t.du[-1])

    samples: dict[float, float] = {}
    excluded: list[float] = []

    def evaluate(cs):
        cs = [C for C in cs if C not in samples and C not in excluded]
        for C, s in zip(cs, map_fn(slope_of, cs)):
            if s is None:
                excluded.append(C)
            else:
                samples[C] = s

    grid = []
    C = c_start
    while C > c_limit:
        grid.append(C)
        C *= 2.0
    evaluate(grid)
    succ = [C for C, s in samples.items() if s >= c]
    if not succ:
        raise ProbeRangeError(
            f"no admissible C in ({c_limit:g}, {c_start:g}] reaches -udot({tau:g}) >= {c:g}"
        )
    c_success = max(succ)  # weakest (closest to zero) success so far
    fails = [C for C, s in samples.items() if s < c and C > c_success]
    c_fail = min(fails) if fails else None
    if c_fail is not None:
        while (c_fail - c_success) > bracket_rel * abs(c_success):
            mid = -np.sqrt(c_fail * c_success)  # geometric midpoint, both negative
            evaluate([mid])
            if mid in excluded:
                break
            if samples[mid] >= c:
                c_success = mid
            else:
                c_fail = mid
    ordered = sorted(samples.items())  # most negative first
    slopes = [s for _, s in ordered]
    monotone = all(a >= b - 1e-12 for a, b in zip(slopes, slopes[1:]))
    return GrowthProbeReport(
        anchor="empirical threshold on the conservation constant prescribing the potential's slope",
        c=float(c),
        tau=float(tau),
        c_star=curvature_budget_at_launch(spec, delta),
        empirical_C0=float(c_success),
        bracket=(None if c_fail is None else float(c_fail), float(c_success)),
        samples=[(float(k), float(v)) for k, v in ordered],
        excluded=sorted(excluded),
        monotone=bool(monotone),
    )
