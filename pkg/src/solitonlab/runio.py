"""Run configs, trajectory/report/manifest files, and deterministic output.

All floating-point output uses 17-significant-digit decimal formatting so
re-running a config yields byte-identical CSV.  The manifest is written
atomically and last, after every data file it lists.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import monitors as mon
from .rescaled import (
    compare_charts,
    rescaled_default_delta,
    rescaled_locus_residuals,
    solve_rescaled,
)
from .systems import (
    DancerWangAnsatz,
    LuPagePopeAnsatz,
    ProblemSpec,
    TwoSummandsAnsatz,
    conservation_residual,
    conservation_residual_curvature,
    kahler_residual,
)
from .trajectory import Trajectory, solve_problem

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "run_solve",
    "write_trajectory_csv",
    "write_json",
    "write_svg_plot",
    "run_id_of",
]


class ConfigError(ValueError):
    """Malformed run configuration; the message names the offending field."""


_SYSTEMS = ("two_summands", "dancer_wang", "lpp")
_MONITOR_NAMES = ("conservation", "potential", "locus", "asymptote", "invariant", "kahler")


@dataclass
class RunConfig:
    spec: ProblemSpec
    launch_delta: float | None
    rel_tol: float
    abs_tol: float
    t_max: float
    max_steps: int
    max_step: float
    chart: str
    monitors: tuple[str, ...]
    expect: str | None
    raw: dict


def _need(doc: dict, field: str, kind, ctx: str = ""):
    where = f"{ctx}.{field}" if ctx else field
    if field not in doc:
        raise ConfigError(f"missing field '{where}'")
    value = doc[field]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"field '{where}' must be a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"field '{where}' must be an integer")
        return value
    return value


def _build_ansatz(system: str, doc: dict):
    try:
        if system == "two_summands":
            return TwoSummandsAnsatz(
                d1=_need(doc, "d1", int, "ansatz"),
                d2=_need(doc, "d2", int, "ansatz"),
                A1=_need(doc, "A1", float, "ansatz"),
                A2=_need(doc, "A2", float, "ansatz"),
                A3=_need(doc, "A3", float, "ansatz"),
            )
        if system == "dancer_wang":
            return DancerWangAnsatz(
                d=tuple(_need(doc, "d", list, "ansatz")),
                p=tuple(_need(doc, "p", list, "ansatz")),
                q=tuple(_need(doc, "q", list, "ansatz")),
            )
        return LuPagePopeAnsatz(
            d1=_need(doc, "d1", int, "ansatz"),
            p1=_need(doc, "p1", int, "ansatz"),
            q1=_need(doc, "q1", int, "ansatz"),
            d2=_need(doc, "d2", int, "ansatz"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid 'ansatz' for system '{system}': {exc}") from exc


def load_config(source) -> RunConfig:
    """Parse and validate a run configuration (path, file object or dict)."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            if hasattr(source, "read"):
                doc = json.load(source)
            else:
                with open(source, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    system = _need(doc, "system", str)
    if system not in _SYSTEMS:
        raise ConfigError(f"field 'system' must be one of {_SYSTEMS}, got {system!r}")
    ansatz = _build_ansatz(system, _need(doc, "ansatz", dict))
    initial = doc.get("initial")
    if isinstance(initial, (int, float)) and not isinstance(initial, bool):
        initial = (float(initial),)
    elif isinstance(initial, list):
        initial = tuple(initial)
    else:
        raise ConfigError("field 'initial' must be a number or a list of numbers")
    try:
        spec = ProblemSpec(
            ansatz=ansatz,
            epsilon=_need(doc, "epsilon", float),
            C=_need(doc, "C", float),
            initial=initial,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    integ = doc.get("integrator", {})
    if not isinstance(integ, dict):
        raise ConfigError("field 'integrator' must be an object")
    chart = doc.get("chart", "physical")
    if chart not in ("physical", "rescaled", "both"):
        raise ConfigError("field 'chart' must be physical, rescaled or both")
    if chart != "physical" and not isinstance(ansatz, DancerWangAnsatz):
        raise ConfigError("field 'chart': the rescaled chart exists only for dancer_wang")
    monitors = tuple(doc.get("monitors", _MONITOR_NAMES))
    for name in monitors:
        if name not in _MONITOR_NAMES:
            raise ConfigError(f"field 'monitors': unknown monitor {name!r}")
    expect = doc.get("expect")
    if expect is not None and expect not in (
        "numerically_complete",
        "invariant_set_exit",
        "metric_degenerate",
        "inconclusive",
    ):
        raise ConfigError(f"field 'expect': unknown verdict {expect!r}")
    delta = doc.get("launch_delta")
    if delta is not None and (not isinstance(delta, (int, float)) or delta <= 0):
        raise ConfigError("field 'launch_delta' must be a positive number")
    t_max = integ.get("t_max", 10.0)
    if not isinstance(t_max, (int, float)) or t_max <= 0:
        raise ConfigError("field 'integrator.t_max' must be a positive number")
    return RunConfig(
        spec=spec,
        launch_delta=None if delta is None else float(delta),
        rel_tol=float(integ.get("rel_tol", 1e-11)),
        abs_tol=float(integ.get("abs_tol", 1e-13)),
        t_max=float(t_max),
        max_steps=int(integ.get("max_steps", 200_000)),
        max_step=float(integ.get("max_step", np.inf)),
        chart=chart,
        monitors=monitors,
        expect=expect,
        raw=doc,
    )


# -- formatting -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def run_id_of(config_doc: dict) -> str:
    blob = json.dumps(config_doc, sort_keys=True, separators=(",", ":")) + "|" + __version__
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path: str, payload: dict):
    _atomic_write(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


# -- trajectory CSV -----------------------------------------------------------------


def _trajectory_columns(traj: Trajectory):
    spec = traj.spec
    a = spec.ansatz
    names = a.component_names
    cols = ["t"]
    cols += list(names)
    cols += [f"d{n}" for n in names]
    cols += ["u", "du", "udd", "conservation_residual", "conservation_residual_curvature"]
    cols += ["locus_mean_ratio", "locus_curvature_ratio"]
    if isinstance(a, TwoSummandsAnsatz):
        cols += ["omega", "domega"]
    elif isinstance(a, DancerWangAnsatz):
        cols += [f"omega{i + 1}" for i in range(a.m)]
        cols += [f"kahler_res{i + 1}" for i in range(a.m)]
    else:
        cols += ["omega1"]
    return cols


def _trajectory_rows(traj: Trajectory):
    spec = traj.spec
    a = spec.ansatz
    states = traj.states
    udd = traj.udd
    for i, st in enumerate(states):
        row = [st.t]
        row += list(st.f)
        row += list(st.df)
        row += [st.u, st.du, udd[i]]
        row += [
            conservation_residual(st, udd[i], spec),
            conservation_residual_curvature(st, spec),
        ]
        loc = mon.locus_membership(st, spec)
        row += [loc.mean_curvature_ratio, loc.curvature_ratio]
        if isinstance(a, TwoSummandsAnsatz):
            omega = st.f[0] / st.f[1]
            row += [omega, omega * (st.df[0] / st.f[0] - st.df[1] / st.f[1])]
        elif isinstance(a, DancerWangAnsatz):
            row += list(st.f[0] / st.f[1:])
            row += list(kahler_residual(st, a))
        else:
            row += [st.f[0] / st.f[1]]
        yield row


def write_trajectory_csv(path: str, traj: Trajectory):
    cols = _trajectory_columns(traj)
    lines = [",".join(cols)]
    for row in _trajectory_rows(traj):
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_rescaled_csv(path: str, rtraj):
    a = rtraj.spec.ansatz
    m = a.m
    cols = ["s", "t", "u", "Lc"]
    cols += [f"X{i}" for i in range(m + 1)]
    cols += [f"Y{i}" for i in range(m + 1)]
    cols += ["einstein_linear", "einstein_quadratic"]
    cols += [f"kahler_sq{i + 1}" for i in range(m)] + [f"kahler_slope{i + 1}" for i in range(m)]
    lines = [",".join(cols)]
    for r in rtraj.rescaled_states():
        res = rescaled_locus_residuals(r, a, rtraj.spec.epsilon)
        row = [r.s, r.t, r.u, r.Lc, *r.X, *r.Y, res.einstein_linear, res.einstein_quadratic]
        row += list(res.kahler_square) + list(res.kahler_slope)
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


# -- SVG line plot (no dependencies) --------------------------------------------------


def write_svg_plot(path: str, xs, series: dict, title: str = "", width=900, height=480):
    """Plain polyline plot of several named series against a common abscissa."""
    xs = np.asarray(xs, dtype=float)
    pad = 60
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    lo = min(float(np.min(np.asarray(v))) for v in series.values())
    hi = max(float(np.max(np.asarray(v))) for v in series.values())
    if hi == lo:
        hi = lo + 1.0
    x0, x1 = float(xs[0]), float(xs[-1])
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - lo) / (hi - lo) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{height - pad + 18}" font-size="11">{_fmt(x0)}</text>',
        f'<text x="{width - pad}" y="{height - pad + 18}" text-anchor="end" font-size="11">{_fmt(x1)}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="11">{lo:.4g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="11">{hi:.4g}</text>',
    ]
    for i, (name, ys) in enumerate(series.items()):
        ys = np.asarray(ys, dtype=float)
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"/>')
        parts.append(
            f'<text x="{width - pad + 4}" y="{pad + 16 * i}" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    _atomic_write(path, "\n".join(parts) + "\n")


# -- full solve pipeline ----------------------------------------------------------------


def build_report(traj: Trajectory, cfg: RunConfig) -> dict:
    spec = traj.spec
    a = spec.ansatz
    report: dict = {"checks": []}
    verdict = mon.classify_completeness(traj)
    report["verdict"] = verdict

    def add(name, payload, ok=None):
        report[name] = payload
        entry = {"name": name, "anchor": getattr(payload, "anchor", None)}
        if ok is not None:
            entry["ok"] = bool(ok)
        report["checks"].append(entry)

    if "conservation" in cfg.monitors:
        c = mon.conservation_report(traj)
        add("conservation", c, c.ok)
    if "potential" in cfg.monitors:
        p = mon.potential_report(traj)
        add("potential", p, p.ok)
    if "locus" in cfg.monitors:
        add("locus", mon.locus_report(traj))
    if "asymptote" in cfg.monitors:
        add("asymptote", mon.asymptote_check(traj))
    if "invariant" in cfg.monitors:
        if isinstance(a, TwoSummandsAnsatz):
            add("roots", mon.two_summands_roots(a))
            add("ratio_window", mon.two_summands_omega_monitor(traj))
            add("zero_constant_windows", mon.c0_zero_predicates(a))
        elif isinstance(a, DancerWangAnsatz):
            d = mon.dw_apriori_monitor(traj)
            add("a_priori_bounds", d, d.bound_ok_throughout)
        else:
            b = mon.lpp_bound_monitor(traj)
            add("ratio_bound", b, b.ok)
    if "kahler" in cfg.monitors and isinstance(a, DancerWangAnsatz):
        add("kahler", mon.kahler_report(traj))
    return report


def run_solve(cfg: RunConfig, outdir: str, plot: bool = False) -> dict:
    """Execute one config: solve, monitor, persist.  Returns the manifest."""
    os.makedirs(outdir, exist_ok=True)
    started = time.monotonic()
    # both charts must share one launch slice, so resolve delta up front
    delta = cfg.launch_delta
    if delta is None and cfg.chart != "physical":
        delta = rescaled_default_delta(cfg.spec)
    traj = solve_problem(
        cfg.spec,
        t_max=cfg.t_max,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
        max_steps=cfg.max_steps,
        max_step=cfg.max_step,
        delta=delta,
    )
    report = build_report(traj, cfg)
    artifacts = []

    def emit(name, writer):
        path = os.path.join(outdir, name)
        writer(path)
        artifacts.append(name)

    if cfg.chart in ("physical", "both", "rescaled"):
        emit("trajectory.csv", lambda p: write_trajectory_csv(p, traj))
    if cfg.chart in ("rescaled", "both"):
        rtraj = solve_rescaled(
            cfg.spec,
            t_max=cfg.t_max,
            rel_tol=cfg.rel_tol,
            abs_tol=cfg.abs_tol,
            delta=delta,
        )
        emit("rescaled.csv", lambda p: write_rescaled_csv(p, rtraj))
        if cfg.chart == "both":
            report["chart_comparison"] = compare_charts(
                cfg.spec,
                t_max=cfg.t_max,
                rel_tol=cfg.rel_tol,
                abs_tol=cfg.abs_tol,
                delta=delta,
            )
            report["checks"].append(
                {
                    "name": "chart_comparison",
                    "anchor": report["chart_comparison"].anchor,
                    "ok": bool(report["chart_comparison"].max_rel_deviation <= 1e-6),
                }
            )
    if plot:
        emit(
            "trajectory.svg",
            lambda p: write_svg_plot(
                p,
                traj.ts,
                {n: traj.f[:, i] for i, n in enumerate(cfg.spec.ansatz.component_names)}
                | {"-du": -traj.du},
                title="metric components and potential slope",
            ),
        )
    emit("report.json", lambda p: write_json(p, report))

    verdict = report["verdict"]
    cons = report.get("conservation")
    manifest = {
        "run_id": run_id_of(cfg.raw),
        "tool_version": __version__,
        "config": cfg.raw,
        "verdict": verdict.kind,
        "expect": cfg.expect,
        "expectation_matched": None if cfg.expect is None else verdict.kind == cfg.expect,
        "termination": traj.termination,
        "launch_delta": traj.delta,
        "key_diagnostics": {
            "t_end": float(traj.ts[-1]),
            "terminal_du": float(traj.du[-1]),
            "max_conservation_residual": None if cons is None else cons.max_abs_residual,
            "max_locus_einstein_residual": (
                report["locus"].max_einstein_residual if "locus" in report else None
            ),
            "n_accepted": traj.result.n_accepted,
            "n_rejected": traj.result.n_rejected,
        },
        "artifacts": artifacts + ["manifest.json"],
        "wall_time_s": time.monotonic() - started,
    }
    write_json(os.path.join(outdir, "manifest.json"), manifest)
    return manifest


def exit_code_for(manifest: dict) -> int:
    """0 when complete or the stated expectation matched, 2 otherwise."""
    if manifest.get("expectation_matched"):
        return 0
    if manifest["verdict"] == "numerically_complete" and manifest.get("expect") is None:
        return 0
    return 2
