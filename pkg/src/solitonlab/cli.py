"""Command-line front end: single solves, parameter sweeps, growth probes
and curvature queries.

Exit codes: 0 success or matched expectation, 1 unexpected error,
2 invariant-set exit / unmet verdict, 3 probe found no admissible constant,
64 malformed config, 65 decomposition validation failure, 70 integrator
failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import json
import os
import sys

import numpy as np

from . import __version__
from .geometry import load_decomposition, ricci_eigenvalues, scalar_curvature, validate
from .monitors import ProbeRangeError, growth_probe
from .runio import (
    ConfigError,
    load_config,
    exit_code_for,
    run_id_of,
    run_solve,
    write_json,
    _atomic_write,
    _fmt,
)

EX_OK = 0
EX_ERROR = 1
EX_VERDICT = 2
EX_NO_ADMISSIBLE_C = 3
EX_CONFIG = 64
EX_DATA = 65
EX_SOLVER = 70


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_solve(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EX_CONFIG, str(exc))
    try:
        manifest = run_solve(cfg, args.out, plot=args.plot)
    except (ArithmeticError, RuntimeError) as exc:
        return _fail(EX_SOLVER, f"integration failed: {exc}")
    print(
        f"run {manifest['run_id']}: verdict={manifest['verdict']} "
        f"termination={manifest['termination']} out={args.out}"
    )
    if manifest["verdict"] == "inconclusive" and manifest.get("expect") is None:
        reasons = "; ".join(r for r in manifest.get("reasons", [])) or "see report.json"
        print(f"note: inconclusive ({reasons})")
    return exit_code_for(manifest)


def _parse_grid(expr: str):
    # PARAM=start:step:count
    try:
        param, rng = expr.split("=", 1)
        start, step, count = rng.split(":")
        return param.strip(), float(start), float(step), int(count)
    except ValueError:
        raise ConfigError(f"grid spec {expr!r} is not PARAM=start:step:count") from None


def _apply_param(doc: dict, param: str, value: float):
    out = copy.deepcopy(doc)
    if param == "C":
        out["C"] = value
        return out
    initial = out["initial"]
    if param == "fbar":
        if isinstance(initial, list):
            raise ConfigError("grid parameter 'fbar' applies to a scalar 'initial'")
        out["initial"] = value
        return out
    if param.startswith("g") and param[1:].isdigit():
        idx = int(param[1:]) - 1
        sizes = list(initial) if isinstance(initial, list) else [initial]
        if not 0 <= idx < len(sizes):
            raise ConfigError(f"grid parameter {param!r} is out of range for 'initial'")
        sizes[idx] = value
        out["initial"] = sizes
        return out
    raise ConfigError(f"unknown grid parameter {param!r} (use C, fbar or g<i>)")


def _run_cell(doc: dict, outdir: str):
    cfg = load_config(doc)
    return run_solve(cfg, outdir)


def cmd_sweep(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            base = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EX_CONFIG, f"cannot read config: {exc}")
    try:
        grids = [_parse_grid(g) for g in args.grid]
        axes = [
            [(param, start + i * step) for i in range(count)]
            for param, start, step, count in grids
        ]
        cells: list[tuple[dict, list[tuple[str, float]]]] = [(base, [])]
        for axis in axes:
            cells = [
                (_apply_param(doc, param, value), coords + [(param, value)])
                for doc, coords in cells
                for param, value in axis
            ]
        for doc, _ in cells:
            load_config(doc)  # validate every cell up front
    except ConfigError as exc:
        return _fail(EX_CONFIG, str(exc))

    os.makedirs(args.out, exist_ok=True)
    jobs = max(1, args.jobs)
    results: list[dict | None] = [None] * len(cells)
    cell_dirs = [os.path.join(args.out, f"cell_{i:04d}") for i in range(len(cells))]
    if jobs == 1:
        for i, (doc, _) in enumerate(cells):
            try:
                results[i] = _run_cell(doc, cell_dirs[i])
            except Exception as exc:  # keep sweeping past individual failures
                results[i] = {"error": str(exc)}
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_cell, doc, cell_dirs[i]) for i, (doc, _) in enumerate(cells)
            ]
            for i, fut in enumerate(futures):  # merge in grid order
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    results[i] = {"error": str(exc)}

    params = [param for param, *_ in grids]
    header = params + ["cell", "verdict", "termination", "terminal_du", "max_conservation_residual"]
    lines = [",".join(header)]
    n_err = 0
    for i, ((_, coords), manifest) in enumerate(zip(cells, results)):
        values = [_fmt(v) for _, v in coords]
        if manifest is None or "error" in manifest:
            n_err += 1
            lines.append(",".join(values + [f"cell_{i:04d}", "error", "error", "nan", "nan"]))
            continue
        key = manifest["key_diagnostics"]
        lines.append(
            ",".join(
                values
                + [
                    f"cell_{i:04d}",
                    manifest["verdict"],
                    manifest["termination"],
                    _fmt(key["terminal_du"]),
                    _fmt(key["max_conservation_residual"] or float("nan")),
                ]
            )
        )
    _atomic_write(os.path.join(args.out, "sweep_summary.csv"), "\n".join(lines) + "\n")
    print(f"sweep: {len(cells)} cells, {n_err} failed, summary in {args.out}/sweep_summary.csv")
    return EX_OK if n_err == 0 else EX_ERROR


def cmd_probe_c0(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EX_CONFIG, str(exc))
    if args.c <= 0 or args.tau <= 0:
        return _fail(EX_CONFIG, "probe needs --c > 0 and --tau > 0")
    os.makedirs(args.out, exist_ok=True)
    try:
        report = growth_probe(
            cfg.spec,
            c=args.c,
            tau=args.tau,
            rel_tol=cfg.rel_tol,
            abs_tol=cfg.abs_tol,
            delta=cfg.launch_delta,
        )
    except ProbeRangeError as exc:
        return _fail(EX_NO_ADMISSIBLE_C, str(exc))
    write_json(os.path.join(args.out, "probe_report.json"), report)
    lines = ["C,slope_at_tau"]
    lines += [",".join((_fmt(c), _fmt(s))) for c, s in report.samples]
    _atomic_write(os.path.join(args.out, "probe_samples.csv"), "\n".join(lines) + "\n")
    print(
        f"probe: empirical_C0={_fmt(report.empirical_C0)} "
        f"bracket=({report.bracket[0]}, {_fmt(report.bracket[1])}) "
        f"samples={len(report.samples)} monotone={report.monotone}"
    )
    return EX_OK


def cmd_curvature(args) -> int:
    try:
        dec = load_decomposition(args.decomposition)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(EX_CONFIG, f"cannot load decomposition: {exc}")
    report = validate(dec)
    if report.symmetry_violations or report.negativity_violations:
        for v in report.symmetry_violations:
            print(f"symmetry violation: {v}", file=sys.stderr)
        for v in report.negativity_violations:
            print(f"sign violation: {v}", file=sys.stderr)
        return EX_DATA
    try:
        x = [float(v) for v in args.x.split(",")]
        s = scalar_curvature(dec, x)
        r = ricci_eigenvalues(dec, x)
    except ValueError as exc:
        return _fail(EX_CONFIG, str(exc))
    print(f"scalar_curvature: {_fmt(s)}")
    print("ricci_eigenvalues: " + ", ".join(_fmt(v) for v in r))
    if report.wang_ziller_residuals is not None:
        print(
            "wang_ziller_residuals: "
            + ", ".join(_fmt(v) for v in report.wang_ziller_residuals)
        )
    if dec.metadata:
        print(f"metadata: {dec.metadata}")
    return EX_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="solitonlab",
        description="construct and verify cohomogeneity-one gradient Ricci soliton trajectories",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one config and write trajectory, report, manifest")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true", help="also write a minimal SVG line plot")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("sweep", help="run a parameter grid of solves")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", action="append", required=True, metavar="PARAM=start:step:count")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("probe-c0", help="bracket the conservation constant reaching a slope target")
    p.add_argument("--config", required=True)
    p.add_argument("--c", type=float, required=True, help="slope target (> 0)")
    p.add_argument("--tau", type=float, required=True, help="probe time (> launch delta)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_probe_c0)

    p = sub.add_parser("curvature", help="evaluate curvature of a decomposition file")
    p.add_argument("--decomposition", required=True)
    p.add_argument("--x", required=True, help="comma-separated metric scalings")
    p.set_defaults(fn=cmd_curvature)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        return EX_ERROR
    except Exception as exc:  # CLI contract: unexpected errors exit 1
        return _fail(EX_ERROR, f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
