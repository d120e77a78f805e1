"""Command-line front end.

Subcommands::

    gradflow run <cfg>
    gradflow converge <cfg> --tau-list t1,t2,... --ref-tau t
    gradflow compare <cfg> --corrections baseline,relax:0.5,eop

Exit codes: 0 completion, 1 configuration errors, 2 runtime failures
(linear-solver breakdown, quadratization shift too small).  Reference
solutions for error studies are generated on demand by the same binary; no
stored goldens.  ``GRADFLOW_THREADS`` caps worker parallelism for the
multi-case commands.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import diagnostics, io, models, report
from .config import (ConfigError, RunConfig, build_grid, build_initial,
                     build_model, build_scheme, parse_config)
from .linsolve import ConvergenceError
from .models import NegativeRadicandError
from .timestep import validate_scheme


def _max_workers() -> int:
    try:
        return max(1, int(os.environ.get("GRADFLOW_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, cases):
    """Ordered map, optionally threaded (results merged by case order)."""
    workers = _max_workers()
    if workers > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, cases))
    return [fn(c) for c in cases]


def _setup(config_path) -> tuple[RunConfig, object, object, object, np.ndarray]:
    cfg = parse_config(config_path)
    try:
        grid = build_grid(cfg)
        model = build_model(cfg)
        scheme = build_scheme(cfg)
        validate_scheme(scheme, model)
        phi0 = build_initial(cfg, grid)
    except ValueError as exc:
        raise ConfigError(str(exc), path=config_path)
    return cfg, grid, model, scheme, phi0


def _snapshot_writer(out_dir: Path, grid, tau):
    def write(n, phi):
        io.write_snapshot(out_dir / f"snap_{n:08d}.gfs", grid, phi, n * tau)
    return write


def cmd_run(args) -> int:
    cfg, grid, model, scheme, phi0 = _setup(args.config)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    on_snapshot = None
    if cfg.snapshot_every:
        on_snapshot = _snapshot_writer(out, grid, cfg.tau)
    state, rows = diagnostics.run_trace(
        model, grid, scheme, phi0, trace_every=cfg.trace_every,
        snapshot_every=cfg.snapshot_every, on_snapshot=on_snapshot)
    io.write_trace(out / "trace.csv", rows)

    if args.figures:
        label = f"{cfg.model}/{cfg.stepper}/{cfg.correction}"
        report.save_field(out / "field.png", grid, state.phi,
                          title=f"{label}  t={state.n * cfg.tau:g}")
        if rows:
            report.save_trace(out / "trace.png", rows, title=label)

    print(f"run complete: {state.n} steps, outputs in {out}")
    return 0


def cmd_converge(args) -> int:
    cfg, grid, model, scheme, phi0 = _setup(args.config)
    try:
        tau_list = [float(t) for t in args.tau_list.split(",") if t]
        ref_tau = float(args.ref_tau)
    except ValueError as exc:
        raise ConfigError(f"bad tau list/reference: {exc}")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    try:
        rows = diagnostics.converge(model, grid, scheme, phi0, tau_list,
                                    ref_tau, workers=_max_workers())
    except ValueError as exc:
        raise ConfigError(str(exc))

    lines = ["tau,err_phi,rate_phi,err_q,rate_q"]
    for r in rows:
        lines.append(",".join([
            format(r.tau, ".17g"), format(r.err_phi, ".17g"),
            "" if r.rate_phi is None else format(r.rate_phi, ".6g"),
            format(r.err_q, ".17g"),
            "" if r.rate_q is None else format(r.rate_q, ".6g"),
        ]))
    table = "\n".join(lines) + "\n"
    sys.stdout.write(table)
    (out / "convergence.csv").write_text(table, encoding="utf-8")

    if args.figures:
        report.save_convergence(out / "convergence.png", rows,
                                title=f"{cfg.model}/{cfg.stepper}/{cfg.correction}")
    return 0


def _parse_corrections(spec: str) -> list[tuple[str, float | None]]:
    out = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, eta_raw = item.partition(":")
        if name not in ("baseline", "relax", "eop"):
            raise ConfigError(f"unknown correction {name!r}")
        eta = None
        if eta_raw:
            if name != "relax":
                raise ConfigError(f"{name} takes no parameter ({item!r})")
            try:
                eta = float(eta_raw)
            except ValueError:
                raise ConfigError(f"bad eta in {item!r}")
            if not (0.0 <= eta <= 1.0):
                raise ConfigError(f"eta={eta} outside [0, 1]")
        out.append((name, eta))
    if not out:
        raise ConfigError("empty corrections list")
    return out


def _label(name: str, eta: float | None) -> str:
    return f"relax_{eta:g}" if name == "relax" and eta is not None else name


def cmd_compare(args) -> int:
    cfg, grid, model, _, phi0 = _setup(args.config)
    corrections = _parse_corrections(args.corrections)
    ref_tau = cfg.tau / 16.0 if args.ref_tau is None else float(args.ref_tau)
    stride = cfg.tau / ref_tau
    if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
        raise ConfigError(f"ref tau {ref_tau} must divide tau {cfg.tau}")
    stride = round(stride)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(case):
        name, eta = case
        scheme = build_scheme(cfg, correction=name, eta=eta)
        try:
            validate_scheme(scheme, model)
        except ValueError as exc:
            raise ConfigError(str(exc))
        _, rows = diagnostics.run_trace(model, grid, scheme, phi0, trace_every=1)
        return rows

    traces = _pmap(one, corrections)

    ref_scheme = replace(build_scheme(cfg, correction="eop"),
                         stepper="cn", tau=ref_tau)
    _, ref_rows = diagnostics.run_trace(model, grid, ref_scheme, phi0,
                                        trace_every=stride)
    ref_e = {r.n // stride: r.e_mod for r in ref_rows}

    labels = [_label(n, e if e is not None else cfg.eta) for n, e in corrections]
    for label, rows in zip(labels, traces):
        io.write_trace(out / f"trace_{label}.csv", rows)

    n_rows = len(traces[0])
    lines = ["n,t," + ",".join(f"abs_err_{lb}" for lb in labels)]
    columns = {lb: [] for lb in labels}
    times = []
    for i in range(n_rows):
        n = traces[0][i].n
        t = traces[0][i].t
        times.append(t)
        errs = []
        for lb, rows in zip(labels, traces):
            err = abs(rows[i].e_mod - ref_e[n])
            columns[lb].append(err)
            errs.append(format(err, ".17g"))
        lines.append(f"{n},{format(t, '.17g')}," + ",".join(errs))
    (out / "compare.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    if args.figures:
        report.save_compare(out / "compare.png", times, columns,
                            title=f"{cfg.model}/{cfg.stepper}, tau={cfg.tau:g}")
    print(f"compare complete: {', '.join(labels)}; outputs in {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradflow",
        description="Pseudo-spectral energy-stable gradient-flow solver")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="path to a key=value run config")
        p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                       default=True, help="render PNG figures next to the CSVs")

    p_run = sub.add_parser("run", help="single simulation")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="temporal convergence study")
    add_common(p_conv)
    p_conv.add_argument("--tau-list", required=True,
                        help="comma-separated step sizes")
    p_conv.add_argument("--ref-tau", required=True, type=float,
                        help="reference step size (energy-optimized CN run)")
    p_conv.set_defaults(func=cmd_converge)

    p_cmp = sub.add_parser("compare", help="correction-strategy comparison")
    add_common(p_cmp)
    p_cmp.add_argument("--corrections", required=True,
                       help="comma list, e.g. baseline,relax:0.5,eop")
    p_cmp.add_argument("--ref-tau", default=None, type=float,
                       help="reference step size (default tau/16)")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, NegativeRadicandError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
