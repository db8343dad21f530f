"""Command line front-end: ``frontlab simulate|sweep|verify|baseline``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure (a state dump is written next to the artifacts).
"""

from __future__ import annotations

import argparse
import logging
import platform
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigError, DomainError, FrontlabError
from .experiments import (
    CaseResult,
    baseline_cases,
    initial_data,
    make_case,
    run_cases,
    sweep_cases,
    sweep_summary,
)
from .front import check_tau
from .io import write_csv, write_sidecar
from .model import MassData
from .plotting import emit_plots, figure_profiles, figure_sweep, figure_traces
from .verification import run_all

__all__ = ["main", "build_parser"]

log = logging.getLogger("frontlab")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

VERDICT_COLUMNS = [
    "run_id",
    "A_ratio",
    "eps",
    "tau",
    "classification",
    "zeta",
    "residual",
    "slope",
    "s_slope",
    "displacement_cells",
    "window_start",
    "window_end",
    "taxis",
    "alpha",
    "envelope",
    "error",
]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frontlab", description="Free-boundary experiments for radial chemotaxis with degenerate diffusion.")
    ap.add_argument("--version", action="version", version=f"frontlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (
        ("simulate", "run the configured profile at every eps"),
        ("sweep", "sweep the tail coefficient across the threshold"),
        ("verify", "run the seeded invariant suites"),
        ("baseline", "contrast the run with its taxis-free counterpart"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="INI run configuration")
        sp.add_argument("--out", default=None, help="output directory (overrides [output] directory)")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def _meta(cfg: RunConfig, extra: Optional[dict] = None) -> dict:
    meta = {f"config.{k}": v for k, v in cfg.to_dict().items()}
    if extra:
        meta.update(extra)
    return meta


def _check_band(cfg: RunConfig) -> None:
    if cfg.shape != "tail" or cfg.target_mass is None:
        return
    p = cfg.params
    mu = MassData.from_mass(p, cfg.target_mass).mu
    try:
        check_tau(p, mu, cfg.r1, max(cfg.tau), min(cfg.eps))
    except DomainError as exc:
        raise ConfigError(f"saturation band too wide: {exc}") from exc


def _verdict_rows(res: CaseResult) -> list:
    c = res.case
    env = "" if res.envelope is None else ("pass" if res.envelope.passed else "fail")
    if res.error:
        return [[c.run_id, c.A_ratio, c.eps, c.taus[0], "Error", "", "", "", "", "", "", "", c.taxis, c.alpha, env, res.error]]
    rows = []
    for tau, v in res.verdicts.items():
        rows.append(
            [
                c.run_id,
                c.A_ratio if c.A_ratio is not None else res.info.get("A_over_A_crit"),
                c.eps,
                tau,
                v.classification,
                v.zeta,
                v.residual,
                v.slope,
                v.s_slope,
                v.displacement_cells,
                v.window[0],
                v.window[1],
                c.taxis,
                c.alpha,
                env,
                "",
            ]
        )
    return rows


def _write_run(res: CaseResult, out: Path, cfg: RunConfig, snapshots: bool) -> dict:
    """Per-run artifacts; returns the paths written by kind."""
    c = res.case
    run_dir = out / c.run_id
    meta = _meta(cfg, {f"derived.{k}": v for k, v in res.info.items()})
    meta.update({f"envelope.{k}": v for k, v in res.envelope_info.items()})
    meta.update({"run.run_id": c.run_id, "run.eps": c.eps, "run.taxis": c.taxis, "run.alpha": c.alpha})
    paths: dict = {"snapshots": [], "traces": []}
    if res.dump is not None:
        t, vals = res.dump
        write_csv(run_dir / f"{c.run_id}_dump.csv", ["index", "w"], enumerate(vals.tolist()), dict(meta, **{"dump.t": t}))
    if res.trajectory is None:
        return paths
    traj = res.trajectory
    if res.trajectory.stats is not None:
        st = res.trajectory.stats
        meta.update(
            {
                "solver.steps": st.steps,
                "solver.repair_events": st.repair_events,
                "solver.repaired_mass": st.repaired_mass,
                "solver.max_cfl_ratio": st.max_cfl_ratio,
            }
        )
    if snapshots:
        for k, (t, g) in enumerate(traj.snapshots):
            path = write_csv(run_dir / f"{c.run_id}_t{k:04d}.csv", ["s", "w"], zip(g.s, g.values), dict(meta, **{"snapshot.t": t}))
            paths["snapshots"].append(path)
        prof, w0, _ = initial_data(c)
        r = w0.s ** (1.0 / c.n)
        write_csv(run_dir / "initial_density.csv", ["r", "u0"], zip(r, prof(r)), meta)
    for tau, tr in res.traces.items():
        path = write_csv(run_dir / f"front_tau{tau:g}.csv", ["t", "s_front", "r_front"], tr.rows(), dict(meta, **{"trace.tau": tau}))
        paths["traces"].append(path)
    if res.envelope is not None:
        rows = [(t, e, tol) for t, e, tol in res.envelope.per_snapshot]
        write_csv(
            run_dir / "envelope.csv",
            ["t", "worst_excess", "tolerance"],
            rows,
            dict(meta, **{"envelope.passed": res.envelope.passed, "envelope.direction": res.envelope.direction}),
        )
    return paths


def _figures(out: Path, results: list, cfg: RunConfig, tag: str) -> None:
    traces = {r.case.run_id: r.traces[r.case.taus[0]] for r in results if r.traces}
    if traces:
        figure_traces(out / f"{tag}_fronts.png", traces, cfg.r1, title=f"{tag}: front radius")
    for r in results:
        if r.trajectory is not None:
            snaps = r.trajectory.snapshots
            pick = snaps[:: max(1, len(snaps) // 8)]
            figure_profiles(out / r.case.run_id / "profiles.png", pick, title=r.case.run_id)


def _sidecar(out: Path, command: str, results: list, started: float, seed: int) -> None:
    write_sidecar(
        out / "run_meta.json",
        {
            "command": command,
            "seed": seed,
            "wall_seconds": time.time() - started,
            "python": platform.python_version(),
            "host": platform.node(),
            "runs": {r.case.run_id: r.seconds for r in results},
        },
    )


def _numeric_status(results: list) -> int:
    bad = [r for r in results if r.error_kind in ("NumericalFailure", "BudgetError")]
    for r in bad:
        print(f"numerical failure in {r.case.run_id}: {r.error}", file=sys.stderr)
    return EXIT_NUMERIC if bad else EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path, jobs: int, seed: int) -> int:
    started = time.time()
    _check_band(cfg)
    cases = [make_case(cfg, f"eps{e:g}", e) for e in cfg.eps]
    results = run_cases(cases, jobs)
    rows, snaps, traces = [], [], []
    for res in results:
        paths = _write_run(res, out, cfg, cfg.snapshots)
        snaps += paths["snapshots"][:: max(1, len(paths["snapshots"]) // 8)]
        traces += paths["traces"][:1]
        rows += _verdict_rows(res)
        _print_result(res)
    vpath = write_csv(out / "verdicts.csv", VERDICT_COLUMNS, rows, _meta(cfg))
    if cfg.gnuplot:
        emit_plots(out, snaps, traces, vpath, name="simulate")
    if cfg.figures:
        _figures(out, results, cfg, "simulate")
    _sidecar(out, "simulate", results, started, seed)
    return _numeric_status(results)


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int, seed: int) -> int:
    started = time.time()
    _check_band(cfg)
    results = run_cases(sweep_cases(cfg), jobs)
    rows, traces = [], []
    for res in results:
        paths = _write_run(res, out, cfg, False)
        traces += paths["traces"][:1]
        rows += _verdict_rows(res)
        _print_result(res)
    brackets = sweep_summary(results)
    vpath = write_csv(out / "verdicts.csv", VERDICT_COLUMNS, rows, _meta(cfg))
    brows = [(eps, *(b if b else ("", "")), bool(b and b[0] < 1.0 < b[1])) for eps, b in brackets.items()]
    write_csv(out / "bracket.csv", ["eps", "ratio_low", "ratio_high", "contains_one"], brows, _meta(cfg))
    for eps, b in brackets.items():
        print(f"eps={eps:g}: sign change bracket {b if b else 'none'}")
    if cfg.gnuplot:
        emit_plots(out, (), traces, vpath, name="sweep")
    if cfg.figures:
        pts = [(r.case.A_ratio, r.case.eps, r.primary.slope) for r in results if r.primary is not None]
        figure_sweep(out / "sweep_slopes.png", pts, title="fitted front slope vs tail coefficient")
        traces_fig = {r.case.run_id: r.traces[r.case.taus[0]] for r in results if r.traces}
        if traces_fig:
            figure_traces(out / "sweep_fronts.png", traces_fig, cfg.r1)
    _sidecar(out, "sweep", results, started, seed)
    return _numeric_status(results)


def cmd_baseline(cfg: RunConfig, out: Path, jobs: int, seed: int) -> int:
    started = time.time()
    _check_band(cfg)
    results = run_cases(baseline_cases(cfg), jobs)
    rows, traces, snaps = [], [], []
    for res in results:
        paths = _write_run(res, out, cfg, cfg.snapshots)
        traces += paths["traces"][:1]
        snaps += paths["snapshots"][:: max(1, len(paths["snapshots"]) // 4)]
        rows += _verdict_rows(res)
        _print_result(res)
    vpath = write_csv(out / "contrast.csv", VERDICT_COLUMNS, rows, _meta(cfg))
    if cfg.gnuplot:
        emit_plots(out, snaps, traces, vpath, name="baseline")
    if cfg.figures:
        _figures(out, results, cfg, "baseline")
    _sidecar(out, "baseline", results, started, seed)
    return _numeric_status(results)


def cmd_verify(cfg: RunConfig, out: Path, jobs: int, seed: int) -> int:
    started = time.time()
    suites = run_all(seed, cfg.draws)
    rows = []
    for s in suites:
        write_csv(out / "verify" / f"{s.name}.csv", s.columns, s.rows, {"suite": s.name, "seed": seed, "passed": s.passed})
        rows.append((s.name, s.passed, len(s.rows)))
        print(f"{'PASS' if s.passed else 'FAIL'} {s.name} ({len(s.rows)} rows)")
    write_csv(out / "verify" / "summary.csv", ["suite", "passed", "rows"], rows, {"seed": seed})
    write_sidecar(out / "run_meta.json", {"command": "verify", "seed": seed, "wall_seconds": time.time() - started})
    return EXIT_OK if all(s.passed for s in suites) else EXIT_VERIFY


def _print_result(res: CaseResult) -> None:
    if res.error:
        print(f"{res.case.run_id}: error ({res.error_kind}) {res.error}")
        return
    v = res.primary
    env = ""
    if res.envelope is not None:
        env = f" envelope={'pass' if res.envelope.passed else 'fail'}"
    print(
        f"{res.case.run_id}: {v.classification} slope={v.slope:+.4g} "
        f"displacement={v.displacement_cells:+.2f} cells{env}"
    )


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "verify": cmd_verify, "baseline": cmd_baseline}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if cfg.mode is not None and cfg.mode != args.command:
            raise ConfigError(f"config mode {cfg.mode!r} does not match command {args.command!r}")
        out = Path(args.out if args.out else cfg.directory)
        out.mkdir(parents=True, exist_ok=True)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        return COMMANDS[args.command](cfg, out, args.jobs, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FrontlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
