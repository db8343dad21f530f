"""Single runs, tail-coefficient sweeps and taxis-free baselines.

Every run is described by a picklable :class:`Case` so sweeps can fan out
over a process pool; :func:`run_case` never raises for numerical trouble,
it records the error on the result instead.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .comparison import expand_procedure, shrink_procedure
from .config import RunConfig
from .errors import FrontlabError, InfeasibleError
from .front import (
    FrontTrace,
    FrontVerdict,
    EnvelopeReport,
    envelope_check,
    estimate_speed,
    fraction_window,
    front_trace,
    sign_change_bracket,
)
from .model import EXPAND, SHRINK, MassData, ModelParams, a_crit, c_crit, tail_to_mass_coefficient
from .profiles import (
    RadialProfile,
    calibrate_plateau,
    check_initial_bound,
    constant_profile,
    make_profile,
    transform_to_w,
    uniform_grid,
)
from .solver import SolverOptions, Trajectory, integrate

__all__ = ["Case", "CaseResult", "initial_data", "make_case", "run_case", "run_cases", "sweep_cases", "sweep_summary"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Case:
    run_id: str
    n: int
    R: float
    m: float
    shape: str
    target_mass: Optional[float]
    B: Optional[float]
    r_plateau: float
    r0: float
    r1: float
    alpha: float
    A: Optional[float]
    A_ratio: Optional[float]
    eps: float
    N: int
    T: float
    n_out: int
    taus: tuple
    window: tuple
    min_cells: float
    safety: float = 0.45
    max_steps: int = 10_000_000
    taxis: bool = True
    envelope: bool = True

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.n, self.R, self.m)


@dataclass
class CaseResult:
    case: Case
    info: dict = field(default_factory=dict)
    trajectory: Optional[Trajectory] = None
    traces: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    envelope: Optional[EnvelopeReport] = None
    envelope_info: dict = field(default_factory=dict)
    error: Optional[str] = None
    error_kind: Optional[str] = None
    dump: Optional[tuple] = None
    seconds: float = 0.0

    @property
    def primary(self) -> Optional[FrontVerdict]:
        return self.verdicts.get(self.case.taus[0]) if self.case.taus else None


def make_case(cfg: RunConfig, run_id: str, eps: float, **overrides) -> Case:
    base = dict(
        run_id=run_id,
        n=cfg.n,
        R=cfg.R,
        m=cfg.m,
        shape=cfg.shape,
        target_mass=cfg.target_mass,
        B=cfg.B,
        r_plateau=cfg.r_plateau,
        r0=cfg.r0,
        r1=cfg.r1,
        alpha=cfg.tail_alpha,
        A=cfg.A,
        A_ratio=cfg.A_ratio,
        eps=eps,
        N=cfg.N,
        T=cfg.T,
        n_out=cfg.n_out,
        taus=tuple(cfg.tau),
        window=tuple(cfg.window),
        min_cells=cfg.min_cells,
        safety=cfg.safety,
        max_steps=cfg.max_steps,
    )
    base.update(overrides)
    return Case(**base)


def initial_data(case: Case):
    """Profile, transformed grid function and derived constants for ``case``."""
    p = case.params
    info: dict = {}
    if case.shape == "constant":
        if case.B is not None:
            c = case.B
        else:
            c = case.target_mass / p.volume
        prof = constant_profile(p, c)
        w0 = transform_to_w(p, prof, uniform_grid(p, case.N))
        info.update(B=c, mu=w0.mu_Rn / p.Rn, total_mass=c * p.volume)
        return prof, w0, info

    # the critical coefficient depends on mass only, so resolve it first
    if case.target_mass is not None:
        md = MassData.from_mass(p, case.target_mass)
    else:
        md = None
    if case.A is not None:
        A = case.A
    else:
        if md is None:
            raise InfeasibleError("A_ratio needs target_mass so the threshold is known")
        A = case.A_ratio * a_crit(p, md, case.r1)
    if case.B is not None:
        B = case.B
    else:
        B = calibrate_plateau(p, case.target_mass, A, case.alpha, case.r_plateau, case.r0, case.r1)
    prof = make_profile(p, B, case.r_plateau, A, case.alpha, case.r0, case.r1)
    w0 = transform_to_w(p, prof, uniform_grid(p, case.N))
    mu = w0.mu_Rn / p.Rn
    md = MassData.from_mu(p, mu)
    ac = a_crit(p, md, case.r1) if mu > 0.0 else math.nan
    info.update(
        A=A,
        B=B,
        mu=mu,
        total_mass=md.total_mass,
        A_crit=ac,
        A_over_A_crit=A / ac if ac > 0.0 else math.nan,
        C_crit=c_crit(p, mu, case.r1),
    )
    return prof, w0, info


def _admissible_horizon(traj: Trajectory, s0: float, target: float, below: bool) -> float:
    """Last snapshot time up to which ``w(s0, t)`` stays on the required side
    of ``target`` (above unless ``below``)."""
    t_ok = 0.0
    for t, g in traj.snapshots:
        val = float(np.interp(s0, g.s, g.values))
        ok = val <= target if below else val >= target
        if not ok:
            break
        t_ok = t
    return t_ok


def envelope_for(case: Case, info: dict, w0, traj: Trajectory) -> tuple:
    """Limit-envelope comparison for pure ``1/(m-1)`` tails.

    Returns ``(report, details)``; ``report`` is ``None`` when no envelope
    applies (critical coefficient, other exponents).
    """
    p = case.params
    if case.shape != "tail" or not math.isclose(case.alpha, 1.0 / (p.m - 1.0), rel_tol=1e-12):
        return None, {"skipped": "tail exponent differs from 1/(m-1)"}
    mu, A, r1 = info["mu"], info["A"], case.r1
    n = p.n
    cc = info["C_crit"]
    if A < info["A_crit"]:
        C = tail_to_mass_coefficient(p, A, case.r0, r1, SHRINK)
        if not C < cc:
            return None, {"skipped": "mapped coefficient not below C_crit"}
        proc = shrink_procedure(p, mu, r1, C)
        r0 = max(case.r0, proc.selection.r_min)
        if r0 != proc.r0:
            proc = shrink_procedure(p, mu, r1, C, r0=r0)
        bound = check_initial_bound(p, w0, C, proc.r0, r1, "lower")
        t_ok = _admissible_horizon(traj, proc.r0**n, proc.left_target(), below=False)
        t_max = min(proc.t_cap, t_ok)
        rep = envelope_check(
            traj, p, mu, proc.envelope_coef, r1, proc.theta, (proc.r0**n, r1**n), "lower", t_max
        )
        details = dict(
            kind="shrink",
            C=C,
            inflation=proc.inflation,
            envelope_coef=proc.envelope_coef,
            theta=proc.theta,
            r0=proc.r0,
            t_cap=proc.t_cap,
            t_admissible=t_ok,
            initial_bound=bound.holds,
            checks_passed=all(proc.checks.values()),
            **{f"sel_{k}": v for k, v in proc.selection.to_dict().items()},
        )
        return rep, details
    if A > info["A_crit"]:
        C = tail_to_mass_coefficient(p, A, case.r0, r1, EXPAND)
        if not C > cc:
            return None, {"skipped": "mapped coefficient not above C_crit"}
        proc = expand_procedure(p, mu, r1, C)
        r0 = max(case.r0, proc.selection.r_min)
        if r0 != proc.r0:
            proc = expand_procedure(p, mu, r1, C, r0=r0)
        bound = check_initial_bound(p, w0, C, proc.r0, r1, "upper")
        t_ok = _admissible_horizon(traj, proc.r0**n, proc.left_target(), below=True)
        t_max = min(proc.t_cap, t_ok)
        rep = envelope_check(
            traj, p, mu, proc.envelope_coef, r1, proc.theta, (proc.r0**n, p.Rn), "upper", t_max
        )
        details = dict(
            kind="expand",
            C=C,
            inflation=proc.inflation,
            envelope_coef=proc.envelope_coef,
            theta=proc.theta,
            r0=proc.r0,
            t_cap=proc.t_cap,
            t_admissible=t_ok,
            initial_bound=bound.holds,
            checks_passed=all(proc.checks.values()),
            **{f"sel_{k}": v for k, v in proc.selection.to_dict().items()},
        )
        return rep, details
    return None, {"skipped": "coefficient exactly critical"}


def run_case(case: Case) -> CaseResult:
    res = CaseResult(case)
    start = time.perf_counter()
    try:
        prof, w0, info = initial_data(case)
        res.info = info
        p = case.params
        times = [case.T * k / case.n_out for k in range(case.n_out + 1)]
        opts = SolverOptions(case.safety, case.max_steps, case.taxis)
        cfg = dict(run_id=case.run_id, **{k: v for k, v in info.items()})
        traj = integrate(p, w0, case.eps, case.T, times, opts, cfg)
        res.trajectory = traj
        window = fraction_window(case.T, case.window)
        for tau in case.taus:
            tr = front_trace(traj, tau, p.n, case.run_id)
            res.traces[tau] = tr
            res.verdicts[tau] = estimate_speed(tr, window, case.min_cells)
        if case.envelope and case.taxis:
            res.envelope, res.envelope_info = envelope_for(case, info, w0, traj)
    except FrontlabError as exc:
        res.error = str(exc)
        res.error_kind = type(exc).__name__
        t = getattr(exc, "t", None)
        vals = getattr(exc, "values", None)
        if vals is not None:
            res.dump = (t, np.asarray(vals))
        log.warning("run %s failed: %s", case.run_id, exc)
    res.seconds = time.perf_counter() - start
    return res


def run_cases(cases, jobs: int = 1) -> list:
    """Run cases in order; ``jobs > 1`` uses a process pool."""
    cases = list(cases)
    if jobs <= 1 or len(cases) <= 1:
        return [run_case(c) for c in cases]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_case, cases))


def sweep_cases(cfg: RunConfig) -> list:
    cases = []
    for ratio in cfg.ratios:
        for eps in cfg.eps:
            rid = f"ratio{ratio:g}_eps{eps:g}"
            cases.append(make_case(cfg, rid, eps, A=None, A_ratio=ratio))
    return cases


def sweep_summary(results: list) -> dict:
    """Per-eps sign-change bracket of the fitted front slope over the ratios."""
    by_eps: dict = {}
    for r in results:
        v = r.primary
        slope = v.slope if v is not None else math.nan
        by_eps.setdefault(r.case.eps, []).append((r.case.A_ratio, slope))
    out = {}
    for eps, pairs in sorted(by_eps.items()):
        ratios, slopes = zip(*pairs)
        out[eps] = sign_change_bracket(ratios, slopes)
    return out


def baseline_cases(cfg: RunConfig) -> list:
    """Taxis on/off pair at the smallest eps plus taxis-off runs for extra exponents."""
    eps = min(cfg.eps)
    cases = [
        make_case(cfg, "taxis_on", eps, taxis=True),
        make_case(cfg, "taxis_off", eps, taxis=False),
    ]
    for a in cfg.baseline_alphas:
        cases.append(make_case(cfg, f"taxis_off_alpha{a:g}", eps, alpha=a, taxis=False))
    return cases
