"""Explicit monotone integrator for the regularized mass-accumulation equation.

Update rule at interior node ``i`` of a uniform grid::

    w_i += dt * ( n^2 s_i^(2-2/n) D_i (q_f - q_b) / ds  +  c_i q_up )

with one-sided slopes ``q_b``, ``q_f``, the secant diffusion coefficient
``D_i`` (the divided difference of ``(q + eps)^m / m``), transport speed
``c_i = w_i - mu s_i`` and ``q_up`` the upwind slope.  Endpoints stay
pinned at ``0`` and ``mu R^n``.  A backward min-sweep restores
monotonicity after each step and every clamp is counted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from . import _kernels as K
from .errors import BudgetError, DomainError, NumericalFailure, StepRejected
from .model import ModelParams
from .profiles import GridFunction

__all__ = [
    "SolverOptions",
    "SolverStats",
    "SolverState",
    "Trajectory",
    "cfl_dt",
    "step",
    "integrate",
    "integrate_pme_baseline",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    safety: float = 0.45
    max_steps: int = 10_000_000
    taxis: bool = True

    def __post_init__(self):
        if not 0.0 < self.safety <= 1.0:
            raise DomainError(f"safety must lie in (0, 1], got {self.safety!r}")
        if self.max_steps < 1:
            raise DomainError("max_steps must be positive")


@dataclass
class SolverStats:
    steps: int = 0
    last_dt: float = 0.0
    max_cfl_ratio: float = 0.0
    repair_events: int = 0
    repaired_mass: float = 0.0
    max_repair_jump: float = 0.0

    @classmethod
    def from_array(cls, a) -> "SolverStats":
        return cls(int(a[3]), float(a[4]), float(a[5]), int(a[0]), float(a[1]), float(a[2]))

    def to_array(self):
        return np.array(
            [self.repair_events, self.repaired_mass, self.max_repair_jump, self.steps, self.last_dt, self.max_cfl_ratio],
            dtype=float,
        )


@dataclass
class SolverState:
    p: ModelParams
    grid: GridFunction
    t: float
    eps: float
    stats: SolverStats = field(default_factory=SolverStats)

    @property
    def mu(self) -> float:
        return self.grid.mu_Rn / self.p.Rn


@dataclass
class Trajectory:
    """Snapshots at the requested output times plus the run configuration."""

    snapshots: list
    config: dict = field(default_factory=dict)
    stats: Optional[SolverStats] = None

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    def __len__(self):
        return len(self.snapshots)


def _check_grid(p: ModelParams, g: GridFunction) -> float:
    if not math.isclose(g.s[-1], p.Rn, rel_tol=1e-12):
        raise DomainError("grid must end at R**n")
    if not g.is_uniform:
        raise DomainError("the explicit scheme needs a uniform grid")
    return (g.s[-1] - g.s[0]) / g.N


def cfl_dt(state: SolverState, safety: float = 0.45, taxis: bool = True) -> float:
    """Stable explicit step: ``safety`` times the smaller of the diffusive
    and transport limits over interior nodes."""
    if not 0.0 < safety <= 1.0:
        raise DomainError(f"safety must lie in (0, 1], got {safety!r}")
    g = state.grid
    ds = _check_grid(state.p, g)
    coef = K.diffusion_weights(g.s, state.p.n)
    return safety * K.cfl_unit(g.values, g.s, coef, ds, state.p.m, state.mu, state.eps, taxis)


def step(state: SolverState, dt: float, taxis: bool = True) -> SolverState:
    """One explicit step; returns a new state and leaves ``state`` untouched."""
    g = state.grid
    ds = _check_grid(state.p, g)
    limit = cfl_dt(state, 1.0, taxis)
    if not dt > 0.0 or dt > limit * (1.0 + 1e-12):
        raise StepRejected(f"dt={dt!r} outside (0, {limit!r}]")
    coef = K.diffusion_weights(g.s, state.p.n)
    new = g.values.copy()
    stats = state.stats.to_array()
    status = K.single_step(
        g.values, new, g.s, coef, ds, state.p.m, state.mu, state.eps, dt, taxis, stats
    )
    if status == K.NONFINITE:
        raise NumericalFailure("non-finite values after step", state.t, g.values.copy())
    stats[3] += 1.0
    stats[4] = dt
    stats[5] = max(stats[5], dt / limit)
    return SolverState(
        state.p,
        GridFunction(g.s, new, g.mu_Rn),
        state.t + dt,
        state.eps,
        SolverStats.from_array(stats),
    )


def integrate(
    p: ModelParams,
    w0: GridFunction,
    eps: float,
    T: float,
    output_times: Optional[Iterable[float]] = None,
    opts: SolverOptions = SolverOptions(),
    config: Optional[dict] = None,
) -> Trajectory:
    """Integrate from ``t = 0`` to ``T`` and record snapshots.

    The step sequence is truncated so that every output time is hit
    exactly; no time interpolation is involved.  ``t = 0`` is always the
    first snapshot.
    """
    if not T > 0.0:
        raise DomainError("horizon must be positive")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    ds = _check_grid(p, w0)
    times = sorted({float(x) for x in (output_times if output_times is not None else [T])})
    if times and (times[0] < 0.0 or times[-1] > T * (1.0 + 1e-12)):
        raise DomainError("output times must lie in [0, T]")
    times = [x for x in times if x > 0.0]

    mu = w0.mu_Rn / p.Rn
    w = w0.values.copy()
    coef = K.diffusion_weights(w0.s, p.n)
    stats = np.zeros(6)
    snaps = [(0.0, w0.copy())]
    t = 0.0
    for t_out in times:
        remaining = opts.max_steps - int(stats[3])
        t, status = K.advance(
            w, w0.s, coef, ds, p.m, mu, eps, t, t_out, opts.safety, opts.taxis, remaining, stats
        )
        if status == K.NONFINITE:
            raise NumericalFailure(f"non-finite values near t={t!r}", t, w.copy())
        if status == K.BUDGET:
            raise BudgetError(f"step budget {opts.max_steps} exhausted at t={t!r} < {t_out!r}")
        snaps.append((t_out, GridFunction(w0.s, w.copy(), w0.mu_Rn)))
    st = SolverStats.from_array(stats)
    if st.repair_events:
        log.info("monotonicity repair: %d events, %.3e lowered", st.repair_events, st.repaired_mass)
    cfg = dict(config or {})
    cfg.update(
        n=p.n, R=p.R, m=p.m, eps=eps, mu=mu, N=w0.N, T=T, safety=opts.safety, taxis=opts.taxis
    )
    return Trajectory(snaps, cfg, st)


def integrate_pme_baseline(
    p: ModelParams,
    w0: GridFunction,
    eps: float,
    T: float,
    output_times: Optional[Iterable[float]] = None,
    opts: SolverOptions = SolverOptions(),
    config: Optional[dict] = None,
) -> Trajectory:
    """Same scheme with the transport term removed (pure porous-medium flow)."""
    return integrate(p, w0, eps, T, output_times, replace(opts, taxis=False), config)
