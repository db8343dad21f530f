"""Seeded invariant suites behind ``frontlab verify``.

Each suite draws random admissible parameters, evaluates an invariant and
returns a :class:`SuiteResult` with one row per draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .comparison import (
    build_subsolution,
    build_supersolution,
    select_subsolution_params,
    select_supersolution_params,
    subsolution_predicates,
    supersolution_predicates,
)
from .errors import ThresholdError
from .model import EXPAND, SHRINK, MassData, ModelParams, a_crit, c_crit, tail_to_mass_coefficient
from .profiles import check_initial_bound, make_profile, transform_to_w
from .residual import OperatorInput, certify_sign
from .solver import SolverState, cfl_dt, step
from .profiles import GridFunction

__all__ = [
    "SuiteResult",
    "threshold_identity",
    "worked_values",
    "tail_mapping",
    "certify_families",
    "selector_fault",
    "steady_state",
    "run_all",
]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    columns: list
    rows: list = field(default_factory=list)
    note: str = ""


def _draw_model(rng, n_choices=(1, 2, 3)):
    n = int(rng.choice(n_choices))
    m = float(rng.uniform(1.1, 4.0))
    r1 = float(rng.uniform(0.2, 0.8))
    mass = float(rng.uniform(0.5, 5.0))
    return ModelParams(n, 1.0, m), r1, mass


def threshold_identity(rng, draws: int = 100, rtol: float = 1e-12) -> SuiteResult:
    rows, ok = [], True
    for _ in range(draws):
        p, r1, mass = _draw_model(rng)
        md = MassData.from_mass(p, mass)
        lhs = tail_to_mass_coefficient(p, a_crit(p, md, r1), r1, r1, SHRINK)
        rhs = c_crit(p, md.mu, r1)
        rel = abs(lhs - rhs) / abs(rhs)
        ok &= rel <= rtol
        rows.append((p.n, p.m, r1, mass, lhs, rhs, rel))
    return SuiteResult(
        "threshold_identity", bool(ok), ["n", "m", "r1", "mass", "mapped", "c_crit", "rel_err"], rows
    )


def worked_values() -> SuiteResult:
    p = ModelParams(1, 1.0, 2.0)
    md = MassData.from_mass(p, 2.0)
    ac = a_crit(p, md, 0.5)
    cc = c_crit(p, md.mu, 0.5)
    rows = [("A_crit", ac, 0.5, abs(ac - 0.5)), ("C_crit", cc, 0.25, abs(cc - 0.25))]
    ok = all(err <= 1e-15 for *_, err in rows)
    return SuiteResult("worked_values", ok, ["quantity", "value", "expected", "abs_err"], rows)


def tail_mapping(rng, draws: int = 50, n_grid: int = 2048, perturb: float = 0.05) -> SuiteResult:
    """Mapped coefficients bound the exact transform; 5% tighter ones do not.

    The tail starts close enough to ``r1`` that the shrink/expand factors
    differ from the edge limit by well under the perturbation.
    """
    rows, ok = [], True
    for _ in range(draws):
        p, r1, mass = _draw_model(rng)
        n, m = p.n, p.m
        A = float(rng.uniform(0.2, 3.0))
        alpha = 1.0 / (m - 1.0)
        spread = (n - 1) * m / (m - 1.0)
        gap = 0.5 * math.log1p(2.0 * perturb / 5.0) / spread if n > 1 else 0.05
        r0 = r1 * (1.0 - min(gap, 0.05))
        prof = make_profile(p, 0.0, r0, A, alpha, r0, r1)
        s = np.union1d(np.linspace(0.0, p.Rn, n_grid + 1), np.linspace(r0**n, r1**n, 257))
        w0 = transform_to_w(p, prof, s)
        c_lo = tail_to_mass_coefficient(p, A, r0, r1, SHRINK)
        c_hi = tail_to_mass_coefficient(p, A, r0, r1, EXPAND)
        lower = check_initial_bound(p, w0, c_lo, r0, r1, "lower")
        upper = check_initial_bound(p, w0, c_hi, r0, r1, "upper")
        lower_bad = check_initial_bound(p, w0, (1.0 - perturb) * c_lo, r0, r1, "lower")
        upper_bad = check_initial_bound(p, w0, (1.0 + perturb) * c_hi, r0, r1, "upper")
        good = lower.holds and upper.holds and not lower_bad.holds and not upper_bad.holds
        ok &= good
        rows.append((n, m, r0, r1, A, lower.holds, upper.holds, lower_bad.holds, upper_bad.holds))
    return SuiteResult(
        "tail_mapping",
        bool(ok),
        ["n", "m", "r0", "r1", "A", "lower", "upper", "lower_perturbed", "upper_perturbed"],
        rows,
    )


def certify_families(rng, draws: int = 20, n_grid=(512, 64), n_random: int = 10_000) -> list:
    """Residual sign certificates for both families over random configurations."""
    sub_rows, sup_rows, sub_ok, sup_ok = [], [], True, True
    for i in range(draws):
        p, r1, mass = _draw_model(rng)
        mu = MassData.from_mass(p, mass).mu
        n = p.n
        cc = c_crit(p, mu, r1)

        q = float(rng.uniform(0.1, 0.9))
        sel = select_subsolution_params(p, mu, r1, q * cc)
        eps = sel.eps0 * float(rng.uniform(0.1, 0.9))
        r0 = float(rng.uniform(sel.r_min, r1))
        fam = build_subsolution(sel, eps, r0, sel.theta)
        inp = OperatorInput(eps, p, mu)
        margin = eps * sel.kappa * (p.Rn - sel.r2**n)
        t_end = (r1**n - r0**n) / sel.theta
        rep = certify_sign(inp, fam, (r0**n, sel.r2**n), (0.0, t_end), "le", margin, n_grid, n_random, seed=i)
        kink_gap = _kink_mismatch(fam, np.linspace(0.0, t_end, 9))
        good = rep.passed and kink_gap <= 1e-12 and all(subsolution_predicates(sel).values())
        sub_ok &= good
        sub_rows.append((n, p.m, r1, mu, q, eps, r0, sel.theta, rep.worst_slack, rep.scale, kink_gap, good))

        A_sup = cc * (1.0 + float(rng.uniform(0.1, 2.0)))
        ssel = select_supersolution_params(p, mu, r1, A_sup)
        eps = ssel.eps0 * float(rng.uniform(0.1, 0.9))
        r0 = float(rng.uniform(ssel.r_min, r1))
        fam = build_supersolution(ssel, eps, r0)
        inp = OperatorInput(eps, p, mu)
        rep = certify_sign(inp, fam, (r0**n, p.Rn), (0.0, ssel.t_bar), "ge", 0.0, n_grid, n_random, seed=1000 + i)
        kink_gap = _kink_mismatch(fam, np.linspace(0.0, ssel.t_bar, 9))
        good = rep.passed and kink_gap <= 1e-12 and all(supersolution_predicates(ssel).values())
        sup_ok &= good
        sup_rows.append((n, p.m, r1, mu, A_sup / cc, eps, r0, ssel.theta, rep.worst_slack, rep.scale, kink_gap, good))
    cols = ["n", "m", "r1", "mu", "coef_over_crit", "eps", "r0", "theta", "worst_slack", "scale", "kink_gap", "passed"]
    return [
        SuiteResult("certify_subsolution", bool(sub_ok), cols, sub_rows),
        SuiteResult("certify_supersolution", bool(sup_ok), cols, sup_rows),
    ]


def _kink_mismatch(fam, ts) -> float:
    """Largest value/slope gap between the two pieces at the kink, relative
    to ``max(1, mu R^n)`` for values and ``max(1, eps*kappa, eps)`` for slopes."""
    worst = 0.0
    top = max(1.0, fam.mu * fam.p.Rn)
    for t in ts:
        k = float(fam.kink(t))
        if k >= fam.rho(t):
            continue
        wm, sm, _, _ = fam.mid_piece(k, t)
        wo, so, _, _ = fam.out_piece(k, t)
        slope_scale = max(1.0, fam.eps * max(fam.kappa, 1.0))
        worst = max(worst, abs(float(wm) - float(wo)) / top, abs(float(sm) - float(so)) / slope_scale)
    return worst


def selector_fault() -> SuiteResult:
    """Feeding a supercritical coefficient to the receding selector must fail."""
    p = ModelParams(1, 1.0, 2.0)
    cc = c_crit(p, 1.0, 0.5)
    rows = []
    for factor in (1.0, 1.5, 3.0):
        try:
            select_subsolution_params(p, 1.0, 0.5, factor * cc)
            raised = False
        except ThresholdError:
            raised = True
        rows.append((factor, raised))
    return SuiteResult("selector_fault", all(r for _, r in rows), ["coef_over_crit", "raised"], rows)


def steady_state(steps: int = 10_000, N: int = 256) -> SuiteResult:
    """``w = mu s`` must stay fixed under the explicit step."""
    rows, ok = [], True
    for n, m, eps in ((1, 2.0, 0.1), (2, 3.0, 1e-3), (3, 1.5, 1e-2)):
        p = ModelParams(n, 1.0, m)
        s = np.linspace(0.0, p.Rn, N + 1)
        mu = 1.3
        g = GridFunction(s, mu * s, mu * p.Rn)
        st = SolverState(p, g, 0.0, eps)
        dt = cfl_dt(st, 0.45)
        for _ in range(steps):
            st = step(st, dt)
        drift = float(np.max(np.abs(st.grid.values - mu * s)))
        good = drift <= 1e-13 * mu * p.Rn
        ok &= good
        rows.append((n, m, eps, steps, drift, good))
    return SuiteResult("steady_state", bool(ok), ["n", "m", "eps", "steps", "drift", "passed"], rows)


def run_all(seed: int = 0, draws: int = 100) -> list:
    rng = np.random.default_rng(seed)
    out = [threshold_identity(rng, draws), worked_values(), tail_mapping(rng, max(1, draws // 2))]
    out += certify_families(rng, max(1, draws // 5))
    out += [selector_fault(), steady_state()]
    return out
