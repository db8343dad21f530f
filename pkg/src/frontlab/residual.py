"""Residual of the regularized mass-accumulation operator.

The operator acting on ``w(s, t)`` is

    w_t - n^2 s^(2 - 2/n) (w_s + eps)^(m - 1) w_ss - w w_s + mu s w_s

and vanishes on solutions.  This module evaluates it pointwise, on the
analytic comparison families, and on pairs of discrete snapshots.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .comparison import ComparisonFamily
from .errors import DomainError, KinkError
from .model import ModelParams
from .profiles import GridFunction

__all__ = [
    "OperatorInput",
    "p_eps_pointwise",
    "p_eps_analytic",
    "CertificationReport",
    "certify_sign",
    "p_eps_discrete",
    "prototype_bracket",
    "KINK_RADIUS",
]

KINK_RADIUS = 1e-12


@dataclass(frozen=True)
class OperatorInput:
    eps: float
    p: ModelParams
    mu: float

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps!r}")
        if self.mu < 0.0:
            raise DomainError(f"mu must be nonnegative, got {self.mu!r}")


def diffusion_weight(n: int, s):
    """``n^2 s^(2 - 2/n)``; identically ``1`` for ``n = 1``."""
    s = np.asarray(s, dtype=float)
    if n == 1:
        return np.ones_like(s)
    return n * n * s ** (2.0 - 2.0 / n)


def p_eps_pointwise(inp: OperatorInput, w, w_s, w_ss, w_t, s):
    """Operator value from explicitly supplied derivatives (array-friendly)."""
    w_s = np.asarray(w_s, dtype=float)
    lifted = w_s + inp.eps
    if np.any(lifted <= 0.0):
        raise DomainError("w_s + eps must be positive")
    m = inp.p.m
    diff = diffusion_weight(inp.p.n, s) * lifted ** (m - 1.0) * np.asarray(w_ss, dtype=float)
    out = np.asarray(w_t, dtype=float) - diff - np.asarray(w, dtype=float) * w_s + inp.mu * np.asarray(s, dtype=float) * w_s
    return out if out.ndim else float(out)


def p_eps_analytic(inp: OperatorInput, fam: ComparisonFamily, s, t):
    """Operator applied to a comparison family via its closed-form derivatives."""
    if not math.isclose(inp.eps, fam.eps, rel_tol=1e-15):
        raise DomainError("operator eps and family eps differ")
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s - fam.kink(t)) < KINK_RADIUS):
        raise KinkError("second derivative is one-sided at the kink")
    w, w_s, w_ss, w_t = fam.derivatives(s, t)
    return p_eps_pointwise(inp, w, w_s, w_ss, w_t, s)


@dataclass
class CertificationReport:
    passed: bool
    sign: str
    margin: float
    n_points: int
    scale: float
    worst_slack: float
    worst_point: Optional[tuple]
    rows: list = field(default_factory=list, repr=False)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        where = "" if self.worst_point is None else f" at s={self.worst_point[0]:.6g}, t={self.worst_point[1]:.6g}"
        return (
            f"{verdict} sign={self.sign} margin={self.margin:.3g} points={self.n_points} "
            f"worst_slack={self.worst_slack:.3e}{where}"
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# {self.summary()}\n")
            wr = csv.writer(fh)
            wr.writerow(["s", "t", "residual", "slack"])
            for row in self.rows:
                wr.writerow([repr(float(x)) for x in row])


def certify_sign(
    inp: OperatorInput,
    fam: ComparisonFamily,
    s_range: Sequence[float],
    t_range: Sequence[float],
    sign: str = "ge",
    margin: float = 0.0,
    n_grid: tuple = (512, 64),
    n_random: int = 10_000,
    seed: int = 0,
    rtol: float = 1e-10,
    keep_rows: bool = False,
) -> CertificationReport:
    """Sample the operator over a rectangle and test a one-sided bound.

    ``sign="ge"`` requires ``residual >= margin * w_s``; ``sign="le"``
    requires ``residual <= -margin * w_s``.  Both are relaxed by
    ``rtol * scale`` with ``scale`` the largest |residual| sampled.  Points
    within :data:`KINK_RADIUS` of the kink are skipped.
    """
    if sign not in ("ge", "le"):
        raise DomainError("sign must be 'ge' or 'le'")
    s_lo, s_hi = map(float, s_range)
    t_lo, t_hi = map(float, t_range)
    if s_hi < s_lo or t_hi < t_lo:
        raise DomainError("reversed region")
    if s_hi == s_lo:
        return CertificationReport(True, sign, margin, 0, 0.0, math.inf, None)

    ss, tt = np.meshgrid(np.linspace(s_lo, s_hi, n_grid[0]), np.linspace(t_lo, t_hi, n_grid[1]))
    pts_s, pts_t = [ss.ravel()], [tt.ravel()]
    if n_random > 0:
        u = qmc.Halton(d=2, seed=seed).random(n_random)
        pts_s.append(s_lo + (s_hi - s_lo) * u[:, 0])
        pts_t.append(t_lo + (t_hi - t_lo) * u[:, 1])
    s = np.concatenate(pts_s)
    t = np.concatenate(pts_t)
    keep = np.abs(s - fam.kink(t)) >= KINK_RADIUS
    s, t = s[keep], t[keep]

    res = p_eps_analytic(inp, fam, s, t)
    w_s = fam.derivatives(s, t)[1]
    slack = res - margin * w_s if sign == "ge" else -margin * w_s - res
    scale = float(np.max(np.abs(res))) if res.size else 0.0
    k = int(np.argmin(slack)) if slack.size else None
    worst = float(slack[k]) if k is not None else math.inf
    passed = bool(np.all(slack >= -rtol * scale))
    rows = np.column_stack([s, t, res, slack]).tolist() if keep_rows else []
    return CertificationReport(
        passed,
        sign,
        margin,
        int(s.size),
        scale,
        worst,
        None if k is None else (float(s[k]), float(t[k])),
        rows,
    )


def p_eps_discrete(
    inp: OperatorInput,
    w_prev: GridFunction,
    w_next: GridFunction,
    dt: float,
    stencil: str = "central",
    taxis: bool = True,
) -> np.ndarray:
    """Residual at interior nodes of a forward-in-time discrete pair.

    ``stencil="central"`` uses centered differences for ``w_s`` and the
    exact ``(w_s + eps)^(m-1)`` coefficient.  ``stencil="scheme"`` repeats
    the solver's own discretization, so a single unrepaired solver step
    yields zeros up to round-off.
    """
    if dt <= 0.0:
        raise DomainError("dt must be positive")
    if w_prev.s.shape != w_next.s.shape or not np.array_equal(w_prev.s, w_next.s):
        raise DomainError("snapshots live on different grids")
    p, eps, mu = inp.p, inp.eps, inp.mu
    m = p.m
    s = w_prev.s
    w = w_prev.values
    h_b = s[1:-1] - s[:-2]
    h_f = s[2:] - s[1:-1]
    q_b = (w[1:-1] - w[:-2]) / h_b
    q_f = (w[2:] - w[1:-1]) / h_f
    w_t = (w_next.values[1:-1] - w[1:-1]) / dt
    si = s[1:-1]
    weight = diffusion_weight(p.n, si)
    c = w[1:-1] - mu * si if taxis else np.zeros_like(si)
    if stencil == "central":
        w_s = (w[2:] - w[:-2]) / (h_b + h_f)
        w_ss = 2.0 * (q_f - q_b) / (h_b + h_f)
        if taxis:
            return p_eps_pointwise(inp, w[1:-1], w_s, w_ss, w_t, si)
        return w_t - weight * (w_s + eps) ** (m - 1.0) * w_ss
    if stencil == "scheme":
        coef = secant_coefficient(q_b, q_f, eps, m)
        h = 0.5 * (h_b + h_f)
        upwind = np.where(c > 0.0, q_f, q_b)
        return w_t - weight * coef * (q_f - q_b) / h - c * upwind
    raise DomainError("stencil must be 'central' or 'scheme'")


def secant_coefficient(q_b, q_f, eps: float, m: float):
    """Divided difference of ``(q + eps)^m / m`` between the one-sided slopes.

    Equals ``(q + eps)^(m-1)`` in the limit ``q_b -> q_f``; for ``m = 2``
    it is exactly the mean slope plus ``eps``.
    """
    q_b = np.asarray(q_b, dtype=float)
    q_f = np.asarray(q_f, dtype=float)
    if m == 2.0:
        return 0.5 * (q_b + q_f) + eps
    gap = q_f - q_b
    near = np.abs(gap) <= 1e-14 * (np.abs(q_f) + np.abs(q_b) + eps)
    safe_gap = np.where(near, 1.0, gap)
    sec = ((q_f + eps) ** m - (q_b + eps) ** m) / (m * safe_gap)
    return np.where(near, (0.5 * (q_b + q_f) + eps) ** (m - 1.0), sec)


def prototype_bracket(p: ModelParams, mu: float, C: float, r1: float, theta: float, s, t=0.0):
    """Factor multiplying ``w_s`` when the unregularized operator is applied to
    ``mu R^n - C (r1^n + theta t - s)^(m/(m-1))`` left of its edge.

    Its sign decides whether that profile is a sub- or supersolution.
    """
    n, m = p.n, p.m
    s = np.asarray(s, dtype=float)
    rho = r1**n + theta * np.asarray(t, dtype=float)
    d = np.clip(rho - s, 0.0, None)
    w = mu * p.Rn - C * d**p.mass_exponent
    return -theta + diffusion_weight(n, s) * (C * m) ** (m - 1.0) / (m - 1.0) ** m - w + mu * s
