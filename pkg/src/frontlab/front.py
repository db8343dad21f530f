"""Front extraction, speed fitting and envelope checks on trajectories.

The front of ``w(., t)`` is the first node where the deficit
``mu R^n - w`` drops below ``tau * mu R^n``; its radius is the n-th root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .comparison import limit_envelope, select_subsolution_params
from .errors import DomainError, WindowError
from .model import ModelParams, c_crit
from .profiles import GridFunction
from .solver import Trajectory

__all__ = [
    "SHRINKING",
    "EXPANDING",
    "INCONCLUSIVE",
    "FrontTrace",
    "FrontVerdict",
    "EnvelopeReport",
    "front_position",
    "front_trace",
    "estimate_speed",
    "envelope_check",
    "check_tau",
    "sign_change_bracket",
]

SHRINKING = "Shrinking"
EXPANDING = "Expanding"
INCONCLUSIVE = "Inconclusive"


def front_position(w: GridFunction, tau: float) -> float:
    """Smallest ``s`` with ``mu R^n - w(s) <= tau mu R^n``, linearly interpolated."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau!r}")
    top = w.mu_Rn
    target = top * (1.0 - tau)
    hit = np.flatnonzero(top - w.values <= tau * top)
    # the pinned right end always qualifies
    i = int(hit[0]) if hit.size else w.N
    if i == 0:
        return float(w.s[0])
    a, b = w.values[i - 1], w.values[i]
    frac = (target - a) / (b - a) if b > a else 1.0
    return float(w.s[i - 1] + min(max(frac, 0.0), 1.0) * (w.s[i] - w.s[i - 1]))


@dataclass
class FrontTrace:
    t: np.ndarray
    s_front: np.ndarray
    r_front: np.ndarray
    tau: float
    n: int
    ds: float
    run_id: str = ""

    def __len__(self):
        return self.t.size

    def rows(self):
        return list(zip(self.t.tolist(), self.s_front.tolist(), self.r_front.tolist()))


def front_trace(traj: Trajectory, tau: float, n: Optional[int] = None, run_id: str = "") -> FrontTrace:
    n = int(n if n is not None else traj.config.get("n", 1))
    ts = np.array([t for t, _ in traj.snapshots], dtype=float)
    sf = np.array([front_position(g, tau) for _, g in traj.snapshots], dtype=float)
    ds = float(traj.snapshots[0][1].ds) if traj.snapshots else math.nan
    return FrontTrace(ts, sf, sf ** (1.0 / n), tau, n, ds, run_id)


@dataclass
class FrontVerdict:
    classification: str
    zeta: float
    slope: float
    s_slope: float
    window: tuple
    residual: float
    displacement_cells: float
    n_points: int


def estimate_speed(trace: FrontTrace, window: Sequence[float], min_cells: float = 3.0) -> FrontVerdict:
    """Least-squares line through ``r_front`` on ``window = (t_a, t_b)``.

    The run is Shrinking when the fitted slope and the net s-displacement
    are both negative and the displacement spans at least ``min_cells``
    grid cells; Expanding symmetrically; Inconclusive otherwise.
    """
    t_a, t_b = map(float, window)
    sel = (trace.t >= t_a - 1e-15) & (trace.t <= t_b + 1e-15)
    k = int(sel.sum())
    if k < 4:
        raise WindowError(f"{k} trace entries in window [{t_a}, {t_b}], need at least 4")
    t = trace.t[sel]
    r = trace.r_front[sel]
    sf = trace.s_front[sel]
    slope, icept = np.polyfit(t, r, 1)
    s_slope = float(np.polyfit(t, sf, 1)[0])
    resid = float(np.sqrt(np.mean((r - (slope * t + icept)) ** 2)))
    disp = float((sf[-1] - sf[0]) / trace.ds)
    if slope < 0.0 and disp <= -min_cells:
        cls = SHRINKING
    elif slope > 0.0 and disp >= min_cells:
        cls = EXPANDING
    else:
        cls = INCONCLUSIVE
    zeta = abs(float(slope)) if cls != INCONCLUSIVE else 0.0
    return FrontVerdict(cls, zeta, float(slope), s_slope, (t_a, t_b), resid, disp, k)


def fraction_window(T: float, fractions: Sequence[float]) -> tuple:
    a, b = fractions
    if not 0.0 <= a < b <= 1.0:
        raise DomainError(f"window fractions must satisfy 0 <= a < b <= 1, got {fractions!r}")
    return (a * T, b * T)


@dataclass
class EnvelopeReport:
    passed: bool
    direction: str
    worst_excess: float
    tolerance: float
    witness: Optional[tuple]
    n_checked: int
    t_checked: float
    per_snapshot: list = field(default_factory=list, repr=False)


def envelope_check(
    traj: Trajectory,
    p: ModelParams,
    mu: float,
    coef: float,
    r1: float,
    theta: float,
    s_range: Sequence[float],
    direction: str,
    t_max: Optional[float] = None,
    tol_cells: float = 3.0,
) -> EnvelopeReport:
    """Compare snapshots against the limit envelope on ``s_range``.

    ``direction="lower"`` uses the receding envelope and requires
    ``w >= envelope - tol``; ``"upper"`` uses the advancing one with
    ``w <= envelope + tol``.  ``tol = tol_cells * ds * max|w_s|`` over the
    checked interval of each snapshot.
    """
    if direction not in ("lower", "upper"):
        raise DomainError("direction must be 'lower' or 'upper'")
    kind = "shrink" if direction == "lower" else "expand"
    s_lo, s_hi = s_range
    worst, witness, worst_tol, count, t_last = -math.inf, None, 0.0, 0, 0.0
    per = []
    for t, g in traj.snapshots:
        if t_max is not None and t > t_max * (1.0 + 1e-12):
            break
        mask = (g.s >= s_lo) & (g.s <= s_hi)
        if not mask.any():
            continue
        idx = np.flatnonzero(mask)
        lo, hi = max(idx[0] - 1, 0), min(idx[-1] + 1, g.N)
        slopes = np.diff(g.values[lo : hi + 1]) / np.diff(g.s[lo : hi + 1])
        tol = tol_cells * g.ds * float(np.max(np.abs(slopes)))
        env = limit_envelope(p, mu, kind, coef, r1, theta, t, g.s[mask])
        excess = env - g.values[mask] if direction == "lower" else g.values[mask] - env
        j = int(np.argmax(excess))
        per.append((t, float(excess[j]), tol))
        count += int(mask.sum())
        t_last = t
        if excess[j] - tol > worst - worst_tol or witness is None:
            worst, worst_tol, witness = float(excess[j]), tol, (t, float(g.s[mask][j]))
    passed = all(e <= tl for _, e, tl in per)
    return EnvelopeReport(passed, direction, worst, worst_tol, witness, count, t_last, per)


def check_tau(p: ModelParams, mu: float, r1: float, tau: float, eps_min: float) -> float:
    """Enforce ``tau < eps_min * kappa * (R^n - r1^n) / (mu R^n)``.

    ``kappa`` is the slope parameter selected for a receding family at half
    the critical coefficient.  Returns the bound; raises when violated.
    """
    cc = c_crit(p, mu, r1)
    if cc <= 0.0:
        raise DomainError("saturation band check needs positive mass")
    kappa = select_subsolution_params(p, mu, r1, 0.5 * cc).kappa
    bound = eps_min * kappa * (p.Rn - r1**p.n) / (mu * p.Rn)
    if not tau < bound:
        raise DomainError(f"tau={tau!r} must be below {bound!r} for eps={eps_min!r}")
    return bound


def sign_change_bracket(ratios: Sequence[float], slopes: Sequence[float]) -> Optional[tuple]:
    """First ``(ratio_lo, ratio_hi)`` between consecutive ratios where the
    fitted slope turns from negative to positive; ``None`` if absent."""
    pairs = sorted((float(a), float(b)) for a, b in zip(ratios, slopes) if np.isfinite(b))
    for (ra, sa), (rb, sb) in zip(pairs, pairs[1:]):
        if sa < 0.0 < sb:
            return (ra, rb)
    return None
