"""Analytic comparison families and the parameter selections that make them work.

Two families are provided.  The subsolution is a power-law profile receding
at s-speed ``theta`` with a linear extension that keeps its slope at least
``eps * kappa``.  The supersolution advances at s-speed ``theta`` and is
continued by a constant.  Both are joined in a C^1 fashion at the kink
``rho(t) - delta``.

Selections are built from closed-form recipes and then re-checked against
the full list of predicates; a failed re-check raises :class:`SelectionError`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, SelectionError, ThresholdError
from .model import ModelParams, c_crit, root_power

__all__ = [
    "SUB",
    "SUP",
    "ComparisonFamily",
    "SubsolutionSelection",
    "SupersolutionSelection",
    "subsolution_family",
    "supersolution_family",
    "select_subsolution_params",
    "select_supersolution_params",
    "subsolution_predicates",
    "supersolution_predicates",
    "build_subsolution",
    "build_supersolution",
    "limit_envelope",
    "ShrinkProcedure",
    "ExpandProcedure",
    "shrink_procedure",
    "expand_procedure",
    "shrink_time_cap",
    "expand_time_cap",
]

SUB = "subsolution"
SUP = "supersolution"

KAPPA_FLOOR = 1e-3


@dataclass(frozen=True)
class ComparisonFamily:
    """Closed-form sub- or supersolution on ``[s_lo, s_hi] x [0, t_max]``.

    ``direction`` is -1 when the power-law edge ``rho(t)`` recedes and +1
    when it advances.  ``vertical_shift`` is subtracted from every value.
    """

    p: ModelParams
    mu: float
    kind: str
    A_coef: float
    theta: float
    r1: float
    eps: float
    delta: float
    eta: float
    kappa: float
    vertical_shift: float
    direction: int
    s_lo: float
    s_hi: float
    t_max: float

    @property
    def exponent(self) -> float:
        return self.p.mass_exponent

    def rho(self, t):
        return self.r1**self.p.n + self.direction * self.theta * np.asarray(t, dtype=float)

    def kink(self, t):
        return self.rho(t) - self.delta

    def mid_piece(self, s, t):
        """Value and derivatives ``(w, w_s, w_ss, w_t)`` of the power-law piece.

        Valid for ``s < rho(t)``.
        """
        m = self.p.m
        A = self.A_coef
        d = self.rho(t) - np.asarray(s, dtype=float)
        if np.any(d <= 0.0):
            raise DomainError("power-law piece evaluated at or beyond rho(t)")
        top = self.p.mass_exponent
        slope = A * top * d ** (1.0 / (m - 1.0))
        w_ss = -A * top / (m - 1.0) * d ** (1.0 / (m - 1.0) - 1.0)
        base = self.mu * self.p.Rn - self.vertical_shift
        if self.kind == SUB:
            w = base - self.eta - A * d**top
            w_s = slope
            w_t = self.theta * slope
        else:
            w = base - A * d**top + self.eps * d
            w_s = slope - self.eps
            w_t = -self.theta * w_s
        return w, w_s, w_ss, w_t

    def out_piece(self, s, t):
        """Value and derivatives of the extension right of the kink."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        base = self.mu * self.p.Rn - self.vertical_shift
        zero = np.zeros(np.broadcast(s, t).shape)
        if self.kind == SUB:
            ek = self.eps * self.kappa
            w = base - ek * (self.p.Rn - self.theta * t - s)
            return w + zero, ek + zero, zero, ek * self.theta + zero
        return base + self.delta * self.eps / self.p.m + zero, zero, zero, zero

    def derivatives(self, s, t):
        """Piecewise ``(w, w_s, w_ss, w_t)``; the kink itself takes the out piece."""
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        left = s < self.kink(t)
        # evaluate the power-law piece at a safe distance where it is not used
        s_mid = np.where(left, s, self.kink(t) - self.delta)
        mid = self.mid_piece(s_mid, t)
        out = self.out_piece(s, t)
        return tuple(np.where(left, a, b) for a, b in zip(mid, out))

    def value(self, s, t):
        return self.derivatives(s, t)[0]

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("p")
        d.update(n=self.p.n, R=self.p.R, m=self.p.m)
        return d


def subsolution_family(
    p: ModelParams,
    mu: float,
    A: float,
    r1: float,
    eps: float,
    kappa: float,
    theta: float = 0.0,
    r0: Optional[float] = None,
    vertical_shift: float = 0.0,
    t_max: float = math.inf,
) -> ComparisonFamily:
    """Raw receding family; no admissibility checks beyond positivity."""
    if not (A > 0.0 and eps > 0.0 and kappa > 0.0):
        raise DomainError("A, eps and kappa must be positive")
    m = p.m
    delta = (eps * kappa * (m - 1.0) / (A * m)) ** (m - 1.0)
    eta = -A * delta**p.mass_exponent + eps * kappa * (p.Rn - r1**p.n + delta)
    s_lo = (r0 if r0 is not None else r1) ** p.n
    return ComparisonFamily(
        p, mu, SUB, A, theta, r1, eps, delta, eta, kappa, vertical_shift, -1, s_lo, p.Rn, t_max
    )


def supersolution_family(
    p: ModelParams,
    mu: float,
    A: float,
    r1: float,
    eps: float,
    theta: float,
    r0: Optional[float] = None,
) -> ComparisonFamily:
    """Raw advancing family defined up to the time its edge reaches ``R**n``."""
    if not (A > 0.0 and eps > 0.0 and theta > 0.0):
        raise DomainError("A, eps and theta must be positive")
    m = p.m
    delta = (eps * (m - 1.0) / (A * m)) ** (m - 1.0)
    t_bar = (p.Rn - r1**p.n) / theta
    s_lo = (r0 if r0 is not None else r1) ** p.n
    return ComparisonFamily(
        p, mu, SUP, A, theta, r1, eps, delta, 0.0, 0.0, 0.0, 1, s_lo, p.Rn, t_bar
    )


# -- receding family: selection ---------------------------------------------


@dataclass(frozen=True)
class SubsolutionSelection:
    p: ModelParams
    mu: float
    r1: float
    A_sub: float
    kappa: float
    lam: float
    eps0: float
    theta_max: float
    r_min: float
    r2: float
    theta: float

    def eta(self, eps):
        m = self.p.m
        delta = (eps * self.kappa * (m - 1.0) / (self.A_sub * m)) ** (m - 1.0)
        return -self.A_sub * delta**self.p.mass_exponent + eps * self.kappa * (
            self.p.Rn - self.r1**self.p.n + delta
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("p")
        return d


def _coefficient_cap(p, mu, r1, kappa, lam):
    """Largest admissible receding coefficient for given ``kappa``, ``lam``."""
    n, m = p.n, p.m
    base = (1.0 - lam) * mu * (p.Rn - r1**n) * (m - 1.0) / (r1 ** (2 * n - 2) * n**2)
    return (m - 1.0) * kappa / (m * (kappa + 1.0)) * root_power(base, m)


def _radius_bracket(p, mu, r1, lam, theta_max, eps0, kappa):
    gap = p.Rn - r1**p.n
    return lam * mu / 2.0 * gap - theta_max - eps0 * kappa * gap


def subsolution_predicates(sel: SubsolutionSelection, n_eps: int = 64) -> dict:
    """Every inequality the receding family relies on, by name."""
    p, mu, r1 = sel.p, sel.mu, sel.r1
    n, m = p.n, p.m
    gap = p.Rn - r1**n
    bracket = _radius_bracket(p, mu, r1, sel.lam, sel.theta_max, sel.eps0, sel.kappa)
    eps_grid = sel.eps0 * np.linspace(1.0 / n_eps, 1.0, n_eps)
    etas = np.array([sel.eta(e) for e in eps_grid])
    out = {
        "ranges": 0.0 < sel.lam < 1.0
        and 0.0 < sel.eps0 < 1.0
        and sel.kappa > 0.0
        and sel.theta_max > 0.0
        and 0.0 < sel.r_min < r1,
        "coefficient_cap": sel.A_sub <= _coefficient_cap(p, mu, r1, sel.kappa, sel.lam),
        "eps_slope": 2.0 * sel.eps0 * sel.kappa < sel.lam * mu < mu,
        "radius_bracket_positive": bracket > 0.0,
        "radius_window": bracket > 0.0
        and r1**n - sel.r_min**n <= (bracket / sel.A_sub) ** ((m - 1.0) / m),
        "shift_cap": bool(np.all(etas <= sel.lam * mu / 2.0 * gap)),
        "shift_nonnegative": bool(np.all(etas >= 0.0)),
        "speed_cap": 0.0 < sel.theta <= sel.theta_max
        and sel.theta <= (mu - 2.0 * sel.eps0 * sel.kappa) * (p.Rn - sel.r2**n),
        "r2_midpoint": math.isclose(sel.r2**n, 0.5 * (r1**n + p.Rn), rel_tol=1e-12),
    }
    return out


def select_subsolution_params(
    p: ModelParams, mu: float, r1: float, A_sub: float
) -> SubsolutionSelection:
    """Deterministic parameter choice for a receding family with ``A_sub < C_crit``."""
    cc = c_crit(p, mu, r1)
    if not 0.0 < A_sub < cc:
        raise ThresholdError(f"need 0 < A_sub < C_crit = {cc!r}, got {A_sub!r}")
    n, m = p.n, p.m
    q = A_sub / cc
    sq = math.sqrt(q)
    lam = 1.0 - q ** ((m - 1.0) / 2.0)
    kappa = max(2.0 * sq / (1.0 - sq), KAPPA_FLOOR)
    gap = p.Rn - r1**n
    theta_max = lam * mu * gap / 8.0

    def eta(eps):
        delta = (eps * kappa * (m - 1.0) / (A_sub * m)) ** (m - 1.0)
        return eps * kappa * gap + eps * kappa * delta / m

    # eta is increasing in eps; bisect for the largest eps meeting the shift cap
    target = lam * mu * gap / 2.0
    lo, hi = 0.0, 1.0
    if eta(hi) > target:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if eta(mid) <= target else (lo, mid)
        eps_shift = lo
    else:
        eps_shift = hi
    eps0 = 0.5 * min(lam * mu / (2.0 * kappa), lam * mu / (8.0 * kappa), eps_shift, 1.0)

    bracket = _radius_bracket(p, mu, r1, lam, theta_max, eps0, kappa)
    width = (bracket / A_sub) ** ((m - 1.0) / m)
    r_eq = max(r1**n - width, 0.0) ** (1.0 / n)
    r_min = 0.5 * (r_eq + r1)
    r2 = (0.5 * (r1**n + p.Rn)) ** (1.0 / n)

    sel = SubsolutionSelection(p, mu, r1, A_sub, kappa, lam, eps0, theta_max, r_min, r2, theta_max / 2.0)
    failed = [k for k, ok in subsolution_predicates(sel).items() if not ok]
    if failed:
        raise SelectionError(f"receding selection failed its own checks: {failed}")
    return sel


def build_subsolution(
    sel: SubsolutionSelection,
    eps: float,
    r0: float,
    theta: float,
    vertical_shift: float = 0.0,
    t_max: float = math.inf,
) -> ComparisonFamily:
    """Receding family with admissibility of ``(eps, r0, theta)`` enforced."""
    p = sel.p
    if not 0.0 < eps < sel.eps0:
        raise DomainError(f"eps must lie in (0, {sel.eps0!r}), got {eps!r}")
    if not sel.r_min <= r0 < sel.r1:
        raise DomainError(f"r0 must lie in [{sel.r_min!r}, {sel.r1!r}), got {r0!r}")
    if not 0.0 <= theta <= sel.theta_max:
        raise DomainError(f"theta must lie in [0, {sel.theta_max!r}], got {theta!r}")
    if theta > 0.0 and theta > (sel.mu - 2.0 * sel.eps0 * sel.kappa) * (p.Rn - sel.r2**p.n):
        raise DomainError("theta violates the speed cap tied to r2")
    return subsolution_family(
        p, sel.mu, sel.A_sub, sel.r1, eps, sel.kappa, theta, r0, vertical_shift, t_max
    )


# -- advancing family: selection --------------------------------------------


@dataclass(frozen=True)
class SupersolutionSelection:
    p: ModelParams
    mu: float
    r1: float
    A_sup: float
    r_min: float
    theta: float
    eps0: float
    t_bar: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("p")
        return d


def advancing_coefficient_floor(p: ModelParams, mu: float, r0: float, theta: float) -> float:
    """Smallest advancing coefficient compatible with ``r0`` and ``theta``.

    Decreasing in ``r0``, so checking it at ``r_min`` covers ``[r_min, r1)``.
    """
    n, m = p.n, p.m
    base = (mu * p.Rn - mu * r0**n + 2.0 * theta) * (m - 1.0) / (r0 ** (2 * n - 2) * n**2)
    return (m - 1.0) / m * root_power(base, m)


def supersolution_predicates(sel: SupersolutionSelection) -> dict:
    p, r1 = sel.p, sel.r1
    n = p.n
    rhos = r1**n + sel.theta * np.linspace(0.0, sel.t_bar, 65)[:-1]
    return {
        "ranges": 0.0 < sel.r_min < r1 and sel.theta > 0.0,
        "coefficient_floor": sel.A_sup
        >= advancing_coefficient_floor(p, sel.mu, sel.r_min, sel.theta),
        "eps0_formula": sel.eps0 == min(0.5, sel.theta / p.Rn),
        "t_bar_formula": math.isclose(sel.theta * sel.t_bar, p.Rn - r1**n, rel_tol=1e-14),
        "edge_inside": bool(np.all((rhos >= r1**n) & (rhos <= p.Rn))),
    }


def select_supersolution_params(
    p: ModelParams, mu: float, r1: float, A_sup: float, slack: float = 0.1
) -> SupersolutionSelection:
    """Shrink ``theta`` and move ``r_min`` toward ``r1`` until the coefficient
    floor sits below ``A_sup`` with relative slack ``slack`` of the gap to C_crit."""
    cc = c_crit(p, mu, r1)
    if not A_sup > cc:
        raise ThresholdError(f"need A_sup > C_crit = {cc!r}, got {A_sup!r}")
    target = cc + (1.0 - slack) * (A_sup - cc)
    theta = mu * (p.Rn - r1**p.n) / 4.0
    r_min = r1 / 2.0
    for _ in range(400):
        if advancing_coefficient_floor(p, mu, r_min, theta) <= target:
            break
        theta *= 0.5
        r_min = 0.5 * (r_min + r1)
    else:
        raise SelectionError("advancing selection did not converge")
    if theta <= 0.0 or not r_min < r1:
        raise SelectionError("advancing selection degenerated")
    sel = SupersolutionSelection(
        p, mu, r1, A_sup, r_min, theta, min(0.5, theta / p.Rn), (p.Rn - r1**p.n) / theta
    )
    failed = [k for k, ok in supersolution_predicates(sel).items() if not ok]
    if failed:
        raise SelectionError(f"advancing selection failed its own checks: {failed}")
    return sel


def build_supersolution(sel: SupersolutionSelection, eps: float, r0: float) -> ComparisonFamily:
    if not 0.0 < eps < sel.eps0:
        raise DomainError(f"eps must lie in (0, {sel.eps0!r}), got {eps!r}")
    if not sel.r_min <= r0 < sel.r1:
        raise DomainError(f"r0 must lie in [{sel.r_min!r}, {sel.r1!r}), got {r0!r}")
    return supersolution_family(sel.p, sel.mu, sel.A_sup, sel.r1, eps, sel.theta, r0)


# -- limits and procedures --------------------------------------------------


def limit_envelope(p: ModelParams, mu: float, kind: str, coef: float, r1: float, theta: float, t, s):
    """``mu R^n - coef (rho(t) - s)_+^(m/(m-1))`` with a receding (``"shrink"``)
    or advancing (``"expand"``) edge ``rho(t) = r1**n -/+ theta t``."""
    if kind not in ("shrink", "expand"):
        raise DomainError("kind must be 'shrink' or 'expand'")
    sign = -1.0 if kind == "shrink" else 1.0
    rho = r1**p.n + sign * theta * np.asarray(t, dtype=float)
    d = np.clip(rho - np.asarray(s, dtype=float), 0.0, None)
    return mu * p.Rn - coef * d**p.mass_exponent


def shrink_time_cap(p: ModelParams, r0: float, r1: float, theta_max: float, inflation: float) -> float:
    """Horizon below all three caps of the receding two-stage argument."""
    n, m = p.n, p.m
    w = r1**n - r0**n
    caps = (
        w / theta_max * (1.0 - (2.0 * inflation / (inflation + 1.0)) ** (-(m - 1.0) / m)),
        w / (2.0 * theta_max),
        (p.Rn - r1**n) / (2.0 * theta_max),
    )
    return min(caps)


def expand_time_cap(p: ModelParams, r0: float, r1: float, theta: float, inflation: float, t_bar: float) -> float:
    n, m = p.n, p.m
    cap = (r1**n - r0**n) / theta * ((2.0 * inflation / (inflation + 1.0)) ** ((m - 1.0) / m) - 1.0)
    return min(cap, t_bar)


@dataclass
class ShrinkProcedure:
    """Two-stage receding comparison for ``w0 >= mu R^n - C (r1^n - s)^k``.

    ``inflation`` is the factor > 1 with ``A_sub = inflation * C < C_crit``.
    """

    C: float
    inflation: float
    r0: float
    eps: float
    selection: SubsolutionSelection
    stationary: ComparisonFamily
    moving: ComparisonFamily
    t_cap: float
    checks: dict = field(default_factory=dict)

    @property
    def envelope_coef(self) -> float:
        return self.inflation * self.C

    @property
    def theta(self) -> float:
        return self.selection.theta

    def left_target(self) -> float:
        """Lower bound the solution must keep at ``r0**n`` on the horizon."""
        p = self.selection.p
        k = p.mass_exponent
        w = self.selection.r1**p.n - self.r0**p.n
        return self.selection.mu * p.Rn - 0.5 * (self.inflation + 1.0) * self.C * w**k

    def right_target(self) -> float:
        """Lower bound the first stage delivers at ``r2**n``."""
        sel = self.selection
        p = sel.p
        return sel.mu * p.Rn - self.eps * sel.kappa * 0.5 * (p.Rn - sel.r1**p.n)


def _pick_eps(eps0: float, delta_of, delta_cap: float) -> float:
    eps = 0.5 * eps0
    for _ in range(200):
        if delta_of(eps) < delta_cap:
            return eps
        eps *= 0.5
    raise SelectionError("no eps satisfies the kink-offset cap")


def shrink_procedure(
    p: ModelParams,
    mu: float,
    r1: float,
    C: float,
    r0: Optional[float] = None,
    eps: Optional[float] = None,
    inflation: Optional[float] = None,
    n_t: int = 33,
) -> ShrinkProcedure:
    """Assemble both receding stages and evaluate their boundary arithmetic.

    Without ``inflation`` the coefficient ``A_sub`` is placed halfway
    between ``C`` and ``C_crit``.
    """
    cc = c_crit(p, mu, r1)
    if not 0.0 < C < cc:
        raise ThresholdError(f"need 0 < C < C_crit = {cc!r}, got {C!r}")
    lam_infl = inflation if inflation is not None else 0.5 * (C + cc) / C
    if not (lam_infl > 1.0 and lam_infl * C < cc):
        raise ThresholdError("inflation must exceed 1 and keep inflation*C below C_crit")
    sel = select_subsolution_params(p, mu, r1, lam_infl * C)
    n, m = p.n, p.m
    r0 = sel.r_min if r0 is None else r0
    if not sel.r_min <= r0 < r1:
        raise DomainError(f"r0 must lie in [{sel.r_min!r}, {r1!r}), got {r0!r}")
    w_gap = r1**n - r0**n

    def delta_of(e):
        return (e * sel.kappa * (m - 1.0) / (sel.A_sub * m)) ** (m - 1.0)

    eps = _pick_eps(sel.eps0, delta_of, 0.5 * w_gap) if eps is None else eps
    t_cap = shrink_time_cap(p, r0, r1, sel.theta_max, lam_infl)
    stat = build_subsolution(sel, eps, r0, 0.0, 0.0, t_cap)
    shift = eps * sel.kappa * (p.Rn - sel.r2**n)
    moving = build_subsolution(sel, eps, r0, sel.theta, shift, t_cap)
    proc = ShrinkProcedure(C, lam_infl, r0, eps, sel, stat, moving, t_cap)

    k = p.mass_exponent
    ts = np.linspace(0.0, t_cap, n_t)
    s0 = np.full_like(ts, r0**n)
    top = mu * p.Rn
    left = proc.left_target()
    right = proc.right_target()
    band = np.linspace(r1**n - stat.delta, r1**n, 65)
    slope_gap = eps * sel.kappa - C * k * (r1**n - band) ** (1.0 / (m - 1.0))
    tol = 1e-12 * max(top, 1.0)
    proc.checks = {
        "kink_offset_cap": stat.delta < 0.5 * w_gap,
        "stationary_left": bool(np.all(stat.value(s0, ts) <= left + tol)),
        "stationary_right": bool(np.all(np.abs(stat.value(np.full_like(ts, p.Rn), ts) - top) <= tol)),
        "moving_left": bool(np.all(moving.value(s0, ts) <= left + tol)),
        "moving_right": bool(
            np.all(moving.value(np.full_like(ts, sel.r2**n), ts) <= right + tol)
        ),
        "initial_slope_gap": bool(np.all(slope_gap >= -tol)),
        "left_in_power_piece": bool(np.all(r0**n <= moving.kink(ts))),
    }
    return proc


@dataclass
class ExpandProcedure:
    """Single-stage advancing comparison for ``w0 <= mu R^n - C (r1^n - s)^k``.

    ``inflation`` is the factor > 1 with ``A_sup = C / inflation > C_crit``.
    """

    C: float
    inflation: float
    r0: float
    eps: float
    selection: SupersolutionSelection
    family: ComparisonFamily
    t_cap: float
    checks: dict = field(default_factory=dict)

    @property
    def envelope_coef(self) -> float:
        return self.C / self.inflation

    @property
    def theta(self) -> float:
        return self.selection.theta

    def left_target(self) -> float:
        """Upper bound the solution must keep at ``r0**n`` on the horizon."""
        p = self.selection.p
        w = self.selection.r1**p.n - self.r0**p.n
        return self.selection.mu * p.Rn - 2.0 * self.C / (self.inflation + 1.0) * w**p.mass_exponent


def expand_procedure(
    p: ModelParams,
    mu: float,
    r1: float,
    C: float,
    r0: Optional[float] = None,
    eps: Optional[float] = None,
    inflation: Optional[float] = None,
    n_t: int = 33,
) -> ExpandProcedure:
    """Assemble the advancing comparison and evaluate its boundary arithmetic.

    Without ``inflation`` the coefficient ``A_sup`` is placed halfway
    between ``C_crit`` and ``C``.
    """
    cc = c_crit(p, mu, r1)
    if not C > cc:
        raise ThresholdError(f"need C > C_crit = {cc!r}, got {C!r}")
    lam_infl = inflation if inflation is not None else C / (0.5 * (C + cc))
    if not (lam_infl > 1.0 and C / lam_infl > cc):
        raise ThresholdError("inflation must exceed 1 and keep C/inflation above C_crit")
    sel = select_supersolution_params(p, mu, r1, C / lam_infl)
    n, m = p.n, p.m
    r0 = sel.r_min if r0 is None else r0
    if not sel.r_min <= r0 < r1:
        raise DomainError(f"r0 must lie in [{sel.r_min!r}, {r1!r}), got {r0!r}")
    w_gap = r1**n - r0**n

    def delta_of(e):
        return (e * (m - 1.0) / (sel.A_sup * m)) ** (m - 1.0)

    eps = _pick_eps(sel.eps0, delta_of, w_gap) if eps is None else eps
    t_cap = expand_time_cap(p, r0, r1, sel.theta, lam_infl, sel.t_bar)
    fam = build_supersolution(sel, eps, r0)
    proc = ExpandProcedure(C, lam_infl, r0, eps, sel, fam, t_cap)

    k = p.mass_exponent
    ts = np.linspace(0.0, t_cap, n_t)
    top = mu * p.Rn
    tol = 1e-12 * max(top, 1.0)
    s_init = np.linspace(r0**n, r1**n - fam.delta, 129)[:-1]
    proc.checks = {
        "kink_offset_cap": fam.delta < w_gap,
        "left": bool(np.all(fam.value(np.full_like(ts, r0**n), ts) >= proc.left_target() - tol)),
        "right": bool(np.all(fam.value(np.full_like(ts, p.Rn), ts) >= top - tol)),
        "initial_order": bool(
            np.all(fam.value(s_init, 0.0) >= top - C * (r1**n - s_init) ** k - tol)
        ),
        "horizon_within_t_bar": t_cap <= sel.t_bar,
    }
    return proc
