"""Radial initial densities and their mass accumulation transforms.

A :class:`RadialProfile` is a list of analytic segments on ``[0, R]``.
Every segment has a closed-form antiderivative for the weight
``n rho**(n-1)``, so masses and transforms are exact up to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InfeasibleError
from .model import ModelParams

__all__ = [
    "Plateau",
    "Linear",
    "Tail",
    "Zero",
    "RadialProfile",
    "GridFunction",
    "BoundReport",
    "uniform_grid",
    "make_profile",
    "mass",
    "calibrate_plateau",
    "transform_to_w",
    "derivative_to_u",
    "check_initial_bound",
]


# -- segments ---------------------------------------------------------------


@dataclass(frozen=True)
class Plateau:
    r_a: float
    r_b: float
    B: float

    def value(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.B)

    def weighted_integral(self, n, a, b):
        """``n * int_a^b rho**(n-1) u(rho) drho``; ``a``, ``b`` may be arrays."""
        return self.B * (b**n - a**n)


@dataclass(frozen=True)
class Linear:
    """Straight line from ``u_a`` at ``r_a`` to ``u_b`` at ``r_b``."""

    r_a: float
    r_b: float
    u_a: float
    u_b: float

    @property
    def slope(self):
        return (self.u_b - self.u_a) / (self.r_b - self.r_a)

    def value(self, r):
        return self.u_a + self.slope * (np.asarray(r, dtype=float) - self.r_a)

    def weighted_integral(self, n, a, b):
        k = self.slope
        c0 = self.u_a - k * self.r_a
        return c0 * (b**n - a**n) + k * n / (n + 1.0) * (b ** (n + 1) - a ** (n + 1))


@dataclass(frozen=True)
class Tail:
    """Power tail ``A (r1 - r)**alpha``."""

    r_a: float
    r_b: float
    A: float
    alpha: float
    r1: float

    def value(self, r):
        d = np.clip(self.r1 - np.asarray(r, dtype=float), 0.0, None)
        return self.A * d**self.alpha

    def weighted_integral(self, n, a, b):
        # rho**(n-1) = (r1 - d)**(n-1) expanded binomially in d = r1 - rho
        da = self.r1 - a
        db = self.r1 - b
        total = 0.0
        for k in range(n):
            e = k + self.alpha + 1.0
            total = total + (
                math.comb(n - 1, k)
                * self.r1 ** (n - 1 - k)
                * (-1.0) ** k
                * (da**e - db**e)
                / e
            )
        return self.A * n * total


@dataclass(frozen=True)
class Zero:
    r_a: float
    r_b: float

    def value(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def weighted_integral(self, n, a, b):
        return 0.0 * (b - a)


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-analytic radially symmetric density on ``[0, R]``.

    ``meta`` records the construction parameters (plateau height, tail
    coefficient, ...) for config echo; it plays no role in evaluation.
    """

    segments: tuple
    r1: float
    R: float
    meta: dict = field(default_factory=dict, compare=False)
    tabulation: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        segs = self.segments
        if not segs:
            raise DomainError("profile needs at least one segment")
        if segs[0].r_a != 0.0 or not math.isclose(segs[-1].r_b, self.R):
            raise DomainError("segments must cover [0, R]")
        for left, right in zip(segs, segs[1:]):
            if left.r_b != right.r_a:
                raise DomainError("segments must be contiguous")
        for seg in segs:
            if seg.r_b < seg.r_a:
                raise DomainError("segment with reversed endpoints")
            if seg.r_b > self.r1 and not isinstance(seg, Zero):
                raise DomainError("profile must vanish on [r1, R]")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for seg in self.segments:
            if isinstance(seg, Zero):
                continue
            last = seg is self.segments[-1]
            mask = (r >= seg.r_a) & ((r < seg.r_b) | (last & (r <= seg.r_b)))
            out = np.where(mask, seg.value(r), out)
        return out

    def breakpoints(self):
        return sorted({s.r_a for s in self.segments} | {self.R})

    def tabulate(self, r_grid) -> "RadialProfile":
        r_grid = np.asarray(r_grid, dtype=float)
        return RadialProfile(
            self.segments, self.r1, self.R, dict(self.meta), (r_grid, self(r_grid))
        )


@dataclass
class GridFunction:
    """Sampled mass accumulation function on ``0 = s_0 < ... < s_N = R**n``."""

    s: np.ndarray
    values: np.ndarray
    mu_Rn: float

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.s.ndim != 1 or self.s.shape != self.values.shape:
            raise DomainError("s and values must be 1-D arrays of equal length")
        if self.s.size < 3:
            raise DomainError("grid needs at least three nodes")
        if self.s[0] != 0.0 or np.any(np.diff(self.s) <= 0.0):
            raise DomainError("s grid must start at 0 and increase strictly")

    @property
    def N(self) -> int:
        return self.s.size - 1

    @property
    def ds(self) -> float:
        """Spacing of a uniform grid (first cell for non-uniform ones)."""
        return float(self.s[1] - self.s[0])

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.s)
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))

    def invariant_violations(self, tol: float = 1e-12) -> list[str]:
        """Names of violated grid invariants (empty when all hold)."""
        scale = max(abs(self.mu_Rn), 1.0)
        bad = []
        if not np.all(np.isfinite(self.values)):
            bad.append("finite")
            return bad
        if np.any(np.diff(self.values) < -tol * scale):
            bad.append("monotone")
        if abs(self.values[0]) > tol * scale:
            bad.append("left_pin")
        if abs(self.values[-1] - self.mu_Rn) > tol * scale:
            bad.append("right_pin")
        if np.any(self.values > self.mu_Rn + tol * scale):
            bad.append("upper_bound")
        return bad

    def copy(self) -> "GridFunction":
        return GridFunction(self.s.copy(), self.values.copy(), self.mu_Rn)


def uniform_grid(p: ModelParams, N: int = 2048) -> np.ndarray:
    if N < 2:
        raise DomainError(f"need N >= 2 cells, got {N}")
    return np.linspace(0.0, p.Rn, N + 1)


# -- construction -----------------------------------------------------------


def make_profile(
    p: ModelParams,
    B: float,
    r_plateau: float,
    A: float,
    alpha: float,
    r0: float,
    r1: float,
) -> RadialProfile:
    """Plateau ``B`` on ``[0, r_plateau]``, linear ramp to the tail value at
    ``r0``, tail ``A (r1 - r)**alpha`` on ``[r0, r1]`` and zero beyond."""
    if not 0.0 < r_plateau <= r0 < r1 < p.R:
        raise DomainError(
            f"need 0 < r_plateau <= r0 < r1 < R, got {r_plateau}, {r0}, {r1}, R={p.R}"
        )
    if B < 0.0 or A < 0.0:
        raise DomainError(f"coefficients must be nonnegative, got B={B}, A={A}")
    if not alpha > 0.0:
        raise DomainError(f"tail exponent must be positive, got {alpha}")
    tail = Tail(r0, r1, float(A), float(alpha), r1)
    segs = [Plateau(0.0, r_plateau, float(B))]
    if r0 > r_plateau:
        segs.append(Linear(r_plateau, r0, float(B), float(tail.value(r0))))
    segs += [tail, Zero(r1, p.R)]
    meta = dict(B=float(B), r_plateau=r_plateau, A=float(A), alpha=float(alpha), r0=r0, r1=r1)
    return RadialProfile(tuple(segs), r1, p.R, meta)


def constant_profile(p: ModelParams, c: float) -> RadialProfile:
    """Density ``c`` on the whole ball (support edge at ``R``)."""
    if c < 0.0:
        raise DomainError("density must be nonnegative")
    return RadialProfile((Plateau(0.0, p.R, float(c)),), p.R, p.R, dict(B=float(c)))


def _weighted_mass(p: ModelParams, profile: RadialProfile, r):
    """``n * int_0^r rho**(n-1) u0`` for array ``r``; equals ``w0(r**n)``."""
    r = np.asarray(r, dtype=float)
    total = np.zeros_like(r)
    for seg in profile.segments:
        a = np.clip(r, seg.r_a, seg.r_b)
        total = total + seg.weighted_integral(p.n, seg.r_a, a)
    return total


def mass(p: ModelParams, profile: RadialProfile) -> float:
    """Total mass over the ball."""
    return float(p.omega_n * _weighted_mass(p, profile, p.R))


def calibrate_plateau(
    p: ModelParams,
    target_mass: float,
    A: float,
    alpha: float,
    r_plateau: float,
    r0: float,
    r1: float,
) -> float:
    """Plateau height giving the profile exactly ``target_mass``.

    Mass is affine in ``B``, so two evaluations determine it.
    """
    m0 = mass(p, make_profile(p, 0.0, r_plateau, A, alpha, r0, r1))
    m1 = mass(p, make_profile(p, 1.0, r_plateau, A, alpha, r0, r1))
    slope = m1 - m0
    if target_mass < m0 * (1.0 - 1e-12):
        raise InfeasibleError(
            f"target mass {target_mass} below tail-only mass {m0}; reduce A or the tail region"
        )
    return max(0.0, (target_mass - m0) / slope)


def transform_to_w(p: ModelParams, profile: RadialProfile, s_grid) -> GridFunction:
    """Exact mass accumulation function of ``profile`` on ``s_grid``."""
    s = np.asarray(s_grid, dtype=float)
    r = s ** (1.0 / p.n)
    r[-1] = min(r[-1], p.R)
    values = _weighted_mass(p, profile, r)
    mu_Rn = mass(p, profile) / p.omega_n
    return GridFunction(s, values, mu_Rn)


def derivative_to_u(w: GridFunction, n: int):
    """Cellwise difference quotient of ``w``, i.e. the density.

    Returns ``(r_mid, u)`` with ``r_mid`` the radius of each cell midpoint.
    """
    du = np.diff(w.values) / np.diff(w.s)
    s_mid = 0.5 * (w.s[1:] + w.s[:-1])
    return s_mid ** (1.0 / n), du


@dataclass
class BoundReport:
    holds: bool
    direction: str
    worst_violation: float
    worst_s: Optional[float]
    n_checked: int


def check_initial_bound(
    p: ModelParams,
    w0: GridFunction,
    C: float,
    r0: float,
    r1: float,
    direction: str,
    rtol: float = 1e-12,
) -> BoundReport:
    """Check ``w0`` against ``mu R^n -/+ C (r1**n - s)**(m/(m-1))`` on
    the open interval ``(r0**n, r1**n)``.

    ``direction="lower"`` asks ``w0`` to lie above the barrier, ``"upper"``
    below it.  The worst violation is positive when the bound fails.
    """
    if direction not in ("lower", "upper"):
        raise DomainError("direction must be 'lower' or 'upper'")
    n = p.n
    mask = (w0.s > r0**n) & (w0.s < r1**n)
    s = w0.s[mask]
    barrier = w0.mu_Rn - C * (r1**n - s) ** p.mass_exponent
    gap = barrier - w0.values[mask] if direction == "lower" else w0.values[mask] - barrier
    tol = rtol * abs(w0.mu_Rn)
    if s.size == 0:
        return BoundReport(True, direction, -math.inf, None, 0)
    k = int(np.argmax(gap))
    worst = float(gap[k])
    return BoundReport(worst <= tol, direction, worst, float(s[k]), int(s.size))


def round_trip_error(
    p: ModelParams, profile: RadialProfile, w: GridFunction, exclude: Sequence[float] = ()
) -> float:
    """L-infinity gap between ``derivative_to_u(w)`` and the exact profile,
    skipping cells that contain a breakpoint."""
    r_mid, u = derivative_to_u(w, p.n)
    edges = w.s ** (1.0 / p.n)
    keep = np.ones(u.size, dtype=bool)
    for b in list(profile.breakpoints()) + list(exclude):
        keep &= ~((edges[:-1] <= b) & (edges[1:] >= b))
    return float(np.max(np.abs(u[keep] - profile(r_mid[keep])))) if keep.any() else 0.0
