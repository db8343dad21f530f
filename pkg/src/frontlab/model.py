"""Problem constants and the critical thresholds of the radial system.

All quantities refer to the ball ``B_R(0)`` in ``R^n`` with diffusion
exponent ``m > 1``.  Densities are radial, so a profile is a function of
``r in [0, R]`` and the mass accumulation variable is ``s = r**n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInputError, DomainError

__all__ = [
    "ModelParams",
    "MassData",
    "a_crit",
    "c_crit",
    "tail_to_mass_coefficient",
    "root_power",
]

SHRINK = "shrink"
EXPAND = "expand"


def root_power(x: float, m: float) -> float:
    """Return ``x ** (1 / (m - 1))`` for ``x >= 0``.

    For ``m`` close to 1 the exponent is large; the power is then taken in
    the log domain so overflow yields ``inf`` instead of raising.
    """
    if x < 0.0:
        raise DomainError(f"root_power needs x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if m - 1.0 < 0.1:
        arg = math.log(x) / (m - 1.0)
        return math.exp(arg) if arg < 709.0 else math.inf
    return x ** (1.0 / (m - 1.0))


@dataclass(frozen=True)
class ModelParams:
    """Fixed constants of the problem: dimension, radius and exponent."""

    n: int
    R: float
    m: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not self.R > 0.0:
            raise DomainError(f"R must be positive, got {self.R!r}")
        if not self.m > 1.0:
            raise DomainError(f"m must exceed 1, got {self.m!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "m", float(self.m))

    @property
    def omega_n(self) -> float:
        """Volume of the unit ball in ``R^n``."""
        n = self.n
        if n == 1:
            return 2.0
        if n == 2:
            return math.pi
        return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)

    @property
    def Rn(self) -> float:
        return self.R**self.n

    @property
    def volume(self) -> float:
        """Lebesgue measure of the domain."""
        return self.omega_n * self.Rn

    @property
    def mass_exponent(self) -> float:
        """Exponent ``m / (m - 1)`` of the mass-accumulation tails."""
        return self.m / (self.m - 1.0)

    def check_radius(self, r: float, name: str = "r1") -> None:
        if not 0.0 < r < self.R:
            raise DomainError(f"{name} must lie in (0, R={self.R}), got {r!r}")


@dataclass(frozen=True)
class MassData:
    total_mass: float
    mu: float

    @classmethod
    def from_mass(cls, p: ModelParams, total_mass: float) -> "MassData":
        if total_mass < 0.0:
            raise DomainError(f"total mass must be nonnegative, got {total_mass!r}")
        return cls(float(total_mass), float(total_mass) / p.volume)

    @classmethod
    def from_mu(cls, p: ModelParams, mu: float) -> "MassData":
        if mu < 0.0:
            raise DomainError(f"mean density must be nonnegative, got {mu!r}")
        return cls(float(mu) * p.volume, float(mu))


def a_crit(p: ModelParams, md: MassData, r1: float) -> float:
    """Critical tail coefficient separating initial shrinking from expansion.

    Initial densities behaving like ``A (r1 - r)**(1/(m-1))`` near the edge
    of their support shrink for ``A`` below this value and expand above it.
    """
    p.check_radius(r1)
    if md.total_mass <= 0.0:
        raise DegenerateInputError("critical coefficient undefined for zero mass")
    n, m = p.n, p.m
    base = md.total_mass * (1.0 - r1**n / p.Rn) * (m - 1.0) / (p.omega_n * r1 ** (n - 1) * n)
    return root_power(base, m)


def c_crit(p: ModelParams, mu: float, r1: float) -> float:
    """Critical coefficient of ``(r1**n - s)**(m/(m-1))`` for mass profiles."""
    p.check_radius(r1)
    if mu < 0.0:
        raise DomainError(f"mu must be nonnegative, got {mu!r}")
    n, m = p.n, p.m
    base = mu * (p.Rn - r1**n) * (m - 1.0) / (r1 ** (2 * n - 2) * n**2)
    return (m - 1.0) / m * root_power(base, m)


def tail_to_mass_coefficient(
    p: ModelParams, A: float, r0: float, r1: float, direction: str
) -> float:
    """Map a density tail coefficient to the matching mass-tail coefficient.

    If ``u0 <= A (r1 - r)**(1/(m-1))`` on ``(r0, r1)`` then
    ``w0(s) >= mu R^n - C (r1**n - s)**(m/(m-1))`` on ``(r0**n, r1**n)`` with
    ``C`` from ``direction="shrink"``; the reversed inequalities hold with
    ``direction="expand"``.  ``r0 == r1`` evaluates the common limit.
    """
    if direction not in (SHRINK, EXPAND):
        raise DomainError(f"direction must be 'shrink' or 'expand', got {direction!r}")
    if not 0.0 < r0 <= r1 < p.R:
        raise DomainError(f"need 0 < r0 <= r1 < R, got r0={r0!r}, r1={r1!r}")
    if A < 0.0:
        raise DomainError(f"A must be nonnegative, got {A!r}")
    n, m = p.n, p.m
    lead = A * n ** (-1.0 / (m - 1.0)) * (m - 1.0) / m
    if n == 1:
        return lead
    # radius factors in log form; the exponents blow up as m -> 1
    big = (n - 1) * m / (m - 1.0)
    if direction == SHRINK:
        log_factor = -big * math.log(r0) + (n - 1) * math.log(r1)
    else:
        log_factor = -big * math.log(r1) + (n - 1) * math.log(r0)
    return lead * math.exp(log_factor)
