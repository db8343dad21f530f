"""Compiled inner loops of the explicit scheme.

All kernels assume a uniform grid with spacing ``ds`` and operate in place.
Status codes: 0 finished, 1 non-finite value produced, 2 step budget spent.
"""

import numba
import numpy as np

OK = 0
NONFINITE = 1
BUDGET = 2


@numba.njit(cache=True)
def diffusion_weights(s, n):
    out = np.empty(s.size)
    for i in range(s.size):
        out[i] = 1.0 if n == 1 else n * n * s[i] ** (2.0 - 2.0 / n)
    return out


@numba.njit(cache=True)
def cfl_unit(w, s, coef, ds, m, mu, eps, taxis):
    """Stable step for safety factor 1 (``inf`` when nothing constrains it)."""
    dtmin = np.inf
    for i in range(1, w.size - 1):
        q = max(w[i] - w[i - 1], w[i + 1] - w[i]) / ds
        lifted = q + eps
        if lifted < eps:
            lifted = eps
        K = coef[i] * (lifted if m == 2.0 else lifted ** (m - 1.0))
        if K > 0.0:
            d = ds * ds / (2.0 * K)
            if d < dtmin:
                dtmin = d
        if taxis:
            c = abs(w[i] - mu * s[i])
            if c > 0.0:
                d = ds / c
                if d < dtmin:
                    dtmin = d
    return dtmin


@numba.njit(cache=True)
def _update(w, new, s, coef, ds, m, mu, eps, dt, taxis):
    n_last = w.size - 1
    for i in range(1, n_last):
        qb = (w[i] - w[i - 1]) / ds
        qf = (w[i + 1] - w[i]) / ds
        if m == 2.0:
            D = 0.5 * (qf + qb) + eps
        elif abs(qf - qb) > 1e-14 * (abs(qf) + abs(qb) + eps):
            D = ((qf + eps) ** m - (qb + eps) ** m) / (m * (qf - qb))
        else:
            D = (0.5 * (qf + qb) + eps) ** (m - 1.0)
        rhs = coef[i] * D * (qf - qb) / ds
        if taxis:
            c = w[i] - mu * s[i]
            rhs += c * (qf if c > 0.0 else qb)
        new[i] = w[i] + dt * rhs
    new[0] = w[0]
    new[n_last] = w[n_last]


@numba.njit(cache=True)
def _repair(new, stats):
    """Backward min-sweep; ``stats`` accumulates events, lowered mass and the
    largest pre-repair downward jump."""
    n_last = new.size - 1
    for i in range(n_last - 1, 0, -1):
        jump = new[i] - new[i + 1]
        if jump > 0.0:
            stats[0] += 1.0
            stats[1] += jump
            if jump > stats[2]:
                stats[2] = jump
            new[i] = new[i + 1]
    if new[1] < new[0]:
        jump = new[0] - new[1]
        stats[0] += 1.0
        stats[1] += jump
        if jump > stats[2]:
            stats[2] = jump
        new[1] = new[0]


@numba.njit(cache=True)
def single_step(w, new, s, coef, ds, m, mu, eps, dt, taxis, stats):
    _update(w, new, s, coef, ds, m, mu, eps, dt, taxis)
    for i in range(new.size):
        if not np.isfinite(new[i]):
            return NONFINITE
    _repair(new, stats)
    return OK


@numba.njit(cache=True)
def advance(w, s, coef, ds, m, mu, eps, t, t_end, safety, taxis, max_steps, stats):
    """Step ``w`` from ``t`` to exactly ``t_end``.

    ``stats`` layout: repair events, repaired mass, max jump, steps taken,
    last dt, max ratio dt / unit CFL step.
    Returns ``(t, status)``.
    """
    new = w.copy()
    taken = 0
    while t < t_end:
        if taken >= max_steps:
            return t, BUDGET
        unit = cfl_unit(w, s, coef, ds, m, mu, eps, taxis)
        dt = safety * unit
        last = False
        if t + dt >= t_end:
            dt = t_end - t
            last = True
        _update(w, new, s, coef, ds, m, mu, eps, dt, taxis)
        for i in range(new.size):
            if not np.isfinite(new[i]):
                return t, NONFINITE
        _repair(new, stats)
        for i in range(w.size):
            w[i] = new[i]
        t = t_end if last else t + dt
        taken += 1
        stats[3] += 1.0
        stats[4] = dt
        ratio = dt / unit
        if ratio > stats[5]:
            stats[5] = ratio
    return t, OK
