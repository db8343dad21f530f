import numpy as np
import pytest

from _oracles import family_derivatives_ref, operator_ref
from frontlab.comparison import (
    build_subsolution,
    build_supersolution,
    select_subsolution_params,
    select_supersolution_params,
    subsolution_family,
)
from frontlab.errors import DomainError, KinkError
from frontlab.model import MassData, ModelParams, c_crit
from frontlab.profiles import GridFunction
from frontlab.residual import (
    OperatorInput,
    certify_sign,
    p_eps_analytic,
    p_eps_discrete,
    p_eps_pointwise,
    prototype_bracket,
    secant_coefficient,
)
from frontlab.solver import SolverState, cfl_dt, step

P1 = ModelParams(1, 1.0, 2.0)
INP = OperatorInput(0.1, P1, 1.0)


def test_pointwise_examples():
    assert p_eps_pointwise(INP, 0.7, 0.0, 0.0, 0.0, 0.3) == 0.0
    s = np.linspace(0, 1, 9)
    assert np.allclose(p_eps_pointwise(INP, s, np.ones_like(s), 0 * s, 0 * s, s), 0.0)
    assert p_eps_pointwise(INP, 0.2, 1.0, -2.0, 0.0, 0.25) == pytest.approx(2.25, rel=1e-15)


def test_pointwise_matches_reference_in_higher_dimension():
    p = ModelParams(3, 1.0, 2.7)
    inp = OperatorInput(0.01, p, 0.4)
    args = (0.3, 0.5, -0.7, 0.2, 0.6)
    assert p_eps_pointwise(inp, *args) == pytest.approx(operator_ref(3, 2.7, 0.4, 0.01, 0.6, *args[:4]), rel=1e-14)


def test_pointwise_rejects_nonpositive_lifted_slope():
    with pytest.raises(DomainError):
        p_eps_pointwise(INP, 0.0, -0.2, 0.0, 0.0, 0.5)


def test_analytic_kink_and_eps_guard():
    fam = subsolution_family(P1, 1.0, 0.1, 0.5, 0.01, 1.0)
    with pytest.raises(KinkError):
        p_eps_analytic(OperatorInput(0.01, P1, 1.0), fam, float(fam.kink(0.0)), 0.0)
    with pytest.raises(DomainError):
        p_eps_analytic(OperatorInput(0.02, P1, 1.0), fam, 0.3, 0.0)


def test_certify_supersolution_passes():
    sel = select_supersolution_params(P1, 1.0, 0.5, 0.5)
    eps = 0.5 * sel.eps0
    fam = build_supersolution(sel, eps, sel.r_min)
    rep = certify_sign(OperatorInput(eps, P1, 1.0), fam, (sel.r_min, 1.0), (0.0, sel.t_bar), "ge", 0.0, n_random=2000)
    assert rep.passed, rep.summary()


def test_certify_detects_supercritical_subsolution():
    # coefficient 0.4 > C_crit = 0.25: the residual turns positive near r1
    sel = select_subsolution_params(P1, 1.0, 0.5, 0.125)
    eps = 0.5 * sel.eps0
    fam = subsolution_family(P1, 1.0, 0.4, 0.5, eps, sel.kappa, 0.0, sel.r_min)
    rep = certify_sign(OperatorInput(eps, P1, 1.0), fam, (sel.r_min, sel.r2), (0.0, 0.0), "le", 0.0, n_random=2000)
    assert not rep.passed
    assert sel.r_min <= rep.worst_point[0] <= 0.5


def test_certify_zero_width_is_vacuous():
    fam = subsolution_family(P1, 1.0, 0.1, 0.5, 0.01, 1.0)
    rep = certify_sign(OperatorInput(0.01, P1, 1.0), fam, (0.3, 0.3), (0.0, 1.0), "le")
    assert rep.passed and rep.n_points == 0


def test_certify_receding_family_with_margin():
    sel = select_subsolution_params(P1, 1.0, 0.5, 0.125)
    eps = 0.5 * sel.eps0
    fam = build_subsolution(sel, eps, sel.r_min, sel.theta)
    margin = eps * sel.kappa * (1.0 - sel.r2)
    t_end = (0.5 - sel.r_min) / sel.theta
    rep = certify_sign(OperatorInput(eps, P1, 1.0), fam, (sel.r_min, sel.r2), (0.0, t_end), "le", margin, n_random=2000)
    assert rep.passed, rep.summary()


def test_discrete_steady_profile():
    s = np.linspace(0, 1, 33)
    g = GridFunction(s, s.copy(), 1.0)
    assert np.allclose(p_eps_discrete(INP, g, g, 1e-3), 0.0, atol=1e-14)


def test_discrete_single_bump_is_local():
    s = np.linspace(0, 1, 33)
    w = s.copy()
    w[16] += 1e-3
    g = GridFunction(s, w, 1.0)
    res = p_eps_discrete(INP, g, g, 1e-3)
    nz = np.flatnonzero(np.abs(res) > 1e-13) + 1
    assert set(nz) <= {15, 16, 17}


def test_discrete_scheme_stencil_reproduces_solver_step():
    p = ModelParams(2, 1.0, 2.5)
    s = np.linspace(0, 1, 65)
    w = s + 0.05 * np.sin(np.pi * s) ** 2
    st = SolverState(p, GridFunction(s, w, 1.0), 0.0, 0.05)
    dt = cfl_dt(st, 0.4)
    nxt = step(st, dt)
    res = p_eps_discrete(OperatorInput(0.05, p, 1.0), st.grid, nxt.grid, dt, stencil="scheme")
    assert np.max(np.abs(res)) < 1e-9


def test_discrete_manufactured_consistency():
    # w = mu s + t g(s) evaluated around t0: discrete residual -> exact operator
    t0 = 0.5
    errs = []
    for N in (64, 128, 256):
        s = np.linspace(0, 1, N + 1)
        g = 0.05 * np.sin(np.pi * s) ** 4
        gs = 0.2 * np.pi * np.sin(np.pi * s) ** 3 * np.cos(np.pi * s)
        gss = 0.2 * np.pi**2 * (3 * np.sin(np.pi * s) ** 2 * np.cos(np.pi * s) ** 2 - np.sin(np.pi * s) ** 4)
        dt = 0.1 / N**2
        w0 = GridFunction(s, s + t0 * g, 1.0)
        w1 = GridFunction(s, s + (t0 + dt) * g, 1.0)
        exact = operator_ref(1, 2.0, 1.0, 0.1, s, s + t0 * g, 1 + t0 * gs, t0 * gss, g)[1:-1]
        errs.append(np.max(np.abs(p_eps_discrete(INP, w0, w1, dt) - exact)))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


def test_secant_coefficient_limits():
    assert secant_coefficient(0.2, 0.6, 0.1, 2.0) == pytest.approx(0.5)
    val = secant_coefficient(np.array([0.3]), np.array([0.3 + 1e-16]), 0.01, 3.0)[0]
    assert val == pytest.approx(0.31**2, rel=1e-12)
    a = secant_coefficient(np.array([0.2]), np.array([0.5]), 0.0, 3.0)[0]
    assert a == pytest.approx((0.5**3 - 0.2**3) / (3 * 0.3), rel=1e-14)


def test_prototype_bracket_sign_tracks_threshold():
    s = 0.5 - 1e-9
    assert prototype_bracket(P1, 1.0, 0.2, 0.5, 0.0, s) < 0
    assert prototype_bracket(P1, 1.0, 0.3, 0.5, 0.0, s) > 0


def test_analytic_matches_pointwise_on_random_states():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 10_000:
        p = ModelParams(int(rng.choice([1, 2, 3])), 1.0, float(rng.uniform(1.1, 4.0)))
        r1 = float(rng.uniform(0.2, 0.8))
        mu = MassData.from_mass(p, float(rng.uniform(0.5, 5.0))).mu
        cc = c_crit(p, mu, r1)
        if rng.random() < 0.5:
            sel = select_subsolution_params(p, mu, r1, float(rng.uniform(0.1, 0.9)) * cc)
            eps = sel.eps0 * float(rng.uniform(0.1, 0.9))
            fam = build_subsolution(sel, eps, sel.r_min, sel.theta, vertical_shift=float(rng.uniform(0, 1e-3)))
            t = rng.uniform(0.0, (r1**p.n - sel.r_min**p.n) / sel.theta, 500)
        else:
            sel = select_supersolution_params(p, mu, r1, cc * float(rng.uniform(1.1, 3.0)))
            eps = sel.eps0 * float(rng.uniform(0.1, 0.9))
            fam = build_supersolution(sel, eps, sel.r_min)
            t = rng.uniform(0.0, sel.t_bar, 500)
        s = rng.uniform(sel.r_min**p.n, p.Rn, 500)
        keep = np.abs(s - fam.kink(t)) > 1e-9
        s, t = s[keep], t[keep]
        w, ws, wss, wt = family_derivatives_ref(fam, s, t)
        inp = OperatorInput(eps, p, mu)
        ref = p_eps_pointwise(inp, w, ws, wss, wt, s)
        got = p_eps_analytic(inp, fam, s, t)
        scale = np.abs(wt) + np.abs(w * ws) + np.abs(mu * s * ws) + np.abs(
            p.n**2 * s ** (2 - 2 / p.n) * (ws + eps) ** (p.m - 1) * wss
        )
        assert np.all(np.abs(got - ref) <= 1e-12 * np.maximum(scale, 1e-300))
        checked += s.size
