import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import fd_derivatives, operator_ref, receding_predicates_ref
from frontlab.comparison import (
    build_subsolution,
    build_supersolution,
    expand_procedure,
    limit_envelope,
    select_subsolution_params,
    select_supersolution_params,
    shrink_procedure,
    subsolution_family,
    subsolution_predicates,
    supersolution_predicates,
)
from frontlab.errors import DomainError, ThresholdError
from frontlab.model import MassData, ModelParams, c_crit
from frontlab.residual import OperatorInput, p_eps_analytic

P1 = ModelParams(1, 1.0, 2.0)


def test_receding_selection_worked_example():
    sel = select_subsolution_params(P1, 1.0, 0.5, 0.125)
    assert sel.lam == pytest.approx(1 - math.sqrt(0.5), rel=1e-14)
    assert sel.kappa == pytest.approx(2 * math.sqrt(0.5) / (1 - math.sqrt(0.5)), rel=1e-14)
    assert all(subsolution_predicates(sel).values())
    assert receding_predicates_ref(
        1, 1.0, 2.0, 1.0, 0.5, sel.A_sub, sel.kappa, sel.lam, sel.eps0, sel.theta_max, sel.r_min, sel.r2, sel.theta
    )


def test_receding_selection_threshold():
    with pytest.raises(ThresholdError):
        select_subsolution_params(P1, 1.0, 0.5, 0.25)
    with pytest.raises(ThresholdError):
        select_subsolution_params(P1, 1.0, 0.5, 0.0)


def test_receding_selection_tiny_coefficient_uses_slope_floor():
    sel = select_subsolution_params(P1, 1.0, 0.5, 1e-9)
    assert sel.kappa == pytest.approx(1e-3)
    assert all(subsolution_predicates(sel).values())


def test_advancing_selection_worked_example():
    sel = select_supersolution_params(P1, 1.0, 0.5, 0.5)
    assert all(supersolution_predicates(sel).values())
    assert sel.theta * sel.t_bar == pytest.approx(0.5, rel=1e-15)
    # floor at r_min: (1 - r_min + 2 theta) / 2
    assert 0.5 >= 0.5 * (1 - sel.r_min + 2 * sel.theta)
    with pytest.raises(ThresholdError):
        select_supersolution_params(P1, 1.0, 0.5, 0.25)


def test_stationary_family_at_boundary():
    sel = select_subsolution_params(P1, 1.0, 0.5, 0.125)
    fam = build_subsolution(sel, 0.5 * sel.eps0, sel.r_min, 0.0)
    assert float(fam.value(1.0, 0.0)) == pytest.approx(1.0, abs=1e-15)


def test_subsolution_converges_to_prototype():
    sel = select_subsolution_params(P1, 1.0, 0.5, 0.125)
    s = np.linspace(sel.r_min, 0.49, 7)
    proto = 1.0 - 0.125 * (0.5 - s) ** 2
    gaps = []
    for frac in (1e-1, 1e-2, 1e-3):
        fam = build_subsolution(sel, frac * sel.eps0, sel.r_min, 0.0)
        gaps.append(np.max(np.abs(fam.value(s, 0.0) - proto)))
    assert gaps[0] > gaps[1] > gaps[2]


def test_supersolution_out_piece_and_kink_slope():
    sel = select_supersolution_params(P1, 1.0, 0.5, 0.5)
    eps = 0.5 * sel.eps0
    fam = build_supersolution(sel, eps, sel.r_min)
    assert float(fam.value(1.0, 0.3)) == pytest.approx(1.0 + fam.delta * eps / 2.0, rel=1e-15)
    assert float(fam.value(1.0, 0.3)) > 1.0
    k = float(fam.kink(0.1))
    _, w_s, _, _ = fam.mid_piece(k - 1e-300, 0.1)
    assert abs(float(w_s)) < 1e-12


def test_supersolution_residual_of_constant_piece_is_zero():
    sel = select_supersolution_params(P1, 1.0, 0.5, 0.5)
    eps = 0.5 * sel.eps0
    fam = build_supersolution(sel, eps, sel.r_min)
    inp = OperatorInput(eps, P1, 1.0)
    s = np.linspace(float(fam.kink(0.0)) + 1e-6, 1.0, 11)
    assert np.all(p_eps_analytic(inp, fam, s, 0.0) == 0.0)


def test_subsolution_out_piece_residual_formula():
    sel = select_subsolution_params(P1, 1.0, 0.5, 0.125)
    eps = 0.5 * sel.eps0
    fam = build_subsolution(sel, eps, sel.r_min, sel.theta)
    inp = OperatorInput(eps, P1, 1.0)
    ek, th = eps * sel.kappa, sel.theta
    for t in (0.0, 0.5):
        s = np.linspace(float(fam.kink(t)) + 1e-4, 1.0, 9)
        expected = ek * (th - (1.0 - ek) * (1.0 - s) - ek * th * t)
        assert np.allclose(p_eps_analytic(inp, fam, s, t), expected, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("n,m", [(1, 2.0), (2, 3.0), (3, 1.5)])
def test_analytic_residual_matches_finite_differences(n, m):
    p = ModelParams(n, 1.0, m)
    mu = MassData.from_mass(p, 2.0).mu
    r1 = 0.5
    sel = select_subsolution_params(p, mu, r1, 0.5 * c_crit(p, mu, r1))
    eps = 0.3 * sel.eps0
    fam = build_subsolution(sel, eps, sel.r_min, sel.theta)
    # keep the kink well inside the tail, as the procedures do
    while fam.delta > 0.25 * (r1**n - sel.r_min**n):
        eps *= 0.5
        fam = build_subsolution(sel, eps, sel.r_min, sel.theta)
    inp = OperatorInput(eps, p, mu)
    t = 0.2 * (r1**n - sel.r_min**n) / sel.theta
    k = float(fam.kink(t))
    lo = sel.r_min**n
    mid = np.linspace(lo, k - 1e-3, 5).tolist() if k - 1e-3 > lo else []
    for s in mid + [k + 1e-3, 0.9 * p.Rn]:
        exact = [float(x) for x in fam.derivatives(s, t)]
        approx = fd_derivatives(lambda a, b: float(fam.value(a, b)), s, t)
        # second differences carry roundoff of order 1e-16 / h^2
        for e, a, tol in zip(exact, approx, (1e-12, 1e-7, 1e-4, 1e-7)):
            assert e == pytest.approx(a, rel=1e-4, abs=tol)
        ref = operator_ref(n, m, mu, eps, s, *exact[:3], exact[3])
        assert float(p_eps_analytic(inp, fam, s, t)) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_sign_of_stationary_mid_piece_tracks_threshold():
    # at theta=0 the sign is that of n^2 r1^(2n-2) (C m)^(m-1)/(m-1)^m - mu (R^n - r1^n)
    for A in (0.05, 0.4):
        fam = subsolution_family(P1, 1.0, A, 0.5, 1e-6, 1.0)
        inp = OperatorInput(1e-6, P1, 1.0)
        res = float(p_eps_analytic(inp, fam, 0.499, 0.0))
        expected = 2.0 * A - 0.5
        assert np.sign(res) == np.sign(expected)


def test_limit_envelope_values():
    assert limit_envelope(P1, 1.0, "shrink", 0.25, 0.25**1, 0.1, 1.0, 0.05) == pytest.approx(0.9975, rel=1e-14)
    assert limit_envelope(P1, 1.0, "shrink", 0.25, 0.5, 0.1, 1.0, 0.45) == 1.0
    assert limit_envelope(P1, 1.0, "shrink", 0.25, 0.5, 0.0, 0.0, 0.5) == 1.0
    with pytest.raises(DomainError):
        limit_envelope(P1, 1.0, "drift", 0.25, 0.5, 0.0, 0.0, 0.5)


def test_shrink_procedure_checks_pass():
    proc = shrink_procedure(P1, 1.0, 0.5, 0.125)
    assert proc.inflation == pytest.approx(1.5)
    assert all(proc.checks.values()), proc.checks
    assert proc.t_cap > 0


def test_expand_procedure_checks_pass():
    proc = expand_procedure(P1, 1.0, 0.5, 0.5)
    assert all(proc.checks.values()), proc.checks
    assert proc.envelope_coef == pytest.approx(0.375)


def test_procedures_respect_threshold():
    with pytest.raises(ThresholdError):
        shrink_procedure(P1, 1.0, 0.5, 0.3)
    with pytest.raises(ThresholdError):
        expand_procedure(P1, 1.0, 0.5, 0.2)
    with pytest.raises(ThresholdError):
        shrink_procedure(P1, 1.0, 0.5, 0.125, inflation=3.0)


def test_build_rejects_inadmissible_arguments():
    sel = select_subsolution_params(P1, 1.0, 0.5, 0.125)
    with pytest.raises(DomainError):
        build_subsolution(sel, sel.eps0, sel.r_min, 0.0)
    with pytest.raises(DomainError):
        build_subsolution(sel, 0.5 * sel.eps0, 0.5 * sel.r_min, 0.0)
    with pytest.raises(DomainError):
        build_subsolution(sel, 0.5 * sel.eps0, sel.r_min, 2 * sel.theta_max)


@settings(max_examples=60, deadline=None)
@given(
    n=st.sampled_from([1, 2, 3]),
    m=st.floats(1.1, 4.0),
    r1=st.floats(0.2, 0.8),
    mass=st.floats(0.5, 5.0),
    q=st.floats(0.02, 0.98),
)
def test_receding_selection_property(n, m, r1, mass, q):
    p = ModelParams(n, 1.0, m)
    mu = MassData.from_mass(p, mass).mu
    A = q * c_crit(p, mu, r1)
    sel = select_subsolution_params(p, mu, r1, A)
    assert receding_predicates_ref(
        n, 1.0, m, mu, r1, A, sel.kappa, sel.lam, sel.eps0, sel.theta_max, sel.r_min, sel.r2, sel.theta
    )


@settings(max_examples=60, deadline=None)
@given(
    n=st.sampled_from([1, 2, 3]),
    m=st.floats(1.1, 4.0),
    r1=st.floats(0.2, 0.8),
    mass=st.floats(0.5, 5.0),
    q=st.floats(1.05, 5.0),
)
def test_advancing_selection_property(n, m, r1, mass, q):
    p = ModelParams(n, 1.0, m)
    mu = MassData.from_mass(p, mass).mu
    sel = select_supersolution_params(p, mu, r1, q * c_crit(p, mu, r1))
    assert all(supersolution_predicates(sel).values())
    assert sel.eps0 == min(0.5, sel.theta)
