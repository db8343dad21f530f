import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import stencil_step_ref
from frontlab.errors import BudgetError, DomainError, StepRejected
from frontlab.model import ModelParams
from frontlab.profiles import GridFunction, constant_profile, transform_to_w, uniform_grid
from frontlab.solver import SolverOptions, SolverState, cfl_dt, integrate, integrate_pme_baseline, step

P1 = ModelParams(1, 1.0, 2.0)


def five_node_state(eps=0.1):
    s = np.linspace(0.0, 1.0, 5)
    return SolverState(P1, GridFunction(s, np.array([0.0, 0.1, 0.2, 0.9, 1.0]), 1.0), 0.0, eps)


def test_five_node_hand_stencil():
    st0 = five_node_state()
    dt = 1e-3
    new = step(st0, dt).grid.values
    # node 1: flat, c<0 upwinds back; node 2: D=1.7, diffusion 16.32, transport -0.12;
    # node 3: D=1.7, diffusion -16.32, c>0 upwinds forward 0.06
    expected = [0.0, 0.1 - 0.06 * dt, 0.2 + 16.2 * dt, 0.9 - 16.26 * dt, 1.0]
    assert np.allclose(new, expected, rtol=0, atol=1e-15)
    assert np.allclose(new, stencil_step_ref(st0.grid.values, st0.grid.s, 1, 2.0, 1.0, 0.1, dt), atol=1e-15)


def test_cfl_formula_five_nodes():
    st0 = five_node_state()
    # steepest slope 2.8 -> K = 2.9; transport speeds <= 0.3
    assert cfl_dt(st0, 1.0) == pytest.approx(0.0625 / 5.8, rel=1e-14)


def test_cfl_on_linear_profile_and_eps_scaling():
    p = ModelParams(2, 1.0, 2.0)
    s = np.linspace(0, 1, 17)
    g = GridFunction(s, 0.8 * s, 0.8)
    dt1 = cfl_dt(SolverState(p, g, 0.0, 0.1), 0.5)
    ref = 0.5 * (1 / 16) ** 2 / (2 * 4 * s[-2] * (0.8 + 0.1))
    assert dt1 == pytest.approx(ref, rel=1e-13)
    # zero slope, m=2: doubling eps halves the diffusive limit
    flat = GridFunction(s, np.zeros_like(s), 0.0)
    a = cfl_dt(SolverState(P1, flat, 0.0, 0.1), 0.5)
    b = cfl_dt(SolverState(P1, flat, 0.0, 0.2), 0.5)
    assert b == pytest.approx(a / 2, rel=1e-14)


def test_safety_bounds():
    with pytest.raises(DomainError):
        cfl_dt(five_node_state(), 0.0)
    with pytest.raises(DomainError):
        SolverOptions(safety=0.0)


def test_step_rejects_oversized_dt():
    st0 = five_node_state()
    with pytest.raises(StepRejected):
        step(st0, 1.01 * cfl_dt(st0, 1.0))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_steady_state_preserved(n):
    p = ModelParams(n, 1.0, 2.5)
    s = uniform_grid(p, 128)
    mu = 0.8
    g = GridFunction(s, mu * s, mu * p.Rn)
    stt = SolverState(p, g, 0.0, 1e-3)
    dt = cfl_dt(stt, 0.45)
    for _ in range(500):
        stt = step(stt, dt)
    assert np.max(np.abs(stt.grid.values - mu * s)) <= 1e-13 * mu * p.Rn


def test_constant_density_trajectory_is_constant():
    p = ModelParams(2, 1.0, 2.0)
    w0 = transform_to_w(p, constant_profile(p, 0.5), uniform_grid(p, 256))
    traj = integrate(p, w0, 0.01, 0.01, [0.005, 0.01])
    assert len(traj) == 3
    for _, g in traj.snapshots:
        assert np.max(np.abs(g.values - w0.values)) < 1e-14
    base = integrate_pme_baseline(p, w0, 0.01, 0.01)
    assert np.max(np.abs(base.snapshots[-1][1].values - w0.values)) < 1e-14


def test_endpoints_pinned_and_exact_output_times():
    s = np.linspace(0, 1, 129)
    w0 = GridFunction(s, np.minimum(3 * s, 1.0), 1.0)
    times = [0.0, 1e-4, 3e-4, 1e-3]
    traj = integrate(P1, w0, 0.01, 1e-3, times)
    assert list(traj.times) == times
    for _, g in traj.snapshots:
        assert g.values[0] == 0.0 and g.values[-1] == 1.0
        assert g.invariant_violations() == []


def test_tiny_horizon_gives_initial_plus_one_snapshot():
    s = np.linspace(0, 1, 65)
    w0 = GridFunction(s, np.minimum(2 * s, 1.0), 1.0)
    traj = integrate(P1, w0, 0.1, 1e-12)
    assert len(traj) == 2 and traj.stats.steps == 1


def test_budget_exhaustion():
    s = np.linspace(0, 1, 65)
    w0 = GridFunction(s, np.minimum(2 * s, 1.0), 1.0)
    with pytest.raises(BudgetError):
        integrate(P1, w0, 0.1, 1.0, opts=SolverOptions(max_steps=5))


def test_nonuniform_grid_rejected():
    s = np.array([0.0, 0.1, 0.5, 1.0])
    with pytest.raises(DomainError):
        integrate(P1, GridFunction(s, s, 1.0), 0.1, 0.1)


def test_self_convergence_first_order():
    finals = {}
    for N in (512, 1024, 2048):
        s = np.linspace(0, 1, N + 1)
        w = s + 0.05 * np.sin(np.pi * s) ** 2 * np.sin(3 * np.pi * s)
        finals[N] = integrate(P1, GridFunction(s, w, 1.0), 0.1, 0.02).snapshots[-1][1].values
    e1 = np.max(np.abs(finals[512] - finals[1024][::2]))
    e2 = np.max(np.abs(finals[1024] - finals[2048][::2]))
    assert 1.5 <= e1 / e2 <= 3.0


@settings(max_examples=30, deadline=None)
@given(
    n=st.sampled_from([1, 2, 3]),
    m=st.floats(1.2, 3.5),
    eps=st.floats(1e-4, 0.5),
    knots=st.lists(st.floats(0.0, 1.0), min_size=6, max_size=6),
    safety=st.floats(0.1, 1.0),
)
def test_step_preserves_invariants(n, m, eps, knots, safety):
    p = ModelParams(n, 1.0, m)
    s = uniform_grid(p, 64)
    # monotone piecewise-linear profile from 0 to 1 through sorted random knots
    ys = np.concatenate([[0.0], np.sort(knots), [1.0]])
    w = np.interp(s, np.linspace(0, 1, ys.size), ys)
    stt = SolverState(p, GridFunction(s, w, 1.0), 0.0, eps)
    for _ in range(20):
        stt = step(stt, cfl_dt(stt, safety))
    g = stt.grid
    assert g.values[0] == 0.0 and g.values[-1] == 1.0
    assert np.all(np.diff(g.values) >= 0.0)
    assert np.all(g.values <= 1.0)
