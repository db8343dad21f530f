import numpy as np
import pytest

from frontlab.errors import DomainError, WindowError
from frontlab.front import (
    EXPANDING,
    INCONCLUSIVE,
    SHRINKING,
    FrontTrace,
    check_tau,
    envelope_check,
    estimate_speed,
    fraction_window,
    front_position,
    front_trace,
    sign_change_bracket,
)
from frontlab.model import ModelParams
from frontlab.profiles import GridFunction
from frontlab.solver import Trajectory

P1 = ModelParams(1, 1.0, 2.0)


def test_front_of_linear_profile():
    s = np.linspace(0, 1, 101)
    assert front_position(GridFunction(s, s, 1.0), 1e-6) == pytest.approx(1 - 1e-6, abs=1e-12)


def test_front_of_exact_power_tail():
    s = np.linspace(0, 1, 2001)
    w = 1.0 - 0.25 * np.clip(0.5 - s, 0, None) ** 2
    w = np.minimum(w, s * 1e3)
    assert front_position(GridFunction(s, w, 1.0), 1e-12) == pytest.approx(0.5, abs=1e-3)


def test_front_hand_interpolation():
    s = np.array([0.0, 1 / 3, 2 / 3, 1.0])
    g = GridFunction(s, np.array([0.0, 0.5, 0.96, 1.0]), 1.0)
    assert front_position(g, 0.05) == pytest.approx(1 / 3 + (0.45 / 0.46) / 3, rel=1e-14)


def test_front_tau_range():
    g = GridFunction(np.linspace(0, 1, 5), np.linspace(0, 1, 5), 1.0)
    for tau in (0.0, 1.0):
        with pytest.raises(DomainError):
            front_position(g, tau)


def _trajectory(s, fronts, times):
    snaps = []
    for t, f in zip(times, fronts):
        snaps.append((t, GridFunction(s, np.minimum(s / f, 1.0), 1.0)))
    return Trajectory(snaps, {"n": 2})


def test_trace_constant_linear_and_empty():
    s = np.linspace(0, 1, 1001)
    times = np.linspace(0, 1, 6)
    const = front_trace(_trajectory(s, [0.5] * 6, times), 1e-9)
    assert np.allclose(const.s_front, 0.5, atol=1e-8)
    lin = front_trace(_trajectory(s, 0.25 - 0.01 * times, times), 1e-9)
    assert np.allclose(lin.s_front, 0.25 - 0.01 * times, atol=1e-8)
    assert np.allclose(lin.r_front, np.sqrt(lin.s_front))
    empty = front_trace(Trajectory([], {"n": 1}), 1e-6)
    assert len(empty) == 0


def test_speed_synthetic_receding_n2():
    t = np.linspace(0, 0.05, 11)
    sf = 0.25 - 0.01 * t
    tr = FrontTrace(t, sf, np.sqrt(sf), 1e-6, 2, 1e-4)
    v = estimate_speed(tr, (0.0, 0.05))
    assert v.classification == SHRINKING
    assert v.slope == pytest.approx(-0.01, rel=1e-3)
    assert v.zeta == pytest.approx(0.01, rel=1e-3)


def test_speed_constant_and_small_displacement():
    t = np.linspace(0, 1, 11)
    tr = FrontTrace(t, np.full(11, 0.5), np.full(11, 0.5), 1e-6, 1, 1e-3)
    v = estimate_speed(tr, (0.0, 1.0))
    assert v.classification == INCONCLUSIVE and v.zeta == 0.0
    sf = 0.5 + 1e-3 * t  # one cell in total
    v = estimate_speed(FrontTrace(t, sf, sf, 1e-6, 1, 1e-3), (0.0, 1.0), min_cells=3)
    assert v.classification == INCONCLUSIVE
    sf = 0.5 + 5e-3 * t
    assert estimate_speed(FrontTrace(t, sf, sf, 1e-6, 1, 1e-3), (0.0, 1.0)).classification == EXPANDING


def test_speed_window_too_short():
    t = np.linspace(0, 1, 11)
    tr = FrontTrace(t, t, t, 1e-6, 1, 1e-3)
    with pytest.raises(WindowError):
        estimate_speed(tr, (0.0, 0.2))


def test_fraction_window():
    assert fraction_window(0.02, (0.1, 0.6)) == pytest.approx((0.002, 0.012))
    with pytest.raises(DomainError):
        fraction_window(1.0, (0.6, 0.1))


def test_envelope_on_saturated_trajectory_passes():
    s = np.linspace(0, 1, 201)
    w = np.minimum(s / 0.1, 1.0)
    traj = Trajectory([(t, GridFunction(s, w, 1.0)) for t in (0.0, 0.1, 0.2)], {"n": 1})
    rep = envelope_check(traj, P1, 1.0, 0.2, 0.5, 0.1, (0.3, 0.5), "lower")
    assert rep.passed and rep.n_checked > 0


def test_envelope_misordered_fails_with_witness():
    s = np.linspace(0, 1, 401)
    # exact profile with coefficient 0.2; an envelope with half that coefficient lies above it
    w = 1.0 - 0.2 * np.clip(0.5 - s, 0, None) ** 2
    w = np.minimum(w, 40 * s)
    traj = Trajectory([(0.0, GridFunction(s, w, 1.0))], {"n": 1})
    assert envelope_check(traj, P1, 1.0, 0.2, 0.5, 0.0, (0.3, 0.5), "lower").passed
    rep = envelope_check(traj, P1, 1.0, 0.1, 0.5, 0.0, (0.3, 0.5), "lower")
    assert not rep.passed
    assert rep.witness[1] == pytest.approx(0.3, abs=0.01)
    up = envelope_check(traj, P1, 1.0, 0.1, 0.5, 0.0, (0.3, 0.5), "upper")
    assert up.passed


def test_check_tau_rule():
    bound = check_tau(P1, 1.0, 0.5, 1e-6, 1e-4)
    assert bound > 1e-6
    with pytest.raises(DomainError):
        check_tau(P1, 1.0, 0.5, 2 * bound, 1e-4)


def test_sign_change_bracket():
    ratios = [0.25, 0.5, 0.75, 1.5, 2.0, 4.0]
    assert sign_change_bracket(ratios, [-3, -2, -1, 1, 2, 3]) == (0.75, 1.5)
    assert sign_change_bracket(ratios, [-1] * 6) is None
    assert sign_change_bracket(ratios[::-1], [3, 2, 1, -1, -2, -3]) == (0.75, 1.5)
    assert sign_change_bracket([0.5, 1.5], [-1.0, float("nan")]) is None
