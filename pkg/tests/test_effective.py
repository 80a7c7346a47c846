import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solitonlab.effective import (EffectiveState, crossing_times, integrate_effective,
                                  measured_period, oscillation_period, rhs_delta, rhs_general,
                                  rhs_theorem1, turning_point)
from solitonlab.errors import NumericalError
from solitonlab.grid import GridSpec
from solitonlab.group import GroupElement
from solitonlab.hamiltonians import (PotentialSpec, classical_energy, gaussian_delta,
                                     restricted_hamiltonian_delta)

# frozen from the tanh-sinh rule, cross-checked against an independent
# high-precision quadrature
PERIOD_FIG1 = 632.5698592952


def delta_rhs(q):
    return lambda y: rhs_delta(y, q)


def test_free_flow():
    assert np.allclose(rhs_delta((1.0, 0.4, 0.0, 1.3), 0.0), [0.4, 0, 0.5 * 0.16 + 0.5 * 1.69, 0])
    tr = integrate_effective(EffectiveState(-2.0, 0.3), delta_rhs(0.0), 10.0, 0.1)
    assert np.allclose(tr.a, -2.0 + 0.3 * tr.t, atol=1e-12, rtol=0)
    assert np.allclose(tr.gamma, (0.5 * 0.09 + 0.5) * tr.t, atol=1e-12, rtol=0)
    assert np.all(tr.mu == 1.0)


def test_no_force_at_symmetry_point():
    assert rhs_delta((0.0, 0.2, 0.0, 1.4), 0.3)[1] == 0.0


@given(st.floats(-6, 6), st.floats(-1, 1), st.floats(-0.5, 0.5))
@settings(max_examples=100, deadline=None)
def test_unit_scale_form_agrees(a, v, q):
    full = rhs_delta((a, v, 0.0, 1.0), q)
    assert np.allclose(full[:3], rhs_theorem1(a, v, q), atol=1e-15, rtol=1e-14)


@given(st.floats(-4, 4), st.floats(-1, 1), st.floats(0.5, 2), st.floats(-0.5, 0.5))
@settings(max_examples=100, deadline=None)
def test_phase_equation_from_hamiltonian(a, v, mu, q):
    g = GroupElement(a, v, 0.0, mu)
    h = 1e-5

    def f(**kw):
        p = dict(a=a, v=v, gamma=0.0, mu=mu)
        p.update(kw)
        return restricted_hamiltonian_delta(GroupElement(**p), q)

    f_v = (f(v=v + h) - f(v=v - h)) / (2 * h)
    f_mu = (f(mu=mu + h) - f(mu=mu - h)) / (2 * h)
    assert abs(rhs_delta(g.as_array(), q)[2] - (v * f_v / mu - f_mu)) < 1e-6


def test_general_rhs_without_potential_is_free():
    grid = GridSpec(30.0, 1024)
    zero = PotentialSpec.sampled(np.zeros(grid.num_points), grid)
    s = np.array([0.5, -0.3, 0.0, 1.2])
    assert np.allclose(rhs_general(s, zero), rhs_delta(s, 0.0), atol=1e-14)


def test_general_rhs_approaches_delta_for_narrow_bump():
    grid = GridSpec(30.0, 4096)
    s = np.array([0.8, 0.1, 0.0, 1.0])
    target = rhs_delta(s, 0.05)
    errs = [np.max(np.abs(rhs_general(s, gaussian_delta(0.05, w, grid)) - target))
            for w in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_classical_energy_conserved_over_long_run():
    q, a0 = -0.01, -3.0
    tr = integrate_effective(EffectiveState(a0, 0.0), delta_rhs(q), 1000.0, 0.01, stride=100)
    e = classical_energy(tr.a, tr.v, q)
    assert np.max(np.abs(e - e[0])) < 1e-9
    f = [restricted_hamiltonian_delta(GroupElement(a, v, 0, 1), q) for a, v in zip(tr.a, tr.v)]
    assert np.ptp(f) < 1e-9
    assert np.max(tr.a) == pytest.approx(3.0, abs=1e-5)
    assert np.min(tr.a) == pytest.approx(-3.0, abs=1e-9)


def test_time_reversal():
    q = 0.04
    s0 = EffectiveState(-4.0, 0.1, 0.0, 1.0)
    fwd = integrate_effective(s0, delta_rhs(q), 60.0, 0.01)
    back = integrate_effective(EffectiveState(fwd.a[-1], -fwd.v[-1]), delta_rhs(q), 60.0, 0.01)
    assert abs(back.a[-1] - s0.a) < 1e-8
    assert abs(back.v[-1] + s0.v) < 1e-8


def test_integration_guards():
    with pytest.raises(ValueError):
        integrate_effective(EffectiveState(0, 0), delta_rhs(0.1), 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_effective(EffectiveState(0, 0), delta_rhs(0.1), -1.0, 0.1)
    with pytest.raises(NumericalError), np.errstate(over="ignore"):
        integrate_effective(EffectiveState(1, 0), lambda y: y * 1e300, 1.0, 0.1)


def test_final_time_reaches_horizon():
    tr = integrate_effective(EffectiveState(0, 1), delta_rhs(0.0), 1.05, 0.1, stride=4)
    assert tr.t[-1] >= 1.05 - 1e-12
    assert np.all(np.diff(tr.t) > 0)


def test_turning_point_examples():
    assert turning_point(0.2, 0.04) == 0.0
    assert turning_point(0.1, 0.04) == pytest.approx(math.log(2 + math.sqrt(3)), abs=1e-14)
    assert turning_point(0.1, 0.04) == pytest.approx(1.3170, abs=5e-5)
    assert turning_point(1e-12, 0.04) > 25
    assert turning_point(0.3, 0.04) is None
    with pytest.raises(ValueError):
        turning_point(0.0, 0.04)
    with pytest.raises(ValueError):
        turning_point(0.1, -0.04)


def test_turning_point_matches_trajectory():
    q, v = 0.04, 0.1
    a0 = -10.0
    v0 = math.sqrt(v * v - q / math.cosh(a0) ** 2)
    tr = integrate_effective(EffectiveState(a0, v0), delta_rhs(q), 150.0, 0.001)
    assert abs(np.max(tr.a)) == pytest.approx(turning_point(v, q), abs=1e-6)


def test_period_value_and_scaling():
    assert oscillation_period(-3.0, -0.01) == pytest.approx(PERIOD_FIG1, rel=1e-10)
    assert oscillation_period(3.0, -0.01) == pytest.approx(PERIOD_FIG1, rel=1e-12)
    for a0 in (-0.5, -2.0, -4.0):
        assert oscillation_period(a0, -0.01) == pytest.approx(
            oscillation_period(a0, -0.0025) / 2, rel=1e-12)
    with pytest.raises(ValueError):
        oscillation_period(0.0, -0.01)
    with pytest.raises(ValueError):
        oscillation_period(-3.0, 0.01)


def test_small_amplitude_period_is_harmonic():
    # near a = 0, sech²a ≈ 1 - a², so a'' = -|q| a and the period is 2π/√|q|
    assert oscillation_period(-1e-3, -0.01) == pytest.approx(2 * math.pi / 0.1, rel=1e-5)


def test_half_cycle_matches_period():
    q, a0 = -0.01, -3.0
    tr = integrate_effective(EffectiveState(a0, 0.0), delta_rhs(q), 400.0, 0.01)
    i = int(np.argmax(tr.a))
    # parabolic vertex of the maximum
    y0, y1, y2 = tr.a[i - 1:i + 2]
    t_half = tr.t[i] + 0.5 * 0.01 * (y0 - y2) / (y0 - 2 * y1 + y2)
    assert t_half == pytest.approx(PERIOD_FIG1 / 2, rel=1e-3)


def test_crossings_and_measured_period():
    t = np.linspace(0, 20, 2001)
    y = np.sin(2 * np.pi * t / 4.0)
    assert measured_period(t, y) == pytest.approx(4.0, rel=1e-4)
    up = crossing_times(t, y, 0.25, direction=1)
    assert np.all(np.diff(up) == pytest.approx(4.0, rel=1e-4))
    with pytest.raises(ValueError):
        measured_period(t[:10], y[:10] + 2)
