import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solitonlab.grid import GridSpec, WaveField, integrate, l2_norm_sq, sample
from solitonlab.group import (IDENTITY, GroupElement, LieCoeffs, act, eta, free_soliton,
                              free_soliton_parameters, generator_eta, group_inv, group_mul,
                              lie_apply, omega, p_functionals, soliton, tangent_vector,
                              wrap_phase)

G = GridSpec(30.0, 2048)
ETA = sample(eta, G)

reals = st.floats(-2, 2, allow_nan=False)
scales = st.floats(0.6, 1.6)
elements = st.builds(GroupElement, reals, reals, st.floats(-4, 4), scales)


def close(g, h, tol=1e-12):
    return np.allclose(g.as_array(), h.as_array(), atol=tol, rtol=0)


def test_eta_values():
    assert eta(0.0) == 1.0
    assert eta(math.asinh(1.0)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    x = np.linspace(-5, 5, 11)
    assert np.array_equal(eta(x), eta(-x))


def test_group_law_example():
    g = group_mul(GroupElement(1, 2, 0, 1), GroupElement(3, 0, 0, 1))
    assert g.as_array().tolist() == [4, 2, 6, 1]


def test_scale_must_be_positive():
    with pytest.raises(ValueError):
        GroupElement(0, 0, 0, 0)
    with pytest.raises(ValueError):
        GroupElement(np.nan, 0, 0, 1)


def test_inverse_examples():
    assert close(group_inv(IDENTITY), IDENTITY)
    assert close(group_inv(GroupElement(2.5, 0, 0, 1)), GroupElement(-2.5, 0, 0, 1))
    g = GroupElement(1, 2, 0, 1)
    assert close(g * group_inv(g), IDENTITY)


@given(elements)
@settings(max_examples=50, deadline=None)
def test_identity_and_inverse(g):
    assert close(g * IDENTITY, g)
    assert close(IDENTITY * g, g)
    assert close(g * group_inv(g), IDENTITY)
    assert close(group_inv(g) * g, IDENTITY)


@given(elements, elements, elements)
@settings(max_examples=50, deadline=None)
def test_associativity(g, h, k):
    assert close((g * h) * k, g * (h * k))


def test_identity_action_is_exact():
    u = sample(lambda x: eta(x) * np.exp(0.7j * x), G)
    assert np.array_equal(act(IDENTITY, u).samples, u.samples)


def test_action_on_eta_is_closed_form_soliton():
    g = GroupElement(1.2, 0.4, 0.3, 1.3)
    assert np.max(np.abs(act(g, ETA).samples - soliton(g, G).samples)) < 1e-11


@given(elements, elements)
@settings(max_examples=20, deadline=None)
def test_action_composition(g, h):
    u = soliton(GroupElement(0.3, -0.2, 0.1, 1.1), G)
    lhs = act(g * h, u)
    rhs = act(g, act(h, u))
    assert math.sqrt(l2_norm_sq(lhs - rhs)) < 1e-8


@given(elements)
@settings(max_examples=20, deadline=None)
def test_mass_scales_with_mu(g):
    u = soliton(GroupElement(-0.5, 0.8, 0.0, 0.9), G)
    assert l2_norm_sq(act(g, u)) == pytest.approx(g.mu * l2_norm_sq(u), rel=1e-10)


@given(elements)
@settings(max_examples=20, deadline=None)
def test_action_is_conformally_symplectic(g):
    u = soliton(GroupElement(0.4, 0.5, 0.2, 1.0), G)
    w = sample(lambda x: (1 + 1j * x) * eta(1.3 * x), G)
    assert abs(omega(act(g, u), act(g, w)) - g.mu * omega(u, w)) < 1e-8


def test_omega_examples():
    u = sample(lambda x: eta(x) * np.exp(1j * x), G)
    assert omega(u, u) == 0.0
    assert omega(ETA, ETA * 1j) == pytest.approx(-2.0, abs=1e-12)
    assert omega(generator_eta(2, G), generator_eta(1, G)) == pytest.approx(1.0, abs=1e-12)
    assert omega(lie_apply(4, ETA), lie_apply(3, ETA)) == pytest.approx(-1.0, abs=1e-9)


def test_omega_grid_mismatch():
    with pytest.raises(ValueError):
        omega(ETA, sample(eta, GridSpec(30.0, 1024)))


def test_generator_omega_matrix():
    expected = np.zeros((4, 4))
    expected[1, 0], expected[0, 1] = 1, -1
    expected[2, 3], expected[3, 2] = 1, -1
    got = np.array([[omega(generator_eta(i, G), generator_eta(j, G)) for j in range(1, 5)]
                    for i in range(1, 5)])
    assert np.max(np.abs(got - expected)) < 1e-8


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_generators_on_eta_match_closed_form(j):
    # xη has a ~5e-12 periodic jump at ±L, which the spectral derivative amplifies
    assert np.max(np.abs(lie_apply(j, ETA).samples - generator_eta(j, G).samples)) < 1e-9


def test_generator_examples():
    assert np.array_equal(lie_apply(3, ETA).samples, 1j * ETA.samples)
    const = WaveField(G, np.full(G.num_points, 2.0 + 1j))
    assert np.max(np.abs(lie_apply(1, const).samples)) < 1e-12
    with pytest.raises(ValueError):
        lie_apply(5, ETA)


def test_p_functional_examples():
    assert p_functionals(ETA * 0).as_array().tolist() == [0, 0, 0, 0]
    p = p_functionals(ETA).as_array()
    assert np.allclose(p, [0, 0, 0, 2], atol=1e-12)
    p = p_functionals(sample(lambda x: 1j * x * eta(x), G))
    # P3 = ∫ xη ∂x(xη) = 0 by parity as well, P1 = P4 = 0 for a purely imaginary field
    assert abs(p.c1) < 1e-12 and abs(p.c4) < 1e-12
    direct = integrate(sample(lambda x: x * eta(x) * (eta(x) - x * eta(x) * np.tanh(x)), G)).real
    assert p.c3 == pytest.approx(direct, abs=1e-12)


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_projection_leaves_symplectic_orthogonal_part(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=6)
    u = sample(lambda x: (c[0] + 1j * c[1]) * eta(x - c[2] / 3) * np.exp(1j * c[3] * x)
               + (c[4] + 1j * c[5]) * x * eta(x) ** 2, G)
    rest = u - tangent_vector(p_functionals(u), G)
    for j in range(1, 5):
        assert abs(omega(rest, generator_eta(j, G))) < 1e-8


def test_projection_is_idempotent_on_tangent_vectors():
    c = LieCoeffs(0.3, -0.2, 0.5, 1.1)
    assert np.allclose(p_functionals(tangent_vector(c, G)).as_array(), c.as_array(), atol=1e-12)


def test_free_soliton_at_zero_is_group_orbit():
    g0 = GroupElement(-1.0, 0.5, 0.25, 1.2)
    assert np.max(np.abs(free_soliton(g0, 0.0, G).samples - act(g0, ETA).samples)) < 1e-11


@given(st.floats(0, 8), scales)
@settings(max_examples=20, deadline=None)
def test_free_soliton_mass_and_parameters(t, mu):
    g0 = GroupElement(-3.0, 0.4, 0.0, mu)
    u = free_soliton(g0, t, G)
    assert l2_norm_sq(u) == pytest.approx(2 * mu, rel=1e-10)
    assert np.max(np.abs(u.samples - soliton(free_soliton_parameters(g0, t), G).samples)) < 1e-11


def test_wrap_phase():
    assert wrap_phase(7.0) == pytest.approx(7.0 - 2 * math.pi)
    assert wrap_phase(7.0, reference=6.0) == 7.0
    assert wrap_phase(-3.5) == pytest.approx(-3.5 + 2 * math.pi)
