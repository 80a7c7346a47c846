import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solitonlab.effective import EffectiveState, integrate_effective, rhs_delta
from solitonlab.errors import NumericalError
from solitonlab.grid import GridSpec, WaveField, h1_norm, l2_norm_sq, sample, zeros
from solitonlab.group import (GroupElement, act, eta, free_soliton, free_soliton_parameters,
                              p_functionals, soliton)
from solitonlab.hamiltonians import discrete_delta
from solitonlab.modulation import (apply_linearization, apply_nonlinearity, decompose,
                                   h1_error_to_soliton, modulation_residual, mu_from_residual,
                                   orthogonality_defects, residual_bound,
                                   residual_from_parameters, symplectic_orthogonalize, track)
from solitonlab.solver import paper_initial

G = GridSpec(30.0, 1024)
ETA = sample(eta, G)


def random_orthogonal(rng, grid=G, scale=1.0):
    c = rng.normal(size=6)
    w = sample(lambda x: (c[0] + 1j * c[1]) * np.exp(-0.5 * (x - c[2]) ** 2)
               + (c[3] + 1j * c[4]) * x * eta(x) ** 2 * np.exp(0.5j * c[5] * x), grid)
    w = symplectic_orthogonalize(w)
    return w * (scale / h1_norm(w))


def perturbed(g, rng):
    return GroupElement(g.a + rng.uniform(-0.05, 0.05), g.v + rng.uniform(-0.05, 0.05),
                        g.gamma + rng.uniform(-0.05, 0.05), g.mu * (1 + rng.uniform(-0.03, 0.03)))


def test_pure_soliton_round_trip():
    # wide enough that tails of the widest (mu = 0.8, |a| = 5) soliton are below 1e-13
    grid = GridSpec(40.0, 2048)
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = GroupElement(rng.uniform(-5, 5), rng.uniform(-1, 1), rng.uniform(-3, 3),
                         rng.uniform(0.8, 1.25))
        d = decompose(soliton(g, grid), perturbed(g, rng))
        assert np.max(np.abs(d.g.as_array() - g.as_array())) < 1e-8
        assert h1_norm(d.w) < 1e-8
        assert d.orthogonality_defect < 1e-8


def test_moment_guess_is_enough_for_a_soliton():
    g = GroupElement(2.0, -0.4, 1.0, 1.1)
    d = decompose(soliton(g, G))
    assert np.max(np.abs(d.g.as_array() - g.as_array())) < 1e-8


def test_small_orthogonal_perturbation_is_recovered():
    rng = np.random.default_rng(5)
    g = GroupElement(0.7, 0.3, 0.4, 1.05)
    eps = 1e-3
    phi = random_orthogonal(rng)
    u = act(g, ETA + phi * eps)
    d = decompose(u, perturbed(g, rng))
    assert np.max(np.abs(d.g.as_array() - g.as_array())) < 1e-6
    assert math.sqrt(l2_norm_sq(d.w - phi * eps)) < 1e-6
    assert d.orthogonality_defect < 1e-8
    # reconstruction
    assert math.sqrt(l2_norm_sq(act(d.g, ETA + d.w) - u)) < 1e-8


def test_initial_data_decomposes_exactly():
    g0 = paper_initial(-3.0, 0.0)
    d = decompose(soliton(g0, G))
    assert np.allclose(d.g.as_array(), [-3, 0, 0, 1], atol=1e-10)
    assert h1_norm(d.w) < 1e-10


def test_failure_is_reported():
    noise = WaveField(G, np.random.default_rng(0).normal(size=G.num_points))
    with pytest.raises(NumericalError) as info:
        decompose(noise, GroupElement(), max_iters=5)
    assert info.value.stage == "decompose"
    with pytest.raises(ValueError):
        decompose(zeros(G))


def test_mu_from_residual():
    assert mu_from_residual(zeros(G)) == 1.0
    w = ETA * math.sqrt(0.02 / 2)
    assert mu_from_residual(w) == pytest.approx(2 / 2.02, abs=1e-14)
    assert 2 / 2.02 == pytest.approx(0.990099, abs=1e-6)


def test_mu_from_residual_matches_decomposition_for_mass_two_data():
    # a mass-2 field near the orbit: rescale a perturbed soliton to mass 2
    rng = np.random.default_rng(9)
    u = act(GroupElement(0.5, 0.2, 0.0, 1.0), ETA + random_orthogonal(rng, scale=0.02))
    u = u * math.sqrt(2 / l2_norm_sq(u))
    d = decompose(u)
    assert abs(mu_from_residual(d.w) - d.g.mu) < 1e-6


def test_linearization_identities():
    assert math.sqrt(l2_norm_sq(apply_linearization(ETA * 1j))) < 1e-8
    d_eta = sample(lambda x: -eta(x) * np.tanh(x), G)
    assert math.sqrt(l2_norm_sq(apply_linearization(d_eta))) < 1e-8
    eta2 = sample(lambda x: eta(x) ** 2, G)
    assert math.sqrt(l2_norm_sq(apply_linearization(eta2) + eta2 * 1.5)) < 1e-6


def test_projection_of_linearized_flow_vanishes():
    rng = np.random.default_rng(13)
    for _ in range(20):
        w = random_orthogonal(rng)
        assert np.max(np.abs(orthogonality_defects(w))) < 1e-10
        p = p_functionals(apply_linearization(w) * 1j).as_array()
        assert np.max(np.abs(p)) < 1e-7


def test_nonlinearity():
    assert not np.any(apply_nonlinearity(zeros(G)).samples)
    w = sample(lambda x: 0.3 * np.exp(-x * x), G)
    expected = 3 * ETA.samples * w.samples ** 2 + w.samples ** 3
    assert np.max(np.abs(apply_nonlinearity(w).samples - expected)) < 1e-15


@given(st.floats(1e-4, 1e-1))
@settings(max_examples=20, deadline=None)
def test_nonlinearity_is_quadratic(eps):
    w = sample(lambda x: (1 + 0.5j * x) * np.exp(-0.5 * x * x), G)
    ratio = math.sqrt(l2_norm_sq(apply_nonlinearity(w * eps))) / eps ** 2
    base = math.sqrt(l2_norm_sq(apply_nonlinearity(w * 1e-4))) / 1e-8
    assert ratio == pytest.approx(base, rel=0.2)


def test_h1_error_to_soliton():
    g = GroupElement(-1.0, 0.2, 0.3, 1.1)
    assert h1_error_to_soliton(soliton(g, G), g) < 1e-12
    w = random_orthogonal(np.random.default_rng(2), scale=1e-2)
    err = h1_error_to_soliton(act(g, ETA + w), g)
    # the action changes H1 norms by factors between mu^1/2 and mu^3/2 (plus v)
    assert 0.5e-2 < err < 2.5e-2


def test_free_soliton_has_no_modulation_residual():
    g0 = GroupElement(0.0, 0.3, 0.0, 1.0)
    times = np.linspace(0, 2, 11)
    decs = track([free_soliton(g0, t, G) for t in times], times, g0)
    for c in modulation_residual(decs, times[1] - times[0], 0.0):
        assert c.norm() < 1e-5
    gs = [free_soliton_parameters(g0, t) for t in times]
    for d, g in zip(decs, gs):
        assert abs(d.g.a - g.a) < 1e-8


def test_residual_on_effective_trajectory_is_second_order():
    q = -0.01
    tr = integrate_effective(EffectiveState(-3.0, 0.0, 0.0, 1.0), lambda y: rhs_delta(y, q),
                             40.0, 0.01)
    errs = []
    for step in (40, 20):
        sl = slice(None, None, step)
        res = residual_from_parameters(tr.a[sl], tr.v[sl], tr.gamma[sl], tr.mu[sl],
                                       0.01 * step, q)
        errs.append(max(c.norm() for c in res))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.3)


def test_residual_needs_three_samples():
    with pytest.raises(ValueError):
        residual_from_parameters([0, 1], [0, 0], [0, 0], [1, 1], 0.1, 0.0)


def test_residual_bound():
    assert residual_bound(0.0, -0.01) == 0.0
    assert residual_bound(0.1, -0.01) == pytest.approx(10 * (0.001 + 0.01))


def test_point_interaction_projection_bound():
    # |P(i δ_{x0} w)| <= C |w|_H1^1/2 |w|_L2^1/2 with C independent of x0
    rng = np.random.default_rng(21)
    ratios = []
    for _ in range(40):
        w = random_orthogonal(rng, scale=rng.uniform(0.01, 1))
        j = int(rng.integers(G.num_points // 2 - 200, G.num_points // 2 + 200))
        spike = np.roll(discrete_delta(G, 1.0), j - G.origin_index)
        p = p_functionals(w * (1j * spike)).norm()
        ratios.append(p / math.sqrt(h1_norm(w) * math.sqrt(l2_norm_sq(w))))
    assert max(ratios) < 2.0
