"""Modulation analysis: split ``u = g.(eta + w)`` with ``w`` symplectically
orthogonal to the tangent space at ``eta``, and measure how far the
extracted parameters are from solving the modulation equations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NumericalError
from .grid import WaveField, _spectral_derivative, h1_norm, l2_norm_sq
from .group import (GroupElement, LieCoeffs, act, generator_eta, generator_eta_values,
                    group_inv, omega, soliton, wrap_phase)

log = logging.getLogger(__name__)

MAX_NEWTON_ITERS = 50
RESIDUAL_TOL = 1e-10
FD_STEP = 1e-6

# omega(eta, e_j eta); only the phase direction pairs non-trivially
_OMEGA_ETA = np.array([0.0, 0.0, -2.0, 0.0])


@dataclass(frozen=True, eq=False)
class Decomposition:
    g: GroupElement
    w: WaveField
    orthogonality_defect: float
    newton_iters: int
    t: float = 0.0


def _eta_on(grid) -> WaveField:
    return WaveField(grid, 1.0 / np.cosh(grid.x))


def orthogonality_defects(w: WaveField) -> np.ndarray:
    """``omega(w, e_j eta)`` for j = 1..4."""
    return np.array([omega(w, generator_eta(j, w.grid)) for j in range(1, 5)])


def _residuals(u: WaveField, p: np.ndarray) -> np.ndarray:
    """``F_j(g) = omega(g^-1 u - eta, e_j eta)``.

    Uses ``omega(g^-1 u, phi) = omega(u, g.phi) / mu`` so every term is an
    analytic function of ``g`` sampled on the grid; no interpolation of ``u``.
    """
    a, v, gamma, mu = p
    x = u.grid.x
    s = x - a
    y = mu * s
    phase = np.exp(1j * (gamma + v * s)) * mu
    uc = np.conj(u.samples)
    out = np.empty(4)
    for j in range(1, 5):
        g_phi = phase * generator_eta_values(j, y)
        # omega(u, g.phi) = Im sum u conj(g.phi) = -Im sum g.phi conj(u)
        out[j - 1] = -u.grid.spacing * np.dot(g_phi, uc).imag / mu
    return out - _OMEGA_ETA


def _jacobian(u: WaveField, p: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    J = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = step
        J[:, k] = (_residuals(u, p + e) - _residuals(u, p - e)) / (2 * step)
    return J


def initial_guess(u: WaveField) -> GroupElement:
    """Moment-based guess, exact for a pure soliton up to the phase at a node."""
    grid = u.grid
    x = grid.x
    dens = np.abs(u.samples) ** 2
    m = float(np.sum(dens))
    if m == 0.0:
        raise ValueError("cannot decompose the zero field")
    a = float(np.dot(x, dens) / m)
    du = _spectral_derivative(u.samples, grid, 1)
    v = float(np.sum(np.conj(u.samples) * du).imag / m)
    mu = 0.5 * m * grid.spacing
    i = int(np.argmin(np.abs(x - a)))
    gamma = float(np.angle(u.samples[i])) - v * (x[i] - a)
    return GroupElement(a, v, wrap_phase(gamma), mu)


def decompose(u: WaveField, guess: Optional[GroupElement] = None,
              tol: float = RESIDUAL_TOL, max_iters: int = MAX_NEWTON_ITERS) -> Decomposition:
    """Newton solve of ``omega(g^-1 u - eta, e_j eta) = 0`` for ``g``.

    ``gamma`` in the result is the representative closest to ``guess.gamma``.
    Raises :class:`NumericalError` when Newton fails, which means ``u`` has
    left the neighbourhood of the soliton manifold where the split exists.
    """
    if guess is None:
        guess = initial_guess(u)
    p = guess.as_array()
    F = _residuals(u, p)
    fnorm = float(np.max(np.abs(F)))
    it = 0
    while fnorm > tol:
        if it >= max_iters:
            raise NumericalError(
                f"Newton did not converge in {max_iters} iterations (defect {fnorm:.3e})",
                stage="decompose")
        it += 1
        J = _jacobian(u, p)
        try:
            dp = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular Jacobian at {p}", stage="decompose") from exc
        # backtrack on the max-norm of the residual, keeping mu positive
        lam = 1.0
        while True:
            trial = p + lam * dp
            if trial[3] > 0:
                F_trial = _residuals(u, trial)
                f_trial = float(np.max(np.abs(F_trial)))
                if f_trial < fnorm:
                    break
            lam *= 0.5
            if lam < 1e-8:
                raise NumericalError(
                    f"line search stalled at defect {fnorm:.3e}", stage="decompose")
        p, F, fnorm = trial, F_trial, f_trial
    p[2] = wrap_phase(p[2], guess.gamma)
    g = GroupElement.from_array(p)
    # the solver is periodic, so radiation that wrapped around stays part of w
    w = act(group_inv(g), u, alias_tol=None, periodic=True) - _eta_on(u.grid)
    defect = float(np.max(np.abs(orthogonality_defects(w))))
    return Decomposition(g=g, w=w, orthogonality_defect=defect, newton_iters=it)


def track(fields: Iterable[WaveField], times: Sequence[float],
          guess: Optional[GroupElement] = None) -> list[Decomposition]:
    """Decompose a sequence of fields, warm-starting each from the previous."""
    out = []
    for u, t in zip(fields, times):
        try:
            d = decompose(u, guess)
        except NumericalError as exc:
            raise NumericalError(f"t={t:g}: {exc.args[0]}", stage="decompose") from exc
        d = Decomposition(d.g, d.w, d.orthogonality_defect, d.newton_iters, float(t))
        out.append(d)
        guess = d.g
    return out


def mu_from_residual(w: WaveField) -> float:
    """Scale implied by mass 2 and symplectic orthogonality: ``2 / (2 + |w|^2)``."""
    return 2.0 / (2.0 + l2_norm_sq(w))


def symplectic_orthogonalize(w: WaveField) -> WaveField:
    """Subtract the tangent vector that makes ``omega(w, e_j eta) = 0`` for all j."""
    grid = w.grid
    basis = [generator_eta(j, grid) for j in range(1, 5)]
    gram = np.array([[omega(bk, bj) for bj in basis] for bk in basis])
    rhs = np.array([omega(w, bj) for bj in basis])
    c = np.linalg.solve(gram.T, rhs)
    vals = w.samples - sum(ck * bk.samples for ck, bk in zip(c, basis))
    return WaveField(grid, vals)


def apply_linearization(w: WaveField) -> WaveField:
    """``-½w'' - 2 eta² w - eta² conj(w) + ½w``."""
    grid = w.grid
    eta2 = 1.0 / np.cosh(grid.x) ** 2
    s = w.samples
    vals = -0.5 * _spectral_derivative(s, grid, 2) - 2 * eta2 * s - eta2 * np.conj(s) + 0.5 * s
    return WaveField(grid, vals)


def apply_nonlinearity(w: WaveField) -> WaveField:
    """``2|w|² eta + eta w² + |w|² w``."""
    eta = 1.0 / np.cosh(w.grid.x)
    s = w.samples
    a2 = np.abs(s) ** 2
    return WaveField(w.grid, 2 * a2 * eta + eta * s * s + a2 * s)


def h1_error_to_soliton(u: WaveField, g: GroupElement) -> float:
    return h1_norm(u - soliton(g, u.grid))


def modulation_residual(traj: Sequence[Decomposition], dt_between: float,
                        q: float) -> list[LieCoeffs]:
    """Coefficients of the modulation residual on ``e1..e4`` at every sample.

    Time derivatives are second-order finite differences (one-sided at the
    ends), so the output carries an ``O(dt_between²)`` floor.
    """
    if len(traj) < 3:
        raise ValueError(f"need at least 3 decompositions, got {len(traj)}")
    if not dt_between > 0:
        raise ValueError(f"dt_between must be positive, got {dt_between}")
    P = np.array([d.g.as_array() for d in traj])
    return residual_from_parameters(P[:, 0], P[:, 1], np.unwrap(P[:, 2]), P[:, 3],
                                    dt_between, q)


def residual_from_parameters(a, v, gamma, mu, dt_between: float, q: float) -> list[LieCoeffs]:
    """Same as :func:`modulation_residual` on raw parameter arrays (``gamma`` unwrapped)."""
    a, v, gamma, mu = (np.asarray(z, dtype=float) for z in (a, v, gamma, mu))
    if len(a) < 3:
        raise ValueError(f"need at least 3 samples, got {len(a)}")
    da, dv, dgamma, dmu = (np.gradient(z, dt_between, edge_order=2)
                           for z in (a, v, gamma, mu))
    y = a * mu
    sech2 = 1.0 / np.cosh(y) ** 2
    d_eta2 = -2.0 * sech2 * np.tanh(y)
    c1 = -mu * da + v * mu
    c2 = -0.5 * q * mu * d_eta2 - dv / mu
    c3 = (-mu * q * sech2 - 0.5 * q * a * mu * mu * d_eta2
          - dgamma + v * da - 0.5 * v * v + 0.5 * mu * mu)
    c4 = -dmu / mu
    return [LieCoeffs(*map(float, row)) for row in zip(c1, c2, c3, c4)]


def residual_bound(w_h1: float, q: float, factor: float = 10.0) -> float:
    """``factor * (|q| |w| + |w|²)`` with ``|w|`` the H¹ norm."""
    return factor * (abs(q) * w_h1 + w_h1 * w_h1)

