"""Soliton parameter group, its action on fields and the symplectic pairing.

A group element ``g = (a, v, gamma, mu)`` acts on a field by

    (g.u)(x) = exp(i gamma) exp(i v (x - a)) mu u(mu (x - a)),

and the orbit of ``eta = sech`` is the manifold of solitons.  The four
Lie algebra generators act as ``e1 = -d/dx``, ``e2 = i x``, ``e3 = i`` and
``e4 = d/dx . x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import GridSpec, WaveField, check_same_grid, _spectral_derivative

# Relative spectral energy beyond which a rescaled field counts as aliased.
ALIAS_TOL = 1e-18


@dataclass(frozen=True)
class GroupElement:
    a: float = 0.0
    v: float = 0.0
    gamma: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        for name in ("a", "v", "gamma", "mu"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.v, self.gamma, self.mu])

    @classmethod
    def from_array(cls, p) -> "GroupElement":
        a, v, gamma, mu = (float(t) for t in p)
        return cls(a, v, gamma, mu)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return group_mul(self, other)


IDENTITY = GroupElement()


@dataclass(frozen=True)
class LieCoeffs:
    """Coefficients on the generators ``e1..e4``."""

    c1: float
    c2: float
    c3: float
    c4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3, self.c4])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


def eta(x):
    """The unit soliton profile ``sech x``."""
    return 1.0 / np.cosh(x)


def group_mul(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement(
        a=g.a + h.a / g.mu,
        v=g.v + h.v * g.mu,
        gamma=g.gamma + h.gamma + g.v * h.a / g.mu,
        mu=g.mu * h.mu,
    )


def group_inv(g: GroupElement) -> GroupElement:
    a_inv = -g.a * g.mu
    return GroupElement(a=a_inv, v=-g.v / g.mu, gamma=-g.gamma + g.v * g.a, mu=1.0 / g.mu)


def soliton_values(g: GroupElement, x: np.ndarray) -> np.ndarray:
    """``(g.eta)(x)`` evaluated in closed form."""
    s = x - g.a
    return np.exp(1j * (g.gamma + g.v * s)) * g.mu / np.cosh(g.mu * s)


def soliton(g: GroupElement, grid: GridSpec) -> WaveField:
    return WaveField(grid, soliton_values(g, grid.x))


def free_soliton(g0: GroupElement, t: float, grid: GridSpec) -> WaveField:
    """Exact solution of the potential-free equation started from ``g0.eta``."""
    x = grid.x
    a0, v0, gamma, mu = g0.a, g0.v, g0.gamma, g0.mu
    phase = gamma + v0 * (x - a0) + 0.5 * (mu * mu - v0 * v0) * t
    return WaveField(grid, np.exp(1j * phase) * mu / np.cosh(mu * (x - a0 - v0 * t)))


def free_soliton_parameters(g0: GroupElement, t: float) -> GroupElement:
    """Group coordinates of :func:`free_soliton` at time ``t``."""
    return GroupElement(
        a=g0.a + g0.v * t,
        v=g0.v,
        gamma=g0.gamma + 0.5 * (g0.v ** 2 + g0.mu ** 2) * t,
        mu=g0.mu,
    )


# 2π to long double precision (double pi plus its rounding residual)
_TWO_PI = np.longdouble(2) * (np.longdouble(np.pi) + np.longdouble(1.2246467991473532e-16))


def _unit_phase(theta) -> np.ndarray:
    """``exp(i theta)`` with ``theta`` reduced mod 2π in extended precision."""
    theta = np.asarray(theta, dtype=np.longdouble)
    reduced = np.asarray(theta - _TWO_PI * np.floor(theta / _TWO_PI), dtype=float)
    return np.exp(1j * reduced)


def _chirp_poly(b: np.ndarray, phase0: float, theta: float, m: int) -> np.ndarray:
    """``sum_n b_n exp(i n (phase0 + j theta))`` for j = 0..m-1 (Bluestein)."""
    nb = b.size
    n = np.arange(nb, dtype=np.longdouble)
    j = np.arange(m, dtype=np.longdouble)
    th = np.longdouble(theta)
    pre = b * _unit_phase(np.longdouble(phase0) * n + th * n * n / 2)
    lags = np.arange(-(nb - 1), m, dtype=np.longdouble)
    kernel = _unit_phase(-th * lags * lags / 2)
    size = int(2 ** np.ceil(np.log2(nb + m - 1)))
    conv = np.fft.ifft(np.fft.fft(pre, size) * np.fft.fft(kernel, size))
    return conv[nb - 1:nb - 1 + m] * _unit_phase(th * j * j / 2)


def resample(u: WaveField, start: float, step: float, periodic: bool = False) -> np.ndarray:
    """Trigonometric interpolant of ``u`` at ``start + j*step``, j = 0..N-1.

    By default the interpolant is taken as zero outside ``[-L, L)`` so
    periodic images of localized data never leak in; ``periodic=True``
    keeps the periodic extension, which is the right model for fields
    produced by the periodic solver.  Evaluation at the equispaced targets
    is a chirp-z transform.
    """
    grid = u.grid
    n = grid.num_points
    L = grid.half_length
    c = np.fft.fft(u.samples) / n
    # coefficients for modes -N/2..N/2 with the Nyquist mode split evenly
    b = np.empty(n + 1, dtype=complex)
    b[: n // 2] = c[n // 2:]
    b[0] = 0.5 * c[n // 2]
    b[n // 2:n] = c[: n // 2]
    b[n] = 0.5 * c[n // 2]
    dk = np.pi / L
    s0 = start + L
    poly = _chirp_poly(b, dk * s0, dk * step, n)
    idx = np.arange(n, dtype=np.longdouble)
    shift = np.longdouble(dk) * (n // 2) * (np.longdouble(s0) + np.longdouble(step) * idx)
    out = poly * _unit_phase(-shift)
    if periodic:
        return out
    targets = start + step * np.arange(n)
    # zero extension outside the fundamental domain
    out[(targets < -L - 1e-12 * L) | (targets >= L - 1e-12 * L)] = 0.0
    return out


def _check_aliasing(u: WaveField, g: GroupElement, tol: float = ALIAS_TOL) -> None:
    grid = u.grid
    power = np.abs(np.fft.fft(u.samples)) ** 2
    total = power.sum()
    if total == 0.0:
        return
    k_allowed = (grid.k_nyquist - abs(g.v)) / g.mu
    if k_allowed <= 0:
        raise ValueError(f"{g} cannot be represented on {grid}")
    frac = power[np.abs(grid.k) > k_allowed].sum() / total
    if frac > tol:
        raise ValueError(
            f"acting by {g} aliases the field on {grid} (lost energy fraction {frac:.2e})")


def act(g: GroupElement, u: WaveField, alias_tol: Optional[float] = ALIAS_TOL,
        periodic: bool = False) -> WaveField:
    """``g.u`` with Fourier interpolation for the off-node samples.

    Raises ``ValueError`` when more than ``alias_tol`` of the spectral
    energy would be pushed past the Nyquist mode; ``None`` skips the check.
    ``periodic`` selects the periodic extension of ``u`` instead of zero.
    """
    if g == IDENTITY:
        return u
    if alias_tol is not None:
        _check_aliasing(u, g, alias_tol)
    grid = u.grid
    x = grid.x
    start = g.mu * (x[0] - g.a)
    step = g.mu * grid.spacing
    if g.mu == 1.0 and abs((g.a / grid.spacing) - round(g.a / grid.spacing)) < 1e-12:
        # whole-node shift: exact, no interpolation
        shift = int(round(g.a / grid.spacing))
        vals = np.roll(u.samples, shift)
        if not periodic and shift > 0:
            vals[:shift] = 0.0
        elif not periodic and shift < 0:
            vals[shift:] = 0.0
    else:
        vals = resample(u, start, step, periodic)
    vals = np.exp(1j * (g.gamma + g.v * (x - g.a))) * g.mu * vals
    return WaveField(grid, vals)


def omega(u: WaveField, w: WaveField) -> float:
    """Symplectic pairing ``Im ∫ u conj(w)``."""
    check_same_grid(u, w)
    return float(u.grid.spacing * np.sum(u.samples * np.conj(w.samples)).imag)


def inner(u: WaveField, w: WaveField) -> float:
    """Real inner product ``Re ∫ u conj(w)``."""
    check_same_grid(u, w)
    return float(u.grid.spacing * np.sum(u.samples * np.conj(w.samples)).real)


def lie_apply(j: int, u: WaveField) -> WaveField:
    grid = u.grid
    if j == 1:
        vals = -_spectral_derivative(u.samples, grid, 1)
    elif j == 2:
        vals = 1j * grid.x * u.samples
    elif j == 3:
        vals = 1j * u.samples
    elif j == 4:
        vals = _spectral_derivative(grid.x * u.samples, grid, 1)
    else:
        raise ValueError(f"generator index must be 1..4, got {j}")
    return WaveField(grid, vals)


def generator_eta_values(j: int, x: np.ndarray) -> np.ndarray:
    """``e_j eta`` in closed form."""
    # clipping keeps cosh finite; sech(700) underflows to ~1e-304 anyway
    sech = 1.0 / np.cosh(np.clip(x, -700.0, 700.0))
    if j == 1:
        return (sech * np.tanh(x)).astype(complex)
    if j == 2:
        return 1j * x * sech
    if j == 3:
        return 1j * sech
    if j == 4:
        return (sech - x * sech * np.tanh(x)).astype(complex)
    raise ValueError(f"generator index must be 1..4, got {j}")


def generator_eta(j: int, grid: GridSpec) -> WaveField:
    return WaveField(grid, generator_eta_values(j, grid.x))


def p_functionals(u: WaveField) -> LieCoeffs:
    """Coefficients of the symplectic projection of ``u`` onto ``T_eta M``."""
    x = u.grid.x
    dx = u.grid.spacing
    sech = 1.0 / np.cosh(x)
    tanh = np.tanh(x)
    s = u.samples
    p1 = dx * np.sum(s * x * sech).real
    p2 = -dx * np.sum(s * (-sech * tanh)).imag
    p3 = dx * np.sum(s * (sech - x * sech * tanh)).imag
    p4 = dx * np.sum(s * sech).real
    return LieCoeffs(float(p1), float(p2), float(p3), float(p4))


def tangent_vector(c: LieCoeffs, grid: GridSpec) -> WaveField:
    """``sum_j c_j e_j eta``."""
    x = grid.x
    vals = sum(cj * generator_eta_values(j, x) for j, cj in enumerate(c.as_array(), start=1))
    return WaveField(grid, vals)


def wrap_phase(gamma: float, reference: float = 0.0) -> float:
    """Representative of ``gamma`` mod 2π closest to ``reference``."""
    return float(gamma - 2.0 * np.pi * np.round((gamma - reference) / (2.0 * np.pi)))
