"""Finite-dimensional soliton dynamics on the manifold of solitons.

The restricted Hamiltonian ``f(a, v, gamma, mu)`` generates, through the
restricted symplectic form, the flow

    da/dt = f_v / mu
    dv/dt = -f_a / mu - v f_gamma / mu
    dmu/dt = f_gamma
    dgamma/dt = v f_v / mu - f_mu

For the delta potential this is integrated with classical RK4.  Closed
forms for the turning point and the oscillation period live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NumericalError
from .group import GroupElement
from .hamiltonians import PotentialSpec, classical_energy, smoothed_potential
from .quadrature import tanh_sinh


@dataclass(frozen=True)
class EffectiveState:
    a: float
    v: float
    gamma: float = 0.0
    mu: float = 1.0
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.v, self.gamma, self.mu])

    def group_element(self) -> GroupElement:
        return GroupElement(self.a, self.v, self.gamma, self.mu)

    @classmethod
    def from_group(cls, g: GroupElement, t: float = 0.0) -> "EffectiveState":
        return cls(g.a, g.v, g.gamma, g.mu, t)


@dataclass
class EffectiveTrajectory:
    t: np.ndarray
    a: np.ndarray
    v: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray
    label: str = ""
    dt: float = 0.0
    method: str = "rk4"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> EffectiveState:
        return EffectiveState(self.a[i], self.v[i], self.gamma[i], self.mu[i], self.t[i])

    def at(self, times) -> dict:
        """Linear interpolation of all coordinates at ``times``."""
        times = np.asarray(times, dtype=float)
        return {name: np.interp(times, self.t, getattr(self, name))
                for name in ("a", "v", "gamma", "mu")}


def _unpack(s):
    if isinstance(s, EffectiveState):
        return s.a, s.v, s.gamma, s.mu
    a, v, gamma, mu = s
    return a, v, gamma, mu


def rhs_delta(s, q: float) -> np.ndarray:
    """Vector field ``(da, dv, dgamma, dmu)/dt`` of the restricted delta Hamiltonian."""
    a, v, _, mu = _unpack(s)
    y = mu * a
    sech2 = 1.0 / math.cosh(y) ** 2 if abs(y) < 700 else 0.0
    th = math.tanh(y)
    dv = mu * mu * q * sech2 * th
    dgamma = 0.5 * v * v + 0.5 * mu * mu - q * mu * sech2 + q * mu * mu * a * sech2 * th
    return np.array([v, dv, dgamma, 0.0])


def rhs_theorem1(a: float, v: float, q: float) -> np.ndarray:
    """Unit-scale form written with ``d/dx sech²``: returns ``(da, dv, dgamma)``."""
    sech2 = 1.0 / math.cosh(a) ** 2
    dsech2 = -2.0 * sech2 * math.tanh(a)
    return np.array([v, -0.5 * q * dsech2, 0.5 + 0.5 * v * v - q * sech2 - 0.5 * q * a * dsech2])


def rhs_general(s, V: PotentialSpec) -> np.ndarray:
    """Vector field of ``mu v²/2 - mu³/6 + ½ mu² ∫V(x) sech²(mu(x-a)) dx``."""
    a, v, _, mu = _unpack(s)
    c, c_a, c_mu = smoothed_potential(V, a, mu)
    f_a = 0.5 * mu * mu * c_a
    f_mu = 0.5 * v * v - 0.5 * mu * mu + mu * c + 0.5 * mu * mu * c_mu
    f_v = mu * v
    return np.array([f_v / mu, -f_a / mu, v * f_v / mu - f_mu, 0.0])


def rhs_bare_newton(s, W: Callable[[float], float], dW: Callable[[float], float],
                    h: float) -> np.ndarray:
    """Newton's equations in the slowly varying potential ``W(h x)``."""
    a, v, _, mu = _unpack(s)
    return np.array([v, -h * dW(h * a), 0.5 + 0.5 * v * v - W(h * a), 0.0])


def integrate_effective(s0, rhs: Callable[[np.ndarray], np.ndarray], T: float, dt: float,
                        label: str = "", stride: int = 1) -> EffectiveTrajectory:
    """Fixed-step RK4 from ``s0`` until the first multiple of ``dt`` that is ``>= T``.

    ``rhs`` maps the array ``(a, v, gamma, mu)`` to its time derivative.
    Every ``stride``-th step is stored.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if T < 0:
        raise ValueError(f"T must be non-negative, got {T}")
    t0 = s0.t if isinstance(s0, EffectiveState) else 0.0
    y = np.array(_unpack(s0), dtype=float)
    nsteps = int(math.ceil(T / dt - 1e-9))
    nout = nsteps // stride + 1 + (1 if nsteps % stride else 0)
    out = np.empty((nout, 4))
    times = np.empty(nout)
    out[0] = y
    times[0] = t0
    k = 1
    for n in range(1, nsteps + 1):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NumericalError(f"non-finite state {y} at step {n} (t={t0 + n * dt:g})",
                                 stage="effective")
        if n % stride == 0 or n == nsteps:
            out[k] = y
            times[k] = t0 + n * dt
            k += 1
    out = out[:k]
    return EffectiveTrajectory(times[:k], out[:, 0], out[:, 1], out[:, 2], out[:, 3],
                               label=label, dt=dt, method="rk4")


def turning_point(v_incoming: float, q: float) -> Optional[float]:
    """Closest approach ``|a| = sech⁻¹(v/√q)`` to a repulsive delta.

    Returns ``None`` when ``v > √q``: the soliton passes over the barrier.
    """
    if q <= 0:
        raise ValueError(f"turning point needs a repulsive potential, got q={q}")
    if v_incoming <= 0:
        raise ValueError(f"incoming speed must be positive, got {v_incoming}")
    y = v_incoming / math.sqrt(q)
    if y > 1.0:
        return None
    return math.log((1.0 + math.sqrt(max(0.0, 1.0 - y * y))) / y)


def incoming_speed(a0: float, v0: float, q: float) -> float:
    """Speed far from the impurity on the energy level through ``(a0, v0)``."""
    return math.sqrt(2.0 * float(classical_energy(a0, v0, q)))


def oscillation_period(a0: float, q: float) -> float:
    """Period of the trapped orbit started at rest from ``a0`` in an attractive delta."""
    if q >= 0:
        raise ValueError(f"oscillation needs q < 0, got q={q}")
    if a0 == 0:
        raise ValueError("a0 = 0 is the equilibrium; the period integral diverges")
    A = abs(a0)
    cosh_A = math.cosh(A)

    # sech²x - sech²A = sinh(A-x) sinh(A+x) / (cosh²x cosh²A)
    def integrand(x, d_left, d_right):
        return np.cosh(x) * cosh_A / np.sqrt(np.sinh(d_left) * np.sinh(d_right))

    value, _ = tanh_sinh(integrand, -A, A)
    return 2.0 * value / math.sqrt(abs(q))


def crossing_times(t: np.ndarray, y: np.ndarray, level: float = 0.0,
                   direction: int = 0) -> np.ndarray:
    """Linearly interpolated times where ``y`` crosses ``level``.

    ``direction`` > 0 keeps upward crossings, < 0 downward, 0 both.
    """
    d = np.asarray(y) - level
    idx = np.nonzero((d[:-1] < 0) & (d[1:] >= 0) | (d[:-1] > 0) & (d[1:] <= 0))[0]
    if direction > 0:
        idx = idx[d[idx] < 0]
    elif direction < 0:
        idx = idx[d[idx] > 0]
    frac = d[idx] / (d[idx] - d[idx + 1])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def measured_period(t: np.ndarray, a: np.ndarray) -> float:
    """Mean spacing of same-direction zero crossings of the centre ``a(t)``."""
    periods = []
    for direction in (1, -1):
        c = crossing_times(t, a, 0.0, direction)
        if len(c) >= 2:
            periods.extend(np.diff(c))
    if not periods:
        raise ValueError("fewer than two same-direction crossings; run longer")
    return float(np.mean(periods))
