"""Mass, energy and Lyapunov functionals, and their restrictions to solitons."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import GridSpec, WaveField, _spectral_derivative
from .group import GroupElement

NONE, DELTA, SAMPLED = "none", "delta", "sampled"


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """External potential: nothing, ``q δ_0``, or real samples on a grid.

    For slowly varying runs ``values`` holds ``W(h x)`` and ``h`` records
    the scale.
    """

    kind: str = NONE
    q: float = 0.0
    values: Optional[np.ndarray] = None
    grid: Optional[GridSpec] = None
    label: str = ""
    h: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (NONE, DELTA, SAMPLED):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == SAMPLED:
            if self.values is None or self.grid is None:
                raise ValueError("sampled potential needs values and a grid")
            vals = np.asarray(self.values)
            if np.iscomplexobj(vals):
                if np.any(vals.imag != 0):
                    raise ValueError("sampled potential must be real")
                vals = vals.real
            vals = np.array(vals, dtype=float)
            if vals.shape != (self.grid.num_points,) or not np.all(np.isfinite(vals)):
                raise ValueError("sampled potential must be finite with one value per node")
            vals.flags.writeable = False
            object.__setattr__(self, "values", vals)

    @classmethod
    def none(cls) -> "PotentialSpec":
        return cls(NONE, label="none")

    @classmethod
    def delta(cls, q: float) -> "PotentialSpec":
        return cls(DELTA, q=float(q), label=f"delta(q={q:g})")

    @classmethod
    def sampled(cls, values, grid: GridSpec, label: str = "sampled",
                h: Optional[float] = None, **meta) -> "PotentialSpec":
        return cls(SAMPLED, values=values, grid=grid, label=label, h=h, meta=meta)

    @classmethod
    def slowly_varying(cls, W: Callable[[np.ndarray], np.ndarray], h: float,
                       grid: GridSpec, label: str = "W(hx)") -> "PotentialSpec":
        return cls.sampled(W(h * grid.x), grid, label=label, h=float(h))

    def grid_values(self, grid: GridSpec) -> np.ndarray:
        """Potential as a real array on ``grid`` (the delta becomes a spike)."""
        if self.kind == NONE:
            return np.zeros(grid.num_points)
        if self.kind == DELTA:
            return discrete_delta(grid, self.q)
        if self.grid != grid:
            raise ValueError(f"potential sampled on {self.grid}, requested on {grid}")
        return np.array(self.values)

    def describe(self) -> dict:
        out = {"kind": self.kind, "label": self.label}
        if self.kind == DELTA:
            out["q"] = self.q
        if self.h is not None:
            out["h"] = self.h
        out.update(self.meta)
        return out


def discrete_delta(grid: GridSpec, q: float) -> np.ndarray:
    """Kronecker spike of weight ``q``: ``q/dx`` at the origin node."""
    v = np.zeros(grid.num_points)
    v[grid.origin_index] = q / grid.spacing
    return v


def sech2_slow(h: float, grid: GridSpec) -> PotentialSpec:
    """The well ``-sech²(h x)``."""
    return PotentialSpec.slowly_varying(lambda y: -1.0 / np.cosh(y) ** 2, h, grid,
                                        label="sech2slow")


def gaussian_delta(q: float, width: float, grid: GridSpec) -> PotentialSpec:
    """Normalized Gaussian of standard deviation ``width`` and total weight ``q``."""
    x = grid.x
    vals = q * np.exp(-0.5 * (x / width) ** 2) / (np.sqrt(2 * np.pi) * width)
    return PotentialSpec.sampled(vals, grid, label=f"gauss(q={q:g},w={width:g})",
                                 q=float(q), width=float(width))


def mass(u: WaveField) -> float:
    return float(u.grid.spacing * np.sum(np.abs(u.samples) ** 2))


def _free_energy_density_sum(u: WaveField) -> float:
    du = _spectral_derivative(u.samples, u.grid, 1)
    dens = np.abs(du) ** 2 - np.abs(u.samples) ** 4
    return 0.25 * u.grid.spacing * float(np.sum(dens))


def potential_energy(u: WaveField, V: PotentialSpec) -> float:
    if V.kind == NONE:
        return 0.0
    if V.kind == DELTA:
        return 0.5 * V.q * float(abs(u.samples[u.grid.origin_index]) ** 2)
    return 0.5 * u.grid.spacing * float(np.sum(V.grid_values(u.grid) * np.abs(u.samples) ** 2))


def hamiltonian(u: WaveField, V: PotentialSpec = PotentialSpec.none()) -> float:
    """``¼∫(|u'|² - |u|⁴) + ½∫V|u|²``; the delta term reads the origin node."""
    return _free_energy_density_sum(u) + potential_energy(u, V)


def energy_functional(u: WaveField) -> float:
    return _free_energy_density_sum(u) + 0.25 * mass(u)


def lyapunov(w: WaveField) -> float:
    eta = WaveField(w.grid, 1.0 / np.cosh(w.grid.x))
    return energy_functional(eta + w) - energy_functional(eta)


def restricted_hamiltonian_delta(g: GroupElement, q: float) -> float:
    mu = g.mu
    return mu * g.v ** 2 / 2 - mu ** 3 / 6 + 0.5 * q * mu ** 2 / np.cosh(mu * g.a) ** 2


def smoothed_potential(V: PotentialSpec, a: float, mu: float = 1.0):
    """``C = ∫ V(x) sech²(mu (x-a)) dx`` and its partials in ``a`` and ``mu``.

    Evaluated by grid quadrature against the analytic kernel.
    """
    if V.kind == NONE:
        return 0.0, 0.0, 0.0
    if V.kind == DELTA:
        s = mu * (0.0 - a)
        sech2 = 1.0 / np.cosh(s) ** 2
        th = np.tanh(s)
        return (V.q * sech2, V.q * 2 * mu * sech2 * th, -V.q * 2 * (0.0 - a) * sech2 * th)
    x = V.grid.x
    dx = V.grid.spacing
    s = mu * (x - a)
    sech2 = 1.0 / np.cosh(s) ** 2
    st = sech2 * np.tanh(s)
    vals = V.values
    c = dx * np.dot(vals, sech2)
    c_a = 2 * mu * dx * np.dot(vals, st)
    c_mu = -2 * dx * np.dot(vals, (x - a) * st)
    return float(c), float(c_a), float(c_mu)


def restricted_hamiltonian_general(g: GroupElement, V: PotentialSpec) -> float:
    c, _, _ = smoothed_potential(V, g.a, g.mu)
    mu = g.mu
    return mu * g.v ** 2 / 2 - mu ** 3 / 6 + 0.5 * mu ** 2 * c


def classical_energy(a, v, q):
    """``v²/2 + (q/2) sech²(a)``; works elementwise on arrays."""
    return 0.5 * v * v + 0.5 * q / np.cosh(a) ** 2
