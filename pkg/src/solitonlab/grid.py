"""Periodic 1D grid, complex fields, quadrature and spectral derivatives.

The domain is ``[-L, L)`` sampled at ``N`` equispaced nodes
``x_j = -L + j*dx`` with ``dx = 2L/N``.  For even ``N`` the origin is the
node ``j = N/2``, which is where point interactions are evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_HALF_LENGTH = 30.0
DEFAULT_NUM_POINTS = 4096


@dataclass(frozen=True)
class GridSpec:
    half_length: float = DEFAULT_HALF_LENGTH
    num_points: int = DEFAULT_NUM_POINTS

    def __post_init__(self):
        if not (self.half_length > 0 and np.isfinite(self.half_length)):
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        if int(self.num_points) != self.num_points or self.num_points < 2:
            raise ValueError(f"num_points must be an integer >= 2, got {self.num_points}")
        if self.num_points % 2:
            raise ValueError(f"num_points must be even, got {self.num_points}")
        object.__setattr__(self, "half_length", float(self.half_length))
        object.__setattr__(self, "num_points", int(self.num_points))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.num_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.num_points)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.num_points, d=self.spacing)

    @property
    def origin_index(self) -> int:
        return self.num_points // 2

    @property
    def k_nyquist(self) -> float:
        return np.pi / self.spacing

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.half_length, self.num_points * factor)


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex samples of a field on a :class:`GridSpec`.

    Samples are stored read-only; arithmetic returns new fields.
    """

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.shape != (self.grid.num_points,):
            raise ValueError(
                f"expected {self.grid.num_points} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field contains non-finite samples")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def _coerce(self, other):
        if isinstance(other, WaveField):
            check_same_grid(self, other)
            return other.samples
        return other

    def __add__(self, other):
        return WaveField(self.grid, self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return WaveField(self.grid, self.samples - self._coerce(other))

    def __rsub__(self, other):
        return WaveField(self.grid, self._coerce(other) - self.samples)

    def __mul__(self, other):
        return WaveField(self.grid, self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return WaveField(self.grid, -self.samples)

    def conj(self) -> "WaveField":
        return WaveField(self.grid, np.conj(self.samples))

    @property
    def real(self) -> np.ndarray:
        return self.samples.real

    @property
    def imag(self) -> np.ndarray:
        return self.samples.imag


def check_same_grid(u: WaveField, w: WaveField) -> None:
    if u.grid != w.grid:
        raise ValueError(f"grid mismatch: {u.grid} vs {w.grid}")


def sample(f: Callable[[np.ndarray], np.ndarray], grid: GridSpec) -> WaveField:
    """Evaluate a vectorised function at the grid nodes."""
    values = np.asarray(f(grid.x), dtype=complex)
    if values.shape == ():
        values = np.full(grid.num_points, values, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ValueError("function is not finite on the grid")
    return WaveField(grid, values)


def zeros(grid: GridSpec) -> WaveField:
    return WaveField(grid, np.zeros(grid.num_points, dtype=complex))


def integrate(u: WaveField) -> complex:
    """Periodic rectangle rule, spectrally accurate for smooth decaying data."""
    return complex(u.grid.spacing * np.sum(u.samples))


def spectral_derivative(u: WaveField, order: int = 1) -> WaveField:
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return WaveField(u.grid, _spectral_derivative(u.samples, u.grid, order))


def _spectral_derivative(values: np.ndarray, grid: GridSpec, order: int) -> np.ndarray:
    k = grid.k
    if order == 1:
        mult = 1j * k
        # odd derivative of the Nyquist mode is not representable
        mult[grid.num_points // 2] = 0.0
    else:
        mult = -k * k
    return np.fft.ifft(mult * np.fft.fft(values))


def l2_norm_sq(u: WaveField) -> float:
    return integrate(WaveField(u.grid, np.abs(u.samples) ** 2)).real


def h1_norm_sq(u: WaveField) -> float:
    du = _spectral_derivative(u.samples, u.grid, 1)
    return float(u.grid.spacing * np.sum(np.abs(u.samples) ** 2 + np.abs(du) ** 2))


def h1_norm(u: WaveField) -> float:
    return float(np.sqrt(h1_norm_sq(u)))


def modal_l2_norm_sq(u: WaveField) -> float:
    """``∫|u|²`` computed from the discrete Fourier coefficients (Parseval)."""
    c = np.fft.fft(u.samples)
    return float(u.grid.spacing * np.sum(np.abs(c) ** 2) / u.grid.num_points)
