from typing import Callable, Optional

import numpy as np
import scipy.fft

from app.core.errors import UsageError
from .grid import TorusGrid


class PeriodicField:
    """Real R^d-valued samples on a TorusGrid, values of shape (G,)*N + (d,).

    Spectral coefficients are the normalised DFT of the samples, so the
    zero frequency holds the cell average.
    """

    def __init__(self, grid: TorusGrid, values, spectrum: Optional[np.ndarray] = None):
        # private copy; the caller keeps a writable array
        values = np.array(values, dtype=float)
        if values.shape == grid.shape:
            values = values[..., None]
        if values.ndim != grid.N + 1 or values.shape[:-1] != grid.shape:
            raise UsageError(f"Values of shape {values.shape} do not fit grid {grid.shape}")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self._spectrum = spectrum

    @classmethod
    def zeros(cls, grid: TorusGrid, d: int) -> "PeriodicField":
        return cls(grid, np.zeros(grid.shape + (d,)))

    @classmethod
    def constant(cls, grid: TorusGrid, c) -> "PeriodicField":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return cls(grid, np.broadcast_to(c, grid.shape + c.shape).copy())

    @classmethod
    def from_function(cls, grid: TorusGrid, func: Callable[[np.ndarray], np.ndarray]) -> "PeriodicField":
        """Sample ``func`` (points of shape (..., N) -> (..., d) or (...)) on the grid."""
        return cls(grid, func(grid.points))

    @classmethod
    def from_spectrum(cls, grid: TorusGrid, spectrum: np.ndarray) -> "PeriodicField":
        values = scipy.fft.ifftn(spectrum, axes=grid.axes, norm="forward").real
        return cls(grid, values)

    @property
    def d(self) -> int:
        return self.values.shape[-1]

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self._spectrum = scipy.fft.fftn(self.values, axes=self.grid.axes, norm="forward")
            self._spectrum.setflags(write=False)
        return self._spectrum

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1, self.d)

    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=-1)

    def mean(self) -> np.ndarray:
        return self.values.mean(axis=self.grid.axes)

    def component(self, i: int) -> "PeriodicField":
        return PeriodicField(self.grid, self.values[..., i:i + 1])

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, PeriodicField):
            self.grid.check_same(other.grid)
            return other.values
        return np.asarray(other, dtype=float)

    def __add__(self, other):
        return PeriodicField(self.grid, self.values + self._coerce(other))

    def __sub__(self, other):
        return PeriodicField(self.grid, self.values - self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        if other.ndim == self.grid.N:
            other = other[..., None]
        return PeriodicField(self.grid, self.values * other)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return PeriodicField(self.grid, -self.values)

    def __repr__(self):
        return f"PeriodicField(N={self.grid.N}, G={self.grid.G}, d={self.d})"


def spectral_derivative(v: PeriodicField, axis: int) -> PeriodicField:
    """Spectral partial derivative along ``axis`` (Nyquist handled by the effective wave vectors)."""
    k = v.grid.effective_wavevectors[..., axis]
    return PeriodicField.from_spectrum(v.grid, 2j * np.pi * k[..., None] * v.spectrum)


def _resample_axis(values: np.ndarray, axis: int, G_new: int) -> np.ndarray:
    G = values.shape[axis]
    if G == G_new:
        return values
    c = np.moveaxis(scipy.fft.fft(values, axis=axis, norm="forward"), axis, 0)
    out = np.zeros((G_new,) + c.shape[1:], dtype=complex)
    if G_new > G:
        h = G // 2
        out[:h] = c[:h]
        out[-h + 1:] = c[-h + 1:]
        # split the Nyquist cosine between +G/2 and -G/2
        out[h] = 0.5 * c[h]
        out[-h] = 0.5 * c[h]
    else:
        h = G_new // 2
        out[:h] = c[:h]
        out[-h + 1:] = c[-h + 1:]
        out[-h] = c[-h] + c[h]
    out = np.moveaxis(out, 0, axis)
    return scipy.fft.ifft(out, axis=axis, norm="forward").real


def resample(v: PeriodicField, G: int) -> PeriodicField:
    """Spectral up or down sampling to G points per axis."""
    grid = v.grid.refine(G)
    values = v.values
    for axis in v.grid.axes:
        values = _resample_axis(values, axis, G)
    return PeriodicField(grid, values)


def evaluate_at(v: PeriodicField, points, chunk: int = 4096) -> np.ndarray:
    """Trigonometric interpolant of v at arbitrary points (M, N), periodically wrapped."""
    grid = v.grid
    points = np.asarray(points, dtype=float).reshape(-1, grid.N)
    G, h = grid.G, grid.G // 2
    # symmetric spectrum on -G/2..G/2 with the Nyquist coefficient split in halves
    c = v.spectrum
    for axis in grid.axes:
        c = np.moveaxis(c, axis, 0)
        c = np.concatenate([c[h:], c[:h], c[h:h + 1]], axis=0)
        c[0] *= 0.5
        c[-1] = c[0]
        c = np.moveaxis(c, 0, axis)
    k = np.arange(-h, h + 1)
    out = np.empty((points.shape[0], v.d))
    for start in range(0, points.shape[0], chunk):
        t = points[start:start + chunk] + 0.5
        acc = c
        phases = [np.exp(2j * np.pi * np.outer(t[:, a], k)) for a in grid.axes]
        # contract the first axis with the first coordinate, keeping the point axis in front
        acc = np.einsum("mk,k...->m...", phases[0], acc)
        for a in range(1, grid.N):
            acc = np.einsum("mk,mk...->m...", phases[a], acc)
        out[start:start + chunk] = acc.real
    return out
