from dataclasses import dataclass
from functools import cached_property

import numpy as np

from app.core.errors import UsageError


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on Q = (-1/2, 1/2)^N with G points per axis, y_j = -1/2 + j/G."""
    N: int
    G: int

    def __post_init__(self):
        if self.N < 1 or self.N > 3:
            raise UsageError(f"Torus dimension must be 1, 2 or 3, got N={self.N}")
        if self.G < 4 or self.G % 2:
            raise UsageError(f"Grid size must be even and at least 4, got G={self.G}")

    @property
    def shape(self):
        return (self.G,) * self.N

    @property
    def size(self) -> int:
        return self.G ** self.N

    @property
    def cell_volume(self) -> float:
        return float(self.G) ** (-self.N)

    @property
    def axes(self):
        return tuple(range(self.N))

    @cached_property
    def axis_points(self) -> np.ndarray:
        return -0.5 + np.arange(self.G) / self.G

    @cached_property
    def points(self) -> np.ndarray:
        """Grid points, shape (G,)*N + (N,)."""
        mesh = np.meshgrid(*([self.axis_points] * self.N), indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def axis_frequencies(self) -> np.ndarray:
        """Integer frequencies in FFT order: 0..G/2-1, -G/2..-1."""
        return np.fft.fftfreq(self.G, 1.0 / self.G).round().astype(int)

    @cached_property
    def wavevectors(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.axis_frequencies] * self.N), indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def effective_wavevectors(self) -> np.ndarray:
        """Wave vectors used by derivative and projection symbols.

        A Nyquist component -G/2 is zeroed when another component of the same
        frequency is neither 0 nor Nyquist; such modes are cosines along that
        axis. Frequencies made only of 0 and -G/2 keep their value.
        """
        k = self.wavevectors
        nyquist = k == -self.G // 2
        other = np.any((k != 0) & ~nyquist, axis=-1, keepdims=True)
        return np.where(nyquist & other, 0, k)

    @cached_property
    def magnitudes(self) -> np.ndarray:
        """|k| over the integer frequency set."""
        return np.linalg.norm(self.wavevectors, axis=-1)

    @cached_property
    def bessel_multiplier(self) -> np.ndarray:
        return 1.0 / np.sqrt(1.0 + 4.0 * np.pi ** 2 * self.magnitudes ** 2)

    def refine(self, G: int) -> "TorusGrid":
        return TorusGrid(self.N, G)

    def check_same(self, other: "TorusGrid"):
        if self != other:
            raise UsageError(f"Grid mismatch: {self} vs {other}")
