from typing import Optional

import logging
import numpy as np
import scipy.fft

from app.core.errors import UsageError
from app.services.torus import PeriodicField, TorusGrid
from .symbol_function import SymbolFunction

DEFAULT_MEMORY_BUDGET = 256 * 2 ** 20


class QuantizedOperator:
    """Kohn-Nirenberg quantization of sigma on a torus grid.

    out(x_j) = sum_k sigma(x_j, k) v_hat(k) exp(2 pi i k.j / G), real part taken.
    The symbol table over (x_j, k) is kept when it fits ``memory_budget``
    bytes; otherwise it is rebuilt per chunk of points.
    """

    def __init__(self, symbol: SymbolFunction, grid: TorusGrid, memory_budget: int = DEFAULT_MEMORY_BUDGET):
        self.symbol = symbol
        self.grid = grid
        self.memory_budget = memory_budget
        self._points = grid.points.reshape(-1, grid.N)
        self._k = grid.effective_wavevectors.reshape(-1, grid.N).astype(float)
        self._phase_k = grid.wavevectors.reshape(-1, grid.N).astype(float)
        self._magnitude = grid.magnitudes.reshape(-1)
        self._index = np.stack(np.meshgrid(*([np.arange(grid.G)] * grid.N), indexing="ij"),
                               axis=-1).reshape(-1, grid.N).astype(float)
        self._table = None
        self._spectral = None
        if symbol.separable:
            self._spectral = symbol.spectral(self._k, self._magnitude)
        else:
            entry = 16 * symbol.rows * symbol.cols * grid.size
            self._chunk = max(1, min(grid.size, memory_budget // max(entry, 1)))
            if self._chunk >= grid.size:
                self._table = symbol.eval(self._points, self._k, self._magnitude)
                logging.debug(f"Cached symbol table for '{symbol.label}' at G={grid.G}")

    def _apply_separable(self, v: PeriodicField) -> np.ndarray:
        applied = np.einsum("...rc,...c->...r", self._spectral.reshape(self.grid.shape + self._spectral.shape[1:]),
                            v.spectrum)
        values = scipy.fft.ifftn(applied, axes=self.grid.axes, norm="forward").real
        if self.symbol.spatial is not None:
            values = self.symbol.spatial(self.grid.points)[..., None] * values
        return values

    def _apply_table(self, v: PeriodicField) -> np.ndarray:
        vhat = v.spectrum.reshape(-1, v.d)
        out = np.empty((self.grid.size, self.symbol.rows))
        for start in range(0, self.grid.size, self._chunk):
            stop = min(start + self._chunk, self.grid.size)
            if self._table is not None:
                table = self._table[start:stop]
            else:
                table = self.symbol.eval(self._points[start:stop], self._k, self._magnitude)
            phase = np.exp(2j * np.pi * (self._index[start:stop] @ self._phase_k.T) / self.grid.G)
            out[start:stop] = np.einsum("mkrc,kc,mk->mr", table, vhat, phase, optimize=True).real
        return out.reshape(self.grid.shape + (self.symbol.rows,))

    def __call__(self, v: PeriodicField) -> PeriodicField:
        self.grid.check_same(v.grid)
        if v.d != self.symbol.cols:
            raise UsageError(f"Symbol '{self.symbol.label}' acts on {self.symbol.cols} components, got {v.d}")
        values = self._apply_separable(v) if self.symbol.separable else self._apply_table(v)
        return PeriodicField(self.grid, values)


def quantize(symbol: SymbolFunction, v: PeriodicField, memory_budget: Optional[int] = None) -> PeriodicField:
    return QuantizedOperator(symbol, v.grid, memory_budget or DEFAULT_MEMORY_BUDGET)(v)
