from typing import Callable, Optional

import numpy as np

from app.core.errors import UsageError
from app.services.symbols import CoefficientField, freeze
from app.services.torus import PeriodicField, TorusGrid, spectral_derivative
from .cutoff import CutoffChi
from .quantize import DEFAULT_MEMORY_BUDGET, QuantizedOperator
from .symbol_function import a_symbol, p_eta_symbol


def _check(coeffs: CoefficientField, v: PeriodicField):
    if v.grid.N != coeffs.N or v.d != coeffs.d:
        raise UsageError(f"Field (N={v.grid.N}, d={v.d}) does not fit operator '{coeffs.label}' "
                         f"(N={coeffs.N}, d={coeffs.d})")


def apply_A(coeffs: CoefficientField, v: PeriodicField, path: str = "direct") -> PeriodicField:
    """sum_i A^i(x) d_i v, either directly from spectral derivatives or by quantization."""
    _check(coeffs, v)
    if path == "quantized":
        return QuantizedOperator(a_symbol(coeffs), v.grid)(v)
    if path != "direct":
        raise UsageError(f"Unknown path '{path}'")
    A = coeffs.evaluate_many(v.grid.points)
    out = np.zeros(v.grid.shape + (coeffs.l,))
    for i in range(coeffs.N):
        out += np.einsum("...ld,...d->...l", A[..., i, :, :], spectral_derivative(v, i).values)
    return PeriodicField(v.grid, out)


def apply_A_eta(coeffs: CoefficientField, eta: Callable, v: PeriodicField) -> PeriodicField:
    return apply_A(coeffs, v) * eta(v.grid.points)


def constant_rank(coeffs: CoefficientField, grid: TorusGrid) -> int:
    return freeze(coeffs, np.zeros(coeffs.N) if coeffs.constant else grid.points.reshape(-1, coeffs.N)[0]).r


class PEtaOperator:
    """Reusable P_eta on one grid (the symbol table is built once)."""

    def __init__(self, coeffs: CoefficientField, eta: Optional[Callable], grid: TorusGrid,
                 chi: Optional[CutoffChi] = None, r: Optional[int] = None,
                 memory_budget: int = DEFAULT_MEMORY_BUDGET):
        self.coeffs = coeffs
        self.eta = eta
        self.r = constant_rank(coeffs, grid) if r is None else r
        self.op = QuantizedOperator(p_eta_symbol(coeffs, self.r, eta, chi), grid, memory_budget)

    def __call__(self, v: PeriodicField) -> PeriodicField:
        _check(self.coeffs, v)
        return self.op(v)


def apply_P_eta(coeffs: CoefficientField, eta: Optional[Callable], v: PeriodicField,
                chi: Optional[CutoffChi] = None) -> PeriodicField:
    return PEtaOperator(coeffs, eta, v.grid, chi)(v)
