from dataclasses import dataclass

import numpy as np

from app.core.errors import UsageError
from .coefficients import CoefficientField


def assemble_symbol(coeffs: CoefficientField, x, lam) -> np.ndarray:
    """A(x, lam) = sum_i A^i(x) lam_i, an l x d matrix."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (coeffs.N,):
        raise UsageError(f"Direction must have {coeffs.N} components, got shape {lam.shape}")
    if not np.all(np.isfinite(lam)):
        raise UsageError("Direction must be finite")
    return np.einsum("i,ild->ld", lam, coeffs.evaluate(x))


def assemble_symbols(coeffs: CoefficientField, x, lams) -> np.ndarray:
    """Symbols at one point for a stack of directions, shape (K, l, d)."""
    lams = np.asarray(lams, dtype=float).reshape(-1, coeffs.N)
    return np.einsum("ki,ild->kld", lams, coeffs.evaluate(x))


def symbol_table(coeffs: CoefficientField, xs, lams) -> np.ndarray:
    """Symbols for every (point, direction) pair, shape (M, K, l, d)."""
    xs = np.asarray(xs, dtype=float).reshape(-1, coeffs.N)
    lams = np.asarray(lams, dtype=float).reshape(-1, coeffs.N)
    return np.einsum("ki,mild->mkld", lams, coeffs.evaluate_many(xs))


@dataclass(frozen=True)
class FrozenSymbol:
    """A(x0, .) with the constant rank r certified at x0."""
    coeffs: CoefficientField
    x0: tuple
    r: int

    def matrix_eval(self, lam) -> np.ndarray:
        return assemble_symbol(self.coeffs, np.asarray(self.x0), lam)

    def matrices(self, lams) -> np.ndarray:
        return assemble_symbols(self.coeffs, np.asarray(self.x0), lams)

    @property
    def kernel_dim(self) -> int:
        return self.coeffs.d - self.r
