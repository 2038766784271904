from typing import Callable, Optional

import numpy as np

from app.core.errors import UsageError
from app.services.symbols import CoefficientField, kernel_projectors
from .cutoff import CutoffChi

# x: (M, N) points, k: (K, N) effective wave vectors, magnitude: (K,) integer |k|
SymbolEval = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class SymbolFunction:
    """sigma(x, k) with values (M, K, rows, cols).

    When ``spatial`` and ``spectral`` are both given the symbol is the product
    spatial(x) * spectral(k) and quantizes as multiplication after a Fourier
    multiplier.
    """

    def __init__(self, rows: int, cols: int, evaluate: Optional[SymbolEval] = None,
                 spatial: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 spectral: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
                 order: float = 0.0, label: str = "symbol", chi: Optional[CutoffChi] = None):
        if evaluate is None and spectral is None:
            raise UsageError("A symbol needs either a full evaluator or a spectral factor")
        self.rows = rows
        self.cols = cols
        self._evaluate = evaluate
        self.spatial = spatial
        self.spectral = spectral
        self.order = order
        self.label = label
        self.chi = chi

    @property
    def separable(self) -> bool:
        return self._evaluate is None

    def eval(self, x, k, magnitude=None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        k = np.atleast_2d(np.asarray(k, dtype=float))
        magnitude = np.linalg.norm(k, axis=-1) if magnitude is None else np.asarray(magnitude, dtype=float)
        if self._evaluate is not None:
            return self._evaluate(x, k, magnitude)
        table = self.spectral(k, magnitude)[None]
        if self.spatial is not None:
            table = self.spatial(x)[:, None, None, None] * table
        return np.broadcast_to(table, (x.shape[0],) + table.shape[1:])


def multiplier_symbol(func: Callable[[np.ndarray, np.ndarray], np.ndarray], rows: int, cols: int,
                      label: str = "multiplier") -> SymbolFunction:
    return SymbolFunction(rows, cols, spectral=func, label=label)


def multiplication_symbol(m: Callable[[np.ndarray], np.ndarray], d: int, label: str = "multiplication") -> SymbolFunction:
    eye = np.eye(d)
    return SymbolFunction(d, d, spatial=m, spectral=lambda k, mag: np.broadcast_to(eye, (k.shape[0], d, d)),
                          label=label)


def derivative_symbol(axis: int, d: int) -> SymbolFunction:
    eye = np.eye(d)
    return SymbolFunction(d, d, spectral=lambda k, mag: 2j * np.pi * k[:, axis, None, None] * eye,
                          order=1.0, label=f"d/dx{axis + 1}")


def a_symbol(coeffs: CoefficientField, eta: Optional[Callable] = None) -> SymbolFunction:
    """A_eta(x, 2 pi i k) = eta(x) sum_i A^i(x) 2 pi i k_i (eta = 1 when omitted)."""
    if coeffs.constant:
        A = coeffs.evaluate(np.zeros(coeffs.N))
        return SymbolFunction(coeffs.l, coeffs.d, spatial=eta,
                              spectral=lambda k, mag: 2j * np.pi * np.einsum("ki,ild->kld", k, A),
                              order=1.0, label=f"A[{coeffs.label}]")

    def evaluate(x, k, mag):
        table = 2j * np.pi * np.einsum("ki,mild->mkld", k, coeffs.evaluate_many(x))
        if eta is not None:
            table = eta(x)[:, None, None, None] * table
        return table

    return SymbolFunction(coeffs.l, coeffs.d, evaluate=evaluate, order=1.0, label=f"A[{coeffs.label}]")


def _projector_table(coeffs: CoefficientField, x: np.ndarray, k: np.ndarray, r: int) -> np.ndarray:
    """P(x, k/|k|) for k != 0, zero at k = 0; shape (M, K, d, d)."""
    M, K = x.shape[0], k.shape[0]
    out = np.zeros((M, K, coeffs.d, coeffs.d))
    nonzero = np.any(k != 0.0, axis=-1)
    if not np.any(nonzero):
        return out
    unit = k[nonzero] / np.linalg.norm(k[nonzero], axis=-1, keepdims=True)
    S = np.einsum("ki,mild->mkld", unit, coeffs.evaluate_many(x))
    out[:, nonzero] = kernel_projectors(S, r)
    return out


def p_eta_symbol(coeffs: CoefficientField, r: int, eta: Optional[Callable] = None,
                 chi: Optional[CutoffChi] = None) -> SymbolFunction:
    """eta(x)^2 P(x, k) chi(|k|)."""
    chi = chi or CutoffChi()
    eta2 = None if eta is None else (lambda x: eta(x) ** 2)
    if coeffs.constant:
        x_ref = np.zeros((1, coeffs.N))
        return SymbolFunction(
            coeffs.d, coeffs.d, spatial=eta2,
            spectral=lambda k, mag: _projector_table(coeffs, x_ref, k, r)[0] * chi(mag)[:, None, None],
            label=f"P_eta[{coeffs.label}]", chi=chi)

    def evaluate(x, k, mag):
        table = np.zeros((x.shape[0], k.shape[0], coeffs.d, coeffs.d))
        weight = np.ones(x.shape[0]) if eta2 is None else eta2(x)
        support = weight != 0.0
        if np.any(support):
            table[support] = _projector_table(coeffs, x[support], k, r)
        return weight[:, None, None, None] * table * chi(mag)[None, :, None, None]

    return SymbolFunction(coeffs.d, coeffs.d, evaluate=evaluate, label=f"P_eta[{coeffs.label}]", chi=chi)
