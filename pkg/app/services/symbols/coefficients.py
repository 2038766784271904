from dataclasses import dataclass
from typing import Callable, Optional

import logging
import numpy as np

from app.core.errors import ConfigurationError, UsageError


@dataclass(frozen=True)
class LipschitzEstimate:
    estimate: float
    bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.estimate <= self.bound * (1.0 + self.tolerance)


class CoefficientField:
    """The matrices A^i(x) of a first order operator sum_i A^i(x) d/dx_i.

    ``coeff_eval`` maps points of shape (..., N) to arrays of shape
    (..., N, l, d); a single point gives the N matrices A^1(x)..A^N(x).
    """

    def __init__(self, N: int, d: int, l: int, coeff_eval: Callable[[np.ndarray], np.ndarray],
                 lipschitz_bound: float = 0.0, label: str = "custom", constant: bool = False):
        if N < 1 or d < 1 or l < 1:
            raise ConfigurationError(f"Invalid dimensions N={N}, d={d}, l={l} for '{label}'")
        self.N = N
        self.d = d
        self.l = l
        self.coeff_eval = coeff_eval
        self.lipschitz_bound = float(lipschitz_bound)
        self.label = label
        self.constant = constant

    @property
    def dims(self):
        return self.N, self.d, self.l

    def evaluate_many(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.N,):
            raise UsageError(f"Points for '{self.label}' must have last axis {self.N}, got {x.shape}")
        values = np.asarray(self.coeff_eval(x), dtype=float)
        expected = x.shape[:-1] + (self.N, self.l, self.d)
        if values.shape != expected:
            logging.error(f"Coefficient field '{self.label}' returned shape {values.shape}")
            raise ConfigurationError(
                f"Coefficient field '{self.label}' returned shape {values.shape}, expected {expected}")
        return values

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(self.N)
        return self.evaluate_many(x[None, :])[0]

    def check_lipschitz(self, samples, tolerance: float = 1e-6, offset: float = 1e-3,
                        seed: Optional[int] = 0) -> LipschitzEstimate:
        """Finite-difference Lipschitz estimate of every A^i over sampled pairs."""
        samples = np.asarray(samples, dtype=float).reshape(-1, self.N)
        rng = np.random.default_rng(seed)
        partners = samples + offset * rng.uniform(-1.0, 1.0, size=samples.shape)
        diff = self.evaluate_many(samples) - self.evaluate_many(partners)
        dist = np.linalg.norm(samples - partners, axis=-1)
        norms = np.linalg.norm(diff, ord=2, axis=(-2, -1)).max(axis=-1)
        estimate = float(np.max(norms / np.maximum(dist, np.finfo(float).tiny)))
        return LipschitzEstimate(estimate=estimate, bound=self.lipschitz_bound, tolerance=tolerance)

    def __repr__(self):
        return f"CoefficientField(label={self.label!r}, N={self.N}, d={self.d}, l={self.l})"


def constant_field(matrices, label: str) -> CoefficientField:
    """Coefficient field with x-independent A^i."""
    matrices = np.asarray(matrices, dtype=float)
    N, l, d = matrices.shape

    def coeff_eval(x):
        return np.broadcast_to(matrices, x.shape[:-1] + matrices.shape).copy()

    return CoefficientField(N=N, d=d, l=l, coeff_eval=coeff_eval, lipschitz_bound=0.0,
                            label=label, constant=True)
