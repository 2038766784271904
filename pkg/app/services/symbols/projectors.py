from dataclasses import dataclass
from typing import Optional, Tuple

import logging
import numpy as np

from app.core.errors import ConstantRankViolation, UsageError
from .coefficients import CoefficientField
from .rank import numerical_ranks, random_directions
from .symbol import assemble_symbols


def _svd_checked(S: np.ndarray, r: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    S = np.asarray(S, dtype=float)
    if S.ndim < 2:
        raise UsageError(f"Expected a matrix or a stack of matrices, got shape {S.shape}")
    l, d = S.shape[-2:]
    if r < 0 or r > min(l, d):
        raise UsageError(f"Rank {r} impossible for a {l}x{d} symbol")
    U, s, Vt = np.linalg.svd(S, full_matrices=True)
    ranks = numerical_ranks(s)
    if np.any(ranks != r):
        index = np.unravel_index(int(np.argmax(ranks != r)), ranks.shape) if ranks.ndim else ()
        found = int(ranks[index]) if ranks.ndim else int(ranks)
        logging.error(f"Symbol has numerical rank {found}, expected {r}")
        raise ConstantRankViolation(f"Symbol has numerical rank {found}, expected {r}",
                                    witness=(None, None, found))
    return U, s, Vt


def kernel_basis(S, r: int) -> np.ndarray:
    """Orthonormal basis of ker S as columns (d x (d - r)); stacks are supported."""
    _, _, Vt = _svd_checked(S, r)
    return np.swapaxes(Vt[..., r:, :], -1, -2)


def kernel_projector(S, r: int) -> np.ndarray:
    """Orthogonal projector onto ker S, built from the trailing right singular vectors."""
    V = kernel_basis(S, r)
    return V @ np.swapaxes(V, -1, -2)


def kernel_projectors(S, r: int) -> np.ndarray:
    return kernel_projector(S, r)


def q_operator(S, r: int) -> np.ndarray:
    """Truncated Moore-Penrose pseudo-inverse S^+ (d x l)."""
    U, s, Vt = _svd_checked(S, r)
    Vr = np.swapaxes(Vt[..., :r, :], -1, -2)
    Ur = U[..., :, :r]
    return (Vr / s[..., None, :r]) @ np.swapaxes(Ur, -1, -2)


def q_operators(S, r: int) -> np.ndarray:
    return q_operator(S, r)


@dataclass(frozen=True)
class PathIncrements:
    h: float
    increments: np.ndarray
    empirical_constant: float
    median_increment: float

    @property
    def max_jump_ratio(self) -> float:
        if self.median_increment == 0.0:
            return 0.0 if self.increments.max() == 0.0 else np.inf
        return float(self.increments.max() / self.median_increment)


def projector_path_increments(coeffs: CoefficientField, x, r: int, steps: int = 256,
                              seed: Optional[int] = 0) -> PathIncrements:
    """Increments of P(x, lambda(t)) along a closed great circle of the unit sphere."""
    if coeffs.N < 2:
        raise UsageError("Great-circle paths need N >= 2")
    e1, e2 = random_directions(coeffs.N, 2, seed)
    e2 = e2 - np.dot(e1, e2) * e1
    e2 = e2 / np.linalg.norm(e2)
    t = 2.0 * np.pi * np.arange(steps + 1) / steps
    lams = np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2
    P = kernel_projectors(assemble_symbols(coeffs, x, lams), r)
    increments = np.linalg.norm(np.diff(P, axis=0), axis=(-2, -1))
    h = 2.0 * np.pi / steps
    return PathIncrements(h=h, increments=increments,
                          empirical_constant=float(increments.max() / h),
                          median_increment=float(np.median(increments)))
