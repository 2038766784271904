from typing import List, Optional

import logging
import numpy as np
from pydantic import BaseModel

from app.core.errors import UsageError
from .coefficients import CoefficientField

SQRT_EPS = float(np.sqrt(np.finfo(float).eps))
DEFAULT_SAMPLE_COUNT = 512
DEFAULT_GAP_THRESHOLD = 1e3


class RankWitness(BaseModel):
    x: List[float]
    lam: List[float]
    rank: int


class RankCertificate(BaseModel):
    operator: str
    r: int
    min_gap: float
    x_samples: List[List[float]]
    lambda_samples: List[List[float]]
    verdict: str
    failure_witness: Optional[RankWitness] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def numerical_ranks(singular_values: np.ndarray) -> np.ndarray:
    """Rank per stack entry: sigma_k < max(sigma) * sqrt(eps) counts as zero."""
    s = np.asarray(singular_values, dtype=float)
    if s.shape[-1] == 0:
        return np.zeros(s.shape[:-1], dtype=int)
    cutoff = s.max(axis=-1, keepdims=True) * SQRT_EPS
    return np.sum((s >= cutoff) & (s > 0.0), axis=-1)


def numerical_rank(S) -> int:
    S = np.asarray(S, dtype=float)
    return int(numerical_ranks(np.linalg.svd(S, compute_uv=False)))


def rank_gaps(singular_values: np.ndarray, r: int) -> np.ndarray:
    """sigma_r / max(sigma_{r+1}, cutoff); infinite when r == 0."""
    s = np.asarray(singular_values, dtype=float)
    if r == 0:
        return np.full(s.shape[:-1], np.inf)
    if s.shape[-1] < r:
        return np.zeros(s.shape[:-1])
    cutoff = s.max(axis=-1) * SQRT_EPS
    following = s[..., r] if s.shape[-1] > r else np.zeros(s.shape[:-1])
    denom = np.maximum(following, cutoff)
    with np.errstate(divide="ignore", invalid="ignore"):
        gaps = np.where(denom > 0.0, s[..., r - 1] / np.where(denom > 0.0, denom, 1.0), 0.0)
    return gaps


def deterministic_directions(N: int, count: int = DEFAULT_SAMPLE_COUNT) -> np.ndarray:
    if N == 1:
        return np.array([[1.0], [-1.0]])
    if N == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    if N == 3:
        # Fibonacci sphere
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        rho = np.sqrt(1.0 - z ** 2)
        phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(count)
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
    raise UsageError(f"Direction sampling supports N <= 3, got N={N}")


def random_directions(N: int, count: int, seed: Optional[int] = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lams = rng.standard_normal((count, N))
    norms = np.linalg.norm(lams, axis=-1, keepdims=True)
    return lams / np.where(norms > 0.0, norms, 1.0)


def sample_directions(N: int, count: int = DEFAULT_SAMPLE_COUNT, seed: Optional[int] = 0) -> np.ndarray:
    """Deterministic sphere points followed by uniform random ones."""
    return np.concatenate([deterministic_directions(N, count), random_directions(N, count, seed)])


def verify_constant_rank(coeffs: CoefficientField, x_samples, lambda_samples,
                         gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> RankCertificate:
    xs = np.asarray(x_samples, dtype=float)
    lams = np.asarray(lambda_samples, dtype=float)
    if xs.size == 0 or lams.size == 0:
        raise UsageError("Constant rank verification needs non-empty point and direction samples")
    xs = xs.reshape(-1, coeffs.N)
    lams = lams.reshape(-1, coeffs.N)
    if np.any(np.abs(np.linalg.norm(lams, axis=-1) - 1.0) > 1e-8):
        raise UsageError("Direction samples must lie on the unit sphere")

    A = coeffs.evaluate_many(xs)
    symbols = np.einsum("ki,mild->mkld", lams, A)
    s = np.linalg.svd(symbols, compute_uv=False)
    ranks = numerical_ranks(s)
    r = int(np.bincount(ranks.ravel()).argmax())
    gaps = rank_gaps(s, r)

    bad = (ranks != r) | ~(gaps > gap_threshold)
    witness = None
    if np.any(bad):
        m, k = np.unravel_index(int(np.argmax(bad)), bad.shape)
        witness = RankWitness(x=xs[m].tolist(), lam=lams[k].tolist(), rank=int(ranks[m, k]))
        logging.info(f"Constant rank fails for '{coeffs.label}' at x={witness.x}, lambda={witness.lam}, "
                     f"rank {witness.rank} (consensus {r})")

    return RankCertificate(
        operator=coeffs.label,
        r=r,
        min_gap=float(np.min(gaps)),
        x_samples=xs.tolist(),
        lambda_samples=lams.tolist(),
        verdict="fail" if witness is not None else "pass",
        failure_witness=witness,
    )


def deterministic_kernel_directions(N: int, count: int) -> np.ndarray:
    """Sphere points with antipodes identified (kernels of A(x, lam) and A(x, -lam) agree)."""
    if N == 2:
        theta = np.pi * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return deterministic_directions(N, count)
