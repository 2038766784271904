from typing import List, Optional, Tuple

import logging
import numpy as np
from pydantic import BaseModel

from app.core.errors import UsageError


class GrowthCheck(BaseModel):
    label: str
    passed: bool
    worst_ratio: float
    witness: Optional[Tuple[List[float], List[float], List[float]]] = None


class GradientCheck(BaseModel):
    label: str
    h: float
    max_error: float


def _sq(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.sum(v * v, axis=-1)


class EnergyDensity:
    """Integrand f(x, u, xi) >= 0 with growth bound C(1 + |u|^p + |xi|^q).

    Arguments broadcast: x (..., N), u (..., m), xi (..., d); ``eval`` returns
    shape (...) and ``grad_xi`` shape (..., d).
    """
    label = "density"
    convex = False

    def __init__(self, growth: Tuple[float, float, float]):
        self.growth = tuple(float(g) for g in growth)

    def eval(self, x, u, xi) -> np.ndarray:
        raise NotImplementedError

    def grad_xi(self, x, u, xi) -> np.ndarray:
        raise NotImplementedError

    def bound(self, u, xi) -> np.ndarray:
        C, p, q = self.growth
        return C * (1.0 + np.sqrt(_sq(u)) ** p + np.sqrt(_sq(xi)) ** q)

    def __repr__(self):
        return f"{type(self).__name__}(label={self.label!r}, growth={self.growth})"


class Quadratic(EnergyDensity):
    label = "quad"
    convex = True

    def __init__(self):
        super().__init__((1.0, 2.0, 2.0))

    def eval(self, x, u, xi):
        return _sq(xi)

    def grad_xi(self, x, u, xi):
        return 2.0 * np.asarray(xi, dtype=float)


class DoubleWell(EnergyDensity):
    label = "dwell"

    def __init__(self):
        super().__init__((2.0, 2.0, 4.0))

    def eval(self, x, u, xi):
        return (_sq(xi) - 1.0) ** 2

    def grad_xi(self, x, u, xi):
        xi = np.asarray(xi, dtype=float)
        return 4.0 * (_sq(xi) - 1.0)[..., None] * xi


class PNorm(EnergyDensity):
    convex = True

    def __init__(self, q: float = 4.0):
        if not q >= 1.0:
            raise UsageError(f"pnorm exponent must be at least 1, got {q}")
        self.q = float(q)
        self.label = f"pnorm({q:g})"
        super().__init__((1.0, self.q, self.q))

    def eval(self, x, u, xi):
        return np.sqrt(_sq(xi)) ** self.q

    def grad_xi(self, x, u, xi):
        xi = np.asarray(xi, dtype=float)
        r = np.sqrt(_sq(xi))
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > 0.0, self.q * r ** (self.q - 2.0), 0.0)
        return scale[..., None] * xi


def coupled_weight(x) -> np.ndarray:
    """b(x) = 1 + cos(2 pi x_1) / 2."""
    return 1.0 + 0.5 * np.cos(2.0 * np.pi * np.asarray(x, dtype=float)[..., 0])


class Coupled(EnergyDensity):
    """(1 + |u|^2)(|xi|^2 - 1)^2 + b(x)|xi|^2."""
    label = "coupled"

    def __init__(self):
        super().__init__((5.0, 6.0, 6.0))

    def eval(self, x, u, xi):
        s = _sq(xi)
        return (1.0 + _sq(u)) * (s - 1.0) ** 2 + coupled_weight(x) * s

    def grad_xi(self, x, u, xi):
        xi = np.asarray(xi, dtype=float)
        s = _sq(xi)
        scale = 4.0 * (1.0 + _sq(u)) * (s - 1.0) + 2.0 * coupled_weight(x)
        return scale[..., None] * xi


class ShiftedDensity(EnergyDensity):
    """f(x, u, xi0 + xi) for a fixed shift xi0."""

    def __init__(self, base: EnergyDensity, shift):
        self.base = base
        self.shift = np.asarray(shift, dtype=float)
        self.label = f"{base.label}+shift"
        self.convex = base.convex
        C, p, q = base.growth
        shift_norm = float(np.linalg.norm(self.shift))
        super().__init__((C * 2.0 ** max(q - 1.0, 0.0) * (1.0 + shift_norm ** q), p, q))

    def eval(self, x, u, xi):
        return self.base.eval(x, u, self.shift + np.asarray(xi, dtype=float))

    def grad_xi(self, x, u, xi):
        return self.base.grad_xi(x, u, self.shift + np.asarray(xi, dtype=float))


def _samples(N: int, m: int, d: int, count: int, seed, radius: Tuple[float, float]):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.5, 0.5, size=(count, N))
    u = rng.standard_normal((count, m))
    xi = rng.standard_normal((count, d))
    xi /= np.linalg.norm(xi, axis=-1, keepdims=True)
    xi *= rng.uniform(*radius, size=(count, 1))
    return x, u, xi


def growth_check(f: EnergyDensity, sample_count: int = 1000, d: int = 2, m: int = 1, N: int = 2,
                 seed=0) -> GrowthCheck:
    x, u, xi = _samples(N, m, d, sample_count, seed, (0.0, 4.0))
    values = f.eval(x, u, xi)
    ratios = values / f.bound(u, xi)
    worst = int(np.argmax(ratios))
    passed = bool(np.all(values >= 0.0) and ratios[worst] <= 1.0)
    witness = None
    if not passed:
        witness = (x[worst].tolist(), u[worst].tolist(), xi[worst].tolist())
        logging.info(f"Growth bound of '{f.label}' violated, ratio {ratios[worst]:.4g}")
    return GrowthCheck(label=f.label, passed=passed, worst_ratio=float(ratios[worst]), witness=witness)


def gradient_check(f: EnergyDensity, sample_count: int = 200, h: float = 1e-4, d: int = 2, m: int = 1,
                   N: int = 2, seed=0) -> GradientCheck:
    """Max of |grad - central difference| / (1 + |grad|) over samples."""
    if not h > 0.0:
        raise UsageError(f"Finite-difference step must be positive, got {h}")
    x, u, xi = _samples(N, m, d, sample_count, seed, (0.1, 3.0))
    grad = f.grad_xi(x, u, xi)
    fd = np.empty_like(grad)
    for i in range(d):
        step = np.zeros(d)
        step[i] = h
        fd[:, i] = (f.eval(x, u, xi + step) - f.eval(x, u, xi - step)) / (2.0 * h)
    err = np.linalg.norm(grad - fd, axis=-1) / (1.0 + np.linalg.norm(grad, axis=-1))
    return GradientCheck(label=f.label, h=h, max_error=float(err.max()))
