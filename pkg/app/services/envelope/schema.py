from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from app.core.errors import UsageError
from app.services.afree import AFreeTestSpace
from app.services.densities import EnergyDensity
from app.services.torus import PeriodicField


class EnvelopeOptions(BaseModel):
    ladder: List[int] = Field(default_factory=lambda: [8, 16, 32])
    random_starts: int = 4
    laminate_seeds: int = 4
    max_iterations: int = 2000
    tolerance: float = 1e-8
    armijo_slope: float = 1e-4
    backtrack_factor: float = 0.5
    min_step: float = 1e-14
    random_scale: float = 0.5
    direction_count: int = 64
    biconjugate_points: int = 41
    biconjugate_radius: float = 2.0
    seed: int = 0
    workers: int = 1


@dataclass
class EnvelopeQuery:
    density: EnergyDensity
    x0: tuple
    u0: np.ndarray
    xi: np.ndarray
    space: AFreeTestSpace
    options: EnvelopeOptions

    def __post_init__(self):
        self.x0 = tuple(float(c) for c in np.asarray(self.x0, dtype=float).ravel())
        self.u0 = np.atleast_1d(np.asarray(self.u0, dtype=float))
        self.xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if not (np.all(np.isfinite(self.u0)) and np.all(np.isfinite(self.xi))):
            raise UsageError("xi and u0 must be finite")
        if self.xi.shape != (self.space.d,):
            raise UsageError(f"xi must have {self.space.d} components, got {self.xi.shape}")
        if self.x0 != tuple(self.space.x0):
            raise UsageError(f"Test space was built at {self.space.x0}, query is at {self.x0}")

    def f_at_xi(self) -> float:
        return float(self.density.eval(np.asarray(self.x0), self.u0, self.xi))


class StartRecord(BaseModel):
    G: int
    kind: str
    value: float
    iterations: int
    converged: bool


class LaminateCandidate(BaseModel):
    direction: List[float]
    lattice: Optional[List[int]] = None
    amplitude: List[float]
    theta: float
    t: float
    value: float


class EnvelopeSummary(BaseModel):
    """Serializable part of an envelope evaluation (what the cache stores)."""
    value: float
    f_value: float
    ladder_values: List[float]
    starts: List[StartRecord]
    laminate_bound: Optional[float] = None
    biconjugate_bound: Optional[float] = None
    converged: bool
    minimizer_l2: float


@dataclass
class EnvelopeResult:
    value: float
    minimizer: PeriodicField
    f_value: float
    ladder_values: List[float]
    starts: List[StartRecord]
    laminate_bound: Optional[float] = None
    biconjugate_bound: Optional[float] = None

    @property
    def converged(self) -> bool:
        return any(s.converged for s in self.starts)

    @property
    def per_start_values(self) -> List[float]:
        return [s.value for s in self.starts]

    def summary(self) -> EnvelopeSummary:
        return EnvelopeSummary(value=self.value, f_value=self.f_value, ladder_values=self.ladder_values,
                               starts=self.starts, laminate_bound=self.laminate_bound,
                               biconjugate_bound=self.biconjugate_bound, converged=self.converged,
                               minimizer_l2=float(np.sqrt(np.mean(self.minimizer.magnitude() ** 2))))
