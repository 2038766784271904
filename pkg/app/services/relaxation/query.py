from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from app.core.errors import ResolutionError, UsageError
from app.services.densities import EnergyDensity
from app.services.envelope import EnvelopeOptions
from app.services.pseudodiff import apply_A
from app.services.symbols import CoefficientField
from app.services.torus import PeriodicField, TorusGrid, evaluate_at, lq_norm, resample, wm1q_norm

# a field given by samples or by a function of points (..., N) -> (..., k)
FieldSource = Union[PeriodicField, Callable[[np.ndarray], np.ndarray]]

PHI_KINDS = ("plateau", "full")


class RecoveryOptions(BaseModel):
    r_ladder: List[float] = Field(default_factory=lambda: [0.5, 0.25])
    m_ladder: List[int] = Field(default_factory=lambda: [2, 4, 8])
    cell_points: int = 64
    phi: str = "full"
    mu: float = 0.05
    quadrature_points: int = 4
    defect_point: Optional[List[float]] = None
    defect_r_ladder: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.125])
    tolerance_lower: float = 1e-3
    tolerance_relative: float = 0.05
    tolerance_absolute: float = 5e-3
    rate_slack: float = 0.5
    admissibility_tolerance: float = 1e-6
    check_points: int = 64
    workers: int = 1


@dataclass
class RelaxationQuery:
    density: EnergyDensity
    coeffs: CoefficientField
    u: Optional[FieldSource] = None
    v: Optional[FieldSource] = None
    envelope: EnvelopeOptions = field(default_factory=EnvelopeOptions)
    recovery: RecoveryOptions = field(default_factory=RecoveryOptions)
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None
    q: Optional[float] = None

    def __post_init__(self):
        if self.recovery.phi not in PHI_KINDS:
            raise UsageError(f"Unknown cutoff kind '{self.recovery.phi}' (known: {', '.join(PHI_KINDS)})")
        if self.q is None:
            self.q = float(self.density.growth[2])
        if not self.q > 1.0:
            raise UsageError(f"Exponent must exceed 1, got q={self.q}")
        if not self.recovery.r_ladder or not self.recovery.m_ladder:
            raise UsageError("Recovery ladders must not be empty")
        if any(not 0.0 < r <= 1.0 for r in self.recovery.r_ladder + self.recovery.defect_r_ladder):
            raise UsageError("Cube sides r must lie in (0, 1]")

    @property
    def N(self) -> int:
        return self.coeffs.N

    def u_at(self, points) -> np.ndarray:
        if self.u is None:
            return np.zeros(np.asarray(points).shape[:-1] + (1,))
        return sample_source(self.u, points)

    def v_at(self, points) -> np.ndarray:
        if self.v is None:
            return np.zeros(np.asarray(points).shape[:-1] + (self.coeffs.d,))
        return sample_source(self.v, points)

    def u_on(self, grid: TorusGrid) -> np.ndarray:
        return self.u_at(grid.points) if self.u is None else source_on_grid(self.u, grid)

    def v_on(self, grid: TorusGrid) -> np.ndarray:
        return self.v_at(grid.points) if self.v is None else source_on_grid(self.v, grid)

    def in_domain(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.domain is None:
            return np.ones(points.shape[:-1], dtype=bool)
        return np.asarray(self.domain(points), dtype=bool)


def grid_indices(grid: TorusGrid, points: np.ndarray) -> Optional[np.ndarray]:
    scaled = (points + 0.5) * grid.G
    index = np.rint(scaled)
    if np.all(np.abs(scaled - index) < 1e-9):
        return np.mod(index.astype(int), grid.G)
    return None


def sample_source(source: FieldSource, points) -> np.ndarray:
    """Values of a field source at points (..., N), shape (..., k)."""
    points = np.asarray(points, dtype=float)
    if isinstance(source, PeriodicField):
        flat = points.reshape(-1, source.grid.N)
        index = grid_indices(source.grid, flat)
        if index is not None:
            values = source.values[tuple(index.T)]
        else:
            values = evaluate_at(source, flat)
        return values.reshape(points.shape[:-1] + (source.d,))
    values = np.asarray(source(points), dtype=float)
    if values.shape == points.shape[:-1]:
        values = values[..., None]
    return values


def source_on_grid(source: FieldSource, grid: TorusGrid) -> np.ndarray:
    if isinstance(source, PeriodicField):
        if source.grid.N != grid.N:
            raise UsageError(f"Field of dimension {source.grid.N} used on a {grid.N}-dimensional torus")
        return source.values if source.grid.G == grid.G else resample(source, grid.G).values
    return sample_source(source, grid.points)


def quadrature_rule(N: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoint lattice with n points per axis and equal weights n^-N."""
    if n < 1:
        raise UsageError(f"Quadrature needs at least one point per axis, got {n}")
    axis = -0.5 + (np.arange(n) + 0.5) / n
    points = np.stack(np.meshgrid(*([axis] * N), indexing="ij"), axis=-1).reshape(-1, N)
    return points, np.full(points.shape[0], float(n) ** -N)


def ambient_grid(N: int, r: float, cell_points: int) -> TorusGrid:
    """Torus grid carrying ``cell_points`` samples per side of a cube of side r."""
    G = cell_points / r
    if abs(G - round(G)) > 1e-9 or round(G) % 2:
        raise ResolutionError(f"r={r} with {cell_points} points per cube side does not give an even grid")
    return TorusGrid(N, int(round(G)))


def admissibility_residual(query: RelaxationQuery) -> float:
    """W^{-1,q} size of A v relative to max(1, |v|_2), on the check grid or the field's own grid."""
    if query.v is None:
        return 0.0
    if isinstance(query.v, PeriodicField):
        v = query.v
    else:
        grid = TorusGrid(query.N, query.recovery.check_points)
        v = PeriodicField(grid, query.v_on(grid))
    return wm1q_norm(apply_A(query.coeffs, v), query.q) / max(1.0, lq_norm(v, 2.0))


def check_admissible(query: RelaxationQuery) -> float:
    residual = admissibility_residual(query)
    if residual > query.recovery.admissibility_tolerance:
        raise UsageError(f"v is not A-free: W^-1 residual {residual:.3g} exceeds "
                         f"{query.recovery.admissibility_tolerance:.3g}")
    return residual
