import dataclasses
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import logging
import numpy as np
from pydantic import BaseModel

from app.core.errors import ResolutionError, UsageError
from app.services.pseudodiff import CutoffChi, apply_A, apply_P_eta, smoothstep
from app.services.symbols import CoefficientField
from app.services.torus import PeriodicField, TorusGrid, evaluate_at, lq_norm, spectral_derivative, wm1q_norm
from .query import PHI_KINDS, ambient_grid, quadrature_rule, grid_indices

MIN_SAMPLES_PER_PERIOD = 4


@dataclass
class RecoveryField:
    """z^r_m on the ambient torus together with what the cutoff achieved."""
    field: PeriodicField
    r: float
    m: int
    phi: str
    transition: float
    shell_measure: float
    centers: List[List[float]] = dataclasses.field(default_factory=list)


def transition_depth(grid: TorusGrid, r: float, mu: float) -> float:
    """Largest whole number of cells keeping L^N(Q \\ {phi = 1}) below mu r^N."""
    if not 0.0 < mu < 1.0:
        raise UsageError(f"Shell fraction mu must lie in (0, 1), got {mu}")
    depth = 0.5 * r * (1.0 - (1.0 - mu) ** (1.0 / grid.N))
    cells = np.floor(depth * grid.G + 1e-9)
    if cells < 1:
        raise ResolutionError(f"Cutoff shell of depth {depth:.3g} is thinner than one cell (h = {1.0 / grid.G:.3g}); "
                              f"refine the grid or raise mu")
    return float(cells / grid.G)


def _check_resolution(cell_points: int, m: int):
    if m < 1:
        raise UsageError(f"Oscillation count m must be positive, got {m}")
    if cell_points < MIN_SAMPLES_PER_PERIOD * m:
        raise ResolutionError(f"{cell_points} points per cube side cannot resolve {m} oscillations "
                              f"(need {MIN_SAMPLES_PER_PERIOD} per period)")


def _check_mean_zero(w: PeriodicField):
    scale = 1.0 + float(np.max(np.abs(w.values)))
    if np.max(np.abs(w.mean())) > 1e-10 * scale:
        raise UsageError(f"Cell field must have zero mean, got {w.mean().tolist()}")


def _blow_up(w: PeriodicField, grid: TorusGrid, x0, r: float, m: int, reach: float):
    """w(m s / r) with s = x - x0 wrapped, on the window |s_i| < reach; zero elsewhere."""
    x0 = np.asarray(x0, dtype=float).reshape(1, grid.N)
    G_w = w.grid.G
    stride = m * G_w / (r * grid.G)
    i0 = grid_indices(grid, x0)
    index = np.stack(np.meshgrid(*([np.arange(grid.G)] * grid.N), indexing="ij"), axis=-1)
    if i0 is not None:
        offsets = np.mod(index - i0[0] + grid.G // 2, grid.G) - grid.G // 2
        s = offsets / grid.G
    else:
        offsets = None
        s = np.mod(grid.points - x0[0] + 0.5, 1.0) - 0.5
    mask = np.all((s >= -reach - 1e-12) & (s < reach - 1e-12), axis=-1)

    values = np.zeros(grid.shape + (w.d,))
    if offsets is not None and abs(stride - round(stride)) < 1e-9:
        j = np.mod(offsets[mask] * int(round(stride)) + G_w // 2, G_w)
        values[mask] = w.values[tuple(j.T)]
    else:
        values[mask] = evaluate_at(w, m * s[mask] / r)
    return values, s, mask


def recovery_sequence(w: PeriodicField, x0, r: float, m: int, phi: str = "plateau", mu: float = 0.05,
                      cell_points: Optional[int] = None) -> RecoveryField:
    """z^r_m(x) = phi(x) w(m (x - x0) / r) on the torus with ``cell_points`` samples per side of Q(x0, r)."""
    if phi not in PHI_KINDS:
        raise UsageError(f"Unknown cutoff kind '{phi}' (known: {', '.join(PHI_KINDS)})")
    _check_mean_zero(w)
    cell_points = cell_points or w.grid.G
    _check_resolution(cell_points, m)
    grid = ambient_grid(w.grid.N, r, cell_points)
    values, s, mask = _blow_up(w, grid, x0, r, m, 0.5 * r)
    if phi == "full":
        weight = mask.astype(float)
        depth = 0.0
    else:
        depth = transition_depth(grid, r, mu)
        profile = 1.0 - smoothstep((np.abs(s) - (0.5 * r - depth)) / depth)
        weight = np.where(mask, np.prod(profile, axis=-1), 0.0)
    shell = float(np.count_nonzero(mask & (weight < 1.0)) * grid.cell_volume)
    logging.debug(f"Recovery field at x0={np.asarray(x0).tolist()}, r={r}, m={m}: shell measure {shell:.4g}")
    return RecoveryField(field=PeriodicField(grid, values * weight[..., None]), r=r, m=m, phi=phi,
                         transition=depth, shell_measure=shell, centers=[np.asarray(x0, dtype=float).tolist()])


def tile_centers(N: int, r: float) -> np.ndarray:
    n = 1.0 / r
    if abs(n - round(n)) > 1e-9:
        raise ResolutionError(f"Cubes of side r={r} do not tile the torus")
    return quadrature_rule(N, int(round(n)))[0]


def glue_tiles(cells: Sequence[PeriodicField], r: float, m: int, phi: str = "full", mu: float = 0.05,
               cell_points: Optional[int] = None) -> RecoveryField:
    """Sum over tiles of phi_t(x) w_t(m (x - x_t) / r), the phi_t forming a partition of unity.

    ``cells`` lists one cell field per tile centre, in the order of
    ``tile_centers``. With ``full`` the phi_t are the tile indicators; with
    ``plateau`` they are tensor quintic ramps overlapping by one transition
    depth on either side of every tile face.
    """
    if phi not in PHI_KINDS:
        raise UsageError(f"Unknown cutoff kind '{phi}' (known: {', '.join(PHI_KINDS)})")
    N = cells[0].grid.N
    centers = tile_centers(N, r)
    if len(cells) != len(centers):
        raise UsageError(f"Expected {len(centers)} tile fields, got {len(cells)}")
    cell_points = cell_points or cells[0].grid.G
    _check_resolution(cell_points, m)
    grid = ambient_grid(N, r, cell_points)
    if phi == "plateau":
        if len(centers) < 2 ** N:
            raise UsageError("A plateau partition of unity needs at least two tiles per axis")
        depth = transition_depth(grid, r, mu)
        reach = 0.5 * r + depth
    else:
        depth = 0.0
        reach = 0.5 * r

    total = np.zeros(grid.shape + (cells[0].d,))
    partial = np.zeros(grid.shape, dtype=bool)
    for center, w in zip(centers, cells):
        _check_mean_zero(w)
        values, s, mask = _blow_up(w, grid, center, r, m, reach)
        if phi == "full":
            weight = mask.astype(float)
        else:
            profile = 1.0 - smoothstep((np.abs(s) - (0.5 * r - depth)) / (2.0 * depth))
            weight = np.where(mask, np.prod(profile, axis=-1), 0.0)
        partial |= (weight > 0.0) & (weight < 1.0)
        total += values * weight[..., None]
    shell = float(np.count_nonzero(partial) * grid.cell_volume)
    return RecoveryField(field=PeriodicField(grid, total), r=r, m=m, phi=phi, transition=depth,
                         shell_measure=shell, centers=centers.tolist())


def frozen_coefficient_defect(coeffs: CoefficientField, z: PeriodicField, x0, q: float) -> float:
    """W^{-1,q} norm of sum_i d_i((A^i(x) - A^i(x0)) z)."""
    grid = z.grid
    A = coeffs.evaluate_many(grid.points) - coeffs.evaluate(np.asarray(x0, dtype=float))
    g = np.einsum("...ild,...d->...il", A, z.values)
    out = PeriodicField.zeros(grid, coeffs.l)
    for i in range(coeffs.N):
        out = out + spectral_derivative(PeriodicField(grid, g[..., i, :]), i)
    return wm1q_norm(out, q)


class ProjectionReport(BaseModel):
    r: float
    q: float
    distance: float
    residual_before: float
    residual_after: float


def project_recovery(coeffs: CoefficientField, z: PeriodicField, r: float, q: float,
                     eta: Optional[Callable] = None, chi: Optional[CutoffChi] = None
                     ) -> Tuple[PeriodicField, ProjectionReport]:
    """v = P_eta z and the scaled distance r^(-N/q) |v - z|_q."""
    v = apply_P_eta(coeffs, eta, z, chi)
    report = ProjectionReport(r=r, q=q,
                              distance=r ** (-z.grid.N / q) * lq_norm(v - z, q),
                              residual_before=wm1q_norm(apply_A(coeffs, z), q),
                              residual_after=wm1q_norm(apply_A(coeffs, v), q))
    return v, report
