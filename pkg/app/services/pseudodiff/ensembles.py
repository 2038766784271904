# random and structured field ensembles on the torus

from typing import List, Sequence

import numpy as np
import scipy.fft

from app.core.errors import UsageError
from app.services.afree import AFreeTestSpace, laminate_field, project_afree
from app.services.symbols import kernel_basis
from app.services.torus import PeriodicField, TorusGrid

SPECTRAL_KINDS = ("white", "pink", "concentrated")
ENSEMBLE_LABELS = ("concentration", "oscillation")
BUMP_WIDTH = 0.08


def spectral_field(grid: TorusGrid, d: int, kind: str, rng: np.random.Generator) -> PeriodicField:
    """Random field with a prescribed spectrum shape, normalised to unit L^2 norm."""
    if kind == "white":
        values = rng.standard_normal(grid.shape + (d,))
    elif kind == "pink":
        noise = scipy.fft.fftn(rng.standard_normal(grid.shape + (d,)), axes=grid.axes, norm="forward")
        weight = 1.0 / np.maximum(grid.magnitudes, 1.0)
        values = scipy.fft.ifftn(noise * weight[..., None], axes=grid.axes, norm="forward").real
    elif kind == "concentrated":
        center = rng.uniform(-0.5, 0.5, size=grid.N)
        offset = np.mod(grid.points - center + 0.5, 1.0) - 0.5
        bump = np.exp(-np.sum(offset ** 2, axis=-1) / (2.0 * BUMP_WIDTH ** 2))
        direction = rng.standard_normal(d)
        values = bump[..., None] * (direction / np.linalg.norm(direction))
    else:
        raise UsageError(f"Unknown ensemble kind '{kind}'")
    norm = np.sqrt(np.mean(np.sum(values ** 2, axis=-1)))
    return PeriodicField(grid, values / norm)


def concentration_ensemble(space: AFreeTestSpace, ns: Sequence[int], q: float, amplitude=None,
                           background: float = 0.25) -> List[PeriodicField]:
    """v_n = b + Pi(n^{N/q} 1_{B(0,1/n)} a): a bounded laminate background plus a projected bump."""
    grid = space.grid
    a = np.zeros(space.d) if amplitude is None else np.asarray(amplitude, dtype=float)
    if amplitude is None:
        a[0] = 1.0
    base = laminate_field(space, _background_direction(space), _background_amplitude(space), 0.5, "square",
                          scale=2.0 * background) if background else PeriodicField.zeros(grid, space.d)
    radius = np.linalg.norm(grid.points, axis=-1)
    out = []
    for n in ns:
        spike = (radius < 1.0 / n).astype(float) * n ** (grid.N / q)
        out.append(base + project_afree(space, PeriodicField(grid, spike[..., None] * a)))
    return out


def oscillation_ensemble(space: AFreeTestSpace, ns: Sequence[int], scale: float = 1.0) -> List[PeriodicField]:
    """Sine laminates along the first lattice axis at frequency n."""
    direction = _background_direction(space)
    a = _background_amplitude(space)
    return [laminate_field(space, [n * c for c in direction], a, profile="sine", scale=scale) for n in ns]


def _background_direction(space: AFreeTestSpace):
    # laminate along the last axis
    n = [0] * space.grid.N
    n[-1] = 1
    return n


def _background_amplitude(space: AFreeTestSpace) -> np.ndarray:
    lam = np.zeros(space.grid.N)
    lam[-1] = 1.0
    K = kernel_basis(space.frozen.matrix_eval(lam), space.frozen.r)
    if K.shape[1] == 0:
        raise UsageError(f"Operator '{space.frozen.coeffs.label}' admits no laminates")
    return K[:, 0]


def band_limit(v: PeriodicField, fraction: float = 0.25) -> PeriodicField:
    """Keep frequencies with max_i |k_i| <= fraction * G."""
    keep = np.max(np.abs(v.grid.wavevectors), axis=-1) <= fraction * v.grid.G
    return PeriodicField.from_spectrum(v.grid, v.spectrum * keep[..., None])
