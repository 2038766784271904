# discrete Legendre-Fenchel transforms on uniform grids (brute force, chunked)

from typing import List, Optional, Sequence, Union

import numpy as np

from app.core.errors import UsageError

CHUNK = 1024


def _axes(axes: Union[np.ndarray, Sequence[np.ndarray]], values: np.ndarray) -> List[np.ndarray]:
    if isinstance(axes, np.ndarray) and axes.ndim == 1:
        axes = [axes]
    axes = [np.asarray(a, dtype=float) for a in axes]
    if tuple(len(a) for a in axes) != values.shape:
        raise UsageError(f"Grid axes {[len(a) for a in axes]} do not match values of shape {values.shape}")
    for a in axes:
        if len(a) < 3:
            raise UsageError(f"Biconjugate needs at least 3 points per axis, got {len(a)}")
        steps = np.diff(a)
        if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise UsageError("Biconjugate needs a uniform increasing grid")
    return axes


def _conjugate(points: np.ndarray, values: np.ndarray, slopes: np.ndarray) -> np.ndarray:
    """g*(s) = max_p (s.p - g(p)) for every slope s."""
    out = np.empty(slopes.shape[0])
    for start in range(0, slopes.shape[0], CHUNK):
        block = slopes[start:start + CHUNK] @ points.T - values[None, :]
        out[start:start + CHUNK] = block.max(axis=1)
    return out


def slope_grid(axes: List[np.ndarray], values: np.ndarray, slope_count: Optional[int] = None) -> np.ndarray:
    """Uniform slopes spanning the range of discrete partial derivatives, one block per axis."""
    lines = []
    for i, a in enumerate(axes):
        diffs = np.diff(values, axis=i) / (a[1] - a[0])
        n = slope_count or (4 * len(a) + 1 if len(axes) == 1 else 2 * len(a) + 1)
        lines.append(np.linspace(diffs.min(), diffs.max(), n))
    mesh = np.meshgrid(*lines, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


class BiconjugateOracle:
    """Evaluates the convex envelope of grid samples as a max of affine minorants."""

    def __init__(self, axes, values, slope_count: Optional[int] = None):
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise UsageError("Biconjugate needs finite samples")
        self.axes = _axes(axes, values)
        self.shape = values.shape
        mesh = np.meshgrid(*self.axes, indexing="ij")
        self.points = np.stack([m.ravel() for m in mesh], axis=-1)
        self.slopes = slope_grid(self.axes, values, slope_count)
        self.conjugate = _conjugate(self.points, values.ravel(), self.slopes)

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        flat = xi.reshape(-1, len(self.axes))
        return _conjugate(self.slopes, self.conjugate, flat).reshape(xi.shape[:-1] if xi.ndim > 1 else ())

    def on_grid(self) -> np.ndarray:
        return _conjugate(self.slopes, self.conjugate, self.points).reshape(self.shape)


def convex_biconjugate(axes, values, slope_count: Optional[int] = None) -> np.ndarray:
    """Discrete Legendre-Fenchel transform applied twice; returns the envelope on the same grid."""
    return BiconjugateOracle(axes, values, slope_count).on_grid()
