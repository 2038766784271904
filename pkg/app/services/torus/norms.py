# norms and gauges on the discrete torus

import numpy as np
import scipy.fft

from app.core.errors import UsageError
from .field import PeriodicField
from .grid import TorusGrid


def _check_exponent(q: float):
    if not q > 1.0 or not np.isfinite(q):
        raise UsageError(f"Exponent must lie in (1, inf), got q={q}")


def lq_norm(v: PeriodicField, q: float) -> float:
    _check_exponent(q)
    return float(np.mean(v.magnitude() ** q) ** (1.0 / q))


def lq_norm_on(v: PeriodicField, q: float, mask) -> float:
    """L^q norm of v restricted to the cells where ``mask`` holds (cell volume G^-N)."""
    _check_exponent(q)
    mask = np.asarray(mask, dtype=bool)
    return float((np.sum(v.magnitude()[mask] ** q) * v.grid.cell_volume) ** (1.0 / q))


def spectrum_wm1q_norm(grid: TorusGrid, spectrum: np.ndarray, q: float) -> float:
    """Bessel-potential surrogate of the W^{-1,q} norm for a given spectrum."""
    _check_exponent(q)
    smoothed = spectrum * grid.bessel_multiplier[..., None]
    values = scipy.fft.ifftn(smoothed, axes=grid.axes, norm="forward").real
    return float(np.mean(np.linalg.norm(values, axis=-1) ** q) ** (1.0 / q))


def wm1q_norm(v: PeriodicField, q: float) -> float:
    return spectrum_wm1q_norm(v.grid, v.spectrum, q)


def zero_mean(v: PeriodicField) -> PeriodicField:
    spectrum = np.array(v.spectrum)
    spectrum[(0,) * v.grid.N] = 0.0
    out = PeriodicField.from_spectrum(v.grid, spectrum)
    # remove the rounding residue of the inverse transform
    return out - out.mean()


def field_mean(v: PeriodicField) -> np.ndarray:
    return v.mean()


def tail_function(v: PeriodicField, q: float, M: float) -> float:
    """Sum over cells with |v| > M of |v|^q times the cell volume."""
    if M < 0:
        raise UsageError(f"Truncation level must be non-negative, got M={M}")
    mag = v.magnitude()
    return float(np.sum(mag[mag > M] ** q) * v.grid.cell_volume)


def truncate(v: PeriodicField, M: float) -> PeriodicField:
    """Radial truncation T_M v = v min(1, M/|v|)."""
    if M < 0:
        raise UsageError(f"Truncation level must be non-negative, got M={M}")
    mag = v.magnitude()
    scale = np.where(mag > M, M / np.where(mag > 0.0, mag, 1.0), 1.0)
    return PeriodicField(v.grid, v.values * scale[..., None])


def spectral_energy(v: PeriodicField) -> float:
    """Sum of |v_hat(k)|^2; equals lq_norm(v, 2)^2 by Parseval."""
    return float(np.sum(np.abs(v.spectrum) ** 2))
