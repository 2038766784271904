# built-in coefficient fields, addressable by label

from typing import List, Optional

import numpy as np

from app.core.errors import ConfigurationError
from app.core.labels import split_label
from .coefficients import CoefficientField, constant_field

DEFAULT_SCALED_AMPLITUDE = 0.5


def div2d() -> CoefficientField:
    return constant_field([[[1.0, 0.0]], [[0.0, 1.0]]], label="div2d")


def scalar_curl2d() -> CoefficientField:
    # symbol [-lam2, lam1]
    return constant_field([[[0.0, 1.0]], [[-1.0, 0.0]]], label="scalar-curl2d")


def cauchy_riemann2d() -> CoefficientField:
    return constant_field([[[1.0, 0.0], [0.0, 1.0]], [[0.0, -1.0], [1.0, 0.0]]], label="cauchy-riemann2d")


def div1d() -> CoefficientField:
    return constant_field([[[1.0]]], label="div1d")


def diag_nonconstant_rank() -> CoefficientField:
    return constant_field([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]], label="diag-nonconstant-rank")


def scaled_div_coefficient(x, amplitude: float = DEFAULT_SCALED_AMPLITUDE) -> np.ndarray:
    """a(x) = 1 + amplitude * sin(2 pi x_1)."""
    x = np.asarray(x, dtype=float)
    return 1.0 + amplitude * np.sin(2.0 * np.pi * x[..., 0])


def scaled_div2d(amplitude: float = DEFAULT_SCALED_AMPLITUDE, profile=None) -> CoefficientField:
    """A^1 = [a(x) 0], A^2 = [0 1].

    ``profile`` replaces a(x) when given; it must map (..., 2) points to
    values bounded away from zero.
    """
    if not 0.0 <= amplitude < 1.0:
        raise ConfigurationError(f"scaled-div2d amplitude must lie in [0, 1), got {amplitude}")
    a = profile if profile is not None else (lambda x: scaled_div_coefficient(x, amplitude))

    def coeff_eval(x):
        out = np.zeros(x.shape[:-1] + (2, 1, 2))
        out[..., 0, 0, 0] = a(x)
        out[..., 1, 0, 1] = 1.0
        return out

    label = "scaled-div2d" if profile is None else "scaled-div2d(custom)"
    return CoefficientField(N=2, d=2, l=1, coeff_eval=coeff_eval,
                            lipschitz_bound=2.0 * np.pi * amplitude, label=label)


_CATALOG = {
    "div2d": div2d,
    "scalar-curl2d": scalar_curl2d,
    "scaled-div2d": scaled_div2d,
    "cauchy-riemann2d": cauchy_riemann2d,
    "div1d": div1d,
    "diag-nonconstant-rank": diag_nonconstant_rank,
}

OPERATOR_LABELS: List[str] = sorted(_CATALOG)


def resolve_operator(label: str, params: Optional[List[float]] = None) -> CoefficientField:
    name, inline = split_label(label)
    params = list(params or []) or inline
    if name not in _CATALOG:
        raise ConfigurationError(f"Unknown operator '{name}' (known: {', '.join(OPERATOR_LABELS)})")
    if name == "scaled-div2d":
        return scaled_div2d(*params[:1])
    if params:
        raise ConfigurationError(f"Operator '{name}' takes no parameters")
    return _CATALOG[name]()
