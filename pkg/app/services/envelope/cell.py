import numpy as np

from app.core.errors import DivergedError
from app.services.torus import PeriodicField
from .schema import EnvelopeQuery


def cell_energy(query: EnvelopeQuery, w: PeriodicField) -> float:
    """Cell average of f(x0, u0, xi + w(y))."""
    return float(np.mean(query.density.eval(np.asarray(query.x0), query.u0, query.xi + w.values)))


def cell_gradient(query: EnvelopeQuery, w: PeriodicField) -> np.ndarray:
    """L^2(Q) gradient of the cell energy: grad_xi f(x0, u0, xi + w(y)) pointwise."""
    return query.density.grad_xi(np.asarray(query.x0), query.u0, query.xi + w.values)


def checked_energy(query: EnvelopeQuery, w: PeriodicField, context: str) -> float:
    value = cell_energy(query, w)
    if not np.isfinite(value):
        raise DivergedError(f"Non-finite cell energy ({context}) for '{query.density.label}' at xi={query.xi.tolist()}")
    return value
