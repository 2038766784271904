# field sources for the relax command: catalog labels or field files

from pathlib import Path
from typing import List

import numpy as np

from app.core.errors import ConfigurationError
from app.core.labels import split_label
from app.services.torus import read_field
from .query import FieldSource

FIELD_LABELS: List[str] = ["constant", "cosine", "layers", "zero"]


def layers(c: float, d: int):
    """c e_1 on {x_N < 0}, -c e_1 on {x_N >= 0}."""
    def source(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (d,))
        out[..., 0] = np.where(x[..., -1] < 0.0, c, -c)
        return out
    return source


def cosine(c: float, dim: int):
    def source(x):
        x = np.asarray(x, dtype=float)
        return np.repeat((c * np.cos(2.0 * np.pi * x[..., 0]))[..., None], dim, axis=-1)
    return source


def resolve_field_source(label: str, dim: int) -> FieldSource:
    """Resolve a catalog label or a path to a .csv/.bin field file; ``dim`` is the value dimension."""
    if label.endswith((".csv", ".bin")) or "/" in label:
        path = Path(label)
        if not path.exists():
            raise ConfigurationError(f"Field file '{label}' does not exist")
        return read_field(path)
    name, params = split_label(label)
    if name == "zero" and not params:
        return lambda x: np.zeros(np.asarray(x).shape[:-1] + (dim,))
    elif name == "constant":
        values = np.asarray(params or [0.0], dtype=float)
        if values.size == 1:
            values = np.full(dim, values[0])
        if values.shape != (dim,):
            raise ConfigurationError(f"constant field needs 1 or {dim} values, got {len(params)}")
        return lambda x: np.broadcast_to(values, np.asarray(x).shape[:-1] + (dim,)).copy()
    elif name == "layers" and len(params) <= 1:
        return layers(params[0] if params else 0.5, dim)
    elif name == "cosine" and len(params) <= 1:
        return cosine(params[0] if params else 1.0, dim)
    elif name in FIELD_LABELS:
        raise ConfigurationError(f"Field '{name}' got too many parameters: {params}")
    raise ConfigurationError(f"Unknown field '{name}' (known: {', '.join(FIELD_LABELS)}, or a field file)")
