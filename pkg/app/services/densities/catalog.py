from typing import List, Optional

from app.core.errors import ConfigurationError
from app.core.labels import split_label
from .density import Coupled, DoubleWell, EnergyDensity, PNorm, Quadratic

DENSITY_LABELS: List[str] = ["coupled", "dwell", "pnorm", "quad"]


def resolve_density(label: str, params: Optional[List[float]] = None) -> EnergyDensity:
    name, inline = split_label(label)
    params = list(params or []) or inline
    if name == "quad" and not params:
        return Quadratic()
    elif name == "dwell" and not params:
        return DoubleWell()
    elif name == "coupled" and not params:
        return Coupled()
    elif name == "pnorm":
        q = params[0] if params else 4.0
        if not q >= 1.0:
            raise ConfigurationError(f"pnorm exponent must be at least 1, got {q}")
        return PNorm(q)
    elif name in DENSITY_LABELS:
        raise ConfigurationError(f"Density '{name}' takes no parameters")
    else:
        raise ConfigurationError(f"Unknown density '{name}' (known: {', '.join(DENSITY_LABELS)})")
