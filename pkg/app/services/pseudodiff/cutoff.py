# cutoffs: chi on frequencies, eta on space

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from app.core.errors import ConfigurationError


def smoothstep(t) -> np.ndarray:
    """Quintic 6t^5 - 15t^4 + 10t^3 clamped to [0, 1]; C2 at both seams."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


@dataclass(frozen=True)
class CutoffChi:
    """chi(|k|) = 0 below k_ref, 1 above 2 k_ref, quintic in between."""
    k_ref: float = 1.0

    def __call__(self, magnitude) -> np.ndarray:
        return smoothstep(np.asarray(magnitude, dtype=float) / self.k_ref - 1.0)


def eta_one(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.ones(x.shape[:-1])


def eta_bump(x, inner: float = 0.25, outer: float = 0.45) -> np.ndarray:
    """Radial C2 bump: 1 for |x| < inner, 0 for |x| > outer."""
    r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
    return 1.0 - smoothstep((r - inner) / (outer - inner))


ETA_CATALOG: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": eta_one,
    "bump": eta_bump,
}


def resolve_eta(label: str) -> Callable[[np.ndarray], np.ndarray]:
    if label not in ETA_CATALOG:
        raise ConfigurationError(f"Unknown cutoff eta '{label}' (known: {', '.join(sorted(ETA_CATALOG))})")
    return ETA_CATALOG[label]
