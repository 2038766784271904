from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from app.services.symbols import FrozenSymbol, deterministic_kernel_directions, kernel_basis
from .schema import EnvelopeQuery, LaminateCandidate

DEFAULT_AMPLITUDE_GRID = np.linspace(0.0, 3.0, 31)

LATTICE_DIRECTIONS = {
    1: [(1,)],
    2: [(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (1, -2), (2, 1), (2, -1)],
    3: [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)],
}


@dataclass
class LaminateBound:
    value: float
    f_value: float
    candidates: List[LaminateCandidate]

    def lattice_candidates(self) -> List[LaminateCandidate]:
        return [c for c in self.candidates if c.lattice is not None]


def laminate_directions(N: int, count: int) -> List[Tuple[np.ndarray, Optional[Tuple[int, ...]]]]:
    """Lattice directions first, then sphere samples (antipodes identified)."""
    out = []
    for n in LATTICE_DIRECTIONS[N]:
        v = np.asarray(n, dtype=float)
        out.append((v / np.linalg.norm(v), n))
    if N > 1:
        for lam in deterministic_kernel_directions(N, count):
            out.append((lam, None))
    return out


def _amplitude_vectors(K: np.ndarray) -> List[np.ndarray]:
    vectors = [K[:, i] for i in range(K.shape[1])]
    if K.shape[1] >= 2:
        for sign in (1.0, -1.0):
            v = K[:, 0] + sign * K[:, 1]
            vectors.append(v / np.linalg.norm(v))
    return vectors


def _two_point_value(query: EnvelopeQuery, a: np.ndarray, s1, s2, f_xi: float):
    x0 = np.asarray(query.x0)
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    fA = query.density.eval(x0, query.u0, query.xi + s1[..., None] * a)
    fB = query.density.eval(x0, query.u0, query.xi - s2[..., None] * a)
    total = s1 + s2
    with np.errstate(divide="ignore", invalid="ignore"):
        value = (s2 * fA + s1 * fB) / np.where(total > 0.0, total, 1.0)
    return np.where(total > 0.0, value, f_xi)


def wave_cone_spans(frozen: FrozenSymbol, count: int = 64) -> bool:
    """True when the kernels of A(x0, lam) over sampled lam span R^d."""
    vectors = [kernel_basis(frozen.matrix_eval(lam), frozen.r) for lam, _ in laminate_directions(frozen.coeffs.N, count)]
    stacked = np.concatenate(vectors, axis=1)
    if stacked.shape[1] == 0:
        return False
    return int(np.linalg.matrix_rank(stacked)) == frozen.coeffs.d


def laminate_search(query: EnvelopeQuery, direction_count: Optional[int] = None,
                    amplitude_grid: Optional[Sequence[float]] = None, refine: int = 8) -> LaminateBound:
    """Best first-order laminate theta f(xi + s1 a) + (1 - theta) f(xi - s2 a), theta = s2/(s1 + s2)."""
    direction_count = direction_count or query.options.direction_count
    s = np.asarray(DEFAULT_AMPLITUDE_GRID if amplitude_grid is None else amplitude_grid, dtype=float)
    f_xi = query.f_at_xi()
    frozen = query.space.frozen
    S1, S2 = np.meshgrid(s, s, indexing="ij")

    coarse = []
    for lam, lattice in laminate_directions(frozen.coeffs.N, direction_count):
        K = kernel_basis(frozen.matrix_eval(lam), frozen.r)
        for a in _amplitude_vectors(K):
            table = _two_point_value(query, a, S1, S2, f_xi)
            i, j = np.unravel_index(int(np.argmin(table)), table.shape)
            coarse.append((float(table[i, j]), lam, lattice, a, float(s[i]), float(s[j])))

    # stable: lattice directions win ties
    coarse.sort(key=lambda c: c[0])
    candidates = []
    upper = 2.0 * float(s.max()) if s.size else 1.0
    for rank, (value, lam, lattice, a, s1, s2) in enumerate(coarse):
        if rank < refine and s1 + s2 > 0.0 and value > 0.0:
            res = scipy.optimize.minimize(
                lambda p: float(_two_point_value(query, a, p[0], p[1], f_xi)),
                x0=np.array([s1, s2]), method="L-BFGS-B", bounds=[(0.0, upper), (0.0, upper)])
            if res.fun < value:
                value, s1, s2 = float(res.fun), float(res.x[0]), float(res.x[1])
        total = s1 + s2
        candidates.append(LaminateCandidate(
            direction=lam.tolist(), lattice=list(lattice) if lattice is not None else None,
            amplitude=a.tolist(), theta=s2 / total if total > 0.0 else 0.5, t=total, value=value))
    candidates.sort(key=lambda c: c.value)
    best = min([f_xi] + [c.value for c in candidates])
    return LaminateBound(value=best, f_value=f_xi, candidates=candidates)


def laminate_upper_bound(query: EnvelopeQuery, direction_count: Optional[int] = None,
                         amplitude_grid: Optional[Sequence[float]] = None) -> float:
    return laminate_search(query, direction_count, amplitude_grid).value
