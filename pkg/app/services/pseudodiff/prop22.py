from typing import Callable, Dict, List, Optional, Sequence

import logging
import numpy as np
from pydantic import BaseModel

from app.services.symbols import CoefficientField
from app.services.torus import TorusGrid, lq_norm, lq_norm_on, wm1q_norm
from .cutoff import CutoffChi
from .ensembles import SPECTRAL_KINDS, band_limit, spectral_field
from .operators import PEtaOperator, apply_A_eta

INEQUALITIES = ("lq_bound", "wm1_bound", "reconstruction", "constraint")
RATIO_FLOOR = 1e-10
GROWTH_LIMIT = 2.0


class Prop22Row(BaseModel):
    G: int
    inequality: str
    max_ratio: float
    mean_ratio: float


class Prop22Table(BaseModel):
    operator: str
    eta: str
    q: float
    grids: List[int]
    ensemble_size: int
    rows: List[Prop22Row]
    growth: Dict[str, float]
    finite: bool
    verdict: str

    def max_ratio(self, inequality: str, G: int) -> float:
        return next(r.max_ratio for r in self.rows if r.inequality == inequality and r.G == G)


def _ratios(coeffs, eta, P: PEtaOperator, v, q: float, plateau) -> List[float]:
    Pv = P(v)
    v_lq = lq_norm(v, q)
    v_wm1 = wm1q_norm(v, q)
    A_v = apply_A_eta(coeffs, eta, v)
    A_Pv = apply_A_eta(coeffs, eta, Pv)
    return [
        lq_norm(Pv, q) / v_lq,
        wm1q_norm(Pv, q) / v_wm1,
        lq_norm_on(v - Pv, q, plateau) / (wm1q_norm(A_v, q) + v_wm1),
        wm1q_norm(A_Pv, q) / v_wm1,
    ]


def verify_prop22(coeffs: CoefficientField, eta: Callable, q: float, ensemble_size: int = 4,
                  grid_ladder: Sequence[int] = (8, 16, 32), eta_label: str = "eta",
                  kinds: Sequence[str] = SPECTRAL_KINDS, seed: int = 0,
                  chi: Optional[CutoffChi] = None) -> Prop22Table:
    """Empirical constants of the four approximate-projection bounds, per grid.

    Ensembles are band-limited to max|k_i| <= G/4 so products with the
    coefficient fields and eta stay resolved on the grid.
    """
    rows = []
    by_inequality = {name: [] for name in INEQUALITIES}
    for G in grid_ladder:
        grid = TorusGrid(coeffs.N, G)
        P = PEtaOperator(coeffs, eta, grid, chi)
        plateau = eta(grid.points) >= 1.0
        table = []
        for kind_index, kind in enumerate(kinds):
            for i in range(ensemble_size):
                rng = np.random.default_rng([seed, G, kind_index, i])
                v = band_limit(spectral_field(grid, coeffs.d, kind, rng))
                table.append(_ratios(coeffs, eta, P, v, q, plateau))
        table = np.asarray(table)
        for j, name in enumerate(INEQUALITIES):
            rows.append(Prop22Row(G=G, inequality=name, max_ratio=float(table[:, j].max()),
                                  mean_ratio=float(table[:, j].mean())))
            by_inequality[name].append(float(table[:, j].max()))
        logging.debug(f"Approximate projection ratios for '{coeffs.label}' at G={G}: {table.max(axis=0)}")

    growth = {name: max(values[-1], RATIO_FLOOR) / max(values[0], RATIO_FLOOR)
              for name, values in by_inequality.items()}
    finite = bool(all(np.isfinite(r.max_ratio) for r in rows))
    verdict = "pass" if finite and all(g < GROWTH_LIMIT for g in growth.values()) else "fail"
    logging.info(f"Approximate projection bounds for '{coeffs.label}', eta={eta_label}, q={q}: {verdict}")
    return Prop22Table(operator=coeffs.label, eta=eta_label, q=q, grids=list(grid_ladder),
                       ensemble_size=ensemble_size, rows=rows, growth=growth, finite=finite, verdict=verdict)
