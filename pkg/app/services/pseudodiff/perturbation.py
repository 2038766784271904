from typing import List, Optional, Sequence, Union

import logging
import numpy as np
from pydantic import BaseModel

from app.core.errors import UsageError
from app.services.densities import EnergyDensity, growth_check
from app.services.torus import PeriodicField, lq_norm
from .decomposition import loglog_slope


class PerturbationReport(BaseModel):
    q: float
    ns: List[int]
    deltas: List[float]
    perturbation_norms: List[float]
    slope: Optional[float] = None
    exact_zero: bool


def perturbation_stability(densities: Union[EnergyDensity, Sequence[EnergyDensity]],
                           w: Sequence[PeriodicField], v: Sequence[PeriodicField], q: float,
                           ns: Optional[Sequence[int]] = None, u=None) -> PerturbationReport:
    """Delta_n = |mean f_n(y, u, w_n) - mean f_n(y, u, v_n + w_n)| over the cell."""
    if not len(w) == len(v) or not w:
        raise UsageError("Perturbation check needs equally many w_n and v_n")
    if isinstance(densities, EnergyDensity):
        densities = [densities] * len(w)
    if len(densities) != len(w):
        raise UsageError("One density per sequence member is required")
    ns = list(ns) if ns is not None else list(range(1, len(w) + 1))

    for f in {id(f): f for f in densities}.values():
        if f.growth[2] > q:
            raise UsageError(f"Density '{f.label}' grows like |xi|^{f.growth[2]:g}, faster than q={q:g}")
        check = growth_check(f, d=w[0].d, N=w[0].grid.N)
        if not check.passed:
            raise UsageError(f"Density '{f.label}' violates its growth bound (ratio {check.worst_ratio:.4g})")

    deltas = []
    for f, w_n, v_n in zip(densities, w, v):
        w_n.grid.check_same(v_n.grid)
        y = w_n.grid.points
        u_n = np.zeros(1) if u is None else np.asarray(u, dtype=float)
        base = np.mean(f.eval(y, u_n, w_n.values))
        perturbed = np.mean(f.eval(y, u_n, v_n.values + w_n.values))
        deltas.append(float(abs(base - perturbed)))

    exact_zero = all(delta == 0.0 for delta in deltas)
    report = PerturbationReport(q=q, ns=ns, deltas=deltas, perturbation_norms=[lq_norm(v_n, q) for v_n in v],
                                slope=None if exact_zero else loglog_slope(ns, deltas), exact_zero=exact_zero)
    logging.info(f"Perturbation differences {deltas} (slope {report.slope})")
    return report
