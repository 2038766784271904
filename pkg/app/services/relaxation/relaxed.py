from concurrent.futures import ThreadPoolExecutor
from threading import Lock
from typing import Dict, List, Optional, Tuple

import logging
import numpy as np
from pydantic import BaseModel

from app.services.envelope import EnvelopeResult, envelope_query, minimize_cell
from .query import RelaxationQuery, check_admissible, quadrature_rule


class PointEnvelope(BaseModel):
    x: List[float]
    u: List[float]
    xi: List[float]
    weight: float
    value: float
    f_value: float
    converged: bool


class RelaxedIntegral(BaseModel):
    value: float
    points: List[PointEnvelope]
    admissibility_residual: float


class CellSolver:
    """Envelope solves at frozen points, memoised on (x, u, xi)."""

    def __init__(self, query: RelaxationQuery):
        self.query = query
        self._results: Dict[Tuple, EnvelopeResult] = {}
        self._lock = Lock()

    def solve(self, x, u, xi) -> EnvelopeResult:
        x, u, xi = (np.asarray(a, dtype=float).ravel() for a in (x, u, xi))
        key = (tuple(x.tolist()), tuple(u.tolist()), tuple(xi.tolist()))
        with self._lock:
            hit = self._results.get(key)
        if hit is not None:
            return hit
        q = self.query
        result = minimize_cell(envelope_query(q.density, q.coeffs, x, u, xi, q.envelope))
        with self._lock:
            self._results.setdefault(key, result)
        return result

    def solve_many(self, xs, us, xis) -> List[EnvelopeResult]:
        jobs = list(zip(xs, us, xis))
        if self.query.recovery.workers > 1:
            with ThreadPoolExecutor(max_workers=self.query.recovery.workers) as pool:
                return list(pool.map(lambda job: self.solve(*job), jobs))
        return [self.solve(*job) for job in jobs]


def relaxed_integral(query: RelaxationQuery, solver: Optional[CellSolver] = None) -> RelaxedIntegral:
    """Quadrature of x -> Q_{A(x)} f(x, u(x), v(x)) over the domain."""
    residual = check_admissible(query)
    solver = solver or CellSolver(query)
    points, weights = quadrature_rule(query.N, query.recovery.quadrature_points)
    keep = query.in_domain(points)
    points, weights = points[keep], weights[keep]
    us, vs = query.u_at(points), query.v_at(points)

    results = solver.solve_many(points, us, vs)
    rows = [PointEnvelope(x=x.tolist(), u=u.tolist(), xi=xi.tolist(), weight=float(w), value=res.value,
                          f_value=res.f_value, converged=res.converged)
            for x, u, xi, w, res in zip(points, us, vs, weights, results)]
    value = float(sum(row.weight * row.value for row in rows))
    logging.info(f"Relaxed integral of '{query.density.label}' under '{query.coeffs.label}' "
                 f"over {len(rows)} points: {value:.8g}")
    return RelaxedIntegral(value=value, points=rows, admissibility_residual=residual)
