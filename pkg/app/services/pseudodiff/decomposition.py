from typing import Callable, List, Optional, Sequence, Tuple

import logging
import numpy as np
from pydantic import BaseModel, Field

from app.core.errors import UsageError
from app.services.symbols import CoefficientField
from app.services.torus import PeriodicField, lq_norm, tail_function, truncate, wm1q_norm
from .cutoff import CutoffChi, eta_one
from .operators import PEtaOperator, apply_A


class DecompositionOptions(BaseModel):
    quantile: float = 0.5
    scale: float = 1.5
    growth: float = 0.1
    m_factors: List[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0, 32.0])
    s: Optional[float] = None


class MemberReport(BaseModel):
    n: int
    level: float
    input_tails: List[float]
    output_tails: List[float]
    distance_s: float
    distance_q: float
    input_residual: float
    truncation_residual: float
    output_residual: float
    mean_error: float


class DecompositionReport(BaseModel):
    q: float
    s: float
    median: float
    m_ladder: List[float]
    members: List[MemberReport]
    sup_input_tails: List[float]
    sup_output_tails: List[float]
    distance_slope: Optional[float] = None
    max_mean_error: float

    def tail_ratio(self, factor_index: int) -> float:
        out = self.sup_output_tails[factor_index]
        inp = self.sup_input_tails[factor_index]
        return out / inp if inp > 0.0 else 0.0


def truncation_level(v: PeriodicField, n: int, options: DecompositionOptions) -> float:
    """M_n = scale * quantile(|v_n|) * n^growth."""
    return float(options.scale * np.quantile(v.magnitude(), options.quantile) * n ** options.growth)


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> Optional[float]:
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0.0
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(ns[keep]), np.log(values[keep]), 1)[0])


def decompose_equiintegrable(coeffs: CoefficientField, ensemble: Sequence[PeriodicField], q: float,
                             mean_target, ns: Optional[Sequence[int]] = None, eta: Optional[Callable] = None,
                             options: Optional[DecompositionOptions] = None,
                             chi: Optional[CutoffChi] = None) -> Tuple[List[PeriodicField], DecompositionReport]:
    """Truncate, re-project with P_eta and restore the mean.

    v~_n = v_n - P_eta(v_n - T_{M_n} v_n) - mean + mean_target, so members with
    |v_n| <= M_n pass through unchanged up to the mean shift.
    """
    options = options or DecompositionOptions()
    if not ensemble:
        raise UsageError("Decomposition needs a non-empty ensemble")
    ns = list(ns) if ns is not None else list(range(1, len(ensemble) + 1))
    if len(ns) != len(ensemble):
        raise UsageError("One index n per ensemble member is required")
    s = options.s if options.s is not None else q / 2.0 + 0.5
    eta = eta or eta_one
    mean_target = np.broadcast_to(np.asarray(mean_target, dtype=float), (coeffs.d,))

    median = float(np.median(np.concatenate([v.magnitude().ravel() for v in ensemble])))
    m_ladder = [f * median for f in options.m_factors]
    projector = None
    outputs, members = [], []
    for n, v in zip(ns, ensemble):
        if projector is None or projector.op.grid != v.grid:
            projector = PEtaOperator(coeffs, eta, v.grid, chi)
        level = truncation_level(v, n, options)
        truncated = truncate(v, level)
        excess = v - truncated
        out = v - projector(excess) if np.any(excess.values) else v
        out = out - out.mean() + mean_target
        outputs.append(out)
        members.append(MemberReport(
            n=n, level=level,
            input_tails=[tail_function(v, q, M) for M in m_ladder],
            output_tails=[tail_function(out, q, M) for M in m_ladder],
            distance_s=lq_norm(out - v, s), distance_q=lq_norm(out - v, q),
            input_residual=wm1q_norm(apply_A(coeffs, v), q),
            truncation_residual=wm1q_norm(apply_A(coeffs, truncated), q),
            output_residual=wm1q_norm(apply_A(coeffs, out), q),
            mean_error=float(np.max(np.abs(out.mean() - mean_target)))))

    report = DecompositionReport(
        q=q, s=s, median=median, m_ladder=m_ladder, members=members,
        sup_input_tails=[max(m.input_tails[i] for m in members) for i in range(len(m_ladder))],
        sup_output_tails=[max(m.output_tails[i] for m in members) for i in range(len(m_ladder))],
        distance_slope=loglog_slope(ns, [m.distance_s for m in members]),
        max_mean_error=max(m.mean_error for m in members))
    logging.info(f"Decomposed {len(ensemble)} fields for '{coeffs.label}', q={q}: "
                 f"output tails {report.sup_output_tails}")
    return outputs, report
