from typing import List, Optional, Sequence

import logging
import numpy as np
from pydantic import BaseModel

from app.services.pseudodiff import apply_A, loglog_slope
from app.services.torus import PeriodicField, wm1q_norm
from .query import RelaxationQuery
from .recovery import RecoveryField, frozen_coefficient_defect, glue_tiles, recovery_sequence, tile_centers
from .relaxed import CellSolver, RelaxedIntegral, relaxed_integral

DEFECT_FLOOR = 1e-13
MONOTONE_SLACK = 1e-6


class LadderEntry(BaseModel):
    r: float
    m: int
    G: int
    energy: float
    residual: float
    shell_measure: float


class SequenceTable(BaseModel):
    entries: List[LadderEntry]
    liminf: float
    final_r: float

    def energies(self, r: float) -> List[float]:
        return [e.energy for e in self.entries if e.r == r]

    def monotone_in_m(self, slack: float = MONOTONE_SLACK) -> bool:
        for r in sorted({e.r for e in self.entries}):
            energies = self.energies(r)
            if any(b > a + slack for a, b in zip(energies, energies[1:])):
                return False
        return True


class DefectEntry(BaseModel):
    r: float
    m: int
    defect: float


class TheoremGap(BaseModel):
    gap: float
    tolerance_lower: float
    tolerance_upper: float
    passed: bool


class RelaxationReport(BaseModel):
    density: str
    operator: str
    q: float
    rhs: RelaxedIntegral
    lhs: SequenceTable
    gap: TheoremGap
    lower_bound_passed: bool
    monotone_in_m: bool
    defects: List[DefectEntry]
    defect_slope: Optional[float] = None
    expected_exponent: float
    rate_passed: bool
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def sequence_energy(query: RelaxationQuery, ladder: Sequence[RecoveryField]) -> SequenceTable:
    """Energies int_D f(x, u, v + z) and W^{-1,q} residuals of A(v + z) along a recovery ladder."""
    entries = []
    for rf in ladder:
        grid = rf.field.grid
        u, v = query.u_on(grid), query.v_on(grid)
        total = v + rf.field.values
        values = query.density.eval(grid.points, u, total)
        energy = float(np.sum(values[query.in_domain(grid.points)]) * grid.cell_volume)
        residual = wm1q_norm(apply_A(query.coeffs, PeriodicField(grid, total)), query.q)
        entries.append(LadderEntry(r=rf.r, m=rf.m, G=grid.G, energy=energy, residual=residual,
                                   shell_measure=rf.shell_measure))
        logging.debug(f"Sequence energy at r={rf.r}, m={rf.m}: {energy:.8g} (residual {residual:.3g})")
    final_r = entries[-1].r
    liminf = min(e.energy for e in entries if e.r == final_r)
    return SequenceTable(entries=entries, liminf=liminf, final_r=final_r)


def recovery_ladder(query: RelaxationQuery, solver: CellSolver) -> List[RecoveryField]:
    """Glued recovery fields for every (r, m), cell problems solved at the tile centres."""
    opts = query.recovery
    ladder = []
    for r in opts.r_ladder:
        centers = tile_centers(query.N, r)
        results = solver.solve_many(centers, query.u_at(centers), query.v_at(centers))
        cells = [res.minimizer for res in results]
        for m in opts.m_ladder:
            ladder.append(glue_tiles(cells, r, m, opts.phi, opts.mu, opts.cell_points))
    return ladder


def defect_ladder(query: RelaxationQuery, solver: CellSolver) -> List[DefectEntry]:
    opts = query.recovery
    x0 = np.zeros(query.N) if opts.defect_point is None else np.asarray(opts.defect_point, dtype=float)
    point = x0[None, :]
    w = solver.solve(x0, query.u_at(point)[0], query.v_at(point)[0]).minimizer
    m = opts.m_ladder[-1]
    entries = []
    for r in opts.defect_r_ladder:
        z = recovery_sequence(w, x0, r, m, opts.phi, opts.mu, opts.cell_points).field
        entries.append(DefectEntry(r=r, m=m, defect=frozen_coefficient_defect(query.coeffs, z, x0, query.q)))
    return entries


def theorem_gap(query: RelaxationQuery) -> RelaxationReport:
    """Both sides of the relaxation formula at desk scale and the verdict on their gap."""
    opts = query.recovery
    solver = CellSolver(query)
    rhs = relaxed_integral(query, solver)
    lhs = sequence_energy(query, recovery_ladder(query, solver))

    gap = lhs.liminf - rhs.value
    upper = max(opts.tolerance_absolute, opts.tolerance_relative * abs(rhs.value))
    gap_report = TheoremGap(gap=gap, tolerance_lower=opts.tolerance_lower, tolerance_upper=upper,
                            passed=bool(-opts.tolerance_lower <= gap <= upper))
    lower_bound = all(e.energy >= rhs.value - opts.tolerance_lower for e in lhs.entries)

    defects = defect_ladder(query, solver)
    expected = query.N / query.q + 1.0
    slope = None
    if max(d.defect for d in defects) > DEFECT_FLOOR:
        slope = loglog_slope([d.r for d in defects], [d.defect for d in defects])
    rate_passed = slope is None or slope >= expected - opts.rate_slack

    verdict = "pass" if gap_report.passed and lower_bound and rate_passed else "fail"
    logging.info(f"Relaxation gap for '{query.density.label}' under '{query.coeffs.label}': {gap:.4g} "
                 f"(rhs {rhs.value:.6g}, liminf {lhs.liminf:.6g}, defect slope {slope}) -> {verdict}")
    return RelaxationReport(density=query.density.label, operator=query.coeffs.label, q=query.q, rhs=rhs, lhs=lhs,
                            gap=gap_report, lower_bound_passed=lower_bound, monotone_in_m=lhs.monotone_in_m(),
                            defects=defects, defect_slope=slope, expected_exponent=expected,
                            rate_passed=rate_passed, verdict=verdict)
