from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, List, Optional, Tuple

import logging
import numpy as np
import scipy.fft
import scipy.optimize
from pydantic import BaseModel

from app.core.errors import DivergedError
from app.services.afree import build_test_space, laminate_field, project_afree, project_spectrum, random_afree_field
from app.services.densities import EnergyDensity
from app.services.symbols import CoefficientField
from app.services.torus import PeriodicField, TorusGrid, resample
from .cell import cell_energy, cell_gradient, checked_energy
from .biconjugate import BiconjugateOracle
from .laminate import LaminateBound, laminate_search, wave_cone_spans
from .schema import EnvelopeOptions, EnvelopeQuery, EnvelopeResult, StartRecord

TIE_TOLERANCE = 1e-12


def _project_gradient(query: EnvelopeQuery, w: PeriodicField) -> PeriodicField:
    g = cell_gradient(query, w)
    if not np.all(np.isfinite(g)):
        raise DivergedError(f"Non-finite gradient for '{query.density.label}' at xi={query.xi.tolist()}")
    grid = query.space.grid
    spectrum = scipy.fft.fftn(g, axes=grid.axes, norm="forward")
    return PeriodicField.from_spectrum(grid, project_spectrum(query.space, spectrum))


def descend(query: EnvelopeQuery, w: PeriodicField, kind: str = "start") -> Tuple[PeriodicField, StartRecord]:
    """Projected gradient descent with Armijo backtracking from an A-free start."""
    opts = query.options
    energy = checked_energy(query, w, kind)
    step = 1.0
    converged = False
    iterations = 0
    while iterations < opts.max_iterations:
        if energy == 0.0:
            converged = True
            break
        direction = _project_gradient(query, w)
        slope = float(np.mean(direction.magnitude() ** 2))
        if slope < 1e-28:
            converged = True
            break
        accepted = False
        while step >= opts.min_step:
            trial = PeriodicField(w.grid, w.values - step * direction.values)
            trial_energy = cell_energy(query, trial)
            if np.isfinite(trial_energy) and trial_energy <= energy - opts.armijo_slope * step * slope:
                accepted = True
                break
            step *= opts.backtrack_factor
        iterations += 1
        if not accepted:
            # no representable descent left
            converged = True
            break
        decrease = energy - trial_energy
        previous = energy
        w, energy = trial, trial_energy
        step = min(2.0 * step, 1e6)
        if decrease <= opts.tolerance * abs(previous):
            converged = True
            break
    logging.debug(f"{kind} start at G={w.grid.G}: energy {energy:.6g} after {iterations} iterations")
    return w, StartRecord(G=w.grid.G, kind=kind, value=energy, iterations=iterations, converged=converged)


def _laminate_seed(query: EnvelopeQuery, candidate) -> PeriodicField:
    G = query.space.grid.G
    theta = min(max(round(candidate.theta * G) / G, 1.0 / G), 1.0 - 1.0 / G)
    base = laminate_field(query.space, candidate.lattice, candidate.amplitude, theta, "square")
    res = scipy.optimize.minimize_scalar(lambda s: cell_energy(query, base * s),
                                         bounds=(0.0, 2.0 * candidate.t + 1e-3), method="bounded",
                                         options={"xatol": 1e-10})
    scale = float(res.x) if cell_energy(query, base * res.x) < cell_energy(query, base * candidate.t) else candidate.t
    return base * scale


def _starts(query: EnvelopeQuery, warm: Optional[PeriodicField], bound: LaminateBound,
            rung: int) -> List[Tuple[str, Callable[[], PeriodicField]]]:
    opts = query.options
    space = query.space
    starts = []
    if warm is not None:
        starts.append(("warm", lambda: project_afree(space, resample(warm, space.grid.G))))
    starts.append(("zero", lambda: PeriodicField.zeros(space.grid, space.d)))
    seeds = [c for c in bound.lattice_candidates() if c.value < bound.f_value - TIE_TOLERANCE]
    for candidate in seeds[:opts.laminate_seeds]:
        starts.append(("laminate", lambda c=candidate: _laminate_seed(query, c)))
    for i in range(opts.random_starts):
        rng = np.random.default_rng([opts.seed, rung, i])
        starts.append(("random", lambda rng=rng: random_afree_field(space, rng, opts.random_scale)))
    return starts


def _solve_rung(query: EnvelopeQuery, warm, bound, rung: int):
    starts = _starts(query, warm, bound, rung)

    def run(start):
        kind, make = start
        return descend(query, make(), kind)

    best_w, best_value, records = None, np.inf, []
    if query.options.workers > 1:
        with ThreadPoolExecutor(max_workers=query.options.workers) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = (run(s) for s in starts)
    for w, record in outcomes:
        records.append(record)
        if record.value < best_value - TIE_TOLERANCE * max(1.0, abs(best_value)) or best_w is None:
            best_w, best_value = w, record.value
        if best_value == 0.0:
            # densities are non-negative
            break
    return best_w, best_value, records


def biconjugate_bound(query: EnvelopeQuery) -> Optional[float]:
    """Grid convex envelope of f(x0, u0, .) at xi, or None unless the wave cone spans R^d.

    The box is centred on xi so that xi is a grid node; it covers
    [-radius, radius]^d as well. Only d <= 2 is sampled.
    """
    opts = query.options
    d = query.space.d
    if opts.biconjugate_points < 3 or d > 2:
        return None
    if not wave_cone_spans(query.space.frozen, opts.direction_count):
        return None
    half = opts.biconjugate_points // 2
    reach = opts.biconjugate_radius + float(np.max(np.abs(query.xi)))
    offsets = np.arange(-half, half + 1) * (reach / half)
    axes = [c + offsets for c in query.xi]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    values = query.density.eval(np.asarray(query.x0), query.u0, mesh)
    if not np.all(np.isfinite(values)):
        return None
    return float(BiconjugateOracle(axes, values)(query.xi))


def minimize_cell(query: EnvelopeQuery) -> EnvelopeResult:
    opts = query.options
    bound = laminate_search(query)
    f_value = bound.f_value
    best_w, best_value = None, np.inf
    ladder_values, records = [], []
    warm = None
    for rung, G in enumerate(opts.ladder):
        rung_query = replace(query, space=query.space.at(G))
        w, value, rung_records = _solve_rung(rung_query, warm, bound, rung)
        ladder_values.append(value)
        records.extend(rung_records)
        if best_w is None or value <= best_value + TIE_TOLERANCE * max(1.0, abs(best_value)):
            best_w, best_value = w, min(value, best_value)
        warm = w
    if not any(r.converged for r in records):
        logging.info(f"Envelope solve for '{query.density.label}' at xi={query.xi.tolist()} hit the iteration cap")
    logging.info(f"Envelope of '{query.density.label}' at x0={list(query.x0)}, xi={query.xi.tolist()}: "
                 f"{best_value:.8g} (f = {f_value:.8g}, laminate {bound.value:.8g})")
    return EnvelopeResult(value=float(best_value), minimizer=best_w, f_value=f_value, ladder_values=ladder_values,
                          starts=records, laminate_bound=bound.value,
                          biconjugate_bound=biconjugate_bound(query))


def envelope_query(density: EnergyDensity, coeffs: CoefficientField, x0, u0, xi,
                   options: Optional[EnvelopeOptions] = None) -> EnvelopeQuery:
    options = options or EnvelopeOptions()
    space = build_test_space(coeffs, x0, TorusGrid(coeffs.N, options.ladder[-1]))
    return EnvelopeQuery(density=density, x0=tuple(space.x0), u0=u0, xi=xi, space=space, options=options)


class QuasiconvexityReport(BaseModel):
    label: str
    max_gap: float
    worst_xi: List[float]


def is_quasiconvex(density: EnergyDensity, coeffs: CoefficientField, x0, u0, samples,
                   options: Optional[EnvelopeOptions] = None) -> QuasiconvexityReport:
    """Largest f - Q_A f over sampled xi; zero (up to solver noise) when f is A-quasiconvex."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    gaps = []
    for xi in samples:
        result = minimize_cell(envelope_query(density, coeffs, x0, u0, xi, options))
        gaps.append(result.f_value - result.value)
    worst = int(np.argmax(gaps))
    return QuasiconvexityReport(label=density.label, max_gap=float(gaps[worst]), worst_xi=samples[worst].tolist())
