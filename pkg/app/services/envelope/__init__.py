from .schema import (EnvelopeOptions, EnvelopeQuery, EnvelopeResult, EnvelopeSummary, LaminateCandidate,
                     StartRecord)
from .cell import cell_energy, cell_gradient
from .laminate import LaminateBound, laminate_search, laminate_upper_bound, wave_cone_spans
from .biconjugate import BiconjugateOracle, convex_biconjugate
from .solver import QuasiconvexityReport, biconjugate_bound, descend, envelope_query, is_quasiconvex, minimize_cell


def envelope_handler(density, coeffs, x0, u0, xi, options=None) -> EnvelopeResult:
    return minimize_cell(envelope_query(density, coeffs, x0, u0, xi, options))
