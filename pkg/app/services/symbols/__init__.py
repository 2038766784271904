from .coefficients import CoefficientField, LipschitzEstimate, constant_field
from .symbol import FrozenSymbol, assemble_symbol, assemble_symbols, symbol_table
from .rank import (RankCertificate, RankWitness, numerical_rank, numerical_ranks, rank_gaps,
                   deterministic_directions, deterministic_kernel_directions, random_directions, sample_directions,
                   verify_constant_rank, DEFAULT_GAP_THRESHOLD, DEFAULT_SAMPLE_COUNT)
from .projectors import (PathIncrements, kernel_basis, kernel_projector, kernel_projectors,
                         projector_path_increments, q_operator, q_operators)
from .catalog import OPERATOR_LABELS, resolve_operator, scaled_div2d, scaled_div_coefficient

import numpy as np

from app.core.errors import ConstantRankViolation


def freeze(coeffs: CoefficientField, x0, sample_count: int = DEFAULT_SAMPLE_COUNT, seed=0,
           gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> FrozenSymbol:
    """Certify constant rank at x0 and return the frozen symbol A(x0, .)."""
    x0 = np.asarray(x0, dtype=float).reshape(coeffs.N)
    certificate = verify_constant_rank(coeffs, x0[None, :], sample_directions(coeffs.N, sample_count, seed),
                                       gap_threshold)
    if not certificate.passed:
        w = certificate.failure_witness
        raise ConstantRankViolation(
            f"Operator '{coeffs.label}' violates constant rank at x={w.x}, lambda={w.lam} "
            f"(rank {w.rank}, consensus {certificate.r})", witness=(w.x, w.lam, w.rank))
    return FrozenSymbol(coeffs=coeffs, x0=tuple(x0.tolist()), r=certificate.r)


def rank_handler(coeffs: CoefficientField, x_samples, sample_count: int = DEFAULT_SAMPLE_COUNT,
                 seed=0, gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> RankCertificate:
    return verify_constant_rank(coeffs, x_samples, sample_directions(coeffs.N, sample_count, seed),
                                gap_threshold)
