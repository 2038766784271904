from .cutoff import CutoffChi, ETA_CATALOG, eta_bump, eta_one, resolve_eta, smoothstep
from .symbol_function import (SymbolFunction, a_symbol, derivative_symbol, multiplication_symbol,
                              multiplier_symbol, p_eta_symbol)
from .quantize import QuantizedOperator, quantize
from .operators import PEtaOperator, apply_A, apply_A_eta, apply_P_eta
from .ensembles import ENSEMBLE_LABELS, band_limit, concentration_ensemble, oscillation_ensemble, spectral_field
from .prop22 import INEQUALITIES, Prop22Row, Prop22Table, verify_prop22
from .decomposition import (DecompositionOptions, DecompositionReport, MemberReport, decompose_equiintegrable,
                            loglog_slope, truncation_level)
from .perturbation import PerturbationReport, perturbation_stability
