from .density import (Coupled, DoubleWell, EnergyDensity, GradientCheck, GrowthCheck, PNorm, Quadratic,
                      ShiftedDensity, coupled_weight, gradient_check, growth_check)
from .catalog import DENSITY_LABELS, resolve_density
