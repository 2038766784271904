from .grid import TorusGrid
from .field import PeriodicField, evaluate_at, resample, spectral_derivative
from .norms import (field_mean, lq_norm, lq_norm_on, spectral_energy, spectrum_wm1q_norm, tail_function,
                    truncate, wm1q_norm, zero_mean)
from .io import read_field, read_field_binary, read_field_csv, write_field_binary, write_field_csv
