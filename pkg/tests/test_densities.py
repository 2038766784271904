import numpy as np
import pytest

from app.core.errors import ConfigurationError, UsageError
from app.services.densities import (DENSITY_LABELS, EnergyDensity, PNorm, ShiftedDensity, coupled_weight,
                                    gradient_check, growth_check, resolve_density)


@pytest.mark.parametrize("label", ["quad", "dwell", "pnorm(3)", "pnorm(4)", "coupled"])
def test_catalog_densities_respect_their_growth_bound(label):
    check = growth_check(resolve_density(label))
    assert check.passed, check.witness
    assert check.worst_ratio <= 1.0


@pytest.mark.parametrize("label", ["dwell", "pnorm(1)", "pnorm(3)", "pnorm(4)", "coupled"])
def test_gradients_match_central_differences(label):
    assert gradient_check(resolve_density(label)).max_error <= 1e-6


def test_quadratic_gradient_is_exact_to_rounding(quad):
    assert gradient_check(quad).max_error <= 1e-8


class QuarticDeclaredQuadratic(EnergyDensity):
    label = "quartic-as-quadratic"

    def __init__(self):
        super().__init__((1.0, 2.0, 2.0))

    def eval(self, x, u, xi):
        return np.sum(np.asarray(xi) ** 2, axis=-1) ** 2


def test_growth_violation_reports_a_witness():
    check = growth_check(QuarticDeclaredQuadratic())
    assert not check.passed
    assert check.worst_ratio > 1.0
    x, u, xi = check.witness
    assert len(x) == 2 and len(u) == 1 and len(xi) == 2
    assert np.linalg.norm(xi) > 1.0


def test_unit_exponent_norm_is_accepted():
    f = resolve_density("pnorm(1)")
    assert f.growth == (1.0, 1.0, 1.0)
    assert float(f.eval(np.zeros(2), np.zeros(1), np.array([3.0, 4.0]))) == pytest.approx(5.0)
    np.testing.assert_allclose(f.grad_xi(np.zeros(2), np.zeros(1), np.array([3.0, 4.0])), [0.6, 0.8])
    assert growth_check(f).passed


def test_invalid_arguments_raise_usage_errors(quad):
    with pytest.raises(UsageError):
        PNorm(0.5)
    with pytest.raises(UsageError):
        gradient_check(quad, h=0.0)


def test_double_well_vanishes_on_the_unit_sphere(dwell):
    xi = np.array([[1.0, 0.0], [0.6, -0.8], [0.0, 0.0]])
    np.testing.assert_allclose(dwell.eval(np.zeros(2), np.zeros(1), xi), [0.0, 0.0, 1.0], atol=1e-15)


def test_coupled_density(coupled):
    x = np.array([0.0, 0.3])
    u = np.array([2.0])
    xi = np.array([1.0, 1.0])
    # (1 + 4)(2 - 1)^2 + b(0) * 2 with b(0) = 3/2
    assert float(coupled.eval(x, u, xi)) == pytest.approx(8.0)
    assert float(coupled_weight(np.array([0.5, 0.0]))) == pytest.approx(0.5)


def test_shifted_density_evaluates_the_base_at_the_shift(dwell, rng):
    shift = np.array([0.3, -0.2])
    shifted = ShiftedDensity(dwell, shift)
    xi = rng.standard_normal((16, 2))
    np.testing.assert_array_equal(shifted.eval(np.zeros(2), np.zeros(1), xi),
                                  dwell.eval(np.zeros(2), np.zeros(1), shift + xi))
    assert shifted.growth[2] == dwell.growth[2]
    assert growth_check(shifted).passed


def test_labels():
    assert resolve_density("pnorm(3)").growth == (1.0, 3.0, 3.0)
    assert resolve_density("pnorm").q == 4.0
    assert sorted(DENSITY_LABELS) == DENSITY_LABELS
    with pytest.raises(ConfigurationError):
        resolve_density("quartic")
    with pytest.raises(ConfigurationError):
        resolve_density("dwell(2)")
    with pytest.raises(ConfigurationError):
        resolve_density("pnorm(0.5)")
