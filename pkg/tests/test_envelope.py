import numpy as np
import pytest

from app.core.errors import DivergedError, UsageError
from app.services.densities import EnergyDensity, ShiftedDensity, coupled_weight
from app.services.envelope import (BiconjugateOracle, biconjugate_bound, convex_biconjugate, envelope_handler,
                                   envelope_query, is_quasiconvex, laminate_search, minimize_cell, wave_cone_spans)
from app.services.symbols import freeze, resolve_operator

ORIGIN = [0.0, 0.0]
U0 = [0.0]


class NaNDensity(EnergyDensity):
    label = "nan"

    def __init__(self):
        super().__init__((1.0, 2.0, 2.0))

    def eval(self, x, u, xi):
        return np.full(np.shape(xi)[:-1], np.nan)

    def grad_xi(self, x, u, xi):
        return np.full(np.shape(xi), np.nan)


@pytest.mark.parametrize("operator", ["div2d", "scalar-curl2d"])
@pytest.mark.parametrize("density", ["quad", "pnorm4"])
def test_convex_densities_are_their_own_envelope(operator, density, request, quick_options):
    coeffs = request.getfixturevalue("curl2d" if operator == "scalar-curl2d" else "div2d")
    f = request.getfixturevalue(density)
    for xi in np.random.default_rng(7).uniform(-1.5, 1.5, size=(4, 2)):
        result = envelope_handler(f, coeffs, ORIGIN, U0, xi, quick_options)
        assert result.value == pytest.approx(result.f_value, abs=1e-6)
        assert result.summary().minimizer_l2 <= 1e-3


def test_is_quasiconvex_reports_no_gap_for_quad(quad, div2d, quick_options):
    report = is_quasiconvex(quad, div2d, ORIGIN, U0, [[0.3, -0.4], [1.0, 1.0]], quick_options)
    assert report.max_gap <= 1e-12


@pytest.mark.parametrize("xi", [(0.0, 0.0), (0.5, 0.0), (0.0, -0.5)])
def test_double_well_envelope_vanishes_inside_the_ball(dwell, div2d, quick_options, xi):
    # seed every lattice laminate so the exactly representable volume fractions are tried
    options = quick_options.model_copy(update={"laminate_seeds": 8})
    result = envelope_handler(dwell, div2d, ORIGIN, U0, xi, options)
    assert result.value <= 1e-3
    assert result.value <= result.f_value
    assert len(result.ladder_values) == 2


@pytest.mark.parametrize("xi", [(0.0, 0.0), (1.5, 0.0), (0.0, 2.0)])
def test_double_well_sandwich(dwell, div2d, quick_options, xi):
    axis = np.linspace(-3.0, 3.0, 61)
    mesh = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1)
    oracle = BiconjugateOracle([axis, axis], dwell.eval(np.zeros(2), np.zeros(1), mesh))
    result = envelope_handler(dwell, div2d, ORIGIN, U0, xi, quick_options)
    lower = float(oracle(np.asarray(xi)))
    upper = min(result.f_value, result.laminate_bound)
    assert lower - 1e-3 <= result.value <= upper + 1e-8


def test_coupled_envelope_closed_form(coupled, div2d, quick_options):
    x0 = [-0.375, 0.125]
    b = float(coupled_weight(np.asarray(x0)))
    result = envelope_handler(coupled, div2d, x0, U0, [0.0, 0.0], quick_options)
    assert result.value == pytest.approx(b - b * b / 4.0, abs=1e-6)


def test_translation_covariance(dwell, div2d, quick_options):
    xi = np.array([0.3, 0.2])
    direct = minimize_cell(envelope_query(dwell, div2d, ORIGIN, U0, xi, quick_options))
    shifted = minimize_cell(envelope_query(ShiftedDensity(dwell, xi), div2d, ORIGIN, U0, [0.0, 0.0],
                                           quick_options))
    assert abs(direct.value - shifted.value) <= 1e-14
    np.testing.assert_allclose(direct.minimizer.values, shifted.minimizer.values, atol=1e-14)


def test_laminate_bound_for_double_well_at_origin(dwell, div2d, quick_options):
    bound = laminate_search(envelope_query(dwell, div2d, ORIGIN, U0, [0.0, 0.0], quick_options))
    assert bound.f_value == 1.0
    assert bound.value <= 1e-6
    assert bound.lattice_candidates()


def test_wave_cone_of_div2d_spans_the_plane(div2d):
    assert wave_cone_spans(freeze(div2d, ORIGIN))


def test_query_validation(dwell, div2d, quick_options):
    with pytest.raises(UsageError):
        envelope_query(dwell, div2d, ORIGIN, U0, [0.0, 0.0, 0.0], quick_options)
    with pytest.raises(UsageError):
        envelope_query(dwell, div2d, ORIGIN, U0, [np.inf, 0.0], quick_options)


def test_non_finite_energy_is_reported(div2d, quick_options):
    with pytest.raises(DivergedError):
        envelope_handler(NaNDensity(), div2d, ORIGIN, U0, [0.0, 0.0], quick_options)


def test_one_dimensional_biconjugate_of_double_well():
    x = np.linspace(-2.0, 2.0, 41)
    f = (x ** 2 - 1.0) ** 2
    envelope = convex_biconjugate(x, f)
    inside = np.abs(x) <= 1.0
    outside = np.abs(x) >= 1.05
    np.testing.assert_allclose(envelope[inside], 0.0, atol=1e-9)
    np.testing.assert_allclose(envelope[outside], f[outside], atol=1e-9)
    assert np.all(envelope <= f + 1e-12)


def test_biconjugate_grid_checks():
    with pytest.raises(UsageError):
        convex_biconjugate(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(UsageError):
        convex_biconjugate(np.array([0.0, 0.5, 2.0]), np.array([0.0, 1.0, 4.0]))


@pytest.mark.parametrize("xi", [(0.0, 0.0), (1.5, 0.0), (0.5, 0.5)])
def test_envelope_carries_the_biconjugate_lower_bound(dwell, div2d, quick_options, xi):
    result = envelope_handler(dwell, div2d, ORIGIN, U0, xi, quick_options)
    assert result.biconjugate_bound is not None
    assert result.biconjugate_bound <= result.value + 1e-9
    assert result.summary().biconjugate_bound == result.biconjugate_bound


def test_biconjugate_bound_stays_below_f_outside_the_wells(dwell, div2d, quick_options):
    # f = (2.25 - 1)^2 at a grid node; the slope grid only loses curvature-sized amounts
    bound = biconjugate_bound(envelope_query(dwell, div2d, ORIGIN, U0, [1.5, 0.0], quick_options))
    assert 0.9 <= bound <= 1.5625 + 1e-9


def test_biconjugate_bound_needs_a_spanning_wave_cone(quad, quick_options):
    elliptic = resolve_operator("cauchy-riemann2d")
    assert not wave_cone_spans(freeze(elliptic, ORIGIN))
    assert biconjugate_bound(envelope_query(quad, elliptic, ORIGIN, U0, [0.3, 0.1], quick_options)) is None
    disabled = quick_options.model_copy(update={"biconjugate_points": 0})
    assert biconjugate_bound(envelope_query(quad, resolve_operator("div2d"), ORIGIN, U0, [0.3, 0.1], disabled)) is None
