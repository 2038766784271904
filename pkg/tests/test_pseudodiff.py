import numpy as np
import pytest

from app.core.errors import ConfigurationError, UsageError
from app.services.afree import build_test_space, laminate_field, project_afree
from app.services.densities import PNorm
from app.services.pseudodiff import (CutoffChi, DecompositionOptions, SymbolFunction, a_symbol, apply_A, apply_P_eta,
                                     concentration_ensemble, decompose_equiintegrable, eta_bump, eta_one,
                                     loglog_slope, perturbation_stability, quantize, resolve_eta, smoothstep,
                                     truncation_level, verify_prop22)
from app.services.torus import PeriodicField, TorusGrid, lq_norm, tail_function


def test_smoothstep_and_cutoffs():
    np.testing.assert_allclose(smoothstep([-1.0, 0.0, 0.5, 1.0, 2.0]), [0.0, 0.0, 0.5, 1.0, 1.0])
    chi = CutoffChi()
    np.testing.assert_allclose(chi([0.0, 1.0, 2.0, 5.0]), [0.0, 0.0, 1.0, 1.0])
    assert float(eta_bump(np.array([0.0, 0.0]))) == 1.0
    assert float(eta_bump(np.array([0.5, 0.0]))) == 0.0
    np.testing.assert_array_equal(eta_one(np.zeros((3, 2))), np.ones(3))
    with pytest.raises(ConfigurationError):
        resolve_eta("gauss")


def test_quantized_operator_matches_direct_application(scaled_div, rng):
    v = PeriodicField(TorusGrid(2, 8), rng.standard_normal((8, 8, 2)))
    direct = apply_A(scaled_div, v)
    np.testing.assert_allclose(apply_A(scaled_div, v, path="quantized").values, direct.values, atol=1e-10)
    np.testing.assert_allclose(quantize(a_symbol(scaled_div), v).values, direct.values, atol=1e-10)
    with pytest.raises(UsageError):
        apply_A(scaled_div, v, path="symbolic")
    with pytest.raises(UsageError):
        SymbolFunction(2, 2)


def test_projection_agrees_with_exact_projection_above_the_cutoff(div2d, rng):
    grid = TorusGrid(2, 16)
    raw = PeriodicField(grid, rng.standard_normal((16, 16, 2)))
    high = grid.magnitudes >= 2.0
    v = PeriodicField.from_spectrum(grid, raw.spectrum * high[..., None])
    exact = project_afree(build_test_space(div2d, [0.0, 0.0], grid), v)
    np.testing.assert_allclose(apply_P_eta(div2d, eta_one, v).values, exact.values, atol=1e-12)


def test_projection_of_constant_operator_is_a_contraction(div2d):
    table = verify_prop22(div2d, eta_one, 2.0, ensemble_size=2, grid_ladder=(8, 16), eta_label="one")
    for G in (8, 16):
        assert table.max_ratio("lq_bound", G) <= 1.0 + 1e-10
        assert table.max_ratio("wm1_bound", G) <= 1.0 + 1e-10
        assert table.max_ratio("constraint", G) <= 1e-10
    assert table.finite
    assert table.verdict == "pass"


@pytest.mark.slow
@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_variable_coefficient_projection_bounds_do_not_grow(scaled_div, q):
    table = verify_prop22(scaled_div, eta_bump, q, ensemble_size=2, eta_label="bump")
    assert table.finite
    assert table.verdict == "pass", table.growth


def test_loglog_slope():
    ns = [2.0, 4.0, 8.0]
    assert loglog_slope(ns, [n ** -1.5 for n in ns]) == pytest.approx(-1.5)
    assert loglog_slope(ns, [0.0, 0.0, 1.0]) is None


def test_small_members_pass_through_the_decomposition(div2d):
    space = build_test_space(div2d, [0.0, 0.0], TorusGrid(2, 16))
    v = laminate_field(space, (0, 1), (1.0, 0.0), 0.5, "square", scale=0.5)
    options = DecompositionOptions()
    assert truncation_level(v, 4, options) > 0.25
    outputs, report = decompose_equiintegrable(div2d, [v, v], 1.5, v.mean(), ns=[4, 8], options=options)
    for out in outputs:
        np.testing.assert_allclose(out.values, v.values, atol=1e-14)
    assert report.max_mean_error <= 1e-12
    assert report.distance_slope is None


@pytest.mark.slow
def test_concentrating_ensemble_is_repaired(div2d):
    ns = [4, 8, 16, 32]
    space = build_test_space(div2d, [0.0, 0.0], TorusGrid(2, 64))
    ensemble = concentration_ensemble(space, ns, 1.5)
    outputs, report = decompose_equiintegrable(div2d, ensemble, 1.5, ensemble[0].mean(), ns)
    assert len(outputs) == len(ns)
    assert report.max_mean_error <= 1e-12
    for member in report.members:
        assert member.level > 0.0
        assert member.output_residual <= 2.0 * member.truncation_residual + 1e-12
        assert np.isfinite(member.distance_s)
    # tails above M = 4 carry the concentrating mass
    tails = [(tail_function(v, 1.5, 4.0), tail_function(out, 1.5, 4.0)) for v, out in zip(ensemble, outputs)]
    concentrating = [(before, after) for before, after in tails if before >= 0.5]
    assert concentrating
    for before, after in concentrating:
        assert after <= 0.1 * before


def test_decomposition_arguments(div2d):
    with pytest.raises(UsageError):
        decompose_equiintegrable(div2d, [], 1.5, [0.0, 0.0])
    v = PeriodicField.zeros(TorusGrid(2, 8), 2)
    with pytest.raises(UsageError):
        decompose_equiintegrable(div2d, [v], 1.5, [0.0, 0.0], ns=[1, 2])


@pytest.fixture
def laminate_pair(div2d):
    space = build_test_space(div2d, [0.0, 0.0], TorusGrid(2, 16))
    w = laminate_field(space, (0, 1), (1.0, 0.0), 0.5, "square", scale=2.0)
    return space, w


def test_vanishing_perturbations_change_energies_slowly(laminate_pair, dwell, quad):
    space, w = laminate_pair
    ns = [4, 8, 16, 32]
    shift = PeriodicField.constant(space.grid, [0.3, 0.2])
    vs = [shift * (1.0 / n) for n in ns]
    for f in (dwell, quad):
        report = perturbation_stability(f, [w] * len(ns), vs, 4.0, ns)
        assert not report.exact_zero
        assert report.slope <= -0.8
        assert report.perturbation_norms[0] > report.perturbation_norms[-1]


def test_zero_perturbation_is_exact(laminate_pair, dwell):
    space, w = laminate_pair
    zeros = [PeriodicField.zeros(space.grid, 2)] * 3
    report = perturbation_stability(dwell, [w] * 3, zeros, 4.0)
    assert report.exact_zero
    assert report.deltas == [0.0, 0.0, 0.0]
    assert report.slope is None


def test_perturbation_growth_is_checked(laminate_pair):
    space, w = laminate_pair
    zeros = [PeriodicField.zeros(space.grid, 2)]
    with pytest.raises(UsageError):
        perturbation_stability(PNorm(6.0), [w], zeros, 4.0)
    with pytest.raises(UsageError):
        perturbation_stability(PNorm(2.0), [w, w], zeros, 4.0)
    assert lq_norm(w, 4.0) == pytest.approx(1.0)
