import numpy as np
import pytest

from app.core.errors import ConstantRankViolation, UsageError
from app.services.afree import (build_test_space, constraint_residual, laminate_field, project_afree,
                                random_afree_field)
from app.services.symbols import resolve_operator
from app.services.torus import PeriodicField, TorusGrid


@pytest.fixture
def space(div2d):
    return build_test_space(div2d, [0.0, 0.0], TorusGrid(2, 8))


def test_dimension_counts_one_kernel_direction_per_frequency(space):
    assert space.dimension() == 63


def test_projection_is_idempotent_and_divergence_free(space, rng):
    raw = PeriodicField(space.grid, rng.standard_normal((8, 8, 2)))
    assert constraint_residual(space, raw) > 0.1
    w = project_afree(space, raw)
    np.testing.assert_allclose(project_afree(space, w).values, w.values, atol=1e-12)
    assert constraint_residual(space, w) < 1e-12
    np.testing.assert_allclose(w.mean(), 0.0, atol=1e-14)


def test_random_fields_are_admissible(space, rng):
    w = random_afree_field(space, rng)
    assert constraint_residual(space, w) < 1e-12


def test_square_laminate_is_left_unchanged(space):
    w = laminate_field(space, (0, 1), (1.0, 0.0), theta=0.5, profile="square")
    np.testing.assert_allclose(np.abs(w.values[..., 0]), 0.5, atol=1e-12)
    np.testing.assert_allclose(w.values[..., 1], 0.0, atol=1e-12)


def test_laminate_arguments_are_checked(space):
    with pytest.raises(UsageError):
        laminate_field(space, (0, 0), (1.0, 0.0))
    with pytest.raises(UsageError):
        laminate_field(space, (0, 1), (1.0, 0.0), theta=1.5)
    with pytest.raises(UsageError):
        laminate_field(space, (0, 1), (1.0, 0.0), profile="triangle")


def test_refining_keeps_the_frozen_symbol(space):
    finer = space.at(16)
    assert finer.grid.G == 16
    assert finer.frozen is space.frozen
    assert space.at(8) is space


def test_nonconstant_rank_operator_has_no_test_space():
    with pytest.raises(ConstantRankViolation):
        build_test_space(resolve_operator("diag-nonconstant-rank"), [0.0, 0.0], TorusGrid(2, 8))


def test_grid_dimension_must_match(div2d):
    with pytest.raises(UsageError):
        build_test_space(div2d, [0.0, 0.0], TorusGrid(3, 8))


def _profile(t):
    return np.cos(2.0 * np.pi * t) + 0.5 * np.sin(6.0 * np.pi * t)


def test_divergence_free_projection_of_axis_fields(space):
    across = PeriodicField.from_function(space.grid, lambda y: _profile(y[..., 0])[..., None] * np.array([1.0, 0.0]))
    along = PeriodicField.from_function(space.grid, lambda y: _profile(y[..., 1])[..., None] * np.array([1.0, 0.0]))
    np.testing.assert_allclose(project_afree(space, across).values, 0.0, atol=1e-12)
    np.testing.assert_allclose(project_afree(space, along).values, along.values, atol=1e-12)


def test_curl_free_projectors_are_along_the_wave_vector(curl2d):
    curl_space = build_test_space(curl2d, [0.0, 0.0], TorusGrid(2, 8))
    k = curl_space.grid.effective_wavevectors.reshape(-1, 2).astype(float)
    P = curl_space.projectors.reshape(-1, 2, 2)
    nonzero = np.any(k != 0.0, axis=-1)
    expected = np.einsum("ki,kj->kij", k[nonzero], k[nonzero]) / np.sum(k[nonzero] ** 2, axis=-1)[:, None, None]
    np.testing.assert_allclose(P[nonzero], expected, atol=1e-12)
    np.testing.assert_array_equal(P[~nonzero], 0.0)


@pytest.mark.parametrize("label, x0", [("div2d", [0.0, 0.0]), ("scaled-div2d", [0.1, 0.2]),
                                       ("scalar-curl2d", [0.0, 0.0])])
def test_projectors_are_orthogonal_at_every_wave_vector(label, x0):
    P = build_test_space(resolve_operator(label), x0, TorusGrid(2, 8)).projectors.reshape(-1, 2, 2)
    np.testing.assert_allclose(P, np.swapaxes(P, -1, -2), atol=1e-12)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
