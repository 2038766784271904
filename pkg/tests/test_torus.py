import numpy as np
import pytest

from app.core.errors import ArtifactIOError, UsageError
from app.services.torus import (PeriodicField, TorusGrid, evaluate_at, lq_norm, read_field, resample,
                                spectral_derivative, spectral_energy, tail_function, truncate, wm1q_norm,
                                write_field_binary, write_field_csv, zero_mean)


def test_grid_validation():
    with pytest.raises(UsageError):
        TorusGrid(2, 7)
    with pytest.raises(UsageError):
        TorusGrid(4, 8)
    grid = TorusGrid(2, 8)
    assert grid.points.shape == (8, 8, 2)
    np.testing.assert_allclose(grid.points[0, 0], [-0.5, -0.5])
    assert grid.cell_volume == pytest.approx(1.0 / 64)


def test_nyquist_components_are_zeroed_next_to_other_frequencies():
    grid = TorusGrid(2, 4)
    k = grid.effective_wavevectors
    # axis frequencies are [0, 1, -2, -1]
    assert k[2, 1].tolist() == [0, 1]
    assert k[2, 2].tolist() == [-2, -2]
    assert k[2, 0].tolist() == [-2, 0]


def test_spectral_derivative_of_sine(grid16):
    v = PeriodicField.from_function(grid16, lambda y: np.sin(2.0 * np.pi * y[..., 0]))
    dv = spectral_derivative(v, 0)
    expected = 2.0 * np.pi * np.cos(2.0 * np.pi * grid16.points[..., 0])
    np.testing.assert_allclose(dv.values[..., 0], expected, atol=1e-10)
    np.testing.assert_allclose(spectral_derivative(v, 1).values, 0.0, atol=1e-10)


def test_resample_up_and_down_recovers_samples(rng):
    v = PeriodicField(TorusGrid(2, 8), rng.standard_normal((8, 8, 2)))
    back = resample(resample(v, 16), 8)
    np.testing.assert_allclose(back.values, v.values, atol=1e-12)


def test_trigonometric_interpolant_matches_grid_samples(rng, grid16):
    v = PeriodicField(grid16, rng.standard_normal((16, 16, 2)))
    values = evaluate_at(v, grid16.points.reshape(-1, 2))
    np.testing.assert_allclose(values, v.flat(), atol=1e-10)


def test_norms_of_constant_field(grid16):
    v = PeriodicField.constant(grid16, [3.0, 4.0])
    assert lq_norm(v, 2.0) == pytest.approx(5.0)
    assert lq_norm(v, 3.5) == pytest.approx(5.0)
    assert wm1q_norm(v, 2.0) == pytest.approx(5.0)
    with pytest.raises(UsageError):
        lq_norm(v, 1.0)


def test_parseval(rng, grid16):
    v = PeriodicField(grid16, rng.standard_normal((16, 16, 2)))
    assert spectral_energy(v) == pytest.approx(lq_norm(v, 2.0) ** 2, rel=1e-12)


def test_wm1q_norm_is_smaller_for_oscillations(grid16):
    slow = PeriodicField.from_function(grid16, lambda y: np.sin(2.0 * np.pi * y[..., 0]))
    fast = PeriodicField.from_function(grid16, lambda y: np.sin(8.0 * np.pi * y[..., 0]))
    assert lq_norm(slow, 2.0) == pytest.approx(lq_norm(fast, 2.0))
    assert wm1q_norm(fast, 2.0) < 0.5 * wm1q_norm(slow, 2.0)


def test_truncation_and_tail(grid16):
    v = PeriodicField.constant(grid16, [2.0, 0.0])
    assert tail_function(v, 2.0, 1.0) == pytest.approx(4.0)
    assert tail_function(v, 2.0, 2.0) == 0.0
    np.testing.assert_allclose(truncate(v, 1.0).magnitude(), 1.0)
    with pytest.raises(UsageError):
        truncate(v, -1.0)


def test_zero_mean(rng, grid16):
    v = PeriodicField(grid16, 1.0 + rng.standard_normal((16, 16, 2)))
    np.testing.assert_allclose(zero_mean(v).mean(), 0.0, atol=1e-14)


def test_field_files(tmp_path, rng):
    v = PeriodicField(TorusGrid(2, 8), rng.standard_normal((8, 8, 2)))
    write_field_csv(tmp_path / "v.csv", v, preamble="# produced by a test")
    write_field_binary(tmp_path / "v.bin", v)
    from_csv = read_field(tmp_path / "v.csv")
    from_bin = read_field(tmp_path / "v.bin")
    assert from_csv.grid == v.grid
    np.testing.assert_array_equal(from_csv.values, v.values)
    np.testing.assert_array_equal(from_bin.values, v.values)


def test_field_file_without_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("y1,y2,v1\n0,0,1\n")
    with pytest.raises(ArtifactIOError):
        read_field(path)
    with pytest.raises(ArtifactIOError):
        read_field(tmp_path / "missing.bin")


@pytest.mark.parametrize("k", [(2, 0), (1, 3)])
@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_wm1q_norm_of_a_single_mode(grid16, k, q):
    v = PeriodicField.from_function(grid16, lambda y: np.cos(2.0 * np.pi * (y @ np.asarray(k, dtype=float)))[..., None]
                                    * np.array([3.0, 4.0]))
    multiplier = 1.0 / np.sqrt(1.0 + 4.0 * np.pi ** 2 * float(np.dot(k, k)))
    assert wm1q_norm(v, q) == pytest.approx(multiplier * lq_norm(v, q), rel=1e-10)


def test_tail_function_does_not_increase_with_the_level(rng, grid16):
    v = PeriodicField(grid16, rng.standard_normal((16, 16, 2)))
    tails = [tail_function(v, 1.5, M) for M in np.linspace(0.0, 4.0, 41)]
    assert np.all(np.diff(tails) <= 0.0)
    assert tails[0] == pytest.approx(lq_norm(v, 1.5) ** 1.5, rel=1e-12)


def test_fields_do_not_freeze_the_callers_array(rng, grid16):
    raw = rng.standard_normal((16, 16, 2))
    v = PeriodicField(grid16, raw)
    raw[0, 0, 0] = 100.0
    assert v.values[0, 0, 0] != 100.0
    assert not v.values.flags.writeable
