import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ckdv.errors import GridMismatchError, ParameterError
from ckdv.grid import (Field, FieldPair, GridSpec, deriv, derivative_matrix, field_from_bytes,
                       field_from_csv, field_from_csv_text, field_to_bytes, field_to_csv, inner,
                       integral, make_grid, random_band_limited, read_snapshots, spectral_derivative,
                       write_snapshots)

from conftest import band, sech2


def test_make_grid_small():
    g = make_grid(8, 8.0)
    assert g.spacing == 1.0
    assert g.x[0] == -4.0


def test_make_grid_default_rig():
    g = make_grid(256, 40.0)
    assert g.spacing == 0.15625
    assert g.spacing * g.n == g.length


@pytest.mark.parametrize("n,length", [(7, 10.0), (6, 10.0), (0, 1.0), (16, 0.0), (16, -2.0)])
def test_make_grid_rejects(n, length):
    with pytest.raises(ParameterError):
        make_grid(n, length)


def test_field_checks_shape_and_finiteness(grid):
    with pytest.raises(ParameterError):
        Field(grid, np.zeros(grid.n - 1))
    bad = np.zeros(grid.n)
    bad[3] = np.nan
    with pytest.raises(ParameterError):
        Field(grid, bad)


def test_field_values_are_read_only(grid):
    f = Field.zeros(grid)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_pair_requires_shared_grid(grid, small_grid):
    with pytest.raises(GridMismatchError):
        FieldPair(Field.zeros(grid), Field.zeros(small_grid))


def test_deriv_sine(grid):
    L = grid.length
    f = Field.from_function(grid, lambda x: np.sin(2 * np.pi * x / L))
    exact = 2 * np.pi / L * np.cos(2 * np.pi * grid.x / L)
    assert np.max(np.abs(deriv(f).values - exact)) <= 1e-12


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_deriv_constant(grid, order):
    f = Field(grid, np.full(grid.n, 2.5))
    assert np.max(np.abs(deriv(f, order).values)) <= 1e-13


def _sech2_d3(y):
    s, t = sech2(y / 2), np.tanh(y / 2)
    return s * t * (2 * s - t * t)


def test_deriv_sech2_third(grid):
    # periodized by neighbouring images so the sampled profile has no edge kink
    x, L = grid.x, grid.length
    f = sum(sech2((x + j * L) / 2) for j in (-1, 0, 1))
    exact = sum(_sech2_d3(x + j * L) for j in (-1, 0, 1))
    assert np.max(np.abs(deriv(Field(grid, f), 3).values - exact)) <= 1e-8


@pytest.mark.parametrize("order", [0, 5])
def test_deriv_order_range(grid, order):
    with pytest.raises(ParameterError):
        deriv(Field.zeros(grid), order)


def test_integral_examples(grid):
    assert integral(Field.zeros(grid)) == 0.0
    L = grid.length
    assert abs(integral(Field.from_function(grid, lambda x: np.sin(2 * np.pi * x / L)))) <= 1e-12


def test_integral_sech2(grid):
    f = Field(grid, sech2(grid.x / 2))
    # antiderivative 2 tanh(x/2) over the box
    box = 4 * math.tanh(grid.length / 4)
    assert abs(integral(f) - box) <= 1e-10
    # the box itself cuts off 4 - 4 tanh(10) ~ 1.6e-8 of the line integral
    assert abs(integral(f) - 4.0) <= 2e-8


def test_inner_examples(grid):
    z = FieldPair.zeros(grid)
    assert inner(z, z) == 0.0
    one = FieldPair.from_arrays(grid, np.ones(grid.n), np.zeros(grid.n))
    assert inner(one, one) == pytest.approx(40.0, abs=1e-12)
    p = band(5, grid)
    direct = grid.spacing * (np.sum(p.first.values ** 2) + np.sum(p.second.values ** 2))
    assert abs(inner(p, p) - direct) <= 1e-12


def test_inner_grid_mismatch(grid, small_grid):
    with pytest.raises(GridMismatchError):
        inner(FieldPair.zeros(grid), FieldPair.zeros(small_grid))


def test_random_band_limited_determinism(grid):
    a = random_band_limited(11, grid, 10)
    b = random_band_limited(11, grid, 10)
    assert a.stacked().tobytes() == b.stacked().tobytes()


def test_random_band_limited_spectrum(grid):
    p = random_band_limited(3, grid, 10)
    for arr in p.arrays():
        spec = np.fft.rfft(arr)
        # re-transforming the samples leaves only rounding beyond the cutoff
        assert np.max(np.abs(spec[11:])) <= 1e-14 * np.max(np.abs(spec))
        assert np.max(np.abs(arr)) <= 1.0 + 1e-15


@pytest.mark.parametrize("cutoff", [0, 128, 200])
def test_random_band_limited_cutoff_range(grid, cutoff):
    with pytest.raises(ParameterError):
        random_band_limited(1, grid, cutoff)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_deriv_linear(seed, a, b):
    g = GridSpec(128, 40.0)
    p = random_band_limited(seed, g, 8)
    f, h = p.first, p.second
    lhs = deriv(a * f + b * h).values
    rhs = a * deriv(f).values + b * deriv(h).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, abs(a) + abs(b))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31))
def test_integration_by_parts(seed):
    g = GridSpec(128, 40.0)
    f, h = random_band_limited(seed, g, 8).arrays()
    ff, hh = Field(g, f), Field(g, h)
    assert abs(integral(ff * deriv(hh)) + integral(deriv(ff) * hh)) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31))
def test_third_derivative_composes(seed):
    g = GridSpec(128, 40.0)
    f = random_band_limited(seed, g, 8).first
    assert np.max(np.abs(deriv(f, 3).values - deriv(deriv(deriv(f))).values)) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), shift=st.integers(0, 127))
def test_integral_shift_invariant(seed, shift):
    g = GridSpec(128, 40.0)
    f = random_band_limited(seed, g, 8).first
    assert integral(f) == integral(Field(g, np.roll(f.values, shift)))


@pytest.mark.parametrize("scheme", ["spectral", "central"])
def test_derivative_matrix(grid, scheme):
    d = derivative_matrix(grid, scheme)
    assert np.max(np.abs(d + d.T)) <= 1e-13
    assert np.max(np.abs(d @ np.ones(grid.n))) <= 1e-12
    if scheme == "spectral":
        f = band(2, grid).first.values
        assert np.max(np.abs(d @ f - spectral_derivative(f, grid.length))) <= 1e-12


def test_csv_round_trip(grid, tmp_path):
    f = band(4, grid).first
    text = field_to_csv(f, tmp_path / "f.csv")
    assert text.splitlines()[0] == "x,value"
    g = field_from_csv(tmp_path / "f.csv", grid.length)
    assert g.grid == grid
    assert np.array_equal(g.values, f.values)
    assert np.array_equal(field_from_csv_text(text, grid.length).values, f.values)


def test_bytes_round_trip(grid):
    f = band(4, grid).second
    data = field_to_bytes(f)
    assert len(data) == 16 + 8 * grid.n
    g = field_from_bytes(data)
    assert g.grid == grid and np.array_equal(g.values, f.values)


def test_snapshots_round_trip_and_refuse_nonfinite(grid, tmp_path):
    rows = [band(s, grid).first.values for s in range(3)]
    write_snapshots(tmp_path / "s.bin", grid, rows)
    g, back = read_snapshots(tmp_path / "s.bin")
    assert g == grid and np.array_equal(back, np.array(rows))
    bad = np.array(rows)
    bad[1, 5] = np.inf
    with pytest.raises(ParameterError):
        write_snapshots(tmp_path / "bad.bin", grid, bad)
    assert not (tmp_path / "bad.bin").exists()
