import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fanno_periodic.errors import DomainError, UsageError
from fanno_periodic.field_grid import (PeriodicField, PeriodicGrid, WindowField, central_diff, dx_central,
                                       periodic_interp, sample, sup_distance)

GRID = PeriodicGrid(2.0, 16, 1.0, 11)


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    return PeriodicField(grid, *(rng.normal(size=(grid.n_t, grid.n_x)) for _ in range(3)))


def test_grid_validation():
    for bad in [(2.0, 4, 1.0, 11), (2.0, 16, 1.0, 5), (0.0, 16, 1.0, 11), (2.0, 16, -1.0, 11)]:
        with pytest.raises(DomainError):
            PeriodicGrid(*bad)
    assert GRID.refine(2) == PeriodicGrid(2.0, 32, 1.0, 21)
    assert GRID.x[-1] == 1.0 and GRID.t[-1] == pytest.approx(2.0 - GRID.dt)


def test_constant_field_samples_constant():
    f = PeriodicField.constant(GRID, (1.5, -2.0, 0.25))
    vals = sample(f, np.array([0.0, 0.37, 1.99, 7.3]), np.array([0.0, 0.5, 0.93, 1.0]))
    for v, c in zip(vals, (1.5, -2.0, 0.25)):
        assert np.all(v == c)


def test_node_values_exact_and_periodic():
    f = random_field(GRID, 0)
    j, k = 5, 7
    v = f.sample(GRID.t[j], GRID.x[k])
    assert v[0] == f.phi1[j, k] and v[2] == f.phi3[j, k]
    a = f.sample(0.6875, 0.42)  # binary-exact t, so t + P adds no rounding
    b = f.sample(0.6875 + GRID.P, 0.42)
    assert max(abs(p - q) for p, q in zip(a, b)) <= 1e-15


def test_sample_rejects_outside_x():
    with pytest.raises(DomainError):
        random_field(GRID, 1).sample(0.0, 1.01)


def test_slice_matches_sample():
    f = random_field(GRID, 2)
    s = f.slice_at(0.3)
    assert np.allclose(s[1], f.sample(0.3, GRID.x)[1], atol=1e-15)


def test_interpolation_continuous_across_wrap():
    y = np.sin(2 * np.pi * np.arange(16) / 16)
    left = periodic_interp(y, 2.0 - 1e-12, 2.0)
    assert left == pytest.approx(y[0], abs=1e-10)


def test_dx_central_exact_on_affine():
    x = GRID.x
    f = PeriodicField(GRID, np.tile(3 * x + 1, (16, 1)), np.ones((16, 11)), np.tile(-x, (16, 1)))
    assert np.max(np.abs(dx_central(f, 1) - 3.0)) <= 1e-12
    assert np.all(dx_central(f, 2) == 0.0)
    assert np.max(np.abs(dx_central(f, 3) + 1.0)) <= 1e-12
    with pytest.raises(UsageError):
        dx_central(f, 4)


def test_central_diff_second_order():
    errs = []
    for n in (33, 65, 129):
        x = np.linspace(0, 1, n)
        errs.append(np.max(np.abs(central_diff(np.sin(2 * np.pi * x), x[1]) - 2 * np.pi * np.cos(2 * np.pi * x))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.2)


def test_sup_distance_examples():
    a = random_field(GRID, 3)
    assert sup_distance(a, a) == 0.0
    p2 = a.phi2.copy()
    p2[3, 4] += 0.5
    b = PeriodicField(GRID, a.phi1, p2, a.phi3)
    assert sup_distance(a, b) == pytest.approx(0.5, abs=1e-15)
    assert sup_distance(a, b, per_component=True) == (0.0, pytest.approx(0.5), 0.0)
    with pytest.raises(UsageError):
        sup_distance(a, random_field(GRID.refine(2), 0))


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_sup_distance_is_metric(s1, s2, s3):
    a, b, c = random_field(GRID, s1), random_field(GRID, s2), random_field(GRID, s3)
    brute = max(np.abs(p - q).max() for p, q in zip(a.components, b.components))
    assert sup_distance(a, b) == brute == sup_distance(b, a)
    assert sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-15


def test_field_validation():
    with pytest.raises(UsageError):
        PeriodicField(GRID, np.zeros((16, 10)), np.zeros((16, 11)), np.zeros((16, 11)))
    bad = np.zeros((16, 11))
    bad[0, 0] = np.nan
    with pytest.raises(DomainError):
        PeriodicField(GRID, bad, np.zeros((16, 11)), np.zeros((16, 11)))


def test_window_field():
    t = np.array([0.0, 0.5, 1.0])
    data = np.stack([np.full((3, 5), v) for v in (0.0, 1.0, 3.0)])
    w = WindowField(t, 1.0, 5, data)
    assert np.all(w.slice_at(0.75) == 2.0)
    assert w.sample(0.25, 0.3)[0] == pytest.approx(0.5)
    with pytest.raises(DomainError):
        w.slice_at(1.5)
    with pytest.raises(UsageError):
        WindowField(np.array([0.0, 0.0, 1.0]), 1.0, 5, data)
