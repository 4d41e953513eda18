import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fanno_periodic import stability_harness as harness
from fanno_periodic.errors import UsageError
from fanno_periodic.field_grid import PeriodicField, PeriodicGrid, WindowField

P = 2.0
GRID = PeriodicGrid(P, 16, 1.0, 33)


def periodic_field():
    t = GRID.t[:, None]
    x = GRID.x[None, :]
    w = 2 * np.pi * t / P
    return PeriodicField(GRID, 0.1 * np.sin(w) * np.cos(x), 1.0 + 0.05 * np.cos(w) * x, 0.02 * np.sin(w + x))


def trajectory(field, t_end, extra=None):
    """Samples of ``field`` (plus ``extra(t, x)``) at multiples of the grid step."""
    n = int(round(t_end / GRID.dt))
    t = np.arange(n + 1) * GRID.dt
    data = harness._periodic_slices(field, t).copy()
    if extra is not None:
        data += extra(t[:, None, None], GRID.x[None, None, :])
    return WindowField(t, GRID.L, GRID.n_x, data)


def test_period_residual_exact_periodic():
    traj = trajectory(periodic_field(), 3 * P)
    assert harness.period_residual(traj, P) <= 1e-15


def test_period_residual_transient_closed_form():
    t_end = 3 * P
    traj = trajectory(periodic_field(), t_end, lambda t, x: 0.01 * np.exp(-t) + 0 * x)
    expected = 0.01 * math.exp(-(t_end - 2 * P)) * (1 - math.exp(-P))
    assert harness.period_residual(traj, P) == pytest.approx(expected, rel=1e-12)


def test_period_residual_needs_two_periods():
    with pytest.raises(UsageError):
        harness.period_residual(trajectory(periodic_field(), 1.5 * P), P)


def test_geometric_fit_exact():
    d = 0.01 * 0.5 ** np.arange(8)
    rep = harness.fit_windows(d, T0=1.0)
    assert rep.xi_hat == pytest.approx(0.5, abs=1e-14)
    assert rep.fit_residual < 1e-13 and rep.monotone and not rep.degenerate
    assert rep.fit_windows == list(range(8))


@given(st.floats(0.05, 0.99), st.floats(1e-6, 1.0), st.integers(3, 20))
def test_geometric_fit_recovers_rate(xi, a, n):
    rep = harness.fit_windows(a * xi ** np.arange(n), T0=2.0)
    assert rep.xi_hat == pytest.approx(xi, rel=1e-10)


def test_floor_excludes_windows_and_flags_degenerate():
    d = np.array([1e-2, 5e-3, 2.5e-3, 1e-4, 1e-4, 1e-4])
    rep = harness.fit_windows(d, 1.0, floor=1e-4)
    assert rep.fit_windows == [0, 1, 2] and rep.xi_hat == pytest.approx(0.5)
    assert rep.monotone  # growth inside the floor band is not counted
    flat = harness.fit_windows(np.full(6, 1e-4), 1.0, floor=1e-4)
    assert flat.degenerate and math.isnan(flat.xi_hat)
    bumpy = harness.fit_windows(np.array([1e-2, 1.2e-2, 5e-3, 2e-3]), 1.0)
    assert not bumpy.monotone
    with pytest.raises(UsageError):
        harness.fit_windows(np.array([1.0, -1.0, 0.5]), 1.0)


def test_window_max_complete_windows_only():
    t = np.linspace(0, 3.5, 36)
    v = np.exp(-t)
    d = harness.window_max(t, v, 1.0)
    assert len(d) == 3 and d == pytest.approx(np.exp(-np.arange(3.0)))


def test_decay_fit_synthetic():
    field = periodic_field()
    traj = trajectory(field, 6.0, lambda t, x: 0.01 * 0.5 ** np.floor(t + 1e-12) * np.sin(np.pi * x))
    rep = harness.decay_fit(traj, field, 1.0)
    assert rep.xi_hat == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(UsageError):
        harness.decay_fit(trajectory(field, 4.0), field, 1.0)


def test_c1_equilibrium_and_known_rate():
    field = periodic_field()
    eq = harness.c1_decay_fit(trajectory(field, 6.0), field, 1.0)
    assert max(eq.windows) <= 1e-12
    # the x-derivative gap is 0.01 * 0.5**t and dominates the t-derivative gap
    traj = trajectory(field, 6.0, lambda t, x: 0.01 * 0.5 ** t * x)
    rep = harness.c1_decay_fit(traj, field, 1.0)
    assert rep.xi_hat == pytest.approx(0.5, rel=1e-6)


def test_rate_bound():
    assert harness.admissible_rate_bound(0.7, 1.0) == pytest.approx(0.7)
    assert harness.admissible_rate_bound(0.7, 1.5) == pytest.approx(0.8)


def test_cross_validate_fixed_point(fixed_point_config):
    rep = harness.cross_validate(fixed_point_config)
    assert rep["distance"] <= 1e-12 and rep["passed"]


def test_cross_validate_wrong_period_fails(coarse_config):
    good = harness.cross_validate(coarse_config)
    bad = harness.cross_validate(coarse_config, builder_period=3.0)
    assert good["passed"]
    assert not bad["passed"]
    assert bad["distance"] > 1e-4  # O(eps) with eps = 1e-3


def test_bump_amplitude_linearity(coarse_config):
    d0 = [harness.stability(coarse_config, amplitude=a)[0]["windows"][0]["d_N"] for a in (0.005, 0.01)]
    assert 1.5 <= d0[1] / d0[0] <= 2.5


def test_stability_report_shape(coarse_config):
    rep, (traj, replay, periodic, setup) = harness.stability(coarse_config)
    for key in ("config", "T0", "windows", "xi_hat", "xi_bound", "floor", "c1"):
        assert key in rep
    assert len(rep["windows"]) == coarse_config["harness.windows"]
    # every window holds at least 32 saved slices
    assert np.sum(traj.t < setup.T0) >= 32
    assert rep["xi_hat"] < 1


def test_entropy_drift_zero_for_frozen_entropy(fixed_point_config):
    s = harness.prepare(fixed_point_config)
    from fanno_periodic.ibvp_solver import InitialData, simulate
    traj, _ = simulate(InitialData.constant(s.profile.n_x, (0.0, 1.0, 0.0)), s.bc, s.profile, s.gas, 2.0)
    assert harness.entropy_drift(traj, s.profile, n_paths=10) <= 1e-14
