"""
Quantitative experiments on top of the builder and the time-domain solver.

* period residual of a trajectory,
* per-window distances to a periodic orbit and a log-linear decay fit,
  in C0 and in a discrete C1 norm,
* cross-validation of the builder against a long time-domain run,
* drift of the entropy invariant along traced family-2 characteristics.

Windows have length T0 and start at the first saved time of the trajectory.
The discretization floor is the same distance measured on an unperturbed
replay of the periodic orbit, and windows within 3x the floor are left out of
the fit.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .characteristics import trace_in_t
from .config import SimConfig
from .errors import UsageError
from .field_grid import PeriodicField, WindowField, central_diff, periodic_weights
from .gas_model import GasModel
from .ibvp_solver import InitialData, simulate, t_zero_horizon
from .periodic_builder import BoundarySpec, build_periodic, integrating_factors
from .steady_fanno import SteadyProfile

FLOOR_FACTOR = 3.0
MONOTONE_SLACK = 1.1
XVAL_FACTOR = 5.0


def period_residual(traj: WindowField, P):
    """sup over t in [t_end - 2P, t_end - P] of |slice(t + P) - slice(t)|."""
    t_end = float(traj.t[-1])
    if t_end - traj.t0 < 2.0 * P - 1e-12:
        raise UsageError(f"trajectory spans {t_end - traj.t0:.6g} < 2P = {2 * P:.6g}")
    lo, hi = t_end - 2.0 * P, t_end - P
    ts = traj.t[(traj.t >= lo - 1e-12) & (traj.t <= hi + 1e-12)]
    return max(float(np.max(np.abs(traj.slice_at(min(t + P, t_end)) - traj.slice_at(t)))) for t in ts)


def _periodic_slices(periodic: PeriodicField, t):
    """Periodic field at each time in ``t``, shape (len(t), 3, n_x)."""
    i0, i1, w = periodic_weights(t, periodic.grid.P, periodic.grid.n_t)
    st = periodic.stacked()  # (3, n_t, n_x)
    lo = st[:, i0, :]
    out = lo + w[None, :, None] * (st[:, i1, :] - lo)
    return np.moveaxis(out, 0, 1)


def deviation(traj: WindowField, periodic: PeriodicField):
    """traj - periodic at the saved times, shape (n_saved, 3, n_x)."""
    if traj.n_x != periodic.grid.n_x or abs(traj.L - periodic.grid.L) > 1e-12 * traj.L:
        raise UsageError("trajectory and periodic field live on different x grids")
    return traj.data - _periodic_slices(periodic, traj.t)


def c0_distances(traj, periodic):
    dev = deviation(traj, periodic)
    return np.max(np.abs(dev), axis=(1, 2))


def c1_distances(traj, periodic):
    """max of the discrete d/dt and d/dx deviations at each saved time."""
    dev = deviation(traj, periodic)
    if len(traj.t) < 2:
        raise UsageError("need at least two saved slices for time differences")
    dt_dev = np.gradient(dev, traj.t, axis=0)
    dx_dev = central_diff(dev, traj.dx, axis=-1)
    return np.maximum(np.max(np.abs(dt_dev), axis=(1, 2)), np.max(np.abs(dx_dev), axis=(1, 2)))


def window_max(t, values, T0, t0=None, n_windows=None):
    """d_N = max of ``values`` over t in [t0 + N T0, t0 + (N+1) T0); complete windows only."""
    t = np.asarray(t, dtype=float)
    t0 = float(t[0]) if t0 is None else t0
    n_full = int(math.floor((t[-1] - t0) / T0 + 1e-9))
    if n_windows is not None:
        n_full = min(n_full, n_windows)
    idx = np.floor((t - t0) / T0 + 1e-12).astype(int)
    out = []
    for N in range(n_full):
        sel = values[idx == N]
        if sel.size == 0:
            raise UsageError(f"window {N} has no saved slices")
        out.append(float(sel.max()))
    return np.array(out)


@dataclass
class DecayReport:
    T0: float
    windows: list
    floor: float
    xi_hat: float = math.nan
    fit_residual: float = math.nan  # RMS of log residuals (relative deviation from the geometric law)
    max_residual: float = math.nan
    fit_windows: list = field(default_factory=list)
    degenerate: bool = False
    monotone: bool = True
    xi_bound: float | None = None
    norm: str = "C0"

    @property
    def below_bound(self):
        if self.xi_bound is None or not math.isfinite(self.xi_hat):
            return None
        return self.xi_hat < self.xi_bound

    def to_dict(self):
        return {
            "norm": self.norm,
            "T0": self.T0,
            "windows": [{"N": i, "d_N": d} for i, d in enumerate(self.windows)],
            "floor": self.floor,
            "xi_hat": self.xi_hat,
            "fit_residual": self.fit_residual,
            "max_residual": self.max_residual,
            "fit_windows": list(self.fit_windows),
            "degenerate": self.degenerate,
            "monotone": self.monotone,
            "xi_bound": self.xi_bound,
            "xi_hat_below_bound": self.below_bound,
        }


def fit_windows(d, T0, floor=0.0, xi_bound=None, norm="C0") -> DecayReport:
    """Least-squares fit of log d_N = a + N log xi over windows with d_N > 3 * floor."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise UsageError("window distances must be finite and nonnegative")
    cut = FLOOR_FACTOR * floor
    above = (d > cut) & (d > 0)
    rep = DecayReport(T0, [float(v) for v in d], float(floor), xi_bound=xi_bound, norm=norm)
    # nonincreasing (with slack) while the previous window is still above the floor band
    rep.monotone = bool(all(d[i + 1] <= MONOTONE_SLACK * d[i] for i in range(len(d) - 1) if d[i] > cut))
    N = np.flatnonzero(above)
    rep.fit_windows = [int(n) for n in N]
    if N.size < 3:
        rep.degenerate = True
        return rep
    y = np.log(d[N])
    slope, icpt = np.polyfit(N.astype(float), y, 1)
    res = y - (icpt + slope * N)
    rep.xi_hat = float(math.exp(slope))
    rep.fit_residual = float(math.sqrt(np.mean(res * res)))
    rep.max_residual = float(np.max(np.abs(np.expm1(res))))
    return rep


def admissible_rate_bound(K, factor_bound):
    """Smallest rate allowed by the window induction: 1 - (1 - K) / M."""
    return 1.0 - (1.0 - K) / factor_bound


def decay_fit(traj: WindowField, periodic: PeriodicField, T0, replay: WindowField | None = None,
              floor=None, xi_bound=None, n_windows=None) -> DecayReport:
    """C0 window distances of ``traj`` to ``periodic`` and their geometric fit.

    The floor is taken from ``replay`` (an unperturbed run from the periodic
    slice) when given, else from ``floor`` (default 0).
    """
    if traj.t[-1] - traj.t0 < 5.0 * T0 - 1e-9:
        raise UsageError("decay fit needs a trajectory spanning at least 5 T0")
    d = window_max(traj.t, c0_distances(traj, periodic), T0, n_windows=n_windows)
    if replay is not None:
        floor = float(window_max(replay.t, c0_distances(replay, periodic), T0, n_windows=n_windows).max())
    return fit_windows(d, T0, floor or 0.0, xi_bound, "C0")


def c1_decay_fit(traj, periodic, T0, replay=None, floor=None, xi_bound=None, n_windows=None) -> DecayReport:
    """As :func:`decay_fit` on discrete time and space difference quotients."""
    if traj.t[-1] - traj.t0 < 5.0 * T0 - 1e-9:
        raise UsageError("decay fit needs a trajectory spanning at least 5 T0")
    d = window_max(traj.t, c1_distances(traj, periodic), T0, n_windows=n_windows)
    if replay is not None:
        floor = float(window_max(replay.t, c1_distances(replay, periodic), T0, n_windows=n_windows).max())
    return fit_windows(d, T0, floor or 0.0, xi_bound, "C1")


# -- orchestration over a configuration ------------------------------------


@dataclass
class Setup:
    gas: GasModel
    profile: SteadyProfile
    bc: BoundarySpec
    grid: object
    T0: float
    cfl: float


def prepare(config: SimConfig, refine=1, period=None) -> Setup:
    gas = config.gas()
    profile = config.profile(refine)
    grid = config.grid(refine)
    if period is not None:
        grid = type(grid)(period, grid.n_t, grid.L, grid.n_x)
    bc = config.boundary(profile, P=grid.P)
    return Setup(gas, profile, bc, grid, t_zero_horizon(profile, gas), config["time.cfl"])


def build(config: SimConfig, setup: Setup):
    return build_periodic(setup.profile, setup.bc, setup.gas, setup.grid,
                          tol_iter=config["builder.tol_iter"], max_iter=config["builder.max_iter"],
                          alpha_star=config.damping().alpha_star,
                          entropy_gradient=config["builder.entropy_gradient"])


def _run(setup: Setup, init, t_final, save_every):
    return simulate(init, setup.bc, setup.profile, setup.gas, t_final, cfl=setup.cfl, save_every=save_every)


def bump_initial(config: SimConfig, periodic: PeriodicField, amplitude=None):
    amp = config["harness.bump_amplitude"] if amplitude is None else amplitude
    return InitialData.with_bump(periodic, amp, tuple(config["harness.bump_support"]),
                                 tuple(config["harness.bump_components"]))


def stability(config: SimConfig, refine=1, amplitude=None):
    """Bump run and replay over ``harness.windows`` windows; C0 and C1 decay reports."""
    start = time.perf_counter()
    s = prepare(config, refine)
    periodic, build_report = build(config, s)
    n_win = config["harness.windows"]
    t_final = n_win * s.T0
    save = s.T0 / config["harness.slices_per_window"]
    replay, _ = _run(s, InitialData.from_periodic(periodic), t_final, save)
    traj, cert = _run(s, bump_initial(config, periodic, amplitude), t_final, save)
    factors = integrating_factors(s.profile, s.gas, config.damping().alpha_star)
    bound = admissible_rate_bound(s.bc.K, factors.bound)
    c0 = decay_fit(traj, periodic, s.T0, replay=replay, xi_bound=bound, n_windows=n_win)
    c1 = c1_decay_fit(traj, periodic, s.T0, replay=replay, n_windows=n_win)
    return {
        "config": config.echo(),
        "T0": s.T0,
        "windows": c0.to_dict()["windows"],
        "xi_hat": c0.xi_hat,
        "xi_bound": bound,
        "floor": c0.floor,
        "fit_residual": c0.fit_residual,
        "monotone": c0.monotone,
        "degenerate": c0.degenerate,
        "c0": c0.to_dict(),
        "c1": c1.to_dict(),
        "factor_bound": factors.bound,
        "builder": {"iterations": build_report.iterations, "residual": build_report.residual},
        "certificate": cert.to_dict(),
        "refine": refine,
        "wall_time": time.perf_counter() - start,
    }, (traj, replay, periodic, s)


def last_period_distance(traj: WindowField, periodic: PeriodicField, P):
    """sup distance over the saved slices in the last period of ``traj``."""
    m = traj.t >= traj.t[-1] - P - 1e-12
    dev = traj.data[m] - _periodic_slices(periodic, traj.t[m])
    return float(np.max(np.abs(dev)))


def cross_validate(config: SimConfig, refine=1, builder_period=None):
    """Builder orbit vs the last period of a 10 T0 run from (0, M0, 0).

    ``builder_period`` replaces P in the builder leg only (negative control).
    """
    start = time.perf_counter()
    s = prepare(config, refine)
    sb = prepare(config, refine, period=builder_period) if builder_period is not None else s
    periodic, build_report = build(config, sb)
    t_final = 10.0 * s.T0
    save = min(s.T0 / config["harness.slices_per_window"], s.grid.P / 32.0)
    M0 = s.bc.M0(s.profile)
    zero, cert = _run(s, InitialData.constant(s.profile.n_x, (0.0, M0, 0.0)), t_final, save)
    # the floor belongs to the simulated problem: its own orbit replayed through the solver
    reference = periodic if sb is s else build(config, s)[0]
    replay, _ = _run(s, InitialData.from_periodic(reference), t_final, save)
    distance = last_period_distance(zero, periodic, s.grid.P)
    floor = last_period_distance(replay, reference, s.grid.P)
    return {
        "config": config.echo(),
        "T0": s.T0,
        "refine": refine,
        "builder_period": sb.grid.P,
        "distance": distance,
        "floor": floor,
        "ratio_to_floor": distance / floor if floor > 0 else (0.0 if distance == 0 else math.inf),
        "passed": bool(distance <= XVAL_FACTOR * floor) if floor > 0 else bool(distance <= 1e-12),
        "builder": {"iterations": build_report.iterations, "residual": build_report.residual},
        "certificate": cert.to_dict(),
        "wall_time": time.perf_counter() - start,
    }


class _PointSampler:
    """Bilinear samples of a saved trajectory at single points."""

    def __init__(self, traj: WindowField):
        self.traj = traj
        self.dx = traj.dx
        self.n_x = traj.n_x

    def __call__(self, t, x):
        tr = self.traj
        n = int(np.clip(np.searchsorted(tr.t, t, side="right") - 1, 0, len(tr.t) - 2))
        w = min(max((t - tr.t[n]) / (tr.t[n + 1] - tr.t[n]), 0.0), 1.0)
        k = min(max(int(x / self.dx), 0), self.n_x - 2)
        v = x / self.dx - k
        a, b = tr.data[n, :, k:k + 2], tr.data[n + 1, :, k:k + 2]
        lo = a[:, 0] + v * (a[:, 1] - a[:, 0])
        hi = b[:, 0] + v * (b[:, 1] - b[:, 0])
        return lo + w * (hi - lo)


def entropy_drift(traj: WindowField, profile: SteadyProfile, n_paths=100, t_span=None):
    """Max change of Phi2 along family-2 characteristics started at t0, x_k = (k + 1/2) L / n.

    Paths are traced with the trajectory's own save interval and stop at
    x = L or at ``t0 + t_span``.
    """
    sample = _PointSampler(traj)
    u = profile.u
    x_grid = profile.x

    def lam2(t, x):
        p = sample(t, x)
        return float(np.interp(x, x_grid, u)) + 0.5 * (p[0] + p[2])

    t0 = traj.t0
    t_end = float(traj.t[-1]) if t_span is None else min(float(traj.t[-1]), t0 + t_span)
    h = float(np.min(np.diff(traj.t)))
    drift = 0.0
    for k in range(n_paths):
        x0 = (k + 0.5) * profile.L / n_paths
        path = trace_in_t(lam2, (t0, x0), t_end, h, profile.L, family=2)
        t1, x1 = path.end
        change = abs(sample(t1, x1)[1] - sample(t0, x0)[1])
        drift = max(drift, float(change))
    return drift


def entropy_transport(config: SimConfig, refine=1, saves_per_step=4):
    """Bump run over one window, densely saved; drift of Phi2 along 100 family-2 paths."""
    s = prepare(config, refine)
    periodic, _ = build(config, s)
    traj, cert = simulate(bump_initial(config, periodic), s.bc, s.profile, s.gas, s.T0, cfl=s.cfl,
                          save_stride=saves_per_step)
    drift = entropy_drift(traj, s.profile, config["harness.n_paths"])
    h = s.profile.dx + cert.dt
    return {"refine": refine, "drift": drift, "dx": s.profile.dx, "dt": cert.dt, "C": drift / h, "T0": s.T0}
