"""
Nonlinear time-domain solver for the perturbation system.

Semi-Lagrangian (CIR) update: every family is traced back over one step
along its own speed, linearly interpolated at the foot, and the source is
added at the foot.  Incoming families are then overwritten by the boundary
feedback laws, in dependency order (Phi1(0) and Phi3(L) first).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError
from .field_grid import PeriodicField, WindowField, central_diff
from .gas_model import GasModel
from .periodic_builder import BoundarySpec
from .perturbation import Background
from .steady_fanno import SteadyProfile

CFL_MAX = 0.9
PROVENANCES = ("periodic-slice", "periodic-slice-plus-bump", "explicit")


@dataclass(frozen=True)
class InitialData:
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")
        for a in (self.phi1, self.phi2, self.phi3):
            if not np.all(np.isfinite(a)):
                raise DomainError("initial data must be finite")

    @property
    def corner_checked(self):
        """Explicit data is not checked for corner compatibility."""
        return self.provenance != "explicit"

    def stacked(self):
        return np.stack([self.phi1, self.phi2, self.phi3]).astype(float)

    @classmethod
    def from_periodic(cls, field: PeriodicField, t0=0.0):
        s = field.slice_at(t0)
        return cls(s[0].copy(), s[1].copy(), s[2].copy(), "periodic-slice")

    @classmethod
    def with_bump(cls, field: PeriodicField, amplitude, support=(0.1, 0.9), components=(1, 2, 3), t0=0.0):
        """Periodic slice plus a C1 sin**2 bump supported in ``support`` (fractions of L)."""
        a, b = support
        if not (0.1 <= a < b <= 0.9):
            raise DomainError("bump support must lie within [0.1 L, 0.9 L]")
        x = field.grid.x / field.grid.L
        bump = np.where((x > a) & (x < b), np.sin(np.pi * (x - a) / (b - a)) ** 2, 0.0) * amplitude
        s = field.slice_at(t0).copy()
        for i in components:
            s[i - 1] += bump
        return cls(s[0], s[1], s[2], "periodic-slice-plus-bump")

    @classmethod
    def constant(cls, n_x, values=(0.0, 0.0, 0.0)):
        return cls(*(np.full(n_x, float(v)) for v in values), provenance="explicit")


@dataclass(frozen=True)
class CflCertificate:
    dt: float
    dx: float
    max_speed: float
    cfl: float

    def __post_init__(self):
        if self.cfl > CFL_MAX + 1e-12:
            raise UsageError(f"CFL number {self.cfl:.4f} exceeds {CFL_MAX}")

    def to_dict(self):
        return {"dt": self.dt, "dx": self.dx, "max_speed": self.max_speed, "cfl": self.cfl}


def guard_speed(bg: Background):
    """Speed bound over the guard region used to fix the time step."""
    return bg.max_speed() + bg.guard_radius()


def _foot(x, lam, dt, L):
    xm = np.clip(x - 0.5 * dt * lam, 0.0, L)
    lam_mid = np.interp(xm, x, lam)
    return np.clip(x - dt * lam_mid, 0.0, L)


def step(current, t, dt, profile: SteadyProfile, bc: BoundarySpec, gas: GasModel,
         background: Background | None = None, H=None):
    """Advance a (3, n_x) slice from ``t`` to ``t + dt``."""
    bg = background or Background.from_profile(profile, gas)
    p1, p2, p3 = current
    x = bg.x
    dx = bg.dx
    lam1, lam2, lam3 = bg.speeds(p1, p3)
    bg.check_guard(lam1, lam2, where=f"at t={t:.6g}")
    speed = max(float(np.max(np.abs(lam1))), float(np.max(np.abs(lam3))))
    if dt * speed / dx > CFL_MAX + 1e-12:
        raise UsageError(f"CFL violation at t={t:.6g}: {dt * speed / dx:.4f} > {CFL_MAX}")
    s1, s3 = bg.sources(p1, p2, p3, central_diff(p2, dx))

    f1 = _foot(x, lam1, dt, bg.L)
    f2 = _foot(x, lam2, dt, bg.L)
    f3 = _foot(x, lam3, dt, bg.L)
    n1 = np.interp(f1, x, p1) + dt * np.interp(f1, x, s1)
    n2 = np.interp(f2, x, p2)
    n3 = np.interp(f3, x, p3) + dt * np.interp(f3, x, s3)

    H1, H2, H3 = H if H is not None else bc.H(profile)
    t1 = t + dt
    n1[-1] = H1(t1, bc.P) + bc.K1 * n3[-1]
    n2[0] = H2(t1, bc.P) + bc.K2 * n1[0]
    n3[0] = H3(t1, bc.P) + bc.K3 * n1[0]
    return np.stack([n1, n2, n3])


def certify_dt(bg: Background, cfl=CFL_MAX):
    if not 0 < cfl <= CFL_MAX:
        raise UsageError(f"cfl must lie in (0, {CFL_MAX}]")
    vmax = guard_speed(bg)
    dt = cfl * bg.dx / vmax
    return CflCertificate(dt, bg.dx, vmax, cfl)


def simulate(init: InitialData, bc: BoundarySpec, profile: SteadyProfile, gas: GasModel, t_final,
             cfl=CFL_MAX, save_stride=1, t0=0.0, save_every=None):
    """Run from ``t0`` to ``t0 + t_final``; returns ``(WindowField, CflCertificate)``.

    The step is fixed once from the guard-region speed; the last step is
    shortened to land on ``t0 + t_final``.  Every ``save_stride``-th slice is
    kept (``save_every``, a time interval, overrides the stride).
    """
    if not t_final > 0:
        raise UsageError("t_final must be positive")
    bg = Background.from_profile(profile, gas)
    state = init.stacked()
    if state.shape != (3, profile.n_x):
        raise UsageError(f"initial data has {state.shape[1]} nodes, profile has {profile.n_x}")
    cert = certify_dt(bg, cfl)
    n_steps = int(math.ceil(t_final / cert.dt - 1e-9))
    dt = t_final / n_steps  # uniform steps that land exactly on t_final
    cert = CflCertificate(dt, cert.dx, cert.max_speed, dt * cert.max_speed / cert.dx)
    if save_every is not None:
        save_stride = max(1, int(save_every / dt))
    H = bc.H(profile)
    times = [t0]
    slices = [state.copy()]
    for n in range(1, n_steps + 1):
        state = step(state, t0 + (n - 1) * dt, dt, profile, bc, gas, background=bg, H=H)
        if n % save_stride == 0 or n == n_steps:
            times.append(t0 + n * dt)
            slices.append(state)
    traj = WindowField(np.array(times), profile.L, profile.n_x, np.array(slices), dt=dt,
                       meta={"save_stride": save_stride, "n_steps": n_steps, "provenance": init.provenance})
    return traj, cert


def t_zero_horizon(profile: SteadyProfile, gas: GasModel, widen=0.0):
    """Traversal time L / min_i |lambda_i| with all speeds reduced by ``widen``."""
    bg = Background.from_profile(profile, gas)
    slowest = min(float(np.min(np.abs(l))) for l in (bg.lam1, bg.lam2, bg.lam3)) - widen
    if slowest <= 0:
        raise DomainError("guard widening reaches zero speed")
    return profile.L / slowest
