"""
Steady subsonic Fanno background flow.

The steady equations in (u, c) reduce to

    u' = alpha u**2 / (u**2 - c**2),    c' = -(gamma - 1)/2 * (c/u) * u',

with constant entropy.  They are integrated with classical RK4 on a uniform
grid; choking is detected when c - u drops below a margin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ChokingError, DomainError
from .gas_model import GasModel, PrimitiveState, density_from_sound_speed, wave_speeds

NO_CHOKING = math.inf
DEFAULT_NX = 4096
DEFAULT_MARGIN = 1e-6
DEFAULT_L_MAX = 1e6


@dataclass(frozen=True)
class DampingProfile:
    """Polynomial damping alpha(x) = sum coeffs[k] x**k (constant if one coefficient).

    ``alpha_star`` is the exact minimum of alpha over [0, L] and is filled in by
    :meth:`certify`; ``alpha <= 0`` on the whole interval is enforced there.
    """

    coeffs: tuple = (0.0,)
    alpha_star: float | None = None

    @property
    def kind(self):
        return "constant" if len(self.coeffs) == 1 else "polynomial"

    @classmethod
    def constant(cls, value, L=1.0):
        return cls((float(value),)).certify(L)

    def __call__(self, x):
        if len(self.coeffs) == 1:
            return np.full(np.shape(x), self.coeffs[0]) if np.ndim(x) else self.coeffs[0]
        return npoly.polyval(x, self.coeffs)

    def scalar(self, x: float) -> float:
        acc = 0.0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def bounds(self, L):
        """Exact (min, max) of alpha on [0, L] via the critical points."""
        candidates = [0.0, float(L)]
        if len(self.coeffs) > 2:
            for r in npoly.polyroots(npoly.polyder(self.coeffs)):
                if abs(r.imag) < 1e-12 and 0.0 < r.real < L:
                    candidates.append(r.real)
        vals = [self.scalar(x) for x in candidates]
        return min(vals), max(vals)

    def certify(self, L):
        lo, hi = self.bounds(L)
        if hi > 0.0:
            raise DomainError(f"damping must satisfy alpha(x) <= 0 on [0, {L}]; max is {hi}")
        if self.alpha_star is not None and self.alpha_star > lo:
            raise DomainError(f"alpha_star={self.alpha_star} is not a lower bound (min alpha = {lo})")
        return DampingProfile(tuple(float(a) for a in self.coeffs), lo if self.alpha_star is None else self.alpha_star)


@dataclass(frozen=True)
class InflowCondition:
    u_minus: float
    c_minus: float
    S_minus: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.u_minus < self.c_minus):
            raise DomainError(
                f"inflow must be subsonic with 0 < u_minus < c_minus (got u={self.u_minus}, c={self.c_minus})"
            )

    def rho_minus(self, gas: GasModel):
        return float(density_from_sound_speed(self.c_minus, self.S_minus, gas))


@dataclass(frozen=True)
class SteadyProfile:
    x: np.ndarray
    u: np.ndarray
    c: np.ndarray
    S: float
    gamma: float
    alpha: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("x", "u", "c", "alpha"):
            getattr(self, name).setflags(write=False)

    @property
    def L(self):
        return float(self.x[-1])

    @property
    def n_x(self):
        return len(self.x)

    @property
    def dx(self):
        return self.L / (self.n_x - 1)

    def u_at(self, x):
        return np.interp(x, self.x, self.u)

    def c_at(self, x):
        return np.interp(x, self.x, self.c)

    @property
    def r1(self):
        return self.u - 2.0 * self.c / (self.gamma - 1.0)

    @property
    def r3(self):
        return self.u + 2.0 * self.c / (self.gamma - 1.0)

    @property
    def speeds(self):
        return wave_speeds(self.r1, self.r3, self.gamma)

    def primitive(self, gas: GasModel) -> PrimitiveState:
        S = np.full_like(self.u, self.S)
        return PrimitiveState(density_from_sound_speed(self.c, S, gas), self.u, S)

    def resample(self, n_x):
        """Profile on a different uniform grid (by interpolation)."""
        x = np.linspace(0.0, self.L, n_x)
        return SteadyProfile(x, self.u_at(x), self.c_at(x), self.S, self.gamma, np.interp(x, self.x, self.alpha))


def _rhs(alpha, u, c, gamma):
    du = alpha * u * u / (u * u - c * c)
    return du, -0.5 * (gamma - 1.0) * c / u * du


def solve_fanno(gas: GasModel, damping: DampingProfile, inflow: InflowCondition, L: float,
                n_x: int = DEFAULT_NX, margin: float | None = None) -> SteadyProfile:
    """Integrate the steady flow on [0, L] with ``n_x`` uniform nodes.

    Raises :class:`ChokingError` if c - u falls below ``margin`` (default
    1e-6 * c_minus) before x = L.
    """
    if not L > 0:
        raise DomainError("duct length must be positive")
    if n_x < 2:
        raise DomainError("need at least two nodes")
    if margin is None:
        margin = DEFAULT_MARGIN * inflow.c_minus
    gamma = gas.gamma
    h = L / (n_x - 1)
    xs = np.linspace(0.0, L, n_x)
    us = np.empty(n_x)
    cs = np.empty(n_x)
    u, c = float(inflow.u_minus), float(inflow.c_minus)
    us[0], cs[0] = u, c
    a = damping.scalar
    for k in range(n_x - 1):
        x = k * h
        a0, am, a1 = a(x), a(x + 0.5 * h), a(x + h)
        with np.errstate(all="ignore"):
            try:
                k1u, k1c = _rhs(a0, u, c, gamma)
                k2u, k2c = _rhs(am, u + 0.5 * h * k1u, c + 0.5 * h * k1c, gamma)
                k3u, k3c = _rhs(am, u + 0.5 * h * k2u, c + 0.5 * h * k2c, gamma)
                k4u, k4c = _rhs(a1, u + h * k3u, c + h * k3c, gamma)
            except ZeroDivisionError:
                raise ChokingError(f"flow reached sonic speed near x={x:.10g}", x_choke=x) from None
        u_new = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        c_new = c + h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        if not (math.isfinite(u_new) and math.isfinite(c_new)) or c_new - u_new < margin or u_new < u or u_new <= 0:
            raise ChokingError(f"flow chokes before x={x + h:.10g} (L={L})", x_choke=x + h)
        u, c = u_new, c_new
        us[k + 1], cs[k + 1] = u, c
    return SteadyProfile(xs, us, cs, float(inflow.S_minus), gamma, np.asarray(damping(xs), dtype=float))


def max_duct_length(gas: GasModel, damping: DampingProfile, inflow: InflowCondition, tol: float = 1e-8,
                    n_x: int = DEFAULT_NX, L_max: float = DEFAULT_L_MAX, margin: float | None = None) -> float:
    """Largest L for which :func:`solve_fanno` succeeds, bracketed to ``tol``.

    Returns :data:`NO_CHOKING` (``inf``) when the flow does not choke up to ``L_max``.
    """

    def ok(L):
        try:
            solve_fanno(gas, damping, inflow, L, n_x=n_x, margin=margin)
        except ChokingError:
            return False
        return True

    if all(a == 0.0 for a in damping.coeffs):
        return NO_CHOKING
    lo, hi = 0.0, 1.0
    while ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > L_max:
            return NO_CHOKING if ok(L_max) else _bisect(ok, lo, L_max, tol)
    return _bisect(ok, lo, hi, tol)


def _bisect(ok, lo, hi, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def steady_riemann(profile: SteadyProfile, gas: GasModel | None = None):
    """Steady Riemann invariants and extreme wave speeds: (r1, r3, lam1, lam3)."""
    gamma = profile.gamma if gas is None else gas.gamma
    k = 2.0 / (gamma - 1.0)
    r1 = profile.u - k * profile.c
    r3 = profile.u + k * profile.c
    lam1, _, lam3 = wave_speeds(r1, r3, gamma)
    return r1, r3, lam1, lam3


def steady_residual(profile: SteadyProfile):
    """Discrete residuals of lam1 r1' = alpha/2 (r1+r3) and lam3 r3' = alpha/2 (r1+r3)."""
    from .field_grid import central_diff

    r1, r3, lam1, lam3 = steady_riemann(profile)
    rhs = 0.5 * profile.alpha * (r1 + r3)
    return lam1 * central_diff(r1, profile.dx) - rhs, lam3 * central_diff(r3, profile.dx) - rhs
