"""
Characteristic curves of frozen-coefficient fields.

Two orientations: t as a function of x (dt/dx = mu, used by the x-marching
builder) and x as a function of t (dx/dt = lambda, used on time-domain
solutions).  Both use the RK2 midpoint rule.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InstabilityError
from .field_grid import periodic_weights

REACHED = "reached"
LEFT_DOMAIN = "left_domain"


@dataclass(frozen=True)
class CharPath:
    family: int
    t: np.ndarray
    x: np.ndarray
    termination: str

    @property
    def end(self):
        return float(self.t[-1]), float(self.x[-1])


def _check_slope(value, bound, where):
    if not np.isfinite(value) or (bound is not None and abs(value) > bound):
        raise InstabilityError(f"characteristic slope {value} exceeds bound {bound} at {where}")
    return value


def trace_in_x(mu_sampler, start, x_target, dx, mu_max=None, family=0):
    """Integrate dt/dx = mu(t, x) from ``start = (t0, x0)`` to ``x_target``.

    The step is ``dx`` in magnitude (shortened for the last step).  A slope with
    ``|mu| > mu_max`` raises :class:`InstabilityError`.
    """
    t, x = map(float, start)
    if dx <= 0:
        raise DomainError("dx must be positive")
    direction = 1.0 if x_target >= x else -1.0
    ts, xs = [t], [x]
    while direction * (x_target - x) > 1e-14 * max(1.0, abs(x_target)):
        h = direction * min(dx, abs(x_target - x))
        m0 = _check_slope(mu_sampler(t, x), mu_max, (t, x))
        mm = _check_slope(mu_sampler(t + 0.5 * h * m0, x + 0.5 * h), mu_max, (t, x))
        t += h * mm
        x = x_target if abs(x_target - (x + h)) < 1e-14 * max(1.0, abs(x_target)) else x + h
        ts.append(t)
        xs.append(x)
    return CharPath(family, np.array(ts), np.array(xs), REACHED)


def trace_in_t(lambda_sampler, start, t_target, dt, L, lam_max=None, family=0):
    """Integrate dx/dt = lambda(t, x) from ``start`` to ``t_target``.

    The path is clipped at x = 0 or x = L and tagged ``left_domain``.
    """
    t, x = map(float, start)
    if not 0.0 <= x <= L:
        raise DomainError(f"start x={x} outside [0, {L}]")
    if dt <= 0:
        raise DomainError("dt must be positive")
    direction = 1.0 if t_target >= t else -1.0
    ts, xs = [t], [x]
    tag = REACHED
    while direction * (t_target - t) > 1e-14 * max(1.0, abs(t_target)):
        h = direction * min(dt, abs(t_target - t))
        l0 = _check_slope(lambda_sampler(t, x), lam_max, (t, x))
        xm = min(max(x + 0.5 * h * l0, 0.0), L)
        lm = _check_slope(lambda_sampler(t + 0.5 * h, xm), lam_max, (t, x))
        x_new = x + h * lm
        t_new = t + h
        if x_new < 0.0 or x_new > L:
            edge = 0.0 if x_new < 0.0 else L
            # linear cut of the last segment at the boundary
            frac = (edge - x) / (x_new - x) if x_new != x else 0.0
            ts.append(t + frac * h)
            xs.append(edge)
            tag = LEFT_DOMAIN
            break
        t, x = t_new, x_new
        ts.append(t)
        xs.append(x)
    return CharPath(family, np.array(ts), np.array(xs), tag)


def column_feet(mu, P, dx, direction):
    """RK2 feet of all characteristics crossing one x-cell, vectorized.

    ``mu`` is an ``(n_t, n_x)`` array of dt/dx slopes, periodic in t with
    period ``P``.  For ``direction=+1`` the node ``(t_j, x_{k+1})`` is traced
    back to column ``k``; for ``direction=-1`` the node ``(t_j, x_k)`` is
    traced back to column ``k+1``.  Returns ``(t_foot, t_mid)``, each of
    shape ``(n_t, n_x - 1)`` and indexed by the cell ``k``; ``t_mid`` is the
    time at the cell midpoint, used for midpoint quadrature.
    """
    n_t = mu.shape[0]
    t = (np.arange(n_t) * (P / n_t))[:, None]
    h = direction * dx  # x_dst - x_src
    if direction > 0:
        mu_dst = mu[:, 1:]
    else:
        mu_dst = mu[:, :-1]
    t_half = t - 0.5 * h * mu_dst
    mu_mid = 0.5 * (interp_columns(mu[:, :-1], t_half, P) + interp_columns(mu[:, 1:], t_half, P))
    t_foot = t - h * mu_mid
    t_mid = t - 0.5 * h * mu_mid
    return t_foot, t_mid


def interp_columns(a, tq, P):
    """Periodic linear interpolation of each column of ``a`` at times ``tq[:, k]``."""
    i0, i1, w = periodic_weights(tq, P, a.shape[0])
    cols = np.arange(a.shape[1])[None, :]
    lo = a[i0, cols]
    return lo + w * (a[i1, cols] - lo)
