"""
Discrete fields on (t, x) grids.

Time-periodic fields (one period, wrap-around in t) and time-windowed
trajectories are kept as separate types.  Arrays are indexed ``[t, x]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UsageError


def central_diff(y, dx, axis=-1):
    """Second-order derivative along ``axis``: central inside, one-sided at the ends."""
    y = np.asarray(y, dtype=float)
    n = y.shape[axis]
    if n < 3:
        raise UsageError("central_diff needs at least 3 nodes")
    y = np.moveaxis(y, axis, -1)
    d = np.empty_like(y)
    d[..., 1:-1] = (y[..., 2:] - y[..., :-2]) / (2.0 * dx)
    # difference form so constants give exactly zero
    d[..., 0] = (3.0 * (y[..., 1] - y[..., 0]) - (y[..., 2] - y[..., 1])) / (2.0 * dx)
    d[..., -1] = (3.0 * (y[..., -1] - y[..., -2]) - (y[..., -2] - y[..., -3])) / (2.0 * dx)
    return np.moveaxis(d, -1, axis)


def periodic_diff(y, dt, axis=0):
    """Second-order central difference along a periodic axis."""
    return (np.roll(y, -1, axis=axis) - np.roll(y, 1, axis=axis)) / (2.0 * dt)


@dataclass(frozen=True)
class PeriodicGrid:
    P: float
    n_t: int
    L: float
    n_x: int

    def __post_init__(self):
        if self.n_t < 8 or self.n_x < 8:
            raise DomainError(f"grid needs n_t >= 8 and n_x >= 8 (got {self.n_t}, {self.n_x})")
        if not (self.P > 0 and self.L > 0):
            raise DomainError("period and length must be positive")

    @property
    def dt(self):
        return self.P / self.n_t

    @property
    def dx(self):
        return self.L / (self.n_x - 1)

    @property
    def t(self):
        return np.arange(self.n_t) * self.dt

    @property
    def x(self):
        return np.linspace(0.0, self.L, self.n_x)

    def refine(self, k=2):
        return PeriodicGrid(self.P, self.n_t * k, self.L, (self.n_x - 1) * k + 1)


def periodic_weights(t, P, n_t):
    """Indices and weights for linear interpolation on a periodic grid.

    Returns ``(i0, i1, w)`` with value = (1 - w) * y[i0] + w * y[i1].
    """
    s = np.mod(np.asarray(t, dtype=float) / (P / n_t), n_t)
    i0 = np.floor(s).astype(np.intp)
    w = s - i0
    i0 = np.mod(i0, n_t)  # s can round up to exactly n_t
    return i0, np.mod(i0 + 1, n_t), w


def periodic_interp(y, t, P):
    """Interpolate samples ``y[j] = f(j P / n)`` of a P-periodic function at ``t``."""
    y = np.asarray(y)
    i0, i1, w = periodic_weights(t, P, len(y))
    return y[i0] + w * (y[i1] - y[i0])


def _check_x(x, L):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > L) or np.any(~np.isfinite(xa)):
        raise DomainError(f"x outside [0, {L}]")
    return xa


def _x_weights(x, dx, n_x):
    s = x / dx
    k0 = np.clip(np.floor(s).astype(np.intp), 0, n_x - 2)
    return k0, s - k0


@dataclass(frozen=True)
class PeriodicField:
    """Perturbation invariants (phi1, phi2, phi3) over one period."""

    grid: PeriodicGrid
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray

    def __post_init__(self):
        shape = (self.grid.n_t, self.grid.n_x)
        for name in ("phi1", "phi2", "phi3"):
            a = getattr(self, name)
            if a.shape != shape:
                raise UsageError(f"{name} has shape {a.shape}, expected {shape}")
            if not np.all(np.isfinite(a)):
                raise DomainError(f"{name} has non-finite entries")
            a.setflags(write=False)

    @classmethod
    def constant(cls, grid, values):
        shape = (grid.n_t, grid.n_x)
        return cls(grid, *(np.full(shape, float(v)) for v in values))

    @property
    def components(self):
        return (self.phi1, self.phi2, self.phi3)

    def stacked(self):
        return np.stack(self.components)

    def sample(self, t, x):
        """Bilinear interpolation, periodic in t; exact at nodes."""
        xa = _check_x(x, self.grid.L)
        i0, i1, w = periodic_weights(t, self.grid.P, self.grid.n_t)
        k0, v = _x_weights(xa, self.grid.dx, self.grid.n_x)
        out = []
        for a in self.components:
            lo = a[i0, k0] + v * (a[i0, k0 + 1] - a[i0, k0])
            hi = a[i1, k0] + v * (a[i1, k0 + 1] - a[i1, k0])
            out.append(lo + w * (hi - lo))
        return tuple(out)

    def slice_at(self, t):
        """All three components at time ``t`` on the x grid, shape (3, n_x)."""
        i0, i1, w = periodic_weights(t, self.grid.P, self.grid.n_t)
        st = self.stacked()
        return st[:, i0, :] + w * (st[:, i1, :] - st[:, i0, :])

    def dx(self, i):
        return dx_central(self, i)


def sample(field: PeriodicField, t, x):
    return field.sample(t, x)


def dx_central(field, i):
    """d/dx of component ``i`` (1-based) with second-order stencils."""
    if i not in (1, 2, 3):
        raise UsageError("component index must be 1, 2 or 3")
    a = field.components[i - 1]
    return central_diff(a, field.grid.dx, axis=-1)


def sup_distance(a, b, per_component=False):
    """Max-norm distance between two fields on identical grids."""
    if a.grid != b.grid:
        raise UsageError(f"grid mismatch: {a.grid} vs {b.grid}")
    d = [float(np.max(np.abs(p - q))) for p, q in zip(a.components, b.components)]
    return tuple(d) if per_component else max(d)


@dataclass(frozen=True)
class WindowField:
    """Saved slices of a time-domain trajectory: ``data[n, i, k]`` at time ``t[n]``."""

    t: np.ndarray
    L: float
    n_x: int
    data: np.ndarray
    dt: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.data.shape != (len(self.t), 3, self.n_x):
            raise UsageError(f"data shape {self.data.shape} does not match t/x layout")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise UsageError("saved times must increase")
        self.t.setflags(write=False)
        self.data.setflags(write=False)

    @property
    def x(self):
        return np.linspace(0.0, self.L, self.n_x)

    @property
    def dx(self):
        return self.L / (self.n_x - 1)

    @property
    def t0(self):
        return float(self.t[0])

    @property
    def n_steps(self):
        return len(self.t)

    def slice_at(self, t):
        """Linear interpolation in t between saved slices."""
        if t < self.t[0] - 1e-12 or t > self.t[-1] + 1e-12:
            raise DomainError(f"t={t} outside saved window [{self.t[0]}, {self.t[-1]}]")
        n = int(np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2))
        w = (t - self.t[n]) / (self.t[n + 1] - self.t[n])
        w = min(max(w, 0.0), 1.0)
        return self.data[n] + w * (self.data[n + 1] - self.data[n])

    def sample(self, t, x):
        xa = _check_x(x, self.L)
        s = self.slice_at(t)
        return tuple(np.interp(xa, self.x, s[i]) for i in range(3))
