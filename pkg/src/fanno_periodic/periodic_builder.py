"""
Time-periodic solution by linearized x-marching iteration.

Each iteration freezes the coefficients at the previous level and marches

* family 1 from x = L to 0 (in the integrating-factor variable F1 * Phi1),
* family 2 from x = 0 to L (pure transport),
* family 3 from x = 0 to L (in F3 * Phi3),

along characteristics dt/dx = mu_i, with periodic interpolation in t.  The
iteration starts from (0, M0, 0).
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .characteristics import column_feet, interp_columns
from .errors import ConvergenceError, DomainError
from .field_grid import PeriodicField, PeriodicGrid, central_diff, periodic_diff, periodic_weights
from .gas_model import GasModel
from .perturbation import Background
from .steady_fanno import SteadyProfile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FourierSeries:
    """mean + sum a * sin(2 pi k t / P + theta) over ``terms = ((a, k, theta), ...)``."""

    mean: float = 0.0
    terms: tuple = ()

    def __post_init__(self):
        for term in self.terms:
            if len(term) != 3 or int(term[1]) != term[1] or term[1] < 1:
                raise DomainError(f"Fourier term {term} must be (amplitude, positive integer harmonic, phase)")

    def __call__(self, t, P):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, float(self.mean))
        for a, k, th in self.terms:
            out = out + a * np.sin(2.0 * math.pi * k * t / P + th)
        return out if out.ndim else float(out)

    def derivative(self, t, P):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for a, k, th in self.terms:
            w = 2.0 * math.pi * k / P
            out = out + a * w * np.cos(w * t + th)
        return out if out.ndim else float(out)

    def shifted(self, offset):
        return FourierSeries(self.mean + offset, self.terms)

    @property
    def oscillation(self):
        """Upper bound of |f - mean|."""
        return float(sum(abs(a) for a, _, _ in self.terms))


@dataclass(frozen=True)
class BoundarySpec:
    """Period, boundary signals G_i and feedback gains.

    The boundary laws in perturbation form are
    Phi1(t, L) = H1 + K1 Phi3(t, L), Phi2(t, 0) = H2 + K2 Phi1(t, 0),
    Phi3(t, 0) = H3 + K3 Phi1(t, 0), where H_i = G_i minus the steady invariant
    at the respective boundary.
    """

    P: float
    G1: FourierSeries
    G2: FourierSeries
    G3: FourierSeries
    K1: float = 0.0
    K2: float = 0.0
    K3: float = 0.0

    def __post_init__(self):
        if not self.P > 0:
            raise DomainError("period P must be positive")
        if abs(self.K1) > 1.0 or abs(self.K3) > 1.0 or abs(self.K1 * self.K3) >= 1.0:
            raise DomainError(
                f"gains violate |K1|<=1, |K3|<=1, |K1*K3|<1 (K1={self.K1}, K3={self.K3})"
            )
        if abs(self.K1) == 1.0 or abs(self.K3) == 1.0:
            warnings.warn("|K1| = 1 or |K3| = 1 lies outside the validated regime", stacklevel=2)
        if abs(self.K2) > 1.0:
            warnings.warn("|K2| > 1: convergence is not covered by the small-gain setting", stacklevel=2)

    @property
    def gains(self):
        return (self.K1, self.K2, self.K3)

    @property
    def K(self):
        return max(abs(self.K1), abs(self.K3))

    @staticmethod
    def offsets(profile: SteadyProfile):
        k = 2.0 / (profile.gamma - 1.0)
        r1_L = profile.u[-1] - k * profile.c[-1]
        r3_0 = profile.u[0] + k * profile.c[0]
        return float(r1_L), float(profile.S), float(r3_0)

    def H(self, profile: SteadyProfile):
        """Perturbation boundary signals (H1, H2, H3) as Fourier series."""
        o = self.offsets(profile)
        return tuple(g.shifted(-oi) for g, oi in zip((self.G1, self.G2, self.G3), o))

    def M0(self, profile: SteadyProfile):
        return self.H(profile)[1].mean

    @classmethod
    def from_perturbation(cls, profile, P, H1, H2, H3, K1=0.0, K2=0.0, K3=0.0):
        o = cls.offsets(profile)
        return cls(P, H1.shifted(o[0]), H2.shifted(o[1]), H3.shifted(o[2]), K1, K2, K3)

    def with_period(self, P):
        return BoundarySpec(P, self.G1, self.G2, self.G3, self.K1, self.K2, self.K3)


@dataclass(frozen=True)
class IntegratingFactors:
    F1: np.ndarray
    F3: np.ndarray
    bound: float  # the a priori upper bound for both factors
    mu_bound: float


def integrating_factors(profile: SteadyProfile, gas: GasModel, alpha_star=None) -> IntegratingFactors:
    """F1(x) = exp(int_x^L a11 mu1), F3(x) = exp(-int_0^x a33 mu3) by the trapezoid rule.

    ``bound`` is exp(-alpha_star/2 * Kmu * L * (1 + (gamma+1)/2 * Kmu * c_minus))
    with Kmu the largest |1/lambda_i| over the background.
    """
    bg = Background.from_profile(profile, gas)
    dx = profile.dx
    f1 = bg.a11 * bg.mu1
    f3 = bg.a33 * bg.mu3
    seg1 = 0.5 * dx * (f1[1:] + f1[:-1])
    seg3 = 0.5 * dx * (f3[1:] + f3[:-1])
    int1 = np.concatenate([np.cumsum(seg1[::-1])[::-1], [0.0]])
    int3 = np.concatenate([[0.0], np.cumsum(seg3)])
    F1 = np.exp(int1)
    F3 = np.exp(-int3)
    if alpha_star is None:
        alpha_star = float(np.min(profile.alpha))
    kmu = bg.mu_bound()
    c_minus = float(profile.c[0])
    bound = math.exp(-0.5 * alpha_star * kmu * profile.L * (1.0 + 0.5 * (gas.gamma + 1.0) * kmu * c_minus))
    return IntegratingFactors(F1, F3, bound, kmu)


@dataclass
class BuildReport:
    iterations: int = 0
    diffs: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    residual: float = math.inf
    converged: bool = False
    wall_time: float = 0.0
    M0: float = 0.0
    factor_bound: float = math.nan
    mu_bound: float = math.nan
    second_differences: dict = field(default_factory=dict)

    @property
    def eta(self):
        """Geometric mean of the tail contraction ratios (l >= 3)."""
        tail = [r for r in self.ratios[2:] if r > 0 and math.isfinite(r)]
        if not tail:
            return math.nan
        return float(math.exp(sum(math.log(r) for r in tail) / len(tail)))

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "diffs": list(self.diffs),
            "ratios": list(self.ratios),
            "eta": self.eta,
            "wall_time": self.wall_time,
            "M0": self.M0,
            "factor_bound": self.factor_bound,
            "mu_bound": self.mu_bound,
            "second_differences": dict(self.second_differences),
        }


def initial_field(grid: PeriodicGrid, M0: float) -> PeriodicField:
    return PeriodicField.constant(grid, (0.0, M0, 0.0))


def _march(values0, t_foot, Q, P, direction):
    """Semi-Lagrangian march in x: out[:, dst] = interp(out[:, src], t_foot) + Q."""
    n_t, n_cells = t_foot.shape
    out = np.empty((n_t, n_cells + 1))
    i0, i1, w = periodic_weights(t_foot, P, n_t)
    if direction > 0:
        out[:, 0] = values0
        for k in range(n_cells):
            col = out[:, k]
            lo = col[i0[:, k]]
            out[:, k + 1] = lo + w[:, k] * (col[i1[:, k]] - lo) + Q[:, k]
    else:
        out[:, -1] = values0
        for k in range(n_cells - 1, -1, -1):
            col = out[:, k + 1]
            lo = col[i0[:, k]]
            out[:, k] = lo + w[:, k] * (col[i1[:, k]] - lo) + Q[:, k]
    return out


def _cell_average(a, t_mid, P):
    """Midpoint value of ``a`` in each cell: x-average of the two columns at t_mid."""
    return 0.5 * (interp_columns(a[:, :-1], t_mid, P) + interp_columns(a[:, 1:], t_mid, P))


def iterate_once(prev: PeriodicField, profile: SteadyProfile, factors: IntegratingFactors,
                 bc: BoundarySpec, gas: GasModel, entropy_gradient="central",
                 background: Background | None = None) -> PeriodicField:
    """One level of the linearized iteration; ``prev`` holds level l-1.

    ``entropy_gradient`` selects how the d_x Phi2 source is discretized:
    ``"central"`` (central differences in x) or ``"characteristic"`` (as the
    derivative of Phi2 along the family-1/3 direction).
    """
    grid = prev.grid
    if profile.n_x != grid.n_x or abs(profile.L - grid.L) > 1e-12 * grid.L:
        raise DomainError("profile and field grids differ")
    bg = background or Background.from_profile(profile, gas)
    P, dx = grid.P, grid.dx
    t = grid.t
    p1, p2, p3 = prev.components

    lam1, lam2, lam3 = bg.speeds(p1, p3)
    bg.check_guard(lam1, lam2, where="in builder level l-1")
    mu1, mu2, mu3 = 1.0 / lam1, 1.0 / lam2, 1.0 / lam3

    if entropy_gradient == "central":
        grad = bg.entropy_coupling(p1, p2, p3) * central_diff(p2, dx, axis=1)
        coup1 = grad * mu1
        coup3 = grad * mu3
    elif entropy_gradient == "characteristic":
        kap = bg.characteristic_coupling(p1, p2, p3)
        d2x = central_diff(p2, dx, axis=1)
        d2t = periodic_diff(p2, grid.dt, axis=0)
        coup1 = -kap * (d2x + mu1 * d2t)
        coup3 = kap * (d2x + mu3 * d2t)
    else:
        raise ValueError(f"unknown entropy_gradient {entropy_gradient!r}")

    s13 = p1 + p3
    rhs1 = bg.b1 * (mu1 - bg.mu1) * s13 + coup1 + bg.b1 * bg.mu1 * p3 + bg.e1 * mu1 * p3
    rhs3 = bg.b3 * (mu3 - bg.mu3) * s13 + coup3 + bg.b3 * bg.mu3 * p1 + bg.e3 * mu3 * p1

    H1, H2, H3 = bc.H(profile)
    F1, F3 = factors.F1, factors.F3

    # family 1: x = L -> 0 on G = F1 * Phi1, F1(L) = 1
    foot1, mid1 = column_feet(mu1, P, dx, -1)
    Q1 = -dx * 0.5 * (F1[:-1] + F1[1:]) * _cell_average(rhs1, mid1, P)
    G1 = _march(H1(t, P) + bc.K1 * p3[:, -1], foot1, Q1, P, -1)
    phi1 = G1 / F1

    # family 2: x = 0 -> L, zero source, inflow row uses the new Phi1
    foot2, _ = column_feet(mu2, P, dx, +1)
    phi2 = _march(H2(t, P) + bc.K2 * phi1[:, 0], foot2, np.zeros_like(foot2), P, +1)

    # family 3: x = 0 -> L on G = F3 * Phi3, F3(0) = 1, inflow row uses level l-1
    foot3, mid3 = column_feet(mu3, P, dx, +1)
    Q3 = dx * 0.5 * (F3[:-1] + F3[1:]) * _cell_average(rhs3, mid3, P)
    G3 = _march(H3(t, P) + bc.K3 * p1[:, 0], foot3, Q3, P, +1)
    phi3 = G3 / F3

    return PeriodicField(grid, phi1, phi2, phi3)


def build_periodic(profile: SteadyProfile, bc: BoundarySpec, gas: GasModel, grid: PeriodicGrid,
                   tol_iter=1e-10, max_iter=200, alpha_star=None, entropy_gradient="central",
                   raise_on_failure=True):
    """Iterate from (0, M0, 0) until the sup change drops below ``tol_iter``.

    Returns ``(field, report)``.  Raises :class:`ConvergenceError` (carrying the
    report) if ``max_iter`` is reached first.
    """
    if abs(grid.P - bc.P) > 1e-14 * bc.P:
        raise DomainError(f"grid period {grid.P} differs from boundary period {bc.P}")
    start = time.perf_counter()
    factors = integrating_factors(profile, gas, alpha_star)
    bg = Background.from_profile(profile, gas)
    M0 = bc.M0(profile)
    report = BuildReport(M0=M0, factor_bound=factors.bound, mu_bound=factors.mu_bound)
    cur = initial_field(grid, M0)
    for it in range(1, max_iter + 1):
        nxt = iterate_once(cur, profile, factors, bc, gas, entropy_gradient, background=bg)
        d = max(float(np.max(np.abs(a - b))) for a, b in zip(nxt.components, cur.components))
        if report.diffs:
            prev_d = report.diffs[-1]
            report.ratios.append(d / prev_d if prev_d > 0 else (0.0 if d == 0 else math.inf))
        report.diffs.append(d)
        report.iterations = it
        report.residual = d
        cur = nxt
        log.debug("iteration %d: sup change %.3e", it, d)
        if not math.isfinite(d):
            break
        if d <= tol_iter:
            report.converged = True
            break
    report.wall_time = time.perf_counter() - start
    report.second_differences = second_differences(cur)
    if not report.converged and raise_on_failure:
        raise ConvergenceError(
            f"no convergence after {report.iterations} iterations (last change {report.residual:.3e})",
            report=report,
        )
    return cur, report


def second_differences(field: PeriodicField):
    """Max second difference quotients (tt, tx, xx) over all components; diagnostic only."""
    g = field.grid
    out = {"tt": 0.0, "tx": 0.0, "xx": 0.0}
    for a in field.components:
        tt = (np.roll(a, -1, 0) - 2 * a + np.roll(a, 1, 0)) / g.dt**2
        xx = (a[:, 2:] - 2 * a[:, 1:-1] + a[:, :-2]) / g.dx**2
        tx = (np.roll(a, -1, 0)[:, 1:] - np.roll(a, -1, 0)[:, :-1] - a[:, 1:] + a[:, :-1]) / (g.dt * g.dx)
        out["tt"] = max(out["tt"], float(np.max(np.abs(tt))))
        out["xx"] = max(out["xx"], float(np.max(np.abs(xx))))
        out["tx"] = max(out["tx"], float(np.max(np.abs(tx))))
    return out
