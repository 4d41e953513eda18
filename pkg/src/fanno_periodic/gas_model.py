"""
Pointwise thermodynamics for the pressure law p = rho**gamma * phi(S).

All functions accept floats or numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError

PHI_KINDS = ("exponential", "constant")


@dataclass(frozen=True)
class GasModel:
    """Adiabatic exponent and entropy coefficient function phi(S).

    ``phi_kind`` is ``"exponential"`` (phi = scale * exp(rate * S), defaults
    scale = rate = 1) or ``"constant"`` (phi = value, default 1).
    """

    gamma: float = 1.4
    phi_kind: str = "exponential"
    phi_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (1.0 < self.gamma < 3.0):
            raise DomainError(f"gamma={self.gamma} violates 1<gamma<3")
        if self.phi_kind not in PHI_KINDS:
            raise DomainError(f"unknown phi_kind {self.phi_kind!r}; expected one of {PHI_KINDS}")
        allowed = {"exponential": {"scale", "rate"}, "constant": {"value"}}[self.phi_kind]
        extra = set(self.phi_params) - allowed
        if extra:
            raise DomainError(f"unexpected phi_params {sorted(extra)} for {self.phi_kind}")
        scale = self.phi_params.get("scale", self.phi_params.get("value", 1.0))
        if not scale > 0:
            raise DomainError("phi must be positive")

    def phi(self, S):
        if self.phi_kind == "constant":
            return np.full_like(np.asarray(S, dtype=float), self.phi_params.get("value", 1.0))
        scale = self.phi_params.get("scale", 1.0)
        rate = self.phi_params.get("rate", 1.0)
        return scale * np.exp(rate * np.asarray(S, dtype=float))

    def dphi(self, S):
        if self.phi_kind == "constant":
            return np.zeros_like(np.asarray(S, dtype=float))
        return self.phi_params.get("rate", 1.0) * self.phi(S)

    def log_dphi(self, S):
        """phi'(S) / phi(S)."""
        if self.phi_kind == "constant":
            return np.zeros_like(np.asarray(S, dtype=float))
        return np.full_like(np.asarray(S, dtype=float), self.phi_params.get("rate", 1.0))

    def pressure(self, rho, S):
        return np.asarray(rho, dtype=float) ** self.gamma * self.phi(S)

    @property
    def kappa(self):
        """2 / (gamma - 1), the factor between c and the Riemann invariants."""
        return 2.0 / (self.gamma - 1.0)


class PrimitiveState(NamedTuple):
    rho: float | np.ndarray
    u: float | np.ndarray
    S: float | np.ndarray


class RiemannTriple(NamedTuple):
    r1: float | np.ndarray
    r2: float | np.ndarray
    r3: float | np.ndarray


def sound_speed(state: PrimitiveState, gas: GasModel):
    rho = np.asarray(state.rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError("density must be positive")
    phi = gas.phi(state.S)
    if np.any(~(phi > 0)):
        raise DomainError("phi(S) must be positive")
    c = np.sqrt(gas.gamma) * rho ** ((gas.gamma - 1.0) / 2.0) * np.sqrt(phi)
    return c[()] if c.ndim == 0 else c


def density_from_sound_speed(c, S, gas: GasModel):
    c = np.asarray(c, dtype=float)
    if np.any(~(c > 0)):
        raise DomainError("sound speed must be positive")
    rho = (c**2 / (gas.gamma * gas.phi(S))) ** (1.0 / (gas.gamma - 1.0))
    return rho[()] if rho.ndim == 0 else rho


def to_riemann(state: PrimitiveState, gas: GasModel) -> RiemannTriple:
    c = sound_speed(state, gas)
    u = np.asarray(state.u, dtype=float)
    r1 = u - gas.kappa * c
    r3 = u + gas.kappa * c
    return RiemannTriple(_unwrap(r1), state.S, _unwrap(r3))


def from_riemann(triple: RiemannTriple, gas: GasModel) -> PrimitiveState:
    r1 = np.asarray(triple.r1, dtype=float)
    r3 = np.asarray(triple.r3, dtype=float)
    if np.any(~(r3 > r1)):
        raise DomainError("need r3 > r1 (positive sound speed)")
    u = 0.5 * (r1 + r3)
    c = 0.25 * (gas.gamma - 1.0) * (r3 - r1)
    rho = density_from_sound_speed(c, triple.r2, gas)
    return PrimitiveState(rho, _unwrap(u), triple.r2)


def speed_of_sound_from_riemann(r1, r3, gamma):
    return 0.25 * (gamma - 1.0) * (np.asarray(r3) - np.asarray(r1))


def wave_speeds(r1, r3, gamma):
    """(lambda1, lambda2, lambda3) in Riemann-invariant coordinates."""
    r1 = np.asarray(r1, dtype=float)
    r3 = np.asarray(r3, dtype=float)
    lam1 = 0.25 * ((gamma + 1.0) * r1 + (3.0 - gamma) * r3)
    lam2 = 0.5 * (r1 + r3)
    lam3 = 0.25 * ((3.0 - gamma) * r1 + (gamma + 1.0) * r3)
    return _unwrap(lam1), _unwrap(lam2), _unwrap(lam3)


def eigenvalues(triple: RiemannTriple, gas: GasModel):
    if np.any(~(np.asarray(triple.r3) > np.asarray(triple.r1))):
        raise DomainError("need r3 > r1 (positive sound speed)")
    return wave_speeds(triple.r1, triple.r3, gas.gamma)


def primitive_eigenvalues(state: PrimitiveState, gas: GasModel):
    """(u - c, u, u + c) computed directly from primitive variables."""
    c = sound_speed(state, gas)
    u = np.asarray(state.u, dtype=float)
    return _unwrap(u - c), _unwrap(u + 0 * c), _unwrap(u + c)


def is_subsonic(state: PrimitiveState, gas: GasModel):
    c = sound_speed(state, gas)
    u = np.asarray(state.u)
    return (u > 0) & (u < c)


def _unwrap(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a
