"""
Coefficients of the perturbation system around a steady profile.

With Phi = r - r_bg the diagonal system reads

    d_t Phi1 + lam1 d_x Phi1 = a11 Phi1 + a13 Phi3 + q d_x Phi2
    d_t Phi2 + lam2 d_x Phi2 = 0
    d_t Phi3 + lam3 d_x Phi3 = a33 Phi3 + a31 Phi1 + q d_x Phi2

where the a-coefficients depend only on the background and
q = (gamma-1) phi'/(16 gamma phi) (r3 - r1)**2 depends on the full state.
Shared by the x-marching builder and the time-domain solver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError
from .gas_model import GasModel, wave_speeds
from .steady_fanno import SteadyProfile

GUARD_FRACTION = 0.1


@dataclass(frozen=True)
class Background:
    """Steady invariants, speeds and damping coefficients on the x grid."""

    gas: GasModel
    profile: SteadyProfile
    r1: np.ndarray
    r2: float
    r3: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    lam3: np.ndarray
    a11: np.ndarray
    a13: np.ndarray
    a33: np.ndarray
    a31: np.ndarray
    margin: float

    @classmethod
    def from_profile(cls, profile: SteadyProfile, gas: GasModel):
        g = gas.gamma
        k = 2.0 / (g - 1.0)
        r1 = profile.u - k * profile.c
        r3 = profile.u + k * profile.c
        lam1, lam2, lam3 = wave_speeds(r1, r3, g)
        s = r1 + r3
        half_alpha = 0.5 * profile.alpha
        d1 = (g + 1.0) * r1 + (3.0 - g) * r3
        d3 = (3.0 - g) * r1 + (g + 1.0) * r3
        a11 = half_alpha * (1.0 - (g + 1.0) * s / d1)
        a13 = half_alpha * (1.0 - (3.0 - g) * s / d1)
        a33 = half_alpha * (1.0 - (g + 1.0) * s / d3)
        a31 = half_alpha * (1.0 - (3.0 - g) * s / d3)
        margin = GUARD_FRACTION * float(min(profile.u.min(), (profile.c - profile.u).min()))
        return cls(gas, profile, r1, profile.S, r3, lam1, lam2, lam3, a11, a13, a33, a31, margin)

    @property
    def x(self):
        return self.profile.x

    @property
    def dx(self):
        return self.profile.dx

    @property
    def L(self):
        return self.profile.L

    @property
    def mu1(self):
        return 1.0 / self.lam1

    @property
    def mu3(self):
        return 1.0 / self.lam3

    @property
    def b1(self):
        """Coefficient absorbed by the family-1 integrating factor (equals a11)."""
        return self.a11

    @property
    def e1(self):
        return self.a13 - self.a11

    @property
    def b3(self):
        return self.a33

    @property
    def e3(self):
        return self.a31 - self.a33

    def speeds(self, phi1, phi3):
        return wave_speeds(phi1 + self.r1, phi3 + self.r3, self.gas.gamma)

    def entropy_coupling(self, phi1, phi2, phi3):
        """q = (gamma-1) phi'/(16 gamma phi) (r3 - r1)**2 at the full state."""
        g = self.gas.gamma
        w = (phi3 + self.r3) - (phi1 + self.r1)
        return (g - 1.0) / (16.0 * g) * self.gas.log_dphi(phi2 + self.r2) * w * w

    def characteristic_coupling(self, phi1, phi2, phi3):
        """phi'/(4 gamma phi) (r3 - r1), the factor of the along-characteristic form."""
        w = (phi3 + self.r3) - (phi1 + self.r1)
        return self.gas.log_dphi(phi2 + self.r2) * w / (4.0 * self.gas.gamma)

    def check_guard(self, lam1, lam2, where=""):
        """Require lam1 <= -margin and lam2 >= margin at every node."""
        bad1 = lam1 > -self.margin
        bad2 = lam2 < self.margin
        if np.any(bad1) or np.any(bad2):
            bad = bad1 | bad2
            idx = np.unravel_index(int(np.argmax(bad)), np.shape(bad))
            raise InstabilityError(
                f"state left the subsonic guard {where} at node {tuple(int(i) for i in idx)}: "
                f"lam1={np.asarray(lam1)[idx]:.6g}, lam2={np.asarray(lam2)[idx]:.6g}, margin={self.margin:.6g}"
            )

    def mu_bound(self, phi1=None, phi3=None):
        """max_i |1/lam_i| over the background (and the given states, if any)."""
        lams = [self.lam1, self.lam2, self.lam3]
        if phi1 is not None:
            lams += list(self.speeds(phi1, phi3))
        return float(max(np.max(1.0 / np.abs(l)) for l in lams))

    def guard_radius(self):
        """Largest delta such that |Phi1|, |Phi3| <= delta keeps every node in the guard.

        Each speed moves by at most delta under such a perturbation.
        """
        room1 = -self.lam1 - self.margin
        room2 = self.lam2 - self.margin
        return float(max(0.0, min(room1.min(), room2.min())))

    def max_speed(self):
        return float(max(np.max(np.abs(self.lam1)), np.max(np.abs(self.lam3))))

    def sources(self, phi1, phi2, phi3, dphi2_dx):
        """Right-hand sides of the families 1 and 3 (time-domain form)."""
        q = self.entropy_coupling(phi1, phi2, phi3) * dphi2_dx
        s1 = self.a11 * phi1 + self.a13 * phi3 + q
        s3 = self.a33 * phi3 + self.a31 * phi1 + q
        return s1, s3
