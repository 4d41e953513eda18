import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fanno_periodic.errors import InstabilityError
from fanno_periodic.gas_model import GasModel, wave_speeds
from fanno_periodic.perturbation import GUARD_FRACTION, Background
from fanno_periodic.steady_fanno import DampingProfile, InflowCondition, solve_fanno


@pytest.fixture(scope="module")
def bg():
    gas = GasModel(1.4)
    return Background.from_profile(
        solve_fanno(gas, DampingProfile.constant(-0.2), InflowCondition(0.2, 1.0), 1.0, n_x=65), gas)


@given(seed=st.integers(0, 2**31), amp=st.floats(0.0, 0.05))
def test_sources_match_full_equation(bg, seed, amp):
    rng = np.random.default_rng(seed)
    p1, p2, p3, d2 = (amp * rng.normal(size=bg.x.size) for _ in range(4))
    s1, s3 = bg.sources(p1, p2, p3, d2)
    r1, r3 = bg.r1 + p1, bg.r3 + p3
    g = bg.gas.gamma
    alpha = bg.profile.alpha
    q = (g - 1) * bg.gas.dphi(bg.r2 + p2) / (16 * g * bg.gas.phi(bg.r2 + p2)) * (r3 - r1) ** 2 * d2
    lam1, _, lam3 = wave_speeds(r1, r3, g)
    # steady slopes from the steady relation lam_i r_i' = alpha/2 (r1 + r3)
    dr1 = alpha * (bg.r1 + bg.r3) / (2 * bg.lam1)
    dr3 = alpha * (bg.r1 + bg.r3) / (2 * bg.lam3)
    ref1 = alpha / 2 * (r1 + r3) + q - lam1 * dr1
    ref3 = alpha / 2 * (r1 + r3) + q - lam3 * dr3
    assert np.max(np.abs(s1 - ref1)) <= 1e-13
    assert np.max(np.abs(s3 - ref3)) <= 1e-13


def test_zero_perturbation_has_zero_source(bg):
    z = np.zeros(bg.x.size)
    s1, s3 = bg.sources(z, z + 1.0, z, z)
    assert np.all(s1 == 0) and np.all(s3 == 0)


@given(seed=st.integers(0, 2**31))
def test_characteristic_rewriting_of_entropy_term(bg, seed):
    """q mu_i dx Phi2 equals the along-characteristic form when Phi2 is transported."""
    rng = np.random.default_rng(seed)
    p1, p2, p3 = (0.01 * rng.normal(size=bg.x.size) for _ in range(3))
    d2x = rng.normal(size=bg.x.size)
    lam1, lam2, lam3 = bg.speeds(p1, p3)
    d2t = -lam2 * d2x
    q = bg.entropy_coupling(p1, p2, p3)
    kap = bg.characteristic_coupling(p1, p2, p3)
    assert np.allclose(q * d2x / lam1, -kap * (d2x + d2t / lam1), rtol=1e-12, atol=1e-15)
    assert np.allclose(q * d2x / lam3, kap * (d2x + d2t / lam3), rtol=1e-12, atol=1e-15)


def test_guard(bg):
    assert bg.margin == pytest.approx(GUARD_FRACTION * 0.2)
    z = np.zeros(bg.x.size)
    bg.check_guard(*bg.speeds(z, z)[:2])
    p = z.copy()
    p[7] = -0.5  # drags lam2 below the margin at node 7
    with pytest.raises(InstabilityError, match=r"node \(7,\)"):
        bg.check_guard(*bg.speeds(p, p)[:2], where="test")


def test_guard_radius_keeps_state_inside(bg):
    d = bg.guard_radius()
    assert d > 0
    n = bg.x.size
    for s1 in (-1, 1):
        for s3 in (-1, 1):
            lam1, lam2, _ = bg.speeds(np.full(n, s1 * d * 0.999), np.full(n, s3 * d * 0.999))
            bg.check_guard(lam1, lam2)


def test_damping_split(bg):
    assert np.allclose(bg.b1 + bg.e1, bg.a13)
    assert np.allclose(bg.b3 + bg.e3, bg.a31)
    assert np.all(bg.a11 <= 0)
