import math

import mpmath
import numpy as np
import pytest

from hexscat.continuation import (
    Branch, ContinuationError, THETA_MAX, amp_ratio, asymptotic_prediction, b1_inverse, deviations, g_of,
    g_roots, half_angle_squares, phase_distance, phase_factor, sqrt_8z2p1, sqrt_g, surface_residual,
    theta_constants, wrap, zeta, zeta_halfangle, zeta_tracked,
)


@pytest.fixture(autouse=True)
def precision():
    with mpmath.workdps(40):
        yield


def test_theta_constants_at_02():
    c = theta_constants(0.2)
    for got, ref in [(c.a, 0.71287), (c.b, 0.56486), (c.a1, 2.03272), (c.b1, 2.93562)]:
        assert abs(got / ref - 1) < 1e-4
    assert c.a1 == pytest.approx(4 * c.a**2) and c.b1 == pytest.approx(mpmath.exp(0.4) / c.a**2)


def test_theta_constant_limits_and_monotonicity():
    c = theta_constants(1e-8)
    assert abs(c.a - 1) < 1e-7 and abs(c.b) < 1e-7 and abs(c.b1 - 1) < 1e-7
    grid = np.linspace(0.01, THETA_MAX - 0.01, 40)
    b1 = [theta_constants(t).b1 for t in grid]
    assert all(x < y for x, y in zip(b1, b1[1:]))
    for t in grid[::7]:
        assert abs(b1_inverse(theta_constants(t).b1) - t) < 1e-30


def test_theta_range():
    for bad in (0, -0.1, THETA_MAX + 1e-12, 0.5):
        with pytest.raises(ContinuationError):
            theta_constants(bad)


def test_g_roots_and_sqrt_branch():
    th = 0.2
    roots = g_roots(th)
    assert all(abs(g_of(r, th)) < 1e-30 for r in roots)
    assert roots[2] == pytest.approx(0.818731, abs=1e-6)
    for z in [mpmath.mpc(1, 5), mpmath.mpc(-2, 0.5), mpmath.mpc(0.1, 40)]:
        assert abs(sqrt_g(z, th) ** 2 - g_of(z, th)) < 1e-25 * abs(g_of(z, th))
    big = mpmath.mpc(0, 1e6)
    asq = 2 - mpmath.exp(0.4)
    assert abs(sqrt_g(big, th) / (asq * big**2) - 1) < 1e-5


@pytest.mark.parametrize("k", [0.1, 0.25, 0.5, 0.8])
def test_real_energies_positive_branch(k):
    th = 0.2
    zt = zeta(k, th, Branch.POS)
    for zj in zt:
        assert mpmath.im(zj) == 0 and 0 < mpmath.re(zj) < mpmath.pi
    assert surface_residual(zt, k) < 1e-30
    S = half_angle_squares(k, th)
    for s, zj in zip(S, zt):
        assert abs(mpmath.sin(zj / 2) ** 2 - s) < 1e-10
    assert abs(sqrt_8z2p1(k) - mpmath.sqrt(8 * mpmath.mpf(k) ** 2 + 1)) < 1e-30


@pytest.mark.parametrize("z", [mpmath.mpc(1, 3), mpmath.mpc(0.4, 0.2), mpmath.mpc(2.5, 40)])
@pytest.mark.parametrize("theta", [0.1, 0.3])
def test_methods_agree_in_first_quadrant(z, theta):
    a, b = zeta_halfangle(z, theta), zeta_tracked(z, theta, steps=64)
    assert phase_distance(a, b) < 1e-9
    S = half_angle_squares(z, theta)
    for s, zj in zip(S, a):
        assert abs(mpmath.sin(zj / 2) ** 2 - s) < 1e-10 * max(1, abs(s))
    assert surface_residual(a, z) < 1e-25 * abs(z) ** 2


def test_branches_are_negatives():
    z = mpmath.mpc(1, 100)
    p, n = zeta(z, 0.2, "pos"), zeta(z, 0.2, "neg")
    assert p.zeta1 == -n.zeta1 and p.zeta2 == -n.zeta2
    assert mpmath.im(p.zeta1) > 0 > mpmath.im(p.zeta2)
    pp, pn = asymptotic_prediction(100, 0.2, "pos"), asymptotic_prediction(100, 0.2, "neg")
    assert pp["im1"] == -pn["im1"] and pp["im2"] == -pn["im2"]
    assert abs(wrap(pp["re2"] - mpmath.pi)) == 0


def test_asymptotics_at_N_1000():
    N, th = 1000, 0.2
    c = theta_constants(th)
    zt = zeta(mpmath.mpc(1, N), th)
    assert abs(mpmath.im(zt.zeta1) - 2 * mpmath.log(c.b + mpmath.sqrt(c.b**2 + 1))) < 10 / N**2
    # the genuine continuation has Im zeta2 < 0 on the positive branch
    assert abs(mpmath.im(zt.zeta2) + 2 * mpmath.log(N) + mpmath.log(4 * c.a**2)) < 10 / N**2


def test_deviation_rates_theta_02():
    Ns = [100 * 2**k for k in range(5)]
    devs = [deviations(N, 0.2) for N in Ns]
    x = np.log(Ns)
    for key, rate in [("re1", 3), ("im1", 2), ("re2", 1), ("im2", 2)]:
        y = np.log([float(d[key]) for d in devs])
        assert -np.polyfit(x, y, 1)[0] >= rate - 0.2


def test_phase_and_amplitude_limits():
    N, th = 10**4, 0.2
    c = theta_constants(th)
    z = mpmath.mpc(1, N)
    zp = zeta(z, th)
    assert phase_factor((0, 0), zp) == 1
    assert abs(abs(phase_factor((0, 1), zp)) / N**2 / c.a1 - 1) < 0.01
    assert abs(abs(phase_factor((1, 0), zp)) * c.b1 - 1) < 0.01
    assert abs(abs(amp_ratio(zp, z, "alpha")) / N / abs(c.a2) - 1) < 0.01
    # alpha_bar / lambda decays like 1 / (sqrt(2) a^2 N) on the genuine branch
    assert abs(abs(amp_ratio(zp, z, "alpha_bar")) * N * mpmath.sqrt(2) * c.a**2 - 1) < 0.01


def test_asymptotic_prediction_needs_large_N():
    with pytest.raises(ValueError):
        asymptotic_prediction(5, 0.2)


def test_wrap():
    assert wrap(3 * math.pi) == pytest.approx(math.pi)
    assert wrap(-0.5) == pytest.approx(-0.5)
    assert wrap(2 * math.pi + 0.1) == pytest.approx(0.1)
