import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hexscat.lattice import DistKind, dist
from hexscat.trigpoly import (
    TrigPoly, alpha, alpha_bar, evaluate, grid_eval, mul, pow_, r, r_power, r_power_alpha,
    r_power_alpha_bar, support_size_bound, verify_support,
)


def test_r_coefficients():
    assert r().coeff((0, 0)) == 3
    assert r().coeff((1, -1)) == 1
    assert alpha().coeff((1, 1)) == 0


def test_r_is_alpha_times_alpha_bar():
    assert mul(alpha(), alpha_bar()) == r()
    assert alpha().conj() == alpha_bar()


def test_powers():
    assert pow_(r(), 2).coeff((0, 0)) == 15
    assert pow_(r(), 3).coeff((3, 0)) == 1
    assert pow_(r(), 0) == TrigPoly.constant(1)
    assert r() ** 2 == r() * r()
    with pytest.raises(ValueError):
        pow_(r(), -1)


def test_brute_force_convolution():
    # r^2 coefficient at (0,0) by direct double sum over the 7 frequencies of r
    terms = r().as_dict()
    direct = sum(c[0] * terms.get((-k[0], -k[1]), (0, 0))[0] for k, c in terms.items())
    assert direct == pow_(r(), 2).coeff((0, 0))


def test_evaluate_examples():
    assert evaluate(alpha(), (0, 0)) == pytest.approx(3)
    assert abs(evaluate(alpha(), (2 * math.pi / 3, -2 * math.pi / 3))) < 1e-15
    assert evaluate(r(), (math.pi / 2, -math.pi / 2)) == pytest.approx(1, abs=1e-15)


def test_evaluate_complex_angles_mp():
    z = (mpmath.mpc(0.3, 0.2), mpmath.mpc(-1.1, -0.4))
    direct = 1 + mpmath.expj(z[0]) + mpmath.expj(z[1])
    assert abs(evaluate(alpha(), z) - direct) < mpmath.mpf(10) ** (-mpmath.mp.dps + 2)


def test_verify_support_reports():
    rep = verify_support(3)
    assert rep.ok
    assert r_power(3).coeff((4, 0)) == 0 and dist(DistKind.D, (4, 0)) == 4
    assert all(d == s for (_, s), d in rep.extremal.items())
    assert {dist(DistKind.D12, k) for k in alpha().support} == {0}


def test_support_size_is_full_hexagon():
    # every point of the distance ball carries a nonzero coefficient of r^s
    for s in range(5):
        assert len(r_power(s).support) == support_size_bound(s)


def test_families_cached_and_consistent():
    assert r_power_alpha(2) == mul(r_power(2), alpha())
    assert r_power_alpha_bar(2) == mul(r_power(2), alpha_bar())


angles = st.floats(-math.pi, math.pi)


@settings(max_examples=50)
@given(angles, angles)
def test_eval_multiplicative(x1, x2):
    P, Q = r_power_alpha(1), r_power(2)
    lhs = evaluate(mul(P, Q), (x1, x2))
    assert abs(lhs - evaluate(P, (x1, x2)) * evaluate(Q, (x1, x2))) <= 1e-12 * max(1, abs(lhs))


def test_grid_eval_matches_pointwise():
    xs = np.linspace(-3, 3, 7)
    x1, x2 = np.meshgrid(xs, xs)
    g = grid_eval(alpha(), x1, x2)
    assert abs(g[2, 5] - (1 + cmath.exp(1j * x1[2, 5]) + cmath.exp(1j * x2[2, 5]))) < 1e-14
