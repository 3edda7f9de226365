import mpmath
import numpy as np
import pytest

from hexscat.continuation import theta_constants
from hexscat.kernels import (
    Q1_STAGE, Q2_STAGE, KernelContext, KernelRequest, StageOrderError, StripState, b0_block, b1_block, b_total,
    eta0, kernel_values, known_potential, known_terms,
)
from hexscat.model import PotentialField, random_potential
from hexscat.resolvent import full_resolvent_block


@pytest.fixture(autouse=True)
def precision():
    with mpmath.workdps(50):
        yield


def req(N, block=22, th=0.2, thp=0.25, re=1):
    return KernelRequest(mpmath.mpc(re, N), th, thp, block)


def test_request_validation():
    with pytest.raises(ValueError):
        KernelRequest(1j, 0.2, 0.2, 12)


def test_zero_potential():
    zero = PotentialField(2, {})
    for block in (11, 22):
        kv = kernel_values(zero, req(50, block))
        assert kv.b0 == 0 and kv.b1 == 0 and kv.b == 0


@pytest.mark.parametrize("z", [mpmath.mpc(1, 30), mpmath.mpc(0.5, 2), mpmath.mpc(3, 300)])
@pytest.mark.parametrize("th, thp", [(0.1, 0.3), (0.25, 0.05)])
def test_single_site_born_term_is_one(z, th, thp):
    q = PotentialField(0, {(0, 0): (1.0, 0.0)})
    ctx = KernelContext.build(z, th, thp)
    assert abs(b0_block(q, ctx, 11) - 1) < 1e-12


def test_eta0_entries():
    th = 0.2
    c = theta_constants(th)
    N = 10**4
    e = eta0(mpmath.mpc(1, N), th)
    assert e[0][0] == 1 and e[1][1] == 1
    assert abs(abs(e[1][0]) / N / abs(c.a2) - 1) < 0.01
    # on the genuine incoming branch the (1,2) entry decays like 1 / (sqrt(2) a^2 N)
    assert abs(abs(e[0][1]) * N * mpmath.sqrt(2) * c.a**2 - 1) < 0.01


def test_b0_22_leading_term():
    th, thp, c = 0.2, 0.25, 2.0
    q = PotentialField(1, {(0, 1): (0.0, c)})
    norm = lambda N: mpmath.mpf(N) ** 4 * theta_constants(th).a1 * theta_constants(thp).a1  # noqa: E731
    errs = []
    for N in (10**3, 10**4):
        ctx = KernelContext.build(mpmath.mpc(1, N), th, thp)
        errs.append(abs(b0_block(q, ctx, 22) / norm(N) - c))
    assert errs[1] < 1e-3 and 8 < errs[0] / errs[1] < 12


def test_b1_22_growth_slope():
    M = 1
    q = random_potential(M, 5)
    Ns = [100, 200, 400, 800]
    ys = [float(mpmath.log(abs(kernel_values(q, req(N, 22)).b1))) for N in Ns]
    assert np.polyfit(np.log(Ns), ys, 1)[0] <= 4 * M - 1 + 0.1


def test_b1_is_quadratic_in_q():
    q = random_potential(1, 2)
    r = req(40, 11)
    d = [abs(kernel_values(q.scaled(eps), r).b1) for eps in (1e-3, 1e-4)]
    assert d[0] / d[1] == pytest.approx(100, rel=1e-2)
    kv = kernel_values(q.scaled(1e-4), r)
    assert abs(abs(kv.b - kv.b0) - d[1]) < 1e-30 * abs(kv.b0)


def test_b1_matches_dense_assembly():
    q = random_potential(1, 9)
    r = req(25, 22)
    ctx = KernelContext.build(r.z, r.theta, r.theta_prime)
    res = full_resolvent_block(q, r.z)
    X = res.X
    total = mpmath.mpc(0)
    for a, n in enumerate(res.sites):
        for b, m in enumerate(res.sites):
            qn, qm = q[n], q[m]
            lw = [ctx.out_alpha_bar * qn[0], qn[1]]
            rw = [qm[0] * ctx.eta0[0][1], qm[1] * ctx.eta0[1][1]]
            for i in range(2):
                for j in range(2):
                    total += ctx.out_phase(n) * lw[i] * X[2 * a + i, 2 * b + j] * rw[j] * ctx.in_phase(m)
    assert abs(b1_block(q, ctx, 22, res) - total) < 1e-30 * max(1, abs(total))


def test_known_terms_top_stage_is_zero():
    state = StripState(PotentialField(1, {}))
    assert known_terms(1, state, req(30), Q2_STAGE) == 0


def test_known_terms_one_row_above():
    q = random_potential(2, 1)
    state = StripState(q.truncate(1, 1), {(2, 2), (2, 1)})
    row2 = PotentialField(2, {n: v for n, v in q.entries.items() if n[1] == 2})
    r = req(60)
    assert abs(known_terms(1, state, r, Q2_STAGE) - b_total(row2, r, block=22)) < 1e-30


def test_known_potential_parts():
    q = random_potential(2, 4)
    K2, K1 = known_potential(0, Q2_STAGE, q), known_potential(0, Q1_STAGE, q)
    for n in q.support:
        assert K2[n] == (q[n][0] if n[1] > 0 else 0, q[n][1] if n[1] > 0 else 0)
        assert K1[n] == (q[n][0] if n[1] > 0 else 0, q[n][1] if n[1] >= 0 else 0)


def test_stage_order_enforced():
    state = StripState(PotentialField(2, {}), {(2, 2), (2, 1)})
    with pytest.raises(StageOrderError):
        known_terms(0, state, req(30), Q2_STAGE)
    with pytest.raises(StageOrderError):
        known_terms(1, state, req(30), Q1_STAGE)
    known_terms(1, state, req(30), Q2_STAGE)
    state.done.add((1, 2))
    known_terms(1, state, req(30), Q1_STAGE)
    with pytest.raises(StageOrderError):
        known_terms(0, state, req(30), Q2_STAGE)
