"""Continued torus phases on the energy surface.

For ``0 < theta < log(2)/2`` the real energy surface ``p(xi) = sqrt(8k^2+1)``
is parametrised by ``k`` through

    sin^2(zeta1/2) = (1 - a^2 z^2 + sqrt(g)) / 2,
    sin^2(zeta2/2) = (1 - a^2 z^2 - sqrt(g)) / 2,

with ``a^2 = 2 - e^{2 theta}`` and
``g(z) = (1 - a^2 z^2)^2 - 16 z^2 sinh^2(theta)``.  All four zeros of ``g``
are real, so ``sqrt(g) = a^2 prod_i sqrt(z - r_i)`` (principal roots) is
analytic in the upper half plane and behaves like ``+a^2 z^2`` at infinity.

The positive branch is the analytic continuation of the real solution with
``zeta_j in (0, pi)`` at small real ``k``.  Along ``z = 1 + iN`` it has
``Im zeta1 > 0`` and ``Im zeta2 < 0``; the negative branch is ``-zeta``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import mpmath

THETA_MAX = 0.5 * float(mpmath.log(2))


class Branch(enum.Enum):
    POS = "pos"
    NEG = "neg"


class ContinuationError(ArithmeticError):
    """The two phase constructions disagree, or the input is out of range."""


def _branch(b) -> Branch:
    return b if isinstance(b, Branch) else Branch(b)


def _theta(theta):
    th = mpmath.mpf(theta)
    if not 0 < th < mpmath.log(2) / 2:
        raise ContinuationError(f"theta = {theta} outside (0, log(2)/2)")
    return th


@dataclass(frozen=True)
class ThetaConstants:
    theta: mpmath.mpf
    a: mpmath.mpf
    b: mpmath.mpf
    a1: mpmath.mpf
    b1: mpmath.mpf
    a2: mpmath.mpc
    b2: mpmath.mpc


def theta_constants(theta) -> ThetaConstants:
    th = _theta(theta)
    e2 = mpmath.exp(2 * th)
    asq = 2 - e2
    a = mpmath.sqrt(asq)
    b = 2 * mpmath.sinh(th) / a
    return ThetaConstants(
        theta=th,
        a=a,
        b=b,
        a1=4 * asq,
        b1=e2 / asq,
        a2=-mpmath.sqrt(2) * asq * 1j,
        b2=-mpmath.exp(-2 * th) / mpmath.sqrt(2) * 1j,
    )


def b1_inverse(b1) -> mpmath.mpf:
    """``theta`` with ``b1(theta) = b1``; ``b1 > 1``."""
    b1 = mpmath.mpf(b1)
    if b1 <= 1:
        raise ContinuationError("b1 must exceed 1")
    return mpmath.log(2 * b1 / (1 + b1)) / 2


# ------------------------------------------------------------------ g(z)

def g_roots(theta) -> list:
    """The four real zeros ``+-sqrt(u_-), +-sqrt(u_+)`` of ``g``, ascending."""
    th = _theta(theta)
    asq = 2 - mpmath.exp(2 * th)
    mid = 2 * mpmath.exp(-2 * th) - asq
    half = 4 * mpmath.exp(-th) * mpmath.sinh(th)
    um, up = (mid - half) / asq**2, (mid + half) / asq**2
    return sorted([-mpmath.sqrt(up), -mpmath.sqrt(um), mpmath.sqrt(um), mpmath.sqrt(up)])


def g_of(z, theta):
    th = _theta(theta)
    asq = 2 - mpmath.exp(2 * th)
    z = mpmath.mpmathify(z)
    return (1 - asq * z**2) ** 2 - 16 * z**2 * mpmath.sinh(th) ** 2


def sqrt_g(z, theta):
    """Branch of ``sqrt(g)`` analytic in ``Im z > 0`` (limit from above on the real axis)."""
    th = _theta(theta)
    z = mpmath.mpc(z)
    if mpmath.im(z) < 0:
        raise ContinuationError("sqrt(g) branch is defined on the closed upper half plane only")
    out = mpmath.mpc(2 - mpmath.exp(2 * th))
    for r in g_roots(th):
        out *= mpmath.sqrt(z - r)
    return out


def half_angle_squares(z, theta):
    """``(sin^2(zeta1/2), sin^2(zeta2/2))``."""
    th = _theta(theta)
    z = mpmath.mpc(z)
    asq = 2 - mpmath.exp(2 * th)
    base = 1 - asq * z**2
    sg = sqrt_g(z, th)
    return (base + sg) / 2, (base - sg) / 2


def sqrt_8z2p1(z):
    """``lambda = sqrt(8z^2 + 1)``, continued from real ``k > 0`` through the first quadrant."""
    return mpmath.sqrt(8 * mpmath.mpc(z) ** 2 + 1)


# ------------------------------------------------------------- phases

@dataclass(frozen=True)
class ContinuedPhase:
    zeta1: mpmath.mpc
    zeta2: mpmath.mpc
    branch: Branch

    def __iter__(self):
        return iter((self.zeta1, self.zeta2))

    def negate(self) -> "ContinuedPhase":
        other = Branch.NEG if self.branch is Branch.POS else Branch.POS
        return ContinuedPhase(-self.zeta1, -self.zeta2, other)


# Im-sign of (zeta1, zeta2) on the positive branch in the open upper half plane
POS_IM_SIGNS = (1, -1)


def _positive_root(x, y):
    # positive root of t^2 + (x^2 + y^2 - 1) t - y^2 = 0, cancellation-free
    B = x * x + y * y - 1
    disc = mpmath.sqrt(B * B + 4 * y * y)
    if B >= 0:
        return 2 * y * y / (B + disc) if disc + B != 0 else mpmath.mpf(0)
    return (disc - B) / 2


def _invert_cos_half(c, sign_im: int):
    """``zeta`` with ``cos(zeta/2) = +-c``, ``sin(Re zeta/2) > 0`` and ``sign(Im zeta) = sign_im``."""
    for s in (1, -1):
        x, y = mpmath.re(s * c), mpmath.im(s * c)
        if y == 0:
            if x < 0:
                continue
        elif (-y > 0) != (sign_im > 0):
            continue
        t = _positive_root(x, y)
        sin_h = mpmath.sqrt(t)
        sinh_k = -y / sin_h if sin_h != 0 else mpmath.mpf(0)
        cosh_k = mpmath.sqrt(1 + sinh_k**2)
        eta = 2 * mpmath.atan2(sin_h, x / cosh_k)
        kappa = 2 * mpmath.asinh(sinh_k)
        return mpmath.mpc(eta, kappa), (x, y, t)
    raise ContinuationError(f"no half-angle root for cos(zeta/2) = {c}")


def _invert_sin_half(c, sign_im: int):
    """``zeta`` with ``sin(zeta/2) = +-c``, ``cos(Re zeta/2) > 0`` and ``sign(Im zeta) = sign_im``."""
    for s in (1, -1):
        x, y = mpmath.re(s * c), mpmath.im(s * c)
        if y == 0:
            if x < 0:
                continue
        elif (y > 0) != (sign_im > 0):
            continue
        t = _positive_root(x, y)
        cos_h = mpmath.sqrt(t)
        sinh_k = y / cos_h if cos_h != 0 else mpmath.mpf(0)
        cosh_k = mpmath.sqrt(1 + sinh_k**2)
        eta = 2 * mpmath.atan2(x / cosh_k, cos_h)
        kappa = 2 * mpmath.asinh(sinh_k)
        return mpmath.mpc(eta, kappa), (x, y, t)
    raise ContinuationError(f"no half-angle root for sin(zeta/2) = {c}")


def zeta_halfangle(z, theta, branch=Branch.POS, diagnostics: dict | None = None) -> ContinuedPhase:
    """Method (i): invert the half-angle relations through the quadratic for ``sin^2(eta/2)``."""
    S1, S2 = half_angle_squares(z, theta)
    z1, d1 = _invert_cos_half(mpmath.sqrt(1 - S1), POS_IM_SIGNS[0])
    z2, d2 = _invert_sin_half(mpmath.sqrt(S2), POS_IM_SIGNS[1])
    if diagnostics is not None:
        diagnostics["halfangle"] = {"zeta1 (x,y,t)": d1, "zeta2 (x,y,t)": d2}
    out = ContinuedPhase(z1, z2, Branch.POS)
    return out if _branch(branch) is Branch.POS else out.negate()


def start_point(theta) -> mpmath.mpf:
    """Real ``k0`` inside the region ``g > 0`` next to ``k = 0``."""
    return min(mpmath.mpf("0.3"), g_roots(theta)[2] / 2)


def _path(z, k0, steps: int):
    # geometric in distance from k0: small steps where the phases turn fastest
    L = abs(z - k0)
    smin = min(mpmath.mpf("0.01") / L, mpmath.mpf("0.5"))
    ratio = (1 / smin) ** (mpmath.mpf(1) / (steps - 1))
    yield mpmath.mpc(k0)
    s = smin
    for _ in range(steps):
        yield k0 + (z - k0) * min(s, 1)
        s *= ratio


def zeta_tracked(z, theta, branch=Branch.POS, steps: int = 32) -> ContinuedPhase:
    """Method (ii): principal ``2 asin(sqrt(S))`` made continuous along a path from real ``k0``.

    At each node the candidate set ``{+-h + 2 pi m}`` is searched for the
    value nearest to the previous node.
    """
    th = _theta(theta)
    z = mpmath.mpc(z)
    k0 = start_point(th)
    prev = None
    for w in _path(z, k0, steps):
        S = half_angle_squares(w, th)
        hs = [2 * mpmath.asin(mpmath.sqrt(s)) for s in S]
        if prev is None:
            prev = [mpmath.mpc(mpmath.re(h)) for h in hs]
            continue
        cur = []
        for h, p in zip(hs, prev):
            cands = []
            for sgn in (1, -1):
                base = sgn * h
                m = mpmath.nint(mpmath.re(p - base) / (2 * mpmath.pi))
                cands.append(base + 2 * mpmath.pi * m)
            cur.append(min(cands, key=lambda c: abs(c - p)))
        prev = cur
    out = ContinuedPhase(prev[0], prev[1], Branch.POS)
    return out if _branch(branch) is Branch.POS else out.negate()


def wrap(x):
    """Reduce a real angle to ``(-pi, pi]``."""
    two_pi = 2 * mpmath.pi
    y = x - two_pi * mpmath.floor(x / two_pi)
    return y - two_pi if y > mpmath.pi else y


def phase_distance(p: ContinuedPhase, q: ContinuedPhase):
    """Max distance between phases, real parts compared modulo ``2 pi``."""
    return max(
        max(abs(wrap(mpmath.re(a) - mpmath.re(b))), abs(mpmath.im(a) - mpmath.im(b)))
        for a, b in zip(p, q)
    )


def zeta(z, theta, branch=Branch.POS, tol: float = 1e-9, steps: int = 32, max_steps: int = 4096,
         check: bool = True) -> ContinuedPhase:
    """Continued phase pair at ``z`` in the closed first quadrant.

    Method (i) is returned; with ``check`` the path-tracked method (ii) must
    agree within ``tol`` (path refined by doubling up to ``max_steps``).
    """
    br = _branch(branch)
    diag: dict = {}
    closed = zeta_halfangle(z, theta, br, diagnostics=diag)
    if not check:
        return closed
    n = steps
    while True:
        tracked = zeta_tracked(z, theta, br, steps=n)
        dev = phase_distance(closed, tracked)
        if dev <= tol:
            return closed
        n *= 2
        if n > max_steps:
            raise ContinuationError(
                f"methods disagree at z={complex(z)}, theta={float(theta)}: deviation {float(dev):.3g}; "
                f"half-angle={complex(closed.zeta1)},{complex(closed.zeta2)} "
                f"tracked={complex(tracked.zeta1)},{complex(tracked.zeta2)}; diagnostics={diag}"
            )


# ------------------------------------------------------ derived factors

def phase_factor(n, zeta_: ContinuedPhase):
    """``exp(i n . zeta)``."""
    return mpmath.expj(int(n[0]) * zeta_.zeta1 + int(n[1]) * zeta_.zeta2)


def alpha_at(zeta_: ContinuedPhase, conj: bool = False):
    s = -1 if conj else 1
    return 1 + mpmath.expj(s * zeta_.zeta1) + mpmath.expj(s * zeta_.zeta2)


def amp_ratio(zeta_: ContinuedPhase, z, which: str = "alpha"):
    """``alpha(zeta)/lambda`` or ``alpha_bar(zeta)/lambda`` with ``lambda = sqrt(8z^2+1)``.

    ``alpha_bar`` is the analytic continuation ``1 + e^{-i zeta1} + e^{-i zeta2}``.
    """
    if which not in ("alpha", "alpha_bar"):
        raise ValueError("which must be 'alpha' or 'alpha_bar'")
    return alpha_at(zeta_, conj=which == "alpha_bar") / sqrt_8z2p1(z)


def surface_residual(zeta_: ContinuedPhase, z):
    """``|alpha(zeta) alpha_bar(zeta) - (8z^2 + 1)|``: the continued energy-surface identity."""
    return abs(alpha_at(zeta_) * alpha_at(zeta_, True) - (8 * mpmath.mpc(z) ** 2 + 1))


def asymptotic_prediction(N, theta, branch=Branch.POS) -> dict:
    """Leading closed forms along ``z = 1 + iN`` (real parts modulo ``2 pi``).

    Positive branch: ``Re zeta1 = 0``, ``Im zeta1 = 2 log(b + sqrt(b^2+1))``,
    ``Re zeta2 = pi``, ``Im zeta2 = -(2 log N + log(4 a^2))``.  The negative
    branch flips both imaginary parts.
    """
    if N < 10:
        raise ValueError("asymptotics need N >= 10")
    c = theta_constants(theta)
    sgn = 1 if _branch(branch) is Branch.POS else -1
    im1 = 2 * mpmath.log(c.b + mpmath.sqrt(c.b**2 + 1))
    im2 = 2 * mpmath.log(N) + mpmath.log(4 * c.a**2)
    return {
        "re1": mpmath.mpf(0),
        "im1": sgn * POS_IM_SIGNS[0] * im1,
        "re2": +mpmath.pi,
        "im2": sgn * POS_IM_SIGNS[1] * im2,
    }


def deviations(N, theta, branch=Branch.POS, **kw) -> dict:
    """``|zeta - prediction|`` per component (real parts modulo ``2 pi``)."""
    zt = zeta(mpmath.mpc(1, N), theta, branch, **kw)
    pred = asymptotic_prediction(N, theta, branch)
    return {
        "re1": abs(wrap(mpmath.re(zt.zeta1) - pred["re1"])),
        "im1": abs(mpmath.im(zt.zeta1) - pred["im1"]),
        "re2": abs(wrap(mpmath.re(zt.zeta2) - pred["re2"])),
        "im2": abs(mpmath.im(zt.zeta2) - pred["im2"]),
    }
