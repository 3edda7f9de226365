"""Continued scattering-amplitude kernels ``B = B0 - B1`` (diagonal blocks).

The outgoing phase is ``zeta_out = zeta(z, theta, pos)`` and the incoming
phase ``zeta_in = zeta(z, theta', neg)``.  With this pairing
``exp(i n (zeta_out - zeta_in))`` grows like
``N^{4 n2} (a1 a1')^{n2} (b1 b1')^{-n1}`` along ``z = 1 + iN``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import mpmath

from .continuation import Branch, ContinuedPhase, amp_ratio, phase_factor, sqrt_8z2p1, zeta
from .model import PotentialField
from .resolvent import ResolventBlock, full_resolvent_block


class StageOrderError(RuntimeError):
    """Known terms requested before the rows they depend on were recovered."""


@dataclass(frozen=True)
class KernelRequest:
    z: mpmath.mpc
    theta: float
    theta_prime: float
    block: int = 22

    def __post_init__(self):
        if self.block not in (11, 22):
            raise ValueError("block must be 11 or 22")
        object.__setattr__(self, "z", mpmath.mpc(self.z))


@dataclass
class KernelContext:
    """Phases and amplitude ratios shared by every kernel at one ``(z, theta, theta')``."""

    z: mpmath.mpc
    zeta_out: ContinuedPhase
    zeta_in: ContinuedPhase
    lam: mpmath.mpc
    out_alpha: mpmath.mpc      # alpha(zeta_out) / lambda
    out_alpha_bar: mpmath.mpc  # alpha_bar(zeta_out) / lambda
    eta0: list
    _phases: dict = field(default_factory=dict, repr=False)

    def out_phase(self, n):
        """``exp(i n . zeta_out)``."""
        key = ("out", int(n[0]), int(n[1]))
        if key not in self._phases:
            self._phases[key] = phase_factor(n, self.zeta_out)
        return self._phases[key]

    def in_phase(self, n):
        """``exp(-i n . zeta_in)``."""
        key = ("in", int(n[0]), int(n[1]))
        if key not in self._phases:
            self._phases[key] = phase_factor((-n[0], -n[1]), self.zeta_in)
        return self._phases[key]

    @classmethod
    def build(cls, z, theta, theta_prime, check: bool = True) -> "KernelContext":
        z = mpmath.mpc(z)
        zo = zeta(z, theta, Branch.POS, check=check)
        zi = zeta(z, theta_prime, Branch.NEG, check=check)
        return cls(
            z=z,
            zeta_out=zo,
            zeta_in=zi,
            lam=sqrt_8z2p1(z),
            out_alpha=amp_ratio(zo, z, "alpha"),
            out_alpha_bar=amp_ratio(zo, z, "alpha_bar"),
            eta0=eta0_matrix(zi, z),
        )


def eta0_matrix(zeta_in: ContinuedPhase, z) -> list:
    return [
        [mpmath.mpc(1), amp_ratio(zeta_in, z, "alpha")],
        [amp_ratio(zeta_in, z, "alpha_bar"), mpmath.mpc(1)],
    ]


def eta0(z, theta_prime, check: bool = True) -> list:
    """``[[1, alpha(zeta_in)/lambda], [alpha_bar(zeta_in)/lambda, 1]]``."""
    return eta0_matrix(zeta(mpmath.mpc(z), theta_prime, Branch.NEG, check=check), z)


def _ctx(req_or_ctx, check=True) -> KernelContext:
    if isinstance(req_or_ctx, KernelContext):
        return req_or_ctx
    r = req_or_ctx
    return KernelContext.build(r.z, r.theta, r.theta_prime, check=check)


def b0_block(q: PotentialField, ctx: KernelContext, block: int) -> mpmath.mpc:
    """Born term: ``sum_n e^{i n (zeta_out - zeta_in)} w(n)`` with the block's weights."""
    if block == 11:
        c2 = ctx.out_alpha * ctx.eta0[1][0]
        w = lambda q1, q2: q1 + c2 * q2  # noqa: E731
    elif block == 22:
        c1 = ctx.out_alpha_bar * ctx.eta0[0][1]
        w = lambda q1, q2: c1 * q1 + q2  # noqa: E731
    else:
        raise ValueError("block must be 11 or 22")
    total = mpmath.mpc(0)
    for n, (q1, q2) in sorted(q.entries.items()):
        total += ctx.out_phase(n) * ctx.in_phase(n) * w(q1, q2)
    return total


def b1_block(q: PotentialField, ctx: KernelContext, block: int, res: ResolventBlock | None = None) -> mpmath.mpc:
    """Multiple-scattering correction ``l^T X r`` with ``X = <P(n)|R(z)|P(m)>`` on ``supp q``.

    ``l`` carries the outgoing phases and ``q(n)`` (block-weighted), ``r`` the
    incoming phases, ``q(m)`` and the matching column of ``eta0``.
    """
    if block not in (11, 22):
        raise ValueError("block must be 11 or 22")
    if q.is_zero():
        return mpmath.mpc(0)
    if res is None:
        res = full_resolvent_block(q, ctx.z)
    col = 0 if block == 11 else 1
    w1, w2 = (1, ctx.out_alpha) if block == 11 else (ctx.out_alpha_bar, 1)
    e = ctx.eta0
    left, right = [], []
    for n in res.sites:
        q1, q2 = q[n]
        u, v = ctx.out_phase(n), ctx.in_phase(n)
        left += [u * w1 * q1, u * w2 * q2]
        right += [v * q1 * e[0][col], v * q2 * e[1][col]]
    return res.bilinear(left, right)


@dataclass
class KernelValues:
    b0: mpmath.mpc
    b1: mpmath.mpc

    @property
    def b(self) -> mpmath.mpc:
        return self.b0 - self.b1


def kernel_values(q: PotentialField, req, block: int | None = None, res: ResolventBlock | None = None,
                  check: bool = True) -> KernelValues:
    ctx = _ctx(req, check)
    blk = block if block is not None else req.block
    return KernelValues(b0_block(q, ctx, blk), b1_block(q, ctx, blk, res))


def b_total(q: PotentialField, req, block: int | None = None, res: ResolventBlock | None = None,
            check: bool = True) -> mpmath.mpc:
    return kernel_values(q, req, block, res, check).b


# ----------------------------------------------------------- known terms

Q2_STAGE = "q2"
Q1_STAGE = "q1"


@dataclass
class StripState:
    """Recovered potential plus the set of finished ``(row, comp)`` stages."""

    field: PotentialField
    done: set = field(default_factory=set)

    def require(self, p: int, phase: str) -> None:
        M = self.field.M
        missing = [(r, c) for r in range(p + 1, M + 1) for c in (2, 1) if (r, c) not in self.done]
        if phase == Q1_STAGE and (p, 2) not in self.done:
            missing.append((p, 2))
        if missing:
            raise StageOrderError(f"stage ({p}, {phase}) needs rows {sorted(missing, reverse=True)} first")


def known_potential(p: int, phase: str, recovered: PotentialField) -> PotentialField:
    """The part of the potential the stage treats as known.

    ``q2`` stage: every site with ``n2 > p``.  ``q1`` stage: additionally the
    ``q2`` values on row ``p``.
    """
    if phase == Q2_STAGE:
        return recovered.truncate(p, p)
    if phase == Q1_STAGE:
        return recovered.truncate(p, p - 1)
    raise ValueError(f"unknown phase {phase!r}")


def known_terms(p: int, state: StripState, req, phase: str, res: ResolventBlock | None = None,
                check: bool = True) -> mpmath.mpc:
    """Contribution of the already-recovered rows to the stage-``p`` kernel.

    It is the forward kernel of the known part ``K``: the Born sum over
    ``K`` together with the resolvent-identity terms through ``R_K``.
    The block is 22 for the ``q2`` stage and 11 for the ``q1`` stage.
    """
    state.require(p, phase)
    K = known_potential(p, phase, state.field)
    block = 22 if phase == Q2_STAGE else 11
    return b_total(K, req, block=block, res=res, check=check)
