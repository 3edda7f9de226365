"""Layer-stripping reconstruction of the potential from the continued kernels.

Rows are recovered from the top ``n2 = M`` down to ``-M``; on each row
``q2`` comes first (block 22), then ``q1`` (block 11).  For a stage at row
``p`` the known part of the kernel is subtracted and

    D(N) / (N^{4p} (a1 a1')^p)  ->  sum_{n1} t^{n1} q(n1, p),   t = 1 / (b1 b1'),

which is extracted by Richardson extrapolation in ``1/N`` and solved for the
row values as a Laurent-Vandermonde system over the ``theta`` samples.
"""
from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from .continuation import b1_inverse, theta_constants
from .kernels import Q1_STAGE, Q2_STAGE, KernelContext, StripState, b_total, known_potential
from .model import PotentialField
from .resolvent import full_resolvent_block

log = logging.getLogger(__name__)

BOracle = Callable  # (z, theta, theta_prime, block) -> complex


class ConditioningError(ArithmeticError):
    """Vandermonde system too ill-conditioned for the configured cap."""


class InsufficientSamplesError(ValueError):
    pass


class ExtractionWarning(UserWarning):
    """A stage's extrapolation error indicator exceeds the configured tolerance."""


# ------------------------------------------------------------ Richardson

@dataclass
class RichardsonResult:
    value: object
    error: float


def richardson_limit(samples: Sequence, order: int) -> RichardsonResult:
    """Extrapolate ``value(N) = c0 + c1/N + ... + c_order/N^order`` to ``N = inf``.

    Uses the ``order + 1`` samples with the largest ``N`` (Neville at ``1/N = 0``).
    The error indicator is the change against the order-1 estimate.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if len(samples) < order + 1:
        raise InsufficientSamplesError(f"order {order} needs {order + 1} samples, got {len(samples)}")
    pts = sorted(samples, key=lambda s: s[0])[-(order + 1):]
    us = [1 / mpmath.mpf(N) for N, _ in pts]
    vals = [mpmath.mpmathify(v) for _, v in pts]

    def neville(k):
        u, P = us[-(k + 1):], list(vals[-(k + 1):])
        for lvl in range(1, k + 1):
            for i in range(k + 1 - lvl):
                P[i] = (u[i] * P[i + 1] - u[i + lvl] * P[i]) / (u[i] - u[i + lvl])
        return P[0]

    best = neville(order)
    err = abs(best - neville(order - 1)) if order >= 1 else float("inf")
    return RichardsonResult(best, float(err))


# -------------------------------------------------------------- row solve

@dataclass
class RowSolution:
    values: dict
    imag_residual: float
    fit_residual: float
    cond: float


def solve_row(tvals: Sequence, sums: Sequence, width: int, cond_cap: float = 1e12) -> RowSolution:
    """Solve ``sum_{|n1| <= width} t^{n1} c_{n1} = S(t)`` for real ``c``.

    Multiplying by ``t^width`` gives an ordinary Vandermonde system, solved in
    the least-squares sense when more samples than unknowns are given.
    """
    if width < 0:
        raise ValueError("width must be >= 0")
    k = 2 * width + 1
    if len(tvals) != len(sums):
        raise ValueError("tvals and sums differ in length")
    if len(tvals) < k:
        raise InsufficientSamplesError(f"width {width} needs {k} t-values, got {len(tvals)}")
    ts = [mpmath.mpf(t) for t in tvals]
    if any(t <= 0 for t in ts) or len(set(ts)) != len(ts):
        raise ValueError("t-values must be distinct and positive")
    A = mpmath.matrix(len(ts), k)
    rhs = mpmath.matrix(len(ts), 1)
    for i, (t, s) in enumerate(zip(ts, sums)):
        for j in range(k):
            A[i, j] = t**j
        rhs[i] = mpmath.mpmathify(s) * t**width
    # column scaling before the condition estimate
    An = np.array(A.tolist(), dtype=float)
    scale = np.max(np.abs(An), axis=0)
    cond = float(np.linalg.cond(An / scale))
    if not math.isfinite(cond) or cond > cond_cap:
        raise ConditioningError(f"Vandermonde condition {cond:.3g} exceeds cap {cond_cap:.3g}")
    re = mpmath.matrix([mpmath.re(v) for v in rhs])
    im = mpmath.matrix([mpmath.im(v) for v in rhs])
    if len(ts) == k:
        c_re, c_im = mpmath.lu_solve(A, re), mpmath.lu_solve(A, im)
        fit = 0.0
    else:
        c_re, res_re = mpmath.qr_solve(A, re)
        c_im, _ = mpmath.qr_solve(A, im)
        fit = float(res_re)
    values = {j - width: float(c_re[j]) for j in range(k)}
    imag = max(float(abs(c_im[j])) for j in range(k))
    return RowSolution(values, imag, fit, cond)


# ---------------------------------------------------------------- oracle

class ForwardOracle:
    """``B(z, theta, theta', block)`` for a given potential, with caches.

    Resolvent blocks are cached per ``z`` and kernel contexts per
    ``(z, theta, theta')``; both are shared with the known-term evaluations.
    """

    def __init__(self, q: PotentialField, contexts: "ContextCache | None" = None):
        self.q = q
        self.contexts = contexts or ContextCache()
        self._res: dict = {}
        self._values: dict = {}

    def resolvent(self, z):
        key = complex(z)
        if key not in self._res:
            self._res[key] = full_resolvent_block(self.q, mpmath.mpc(z), g0_cache=self.contexts.g0(z))
        return self._res[key]

    def __call__(self, z, theta, theta_prime, block):
        key = (complex(z), float(theta), float(theta_prime), block)
        if key not in self._values:
            ctx = self.contexts.get(z, theta, theta_prime)
            self._values[key] = b_total(self.q, ctx, block=block, res=self.resolvent(z))
        return self._values[key]


class ContextCache:
    """Per-``(z, theta, theta')`` kernel contexts and per-``z`` free-resolvent tables.

    Neither depends on the potential, so one cache serves many runs at the
    same working precision.
    """

    def __init__(self):
        self._c: dict = {}
        self._g0: dict = {}
        self.dps = mpmath.mp.dps

    def g0(self, z) -> dict:
        return self._g0.setdefault(complex(z), {})

    def get(self, z, theta, theta_prime) -> KernelContext:
        key = (complex(z), float(theta), float(theta_prime))
        if key not in self._c:
            self._c[key] = KernelContext.build(mpmath.mpc(z), theta, theta_prime)
        return self._c[key]


# ---------------------------------------------------------- parameters

def default_thetas(count: int = 9, t_range=(1.5, 6.0)) -> list:
    """``theta = theta'`` pairs with ``b1 b1'`` log-uniform on ``t_range``."""
    lo, hi = map(math.log, t_range)
    out = []
    for k in range(count):
        prod = math.exp(lo + (hi - lo) * k / max(count - 1, 1))
        th = float(b1_inverse(math.sqrt(prod)))
        out.append((th, th))
    return out


def extrapolation_weights(Ns: Sequence) -> list:
    """Weights ``w_j`` with ``P(0) = sum_j w_j value(N_j)`` for interpolation in ``1/N``."""
    us = [1 / mpmath.mpf(N) for N in Ns]
    out = []
    for j, uj in enumerate(us):
        w = mpmath.mpf(1)
        for i, ui in enumerate(us):
            if i != j:
                w *= ui / (ui - uj)
        out.append(w)
    return out


def required_dps(M: int, Ns: Sequence, order: int) -> int:
    """Digits for the ``N^{8M}`` dynamic range plus the extrapolation weight growth."""
    nodes = sorted(Ns)[-(order + 1):]
    with mpmath.workdps(30):
        lebesgue = float(sum(abs(w) for w in extrapolation_weights(nodes)))
    return int(math.ceil(8 * M * math.log10(max(Ns)) + math.log10(lebesgue) + 40))


@dataclass
class ReconstructionParams:
    M: int
    Ns: list = field(default_factory=lambda: [1000, 2000, 4000])
    richardson_order: int | None = None  # default: len(Ns) - 1
    thetas: list = field(default_factory=default_thetas)
    tolerance: float = 1e-2
    cond_cap: float = 1e12
    dps: int | None = None

    def __post_init__(self):
        self.Ns = sorted(int(n) for n in self.Ns)
        if self.richardson_order is None:
            self.richardson_order = len(self.Ns) - 1
        if self.Ns[-1] < 1000:
            raise ValueError("the largest N node must be at least 1000")
        if self.richardson_order + 1 > len(self.Ns):
            raise InsufficientSamplesError("more N nodes needed for this Richardson order")
        ts = {round(float(self.t_of(th, thp)), 14) for th, thp in self.thetas}
        if len(ts) < 2 * self.M + 1:
            raise ValueError(f"need at least {2 * self.M + 1} distinct t values, got {len(ts)}")
        if self.dps is None:
            self.dps = required_dps(self.M, self.Ns, self.richardson_order)

    @staticmethod
    def t_of(theta, theta_prime):
        return 1 / (theta_constants(theta).b1 * theta_constants(theta_prime).b1)

    @classmethod
    def geometric(cls, M: int, n_base: float = 1000, levels: int = 3, ratio: float = 2.0,
                  **kw) -> "ReconstructionParams":
        return cls(M=M, Ns=[round(n_base * ratio**k) for k in range(levels)], **kw)


# --------------------------------------------------------- the stripping

@dataclass
class StageReport:
    p: int
    comp: int
    width: int
    values: dict
    imag_residual: float
    fit_residual: float
    cond: float
    richardson_error: float

    def to_json(self) -> dict:
        return {
            "row": self.p,
            "comp": self.comp,
            "width": self.width,
            "values": {str(k): v for k, v in sorted(self.values.items())},
            "imag_residual": self.imag_residual,
            "fit_residual": self.fit_residual,
            "condition": self.cond,
            "richardson_error": self.richardson_error,
        }


@dataclass
class ReconstructionReport:
    stages: list = field(default_factory=list)
    error: str | None = None

    def to_json(self) -> dict:
        return {"stages": [s.to_json() for s in self.stages], "error": self.error}


def _workers() -> int:
    """Worker cap from ``HEXSCAT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("HEXSCAT_THREADS", "1")))
    except ValueError:
        return 1


def recover_row(p: int, comp: int, state: StripState, oracle: BOracle, params: ReconstructionParams,
                contexts: ContextCache | None = None) -> StageReport:
    """One stage of the induction; writes the row into ``state``."""
    if comp not in (1, 2):
        raise ValueError("comp must be 1 or 2")
    phase = Q2_STAGE if comp == 2 else Q1_STAGE
    state.require(p, phase)
    contexts = contexts or ContextCache()
    M = params.M
    width = M - abs(p)
    block = 22 if comp == 2 else 11
    K = known_potential(p, phase, state.field)
    known_res: dict = {}

    def limit_for(th_pair):
        th, thp = th_pair
        c, cp = theta_constants(th), theta_constants(thp)
        samples = []
        for N in params.Ns:
            z = mpmath.mpc(1, N)
            ctx = contexts.get(z, th, thp)
            if not K.is_zero() and N not in known_res:
                known_res[N] = full_resolvent_block(K, z, g0_cache=contexts.g0(z))
            known = b_total(K, ctx, block=block, res=known_res.get(N))
            D = oracle(z, th, thp, block) - known
            samples.append((N, D / (mpmath.mpf(N) ** (4 * p) * (c.a1 * cp.a1) ** p)))
        return richardson_limit(samples, params.richardson_order)

    # resolvent blocks first so the per-theta work shares them
    if not K.is_zero():
        for N in params.Ns:
            z = mpmath.mpc(1, N)
            known_res[N] = full_resolvent_block(K, z, g0_cache=contexts.g0(z))
    workers = min(_workers(), len(params.thetas))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            limits = list(pool.map(limit_for, params.thetas))
    else:
        limits = [limit_for(tp) for tp in params.thetas]
    tvals = [params.t_of(th, thp) for th, thp in params.thetas]
    sol = solve_row(tvals, [r.value for r in limits], width, params.cond_cap)
    updates = {(n1, p): v for n1, v in sol.values.items()}
    state.field = state.field.with_values(updates, comp)
    state.done.add((p, comp))
    rep = StageReport(p, comp, width, sol.values, sol.imag_residual, sol.fit_residual, sol.cond,
                      max(r.error for r in limits))
    log.info("row %d comp %d: %s (richardson err %.2e)", p, comp, sol.values, rep.richardson_error)
    scale = max([1.0] + [abs(v) for v in sol.values.values()])
    if rep.richardson_error > params.tolerance * scale:
        warnings.warn(ExtractionWarning(f"row {p} comp {comp}: extrapolation error {rep.richardson_error:.3g} "
                                        f"above tolerance {params.tolerance:g}; diagnostics {rep.to_json()}"))
    return rep


def reconstruct(oracle: BOracle, params: ReconstructionParams, contexts: ContextCache | None = None):
    """Recover all rows ``p = M .. -M`` (``q2`` then ``q1``); returns ``(field, report)``.

    On failure the report carries the stages finished so far and the error.
    """
    report = ReconstructionReport()
    state = StripState(PotentialField(params.M, {}))
    with mpmath.workdps(params.dps):
        contexts = contexts or getattr(oracle, "contexts", None) or ContextCache()
        if contexts.dps != params.dps:
            raise ValueError(f"context cache built at {contexts.dps} digits, run needs {params.dps}")
        try:
            for p in range(params.M, -params.M - 1, -1):
                for comp in (2, 1):
                    report.stages.append(recover_row(p, comp, state, oracle, params, contexts))
        except Exception as exc:  # keep partial results
            report.error = f"{type(exc).__name__}: {exc}"
            raise ReconstructionFailed(state.field, report) from exc
    return state.field, report


class ReconstructionFailed(RuntimeError):
    def __init__(self, partial: PotentialField, report: ReconstructionReport):
        super().__init__(report.error)
        self.partial = partial
        self.report = report


def round_trip(q: PotentialField, params: ReconstructionParams, contexts: ContextCache | None = None):
    """Reconstruct ``q`` from its own forward kernels; returns ``(recovered, report, max_error)``.

    ``contexts`` may be shared between runs with the same nodes and precision.
    """
    with mpmath.workdps(params.dps):
        oracle = ForwardOracle(q, contexts)
        rec, rep = reconstruct(oracle, params, oracle.contexts)
    return rec, rep, rec.max_abs_diff(q)
