"""Free and full resolvent matrix elements on the hexagonal lattice.

Matrix elements are indexed by the displacement ``n - m`` and use plain
Fourier-coefficient normalisation, so ``<P(n)|R0(z)|P(n)> -> -1/z``.
Two independent routes give the free resolvent: a power series in ``1/z``
with exact Fourier coefficients of ``r^s``, ``r^s alpha``, ``r^s alpha_bar``,
and a spectrally accurate tensor-grid quadrature (FFT).

Everything that feeds the reconstruction runs in mpmath: kernel values span
dozens of orders of magnitude along ``z = 1 + iN``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .lattice import LatticeSite
from .model import PotentialField
from .trigpoly import r_power, r_power_alpha, r_power_alpha_bar

SERIES_RADIUS = 3.0


class ResolventError(ArithmeticError):
    """Inadmissible spectral point or singular finite system."""


def _is_mp(z) -> bool:
    return isinstance(z, (mpmath.mpf, mpmath.mpc))


def check_admissible(z) -> None:
    zc = complex(z)
    if zc.imag == 0 and abs(zc.real) <= SERIES_RADIUS:
        raise ResolventError(f"z = {zc} lies in the spectrum [-3, 3]")


# ---------------------------------------------------------------- series

def series_terms(z, d: int, eps: float | None = None) -> int:
    """Last power ``s`` needed so the geometric tail is below ``eps`` relative to ``|z|^(-2d-1)``.

    Uses ``sum |coeff(r^s)| = 9^s`` as the coefficient bound.
    """
    az = float(abs(z))
    if az <= SERIES_RADIUS:
        raise ResolventError(f"series diverges for |z| = {az} <= 3")
    if eps is None:
        eps = 10.0 ** (-(mpmath.mp.dps + 2)) if _is_mp(z) else 1e-17
    rho = 9.0 / az**2
    log_target = math.log(eps) - (2 * d + 1) * math.log(az)
    s = d
    while True:
        log_tail = (s + 1) * math.log(9.0) - (2 * s + 3) * math.log(az) - math.log1p(-rho)
        if log_tail <= log_target:
            return s
        s += 1


def r0_series(z, n, smax: int | None = None):
    """Free resolvent element ``<P(n+m)|R0(z)|P(m)>`` from the ``1/z`` expansion.

    Returns a 2x2 nested list (mpmath input) or numpy array (complex input).
    """
    n = (int(n[0]), int(n[1]))
    if abs(complex(z)) <= SERIES_RADIUS:
        raise ResolventError(f"series diverges for |z| = {abs(complex(z))} <= 3")
    if smax is None:
        smax = series_terms(z, 0)
    mp = _is_mp(z)
    w = (mpmath.mpf(1) if mp else 1.0) / z
    w2 = w * w
    diag = a12 = a21 = 0
    pw = w  # z^{-2s-1}
    for s in range(smax + 1):
        c = r_power(s).coeff(n)
        if c:
            diag += c * pw
        c = r_power_alpha(s).coeff(n)
        if c:
            a12 += c * pw * w
        c = r_power_alpha_bar(s).coeff(n)
        if c:
            a21 += c * pw * w
        pw *= w2
    if mp:
        return [[-mpmath.mpmathify(diag), -mpmath.mpmathify(a12)], [-mpmath.mpmathify(a21), -mpmath.mpmathify(diag)]]
    return -np.array([[diag, a12], [a21, diag]], dtype=complex)


# ------------------------------------------------------------ quadrature

def _quad_grid(z: complex, K: int):
    """Fourier coefficients of ``R0(z, .)`` on a KxK grid, all frequencies at once."""
    xi = 2 * np.pi * np.arange(K) / K
    x1, x2 = np.meshgrid(xi, xi, indexing="ij")
    a = 1 + np.exp(1j * x1) + np.exp(1j * x2)
    den = z * z - (a * np.conj(a)).real
    if np.min(np.abs(den)) < 1e-300 or not np.all(np.isfinite(den)):
        raise ResolventError(f"z^2 - r(xi) vanishes on the quadrature grid for z = {z}")
    f = -1.0 / den
    # coefficient at n: mean of f(xi) exp(-i n xi), i.e. fft2 / K^2
    comps = [f * z, f * a, f * np.conj(a)]
    return [np.fft.fft2(c) / (K * K) for c in comps]


def _pick(coeffs, n, K):
    i, j = n[0] % K, n[1] % K
    d, a12, a21 = (c[i, j] for c in coeffs)
    return np.array([[d, a12], [a21, d]])


def r0_quad(z, n, gridK: int = 32, tol: float = 1e-13, max_grid: int = 4096):
    """Free resolvent element by trapezoidal quadrature on ``T^2``.

    The grid doubles until two successive values differ by at most ``tol``.
    ``gridK`` must exceed ``2 * max|n_i|`` so the frequency is resolved.
    """
    if gridK < 8:
        raise ValueError("gridK must be >= 8")
    check_admissible(z)
    z = complex(z)
    n = (int(n[0]), int(n[1]))
    K = max(gridK, 4 * max(abs(n[0]), abs(n[1])) + 8)
    prev = _pick(_quad_grid(z, K), n, K)
    while True:
        K *= 2
        if K > max_grid:
            raise ResolventError(f"quadrature did not settle below {tol} by grid {max_grid}")
        cur = _pick(_quad_grid(z, K), n, K)
        if np.max(np.abs(cur - prev)) <= tol:
            return cur
        prev = cur


def r0_quad_table(z, radius: int, gridK: int = 32, tol: float = 1e-13, max_grid: int = 4096) -> dict:
    """``{n: r0_quad(z, n)}`` for ``|n|_inf <= radius`` from one doubling sequence."""
    check_admissible(z)
    z = complex(z)
    K = max(gridK, 4 * radius + 8)
    sites = [(a, b) for a in range(-radius, radius + 1) for b in range(-radius, radius + 1)]
    prev = _quad_grid(z, K)
    prev_t = {n: _pick(prev, n, K) for n in sites}
    while True:
        K *= 2
        if K > max_grid:
            raise ResolventError(f"quadrature did not settle below {tol} by grid {max_grid}")
        cur = _quad_grid(z, K)
        cur_t = {n: _pick(cur, n, K) for n in sites}
        if max(np.max(np.abs(cur_t[n] - prev_t[n])) for n in sites) <= tol:
            return cur_t
        prev_t = cur_t


# ------------------------------------------------------- full resolvent

class TruncationSpec(NamedTuple):
    """Keep ``q1`` on rows ``n2 > r`` and ``q2`` on rows ``n2 > s``."""

    r: int
    s: int


class ResolventBlock:
    """``X(n, m) = <P(n)|R(z)|P(m)>`` for ``n, m`` in ``sites``.

    In multiprecision the system ``A = I + G0 Q`` is kept LU-factorised and
    ``X = A^{-1} G0`` is only formed on demand; kernels use :meth:`bilinear`.
    """

    def __init__(self, sites, z, G0, Q, cond, A=None, lu=None, X=None):
        self.sites = sites
        self.z = z
        self.G0 = G0
        self.Q = Q
        self.cond = cond
        self._A = A
        self._lu = lu
        self._X = X
        self._pos = {s: k for k, s in enumerate(sites)}

    @property
    def is_mp(self) -> bool:
        return isinstance(self.G0, mpmath.matrix)

    def index(self, n) -> int:
        return self._pos[LatticeSite(int(n[0]), int(n[1]))]

    def solve(self, b):
        """``A^{-1} b`` for an mpmath column vector."""
        LU, piv = self._lu
        y = mpmath.mp.L_solve(LU, b.copy(), piv)
        return mpmath.mp.U_solve(LU, y)

    @property
    def X(self):
        if self._X is None:
            n = self.G0.rows
            X = mpmath.matrix(n, n)
            for j in range(n):
                col = self.solve(self.G0.column(j))
                for i in range(n):
                    X[i, j] = col[i]
            self._X = X
        return self._X

    def get(self, n, m):
        i, j = 2 * self.index(n), 2 * self.index(m)
        X = self.X
        return [[X[i, j], X[i, j + 1]], [X[i + 1, j], X[i + 1, j + 1]]]

    def bilinear(self, left, right):
        """``left^T X right`` without forming ``X``."""
        if not self.sites:
            return mpmath.mpc(0)
        if self._X is not None or not self.is_mp:
            X = self.X
            if self.is_mp:
                return mpmath.fdot(left, X * mpmath.matrix(right))
            return complex(np.asarray(left) @ X @ np.asarray(right))
        y = self.solve(self.G0 * mpmath.matrix(right))
        return mpmath.fdot(left, y)

    def residual(self) -> float:
        """``max |X - G0 + G0 Q X|``."""
        if not self.sites:
            return 0.0
        if self.is_mp:
            R = self.X - self.G0 + self.G0 * self.Q * self.X
            return float(max(abs(v) for v in R))
        return float(np.max(np.abs(self.X - self.G0 + self.G0 @ self.Q @ self.X)))


def _g0_matrix(sites, z, cache: dict | None = None):
    mp = _is_mp(z)
    S = len(sites)
    G = mpmath.matrix(2 * S, 2 * S) if mp else np.zeros((2 * S, 2 * S), dtype=complex)
    table = {} if cache is None else cache
    for a, n in enumerate(sites):
        for b, m in enumerate(sites):
            d = (n[0] - m[0], n[1] - m[1])
            if d not in table:
                table[d] = r0_series(z, d, series_terms(z, 0))
            blk = table[d]
            for i in range(2):
                for j in range(2):
                    G[2 * a + i, 2 * b + j] = blk[i][j]
    return G


def _q_matrix(q: PotentialField, sites, mp: bool):
    S = len(sites)
    Q = mpmath.matrix(2 * S, 2 * S) if mp else np.zeros((2 * S, 2 * S), dtype=complex)
    for a, n in enumerate(sites):
        q1, q2 = q[n]
        Q[2 * a, 2 * a] = q1
        Q[2 * a + 1, 2 * a + 1] = q2
    return Q


def _sites_for(q: PotentialField, extra: Sequence = ()) -> list:
    sites = set(q.support)
    sites.update(LatticeSite(int(a), int(b)) for a, b in extra)
    return sorted(sites)


def full_resolvent_block(q: PotentialField, z, extra_sites: Sequence = (), g0_cache: dict | None = None,
                         cond_cap: float = 1e30) -> ResolventBlock:
    """Solve ``(I + G0 Q) X = G0`` on ``supp q`` (plus ``extra_sites``).

    ``z`` given as an mpmath number selects multiprecision arithmetic at the
    current working precision; plain complex uses LAPACK.
    """
    check_admissible(z)
    if abs(complex(z)) <= SERIES_RADIUS:
        raise ResolventError("full_resolvent_block needs |z| > 3 for the series oracle")
    sites = _sites_for(q, extra_sites)
    mp = _is_mp(z)
    G0 = _g0_matrix(sites, z, g0_cache)
    Q = _q_matrix(q, sites, mp)
    if not sites:
        return ResolventBlock(sites, z, G0, Q, 1.0, X=G0)
    if mp:
        A = mpmath.eye(2 * len(sites)) + G0 * Q
        cond = float(abs(np.linalg.cond(np.array(A.tolist(), dtype=complex), 1)))
        if not math.isfinite(cond) or cond > cond_cap:
            raise ResolventError(f"singular resolvent system at z={complex(z)} (cond ~ {cond:.3g})")
        try:
            lu = mpmath.mp.LU_decomp(A)
        except ZeroDivisionError:
            raise ResolventError(f"singular resolvent system at z={complex(z)}") from None
        return ResolventBlock(sites, z, G0, Q, cond, A=A, lu=lu)
    A = np.eye(2 * len(sites)) + G0 @ Q
    cond = float(abs(np.linalg.cond(A, 1)))
    if not math.isfinite(cond) or cond > cond_cap:
        raise ResolventError(f"singular resolvent system at z={z} (cond ~ {cond:.3g})")
    return ResolventBlock(sites, z, G0, Q, cond, X=np.linalg.solve(A, G0))


def truncated_resolvent_block(q: PotentialField, trunc: TruncationSpec, z, **kw) -> ResolventBlock:
    return full_resolvent_block(q.truncate(trunc.r, trunc.s), z, **kw)


def neumann_block(q: PotentialField, z, terms: int, extra_sites: Sequence = ()):
    """Truncated expansion ``sum_{k<terms} (-G0 Q)^k G0`` (numpy)."""
    sites = _sites_for(q, extra_sites)
    G0 = _g0_matrix(sites, complex(z))
    Q = _q_matrix(q, sites, False)
    out = np.zeros_like(G0)
    term = G0.copy()
    for _ in range(terms):
        out += term
        term = -G0 @ Q @ term
    return sites, out


# ----------------------------------------------------------- decay probe

@dataclass
class DecayFit:
    n: tuple
    m: tuple
    block: tuple
    slope: float
    target: int
    degenerate: bool = False


def decay_probe(q: PotentialField, pairs: Sequence, Ns: Sequence[int], dps: int = 60) -> list[DecayFit]:
    """Fit ``log|X_ij(n, m)|`` against ``log N`` along ``z = 1 + iN``.

    Target slopes: ``-(2d+1)`` on the diagonal blocks, ``-(2 d_ij + 2)`` off it.
    """
    from .lattice import block_dist

    Ns = list(Ns)
    if len(Ns) < 4 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must be increasing with at least 4 entries")
    extra = [tuple(p) for pair in pairs for p in pair]
    vals: dict = {}
    with mpmath.workdps(dps):
        for N in Ns:
            blk = full_resolvent_block(q, mpmath.mpc(1, N), extra_sites=extra)
            for n, m in pairs:
                e = blk.get(n, m)
                for i in range(2):
                    for j in range(2):
                        vals.setdefault((tuple(n), tuple(m), i, j), []).append(abs(e[i][j]))
    x = np.log(np.asarray(Ns, dtype=float))
    fits = []
    for (n, m, i, j), mags in vals.items():
        d = block_dist(i + 1, j + 1, (n[0] - m[0], n[1] - m[1]))
        target = -(2 * d + 1) if i == j else -(2 * d + 2)
        if any(v == 0 for v in mags):
            fits.append(DecayFit(n, m, (i + 1, j + 1), float("-inf"), target, True))
            continue
        y = np.array([float(mpmath.log(v)) for v in mags])
        slope = float(np.polyfit(x, y, 1)[0])
        fits.append(DecayFit(n, m, (i + 1, j + 1), slope, target))
    return fits
