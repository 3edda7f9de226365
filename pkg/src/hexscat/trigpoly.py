"""Exact trigonometric polynomials on the two-torus.

A :class:`TrigPoly` maps frequencies ``(k1, k2)`` to coefficients of
``exp(i (k1 xi1 + k2 xi2))``.  Coefficients generated from ``alpha`` are
Gaussian integers, stored as Python ``complex`` only when they leave the
exact world (``eval``); internally they are ``(re, im)`` integer pairs so
support statements are checked without rounding.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import cached_property, lru_cache

import mpmath

from .lattice import DistKind, dist


def _gauss_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


@dataclass(frozen=True)
class TrigPoly:
    # frozenset of (freq, (re, im)) keeps the value hashable and immutable
    terms: frozenset

    @classmethod
    def from_dict(cls, coeffs: dict) -> "TrigPoly":
        clean = {}
        for k, c in coeffs.items():
            if isinstance(c, int):
                c = (c, 0)
            if c != (0, 0):
                clean[(int(k[0]), int(k[1]))] = (int(c[0]), int(c[1]))
        return cls(frozenset(clean.items()))

    @classmethod
    def constant(cls, c: int = 1) -> "TrigPoly":
        return cls.from_dict({(0, 0): c})

    @cached_property
    def _lookup(self) -> dict:
        return dict(self.terms)

    def as_dict(self) -> dict:
        return dict(self._lookup)

    @property
    def support(self) -> list:
        return sorted(k for k, _ in self.terms)

    def coeff(self, n) -> complex:
        re, im = self._lookup.get((int(n[0]), int(n[1])), (0, 0))
        return complex(re, im) if im else re

    def coeff_exact(self, n) -> tuple[int, int]:
        return self._lookup.get((int(n[0]), int(n[1])), (0, 0))

    def conj(self) -> "TrigPoly":
        return TrigPoly.from_dict({(-k[0], -k[1]): (c[0], -c[1]) for k, c in self.terms})

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        return mul(self, other)

    def __pow__(self, s: int) -> "TrigPoly":
        return pow_(self, s)

    def eval(self, zeta) -> complex:
        return evaluate(self, zeta)


def mul(p: TrigPoly, q: TrigPoly) -> TrigPoly:
    out: dict = {}
    for k, a in p.terms:
        for m, b in q.terms:
            key = (k[0] + m[0], k[1] + m[1])
            c = _gauss_mul(a, b)
            old = out.get(key, (0, 0))
            out[key] = (old[0] + c[0], old[1] + c[1])
    return TrigPoly.from_dict(out)


def pow_(p: TrigPoly, s: int) -> TrigPoly:
    if s < 0:
        raise ValueError("power must be nonnegative")
    out = TrigPoly.constant(1)
    for _ in range(s):
        out = mul(out, p)
    return out


def alpha() -> TrigPoly:
    """``1 + e^{i xi1} + e^{i xi2}``."""
    return TrigPoly.from_dict({(0, 0): 1, (1, 0): 1, (0, 1): 1})


def alpha_bar() -> TrigPoly:
    return alpha().conj()


def r() -> TrigPoly:
    """``|alpha|^2 = 3 + 2cos xi1 + 2cos xi2 + 2cos(xi1 - xi2)``."""
    return mul(alpha(), alpha_bar())


@lru_cache(maxsize=None)
def r_power(s: int) -> TrigPoly:
    return r() if s == 1 else TrigPoly.constant(1) if s == 0 else mul(r_power(s - 1), r())


@lru_cache(maxsize=None)
def r_power_alpha(s: int) -> TrigPoly:
    return mul(r_power(s), alpha())


@lru_cache(maxsize=None)
def r_power_alpha_bar(s: int) -> TrigPoly:
    return mul(r_power(s), alpha_bar())


def evaluate(p: TrigPoly, zeta) -> complex:
    """Evaluate at a (possibly complex) angle pair.

    Uses mpmath when either angle is an mpmath number, so continued phases
    with huge imaginary parts keep their precision.  Plain floats raise
    ``OverflowError`` once an exponent leaves the double range.
    """
    z1, z2 = zeta
    if isinstance(z1, (mpmath.mpf, mpmath.mpc)) or isinstance(z2, (mpmath.mpf, mpmath.mpc)):
        total = mpmath.mpc(0)
        for k, c in p.terms:
            total += mpmath.mpc(c[0], c[1]) * mpmath.expj(k[0] * z1 + k[1] * z2)
        return total
    total = 0j
    for k, c in p.terms:
        arg = k[0] * z1 + k[1] * z2
        if abs(complex(arg).imag) > 700:
            raise OverflowError(f"exponent {arg} out of double range")
        total += complex(c[0], c[1]) * cmath.exp(1j * arg)
    return total


@dataclass
class SupportReport:
    smax: int
    violations: list
    extremal: dict

    @property
    def ok(self) -> bool:
        return not self.violations


_FAMILIES = {
    "r^s": (r_power, DistKind.D),
    "r^s alpha": (r_power_alpha, DistKind.D12),
    "r^s alpha_bar": (r_power_alpha_bar, DistKind.D21),
}


def verify_support(smax: int) -> SupportReport:
    """Check that r^s, r^s alpha, r^s alpha_bar vanish outside their distance balls.

    ``extremal`` records, per family and ``s``, the largest distance found
    among nonzero coefficients (it must equal ``s``).
    """
    if smax < 0:
        raise ValueError("smax must be >= 0")
    violations = []
    extremal = {}
    for name, (family, kind) in _FAMILIES.items():
        for s in range(smax + 1):
            poly = family(s)
            worst = max(dist(kind, k) for k, _ in poly.terms)
            extremal[(name, s)] = worst
            for k, _ in poly.terms:
                if dist(kind, k) > s:
                    violations.append((name, s, k))
    return SupportReport(smax, violations, extremal)


def grid_eval(p: TrigPoly, xi1, xi2):
    """Vectorised evaluation on real numpy grids."""
    import numpy as np

    out = np.zeros(np.broadcast(xi1, xi2).shape, dtype=complex)
    for k, c in p.terms:
        out += complex(c[0], c[1]) * np.exp(1j * (k[0] * xi1 + k[1] * xi2))
    return out


def support_size_bound(s: int) -> int:
    """Number of lattice points with ``d(n) <= s`` (a hexagon): ``3s^2 + 3s + 1``."""
    return 3 * s * s + 3 * s + 1


__all__ = [
    "TrigPoly",
    "alpha",
    "alpha_bar",
    "r",
    "mul",
    "pow_",
    "r_power",
    "r_power_alpha",
    "r_power_alpha_bar",
    "evaluate",
    "verify_support",
    "grid_eval",
    "support_size_bound",
]
