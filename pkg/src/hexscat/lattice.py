"""Hexagonal lattice encoded on Z^2 and its combinatorial distances.

Sites are plain integer pairs ``(n1, n2)``.  Even sites (``n1 + n2`` even)
carry the first field component, odd sites the second.  The distances
``d``, ``d12`` and ``d21`` bound the Fourier support of powers of the
dispersion symbol and hence the decay of resolvent matrix elements.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import NamedTuple


class LatticeSite(NamedTuple):
    n1: int
    n2: int

    @property
    def parity(self) -> int:
        return (self.n1 + self.n2) % 2

    def __neg__(self) -> "LatticeSite":
        return LatticeSite(-self.n1, -self.n2)

    def __add__(self, other) -> "LatticeSite":  # type: ignore[override]
        return LatticeSite(self.n1 + other[0], self.n2 + other[1])

    def __sub__(self, other) -> "LatticeSite":
        return LatticeSite(self.n1 - other[0], self.n2 - other[1])


class DistKind(enum.Enum):
    D = "D"
    D12 = "D12"
    D21 = "D21"


# (i, j) block index -> distance kind; d11 = d22 = d
BLOCK_KIND = {
    (1, 1): DistKind.D,
    (2, 2): DistKind.D,
    (1, 2): DistKind.D12,
    (2, 1): DistKind.D21,
}


def _d(n1: int, n2: int) -> int:
    if n1 * n2 >= 0:
        return abs(n1) + abs(n2)
    return max(abs(n1), abs(n2))


def _d12(n1: int, n2: int) -> int:
    if n1 > 0 and n2 > 0:
        return abs(n1) + abs(n2) - 1
    if n1 > 0:
        return max(abs(n1) - 1, abs(n2))
    if n2 <= 0:
        return abs(n1) + abs(n2)
    return max(abs(n1), abs(n2) - 1)


def dist(kind: DistKind | str, n) -> int:
    """Distance of the displacement ``n`` for the given kind.

    >>> dist(DistKind.D, (3, -2))
    3
    >>> dist("D12", (1, 1))
    1
    """
    kind = DistKind(kind) if not isinstance(kind, DistKind) else kind
    n1, n2 = int(n[0]), int(n[1])
    if kind is DistKind.D:
        return _d(n1, n2)
    if kind is DistKind.D12:
        return _d12(n1, n2)
    return _d12(-n1, -n2)


def block_dist(i: int, j: int, n) -> int:
    return dist(BLOCK_KIND[(i, j)], n)


def hex_coords(n) -> tuple[int, tuple[int, int]]:
    """Return ``(parity, m)`` with ``m`` the sublattice coordinates of ``n``.

    Even sites satisfy ``n1 = m1 - m2, n2 = m1 + m2``; odd sites
    ``n1 = m1 - m2, n2 = 1 + m1 + m2``.
    """
    n1, n2 = int(n[0]), int(n[1])
    parity = (n1 + n2) % 2
    s = n2 - parity
    return parity, ((s + n1) // 2, (s - n1) // 2)


def from_hex_coords(parity: int, m) -> LatticeSite:
    m1, m2 = int(m[0]), int(m[1])
    return LatticeSite(m1 - m2, parity + m1 + m2)


def box(radius: int):
    rng = range(-radius, radius + 1)
    return [(a, b) for a in rng for b in rng]


@dataclass
class LemmaReport:
    radius: int
    checked: dict[str, int] = field(default_factory=dict)
    failures: dict[str, list] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def record(self, name: str, passed: bool, witness=None, limit: int = 5):
        self.checked[name] = self.checked.get(name, 0) + 1
        fails = self.failures.setdefault(name, [])
        if not passed and len(fails) < limit:
            fails.append(witness)

    def rows(self):
        for name, count in self.checked.items():
            fails = self.failures.get(name, [])
            yield name, count, not fails, fails


def verify_distance_lemmas(radius: int = 12) -> LemmaReport:
    """Exhaustively check the distance inequalities on ``[-radius, radius]^2``.

    Every inequality depends only on the difference vectors ``u = m - l`` and
    ``v = l - n``, so pairs ``(u, v)`` are enumerated instead of triples.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    report = LemmaReport(radius)
    pts = box(radius)
    # tabulate distances once; sums reach 2*radius
    big = box(2 * radius)
    tab = {k: {p: dist(k, p) for p in big} for k in DistKind}
    D, D12, D21 = tab[DistKind.D], tab[DistKind.D12], tab[DistKind.D21]
    kinds = {(1, 1): D, (2, 2): D, (1, 2): D12, (2, 1): D21}

    # pointwise properties
    for p in big:
        n1, n2 = p
        d = D[p]
        report.record("norm: d>=0, d=0 iff n=0", (d >= 0) and ((d == 0) == (p == (0, 0))), p)
        report.record("norm: d(-n)=d(n)", d == D[(-n1, -n2)], p)
        report.record("reflection: d12(n)=d21(-n)", D12[p] == D21[(-n1, -n2)], p)
        report.record("lower bound: d>=|n2|", d >= abs(n2), p)
        lb12 = abs(n2) - 1 if n2 > 0 else abs(n2)
        lb21 = abs(n2) if n2 >= 0 else abs(n2) - 1
        report.record("lower bound: d12", D12[p] >= lb12, p)
        report.record("lower bound: d21", D21[p] >= lb21, p)
        report.record("sandwich: d-1<=d12<=d", d - 1 <= D12[p] <= d, p)
        report.record("sandwich: d-1<=d21<=d", d - 1 <= D21[p] <= d, p)
    for p in pts:
        for a in range(-3, 4):
            q = (a * p[0], a * p[1])
            if q in D:
                report.record("homogeneity: d(an)=|a|d(n)", D[q] == abs(a) * D[p], (a, p))

    pairs = list(itertools.product((1, 2), repeat=2))
    for u in pts:
        for v in pts:
            w = (u[0] + v[0], u[1] + v[1])
            report.record("triangle: d(u+v)<=d(u)+d(v)", D[w] <= D[u] + D[v], (u, v))
            for i, j in pairs:
                dij, dii, djj, dji = kinds[(i, j)], kinds[(i, i)], kinds[(j, j)], kinds[(j, i)]
                report.record(
                    "quasi: dij(u+v)<=dii(u)+dij(v)", dij[w] <= dii[u] + dij[v], (i, j, u, v)
                )
                report.record(
                    "quasi: dij(u+v)<=dij(u)+djj(v)", dij[w] <= dij[u] + djj[v], (i, j, u, v)
                )
                report.record(
                    "slack: dii(u+v)<=dij(u)+dji(v)+1",
                    dii[w] <= dij[u] + dji[v] + 1,
                    (i, j, u, v),
                )
    return report
