"""Free hexagonal Hamiltonian, its dispersion, and the potential container."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .lattice import LatticeSite

TWO_PI_3 = 2 * math.pi / 3
DIRAC_POINTS = ((TWO_PI_3, -TWO_PI_3), (-TWO_PI_3, TWO_PI_3))
CRITICAL_POINTS = ((0.0, 0.0), (0.0, -math.pi), (-math.pi, 0.0), (-math.pi, -math.pi))


class PotentialError(ValueError):
    """Malformed potential file or support-radius violation."""


class DiracPointError(ArithmeticError):
    """Gradient of the dispersion requested where ``p`` vanishes."""


@dataclass(frozen=True)
class PotentialField:
    """Finitely supported diagonal potential ``n -> (q1(n), q2(n))``.

    ``M`` is the a-priori l1 support radius; every stored site obeys
    ``|n1| + |n2| <= M``.  Zero entries are dropped.
    """

    M: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.M < 0:
            raise PotentialError("M must be nonnegative")
        clean = {}
        for n, (q1, q2) in self.entries.items():
            site = LatticeSite(int(n[0]), int(n[1]))
            for v in (q1, q2):
                if isinstance(v, complex) or not math.isfinite(float(v)):
                    raise PotentialError(f"site {tuple(site)}: values must be finite reals, got {v!r}")
            if abs(site.n1) + abs(site.n2) > self.M:
                raise PotentialError(f"site {tuple(site)} lies outside the l1 ball of radius {self.M}")
            if q1 != 0 or q2 != 0:
                clean[site] = (float(q1), float(q2))
        object.__setattr__(self, "entries", clean)

    def __getitem__(self, n) -> tuple[float, float]:
        return self.entries.get(LatticeSite(int(n[0]), int(n[1])), (0.0, 0.0))

    def __eq__(self, other):
        return isinstance(other, PotentialField) and self.M == other.M and self.entries == other.entries

    def __hash__(self):
        return hash((self.M, frozenset(self.entries.items())))

    @property
    def support(self) -> list[LatticeSite]:
        return sorted(self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def row(self, p: int, comp: int) -> dict[int, float]:
        """``{n1: q_comp(n1, p)}`` over the stored sites of row ``n2 = p``."""
        if comp not in (1, 2):
            raise ValueError("comp must be 1 or 2")
        return {n.n1: v[comp - 1] for n, v in sorted(self.entries.items()) if n.n2 == p and v[comp - 1] != 0}

    def truncate(self, r: int, s: int) -> "PotentialField":
        """Keep ``q1`` on rows ``n2 > r`` and ``q2`` on rows ``n2 > s``."""
        out = {}
        for n, (q1, q2) in self.entries.items():
            out[n] = (q1 if n.n2 > r else 0.0, q2 if n.n2 > s else 0.0)
        return PotentialField(self.M, out)

    def with_values(self, updates: dict, comp: int) -> "PotentialField":
        out = dict(self.entries)
        for n, v in updates.items():
            site = LatticeSite(int(n[0]), int(n[1]))
            old = list(out.get(site, (0.0, 0.0)))
            old[comp - 1] = float(v)
            out[site] = tuple(old)
        return PotentialField(self.M, out)

    def scaled(self, c: float) -> "PotentialField":
        return PotentialField(self.M, {n: (c * a, c * b) for n, (a, b) in self.entries.items()})

    def max_abs_diff(self, other: "PotentialField") -> float:
        sites = set(self.entries) | set(other.entries)
        return max((max(abs(self[n][0] - other[n][0]), abs(self[n][1] - other[n][1])) for n in sites), default=0.0)

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "sites": [
                {"n1": n.n1, "n2": n.n2, "q1": q1, "q2": q2} for n, (q1, q2) in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_json(cls, doc) -> "PotentialField":
        if not isinstance(doc, dict):
            raise PotentialError("top level must be an object with keys 'M' and 'sites'")
        if "M" not in doc or not isinstance(doc["M"], int) or isinstance(doc["M"], bool):
            raise PotentialError("field 'M': expected an integer")
        sites = doc.get("sites", [])
        if not isinstance(sites, list):
            raise PotentialError("field 'sites': expected a list")
        entries = {}
        for i, rec in enumerate(sites):
            where = f"sites[{i}]"
            if not isinstance(rec, dict):
                raise PotentialError(f"{where}: expected an object")
            for key in ("n1", "n2"):
                if not isinstance(rec.get(key), int) or isinstance(rec.get(key), bool):
                    raise PotentialError(f"{where}.{key}: expected an integer, got {rec.get(key)!r}")
            vals = []
            for key in ("q1", "q2"):
                v = rec.get(key, 0)
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise PotentialError(f"{where}.{key}: expected a real number, got {v!r}")
                vals.append(v)
            site = LatticeSite(rec["n1"], rec["n2"])
            if site in entries:
                raise PotentialError(f"{where}: duplicate site {tuple(site)}")
            entries[site] = tuple(vals)
        try:
            return cls(doc["M"], entries)
        except PotentialError as exc:
            raise PotentialError(f"{exc}") from None


def load_potential(path) -> PotentialField:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return PotentialField.from_json(doc)
    except PotentialError as exc:
        raise PotentialError(f"{path}: {exc}") from None


def save_potential(q: PotentialField, path) -> None:
    Path(path).write_text(json.dumps(q.to_json(), indent=2, sort_keys=True) + "\n")


# two-component lattice functions: dict site -> (f1, f2)
LatticeField2 = dict


def apply_H0(f: LatticeField2) -> LatticeField2:
    """Free Hamiltonian on two-component lattice functions.

    ``(H0 f)_1(m) = f2(m) + f2(m1-1, m2) + f2(m1, m2-1)`` and
    ``(H0 f)_2(m) = f1(m) + f1(m1+1, m2) + f1(m1, m2+1)``.
    """
    out: dict = {}

    def add(site, comp, val):
        cur = out.setdefault(LatticeSite(*site), [0j, 0j])
        cur[comp] += val

    for (k1, k2), (f1, f2) in f.items():
        if f2 != 0:
            for e in ((0, 0), (1, 0), (0, 1)):
                add((k1 + e[0], k2 + e[1]), 0, f2)
        if f1 != 0:
            for e in ((0, 0), (1, 0), (0, 1)):
                add((k1 - e[0], k2 - e[1]), 1, f1)
    return {n: tuple(v) for n, v in out.items() if v[0] != 0 or v[1] != 0}


def symbol_H0(xi1, xi2):
    """Matrix symbol ``[[0, alpha], [conj alpha, 0]]`` (numpy, broadcasting)."""
    a = 1 + np.exp(1j * xi1) + np.exp(1j * xi2)
    zero = np.zeros_like(a)
    return np.array([[zero, a], [np.conj(a), zero]])


def p_squared(xi1, xi2):
    return 3 + 2 * np.cos(xi1) + 2 * np.cos(xi2) + 2 * np.cos(np.subtract(xi1, xi2))


def p_of(xi) -> float:
    val = p_squared(xi[0], xi[1])
    return float(np.sqrt(max(float(val), 0.0)))


def grad_p(xi, tol: float = 1e-7) -> tuple[float, float]:
    xi1, xi2 = float(xi[0]), float(xi[1])
    p = p_of((xi1, xi2))
    if p <= tol:
        raise DiracPointError(f"grad p undefined at Dirac point {xi}")
    return (
        (-math.sin(xi1) - math.sin(xi1 - xi2)) / p,
        (-math.sin(xi2) + math.sin(xi1 - xi2)) / p,
    )


def _on_level_one(xi, tol: float = 1e-12) -> bool:
    # p^2 - 1 = 8 cos(xi1/2) cos(xi2/2) cos((xi1 - xi2)/2)
    xi1, xi2 = float(xi[0]), float(xi[1])
    return abs(math.cos(xi1 / 2) * math.cos(xi2 / 2) * math.cos((xi1 - xi2) / 2)) <= tol


@dataclass(frozen=True)
class SpecialSets:
    dirac_points: tuple
    critical_points: tuple
    level_one: Callable
    level_one_description: str


def special_sets() -> SpecialSets:
    return SpecialSets(
        dirac_points=DIRAC_POINTS,
        critical_points=CRITICAL_POINTS,
        level_one=_on_level_one,
        level_one_description="p = 1 exactly on the lines xi1 = pi, xi2 = pi, xi1 - xi2 = pi (mod 2 pi)",
    )


def _torus_gap(a: float, b: float) -> float:
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


def spectrum_grid(grid: int):
    """Rows ``(xi1, xi2, p, |grad p|)`` on a uniform grid of ``[-pi, pi)^2``.

    The gradient column is ``nan`` on nodes whose grid cell (half-width
    ``pi / grid``) contains a Dirac point.
    """
    if grid < 16:
        raise ValueError("grid must be >= 16")
    h = 2 * math.pi / grid
    pts = -math.pi + h * np.arange(grid)
    rows = []
    for x1 in pts:
        for x2 in pts:
            p = p_of((x1, x2))
            near = any(max(_torus_gap(x1, d1), _torus_gap(x2, d2)) <= h / 2 for d1, d2 in DIRAC_POINTS)
            if near:
                gn = float("nan")
            else:
                gn = math.hypot(*grad_p((x1, x2), tol=0.0))
            rows.append((float(x1), float(x2), p, gn))
    return rows


def l1_ball(M: int) -> list[LatticeSite]:
    return [LatticeSite(a, b) for a in range(-M, M + 1) for b in range(-M, M + 1) if abs(a) + abs(b) <= M]


def random_potential(M: int, seed: int, vmax: int = 3) -> PotentialField:
    """Integer values uniform in ``[-vmax, vmax]`` on every site of the l1 ball."""
    import random

    rng = random.Random(seed)
    return PotentialField(M, {n: (rng.randint(-vmax, vmax), rng.randint(-vmax, vmax)) for n in l1_ball(M)})
