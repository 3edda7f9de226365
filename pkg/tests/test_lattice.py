import itertools

import pytest
from hypothesis import given, strategies as st

from hexscat.lattice import (
    BLOCK_KIND, DistKind, LatticeSite, block_dist, box, dist, from_hex_coords, hex_coords,
    verify_distance_lemmas,
)

ints = st.integers(-40, 40)
pairs = st.tuples(ints, ints)


@pytest.mark.parametrize("kind, n, expected", [
    (DistKind.D, (1, 1), 2),
    (DistKind.D, (0, 0), 0),
    (DistKind.D, (3, -2), 3),
    (DistKind.D12, (1, 1), 1),
    (DistKind.D12, (-1, 2), 1),
    (DistKind.D21, (1, 1), 2),
])
def test_distance_examples(kind, n, expected):
    assert dist(kind, n) == expected


def test_string_kinds():
    assert dist("D12", (1, 1)) == dist(DistKind.D12, (1, 1))
    with pytest.raises(ValueError):
        dist("D33", (0, 0))


def test_block_kind_table():
    assert BLOCK_KIND[(1, 1)] is BLOCK_KIND[(2, 2)] is DistKind.D
    assert block_dist(1, 2, (1, 1)) == 1
    assert block_dist(2, 1, (1, 1)) == 2


@pytest.mark.parametrize("n, expected", [((0, 0), (0, (0, 0))), ((1, 1), (0, (1, 0))), ((0, 1), (1, (0, 0)))])
def test_hex_coords_examples(n, expected):
    assert hex_coords(n) == expected


def test_hex_coords_bijective_on_box():
    for n in box(6):
        parity, m = hex_coords(n)
        assert from_hex_coords(parity, m) == LatticeSite(*n)
        assert parity == LatticeSite(*n).parity


@pytest.mark.parametrize("radius", [1, 3])
def test_verify_small_boxes(radius):
    rep = verify_distance_lemmas(radius)
    assert rep.ok, rep.failures
    assert all(count > 0 for count in rep.checked.values())


@given(pairs, pairs)
def test_triangle_inequality(u, v):
    w = (u[0] + v[0], u[1] + v[1])
    assert dist(DistKind.D, w) <= dist(DistKind.D, u) + dist(DistKind.D, v)


@given(pairs)
def test_norm_and_sandwich(n):
    d, d12, d21 = (dist(k, n) for k in DistKind)
    assert d >= 0 and (d == 0) == (n == (0, 0))
    assert dist(DistKind.D, (-n[0], -n[1])) == d
    assert d - 1 <= d12 <= d and d - 1 <= d21 <= d
    assert d12 == dist(DistKind.D21, (-n[0], -n[1]))
    assert d >= abs(n[1])


def test_quasi_triangle_with_slack_on_box():
    kinds = {(i, j): BLOCK_KIND[(i, j)] for i, j in itertools.product((1, 2), repeat=2)}
    pts = box(4)
    for u in pts:
        for v in pts:
            w = (u[0] + v[0], u[1] + v[1])
            for (i, j) in kinds:
                assert block_dist(i, j, w) <= block_dist(i, i, u) + block_dist(i, j, v)
                assert block_dist(i, j, w) <= block_dist(i, j, u) + block_dist(j, j, v)
                assert block_dist(i, i, w) <= block_dist(i, j, u) + block_dist(j, i, v) + 1


def test_lattice_site_arithmetic():
    a, b = LatticeSite(1, 2), LatticeSite(-3, 1)
    assert a + b == (-2, 3) and a - b == (4, 1) and -a == (-1, -2)
