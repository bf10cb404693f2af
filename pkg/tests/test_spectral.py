from fractions import Fraction
from itertools import product

import pytest

from treetribes.boolfn import fourier_transform
from treetribes.dtree import to_truth_table
from treetribes.errors import DomainError, UsageError
from treetribes.spectral import (bias_bruteforce, bias_closed, compare_general, compare_t1,
                                 fourier_general_closed, fourier_t1_closed, jacobsthal,
                                 on_single_path, path_params)
from treetribes.tribes import build_xor_tribe, num_vars


def naive_coefficient(tribe, mask):
    """Average of (-1)^(f(x) + sum_{i in S} x_i) straight from the definition."""
    tree = tribe.tree
    total = 0
    for x in product((0, 1), repeat=tribe.n):
        i = tree.root
        while hasattr(tree.nodes[i], "var"):
            node = tree.nodes[i]
            i = node.one if x[node.var] else node.zero
        s = tree.nodes[i].bit + sum(x[v] for v in range(tribe.n) if mask >> v & 1)
        total += -1 if s % 2 else 1
    return Fraction(total, 2 ** tribe.n)


def test_jacobsthal():
    assert [jacobsthal(i) for i in range(8)] == [0, 1, 1, 3, 5, 11, 21, 43]
    with pytest.raises(DomainError):
        jacobsthal(-1)


def test_t1_examples():
    assert fourier_t1_closed(3, [1]) == Fraction(3, 4)
    assert fourier_t1_closed(1, [1]) == 1  # a dictator
    with pytest.raises(DomainError):
        fourier_t1_closed(4, [1])
    with pytest.raises(UsageError):
        fourier_t1_closed(3, [])
    with pytest.raises(UsageError):
        fourier_t1_closed(3, [4])


@pytest.mark.parametrize("n", [3, 5])
def test_t1_closed_against_definition(n):
    tribe = build_xor_tribe(1, n)
    for mask in range(1, 1 << n):
        S = [i + 1 for i in range(n) if mask >> i & 1]
        assert fourier_t1_closed(n, S) == naive_coefficient(tribe, mask)


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9, 11])
def test_t1_closed_against_transform(n):
    rows = compare_t1(n)
    assert len(rows) == 2 ** n - 1
    assert all(row.match for row in rows)


def test_path_geometry():
    tribe = build_xor_tribe(2, 3)
    # x0 is the root, x1 its 0-child in the same block
    assert on_single_path(tribe, [0, 1])
    assert not on_single_path(tribe, [2, 4])  # the 1-children of x0 and x1 hang apart
    pp = path_params(tribe, [0])
    assert (pp.k, pp.d, pp.l) == (2, 0, 1)
    pp = path_params(tribe, [0, 1])
    assert (pp.k, pp.d, pp.l, pp.deepest) == (1, 1, 1, 1)
    with pytest.raises(UsageError):
        path_params(tribe, [99])


def test_general_closed_matches_definition_small():
    tribe = build_xor_tribe(2, 2)
    for mask in range(1, 1 << tribe.n):
        members = [v for v in range(tribe.n) if mask >> v & 1]
        assert fourier_general_closed(tribe, members).matches(naive_coefficient(tribe, mask))


@pytest.mark.parametrize("t,r", [(2, 3), (3, 2), (2, 2), (4, 1)])
def test_general_closed_against_transform(t, r):
    rows = compare_general(t, r)
    assert rows and all(row.match for row in rows)


def test_general_reduces_to_chain_at_t1():
    for n in (3, 5, 7):
        tribe = build_xor_tribe(1, n)
        for j in range(1, n + 1):
            claim = fourier_general_closed(tribe, [j - 1])
            assert claim.magnitude == abs(fourier_t1_closed(n, [j]))


def test_spectrum_supported_on_paths():
    tribe = build_xor_tribe(2, 3)
    spec = fourier_transform(to_truth_table(tribe.tree))
    for mask, val in spec.items():
        if mask and val:
            assert on_single_path(tribe, [v for v in range(tribe.n) if mask >> v & 1])


def test_bias():
    assert bias_closed(1, 1) == 0
    assert bias_closed(1, 2) == Fraction(1, 4)
    for t in range(1, 4):
        for r in range(1, 5):
            if num_vars(t, r) <= 20:
                assert bias_closed(t, r) == bias_bruteforce(t, r)
    with pytest.raises(UsageError):
        bias_closed(1, 0)
