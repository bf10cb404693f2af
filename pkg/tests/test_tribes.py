from fractions import Fraction

import pytest

from treetribes.boolfn import TruthTable, correlation, dt_depth, influence
from treetribes.dtree import DecisionTree, Internal, Leaf, to_truth_table
from treetribes.errors import UsageError
from treetribes.spectral import bias_closed, bias_bruteforce
from treetribes.tribes import (TribeSpec, TribeTree, build_complete_clipped, build_xor_tribe,
                               num_vars, verify_tribe)


def test_num_vars():
    assert num_vars(2, 3) == 14
    assert all(num_vars(1, r) == r for r in range(10))
    assert num_vars(5, 0) == 0
    assert num_vars(3, 12) == sum(3 ** i for i in range(1, 13))
    with pytest.raises(UsageError):
        num_vars(0, 2)


def test_spec_validation():
    with pytest.raises(UsageError):
        TribeSpec(0, 1)
    with pytest.raises(UsageError):
        TribeSpec(1, -1)


def test_shapes():
    assert build_complete_clipped(3, 0).nodes == (Leaf(0),)
    tribe = build_xor_tribe(2, 3)
    counts = [tribe.level.count(lv) for lv in (1, 2, 3)]
    assert counts == [2, 4, 8]
    chain = build_complete_clipped(1, 5)
    assert sum(isinstance(n, Internal) for n in chain.nodes) == 5


def test_level_major_ids():
    tribe = build_xor_tribe(2, 3)
    assert list(tribe.level) == [1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3]
    assert tribe.parent[:6] == (-1, 0, 0, 2, 1, 4)


@pytest.mark.parametrize("t", range(1, 6))
def test_one_level_is_or(t):
    tribe = build_xor_tribe(t, 1)
    assert to_truth_table(tribe.tree, order=range(t)) == TruthTable.or_(t)


def test_two_level_chain_table():
    tt = to_truth_table(build_xor_tribe(1, 2).tree, order=[0, 1])
    assert [x for x in range(4) if tt.values[x]] == [1]


def test_leaf_labels_by_level():
    tribe = build_xor_tribe(2, 3)
    for node in tribe.tree.nodes:
        if isinstance(node, Internal) and isinstance(tribe.tree.nodes[node.zero], Leaf):
            # chain-end leaf of a block at level l sits behind l-1 one-edges
            lv = tribe.level[node.var]
            assert tribe.tree.nodes[node.zero].bit == (lv - 1) % 2


def test_verify_accepts_built_tribes():
    for t in range(1, 5):
        for r in range(0, 5):
            if num_vars(t, r) <= 400:
                assert verify_tribe(build_xor_tribe(t, r)) is None, (t, r)


def _tribe_with(tree, t=1, r=1):
    n = len({n.var for n in tree.nodes if isinstance(n, Internal)})
    return TribeTree(tree, TribeSpec(t, r), (1,) * n, (0,) * n, (0,) * n, (-1,) * n)


def test_verify_rejects_repeated_variable():
    tree = DecisionTree((Internal(0, 1, 2), Leaf(0), Internal(0, 3, 4), Leaf(1), Leaf(0)), 0)
    assert verify_tribe(_tribe_with(tree)) is not None


def test_verify_rejects_redundant_vertex():
    tree = DecisionTree((Internal(0, 1, 2), Leaf(0), Internal(1, 3, 4), Leaf(1), Leaf(1)), 0)
    msg = verify_tribe(_tribe_with(tree, t=2))
    assert msg is not None


@pytest.mark.parametrize("t", range(1, 7))
def test_one_level_depth_is_t(t):
    assert dt_depth(to_truth_table(build_xor_tribe(t, 1).tree)) == t


@pytest.mark.parametrize("t,r", [(1, r) for r in range(1, 11)] + [(2, 3)])
def test_influence_decays_with_depth(t, r):
    tribe = build_xor_tribe(t, r)
    tt = to_truth_table(tribe.tree, order=range(tribe.n))
    for v in range(tribe.n):
        assert influence(tt, v) <= Fraction(1, 2 ** tribe.depth[v])


def test_bias_closed_matches_tables():
    for t in range(1, 5):
        for r in range(1, 5):
            if num_vars(t, r) <= 16:
                assert bias_closed(t, r) == bias_bruteforce(t, r)


def test_parity_correlation_at_t2():
    got = {}
    for r in (1, 2, 3):
        tribe = build_xor_tribe(2, r)
        tt = to_truth_table(tribe.tree, order=range(tribe.n))
        got[r] = correlation(tt, TruthTable.parity(tribe.n))
    assert got[2] == got[3] == Fraction(1, 2)
    # one level is OR on two variables, which agrees with parity on 3 of 4 inputs
    assert got[1] == Fraction(3, 4)
