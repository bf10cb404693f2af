from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treetribes.boolfn import (Constancy, TruthTable, bias, correlation, dt_depth, evaluate,
                               fourier_transform, influence, is_constant, relevant_variables,
                               restrict_table)
from treetribes.dtree import to_truth_table
from treetribes.errors import ResourceError, UsageError
from treetribes.tribes import build_xor_tribe


@st.composite
def tables(draw, max_n=6):
    n = draw(st.integers(0, max_n))
    bits = draw(st.lists(st.integers(0, 1), min_size=1 << n, max_size=1 << n))
    return TruthTable(n, bits)


def test_evaluate_examples():
    assert evaluate(TruthTable.constant(3, 0), (1, 0, 1)) == 0
    assert evaluate(TruthTable.or_(2), (0, 0)) == 0
    assert evaluate(TruthTable.or_(2), (1, 0)) == 1


def test_evaluate_length_mismatch():
    with pytest.raises(UsageError):
        evaluate(TruthTable.or_(2), (1,))


def test_table_validation():
    with pytest.raises(UsageError):
        TruthTable(2, [0, 1, 1])
    with pytest.raises(UsageError):
        TruthTable(1, [0, 2])
    with pytest.raises(ResourceError):
        TruthTable(25, [])


def test_values_are_frozen():
    tt = TruthTable.or_(2)
    with pytest.raises(ValueError):
        tt.values[0] = 1


def test_is_constant_examples():
    assert is_constant(TruthTable.constant(3, 0)) is Constancy.CONST0
    assert is_constant(TruthTable.parity(3)) is Constancy.NONCONSTANT
    assert is_constant(TruthTable(0, [1])) is Constancy.CONST1


def test_dt_depth_examples():
    assert dt_depth(TruthTable.constant(5, 1)) == 0
    for d in range(1, 7):
        assert dt_depth(TruthTable.or_(d)) == d
    assert dt_depth(TruthTable.parity(4)) == 4


def test_dt_depth_cap_counts_live_variables_only():
    # 16 variables, but only two matter
    tt = TruthTable.from_function(16, lambda x: x[3] & x[11])
    assert dt_depth(tt) == 2
    with pytest.raises(ResourceError):
        dt_depth(TruthTable.parity(15))


def _depth_oracle_4():
    """Depth of every 4-variable function by growing the set computable at each depth."""
    masks = []
    for i in range(4):
        masks.append(sum(1 << x for x in range(16) if x >> i & 1))
    depth = {0x0000: 0, 0xFFFF: 0}
    level = set(depth)
    k = 0
    # every function of 4 variables has depth at most 4, so stop after 3
    while k < 3:
        k += 1
        prev = list(level)
        new = set()
        for m in masks:
            for g in prev:
                lo = g & ~m & 0xFFFF
                for h in prev:
                    f = lo | (h & m)
                    if f not in depth:
                        new.add(f)
        for f in new:
            depth[f] = k
        level |= new
    return {f: depth.get(f, 4) for f in range(1 << 16)}


@pytest.fixture(scope="module")
def oracle4():
    return _depth_oracle_4()


def test_parity_needs_depth_four_by_oracle(oracle4):
    parity = sum(1 << x for x in range(16) if bin(x).count("1") % 2)
    assert oracle4[parity] == 4


def test_dt_depth_matches_oracle_on_sample(oracle4):
    rng = np.random.default_rng(4)
    codes = list(rng.integers(0, 1 << 16, size=1500)) + [0, 0xFFFF, 0x6996, 0xFFFE]
    for code in codes:
        code = int(code)
        tt = TruthTable(4, [(code >> x) & 1 for x in range(16)])
        assert dt_depth(tt) == oracle4[code], hex(code)


def test_fourier_examples():
    spec = fourier_transform(TruthTable.constant(3, 0))
    assert spec[0] == 1 and all(spec[m] == 0 for m in range(1, 8))
    assert fourier_transform(TruthTable.dictator(1, 0))[1] == 1
    tribe = build_xor_tribe(1, 3)
    spec = fourier_transform(to_truth_table(tribe.tree, order=range(3)))
    assert spec[0b001] == Fraction(3, 4)


def test_fourier_empty_set_is_mean_of_signs():
    tt = TruthTable.or_(3)
    mean = Fraction(sum(1 - 2 * int(v) for v in tt.values), 8)
    assert fourier_transform(tt)[0] == mean


def test_measure_examples():
    assert bias(TruthTable.parity(3)) == 0
    assert bias(TruthTable.or_(2)) == Fraction(1, 4)
    for i in range(4):
        assert influence(TruthTable.parity(4), i) == 1
    with pytest.raises(UsageError):
        correlation(TruthTable.or_(2), TruthTable.or_(3))


def test_correlation_of_tribe_with_parity():
    for r in (2, 3):
        tribe = build_xor_tribe(2, r)
        tt = to_truth_table(tribe.tree, order=range(tribe.n))
        assert correlation(tt, TruthTable.parity(tribe.n)) == Fraction(1, 2)


def test_restrict_table():
    tt = TruthTable.or_(3)
    sub = restrict_table(tt, [0, 2, 0])
    assert sub == TruthTable.dictator(1, 0)
    assert restrict_table(tt, [1, 2, 2]) == TruthTable.constant(2, 1)
    assert restrict_table(tt, [0, 0, 0]) == TruthTable(0, [0])


@settings(max_examples=150, deadline=None)
@given(tables())
def test_parseval(tt):
    assert fourier_transform(tt).parseval_sum() == 1


@settings(max_examples=100, deadline=None)
@given(tables(max_n=5))
def test_influence_is_spectral_weight(tt):
    spec = fourier_transform(tt)
    for i in range(tt.n):
        weight = sum((spec[m] ** 2 for m in range(1 << tt.n) if m >> i & 1), Fraction(0))
        assert influence(tt, i) == weight


@settings(max_examples=150, deadline=None)
@given(tables(max_n=5))
def test_depth_zero_iff_constant(tt):
    assert (dt_depth(tt) == 0) == (is_constant(tt) is not Constancy.NONCONSTANT)
    assert dt_depth(tt) <= len(relevant_variables(tt))


@settings(max_examples=100, deadline=None)
@given(tables(max_n=5), st.randoms(use_true_random=False))
def test_depth_invariant_under_permutation_and_negation(tt, rnd):
    perm = list(range(tt.n))
    rnd.shuffle(perm)
    d = dt_depth(tt)
    assert dt_depth(tt.permute(perm)) == d
    assert dt_depth(tt.negate()) == d


@settings(max_examples=60, deadline=None)
@given(tables(max_n=4), st.randoms(use_true_random=False))
def test_permute_moves_variables(tt, rnd):
    perm = list(range(tt.n))
    rnd.shuffle(perm)
    g = tt.permute(perm)
    for x in range(1 << tt.n):
        bits = [(x >> i) & 1 for i in range(tt.n)]
        y = [0] * tt.n
        for i, b in enumerate(bits):
            y[perm[i]] = b
        assert evaluate(g, y) == evaluate(tt, bits)
