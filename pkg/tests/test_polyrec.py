import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from treetribes.dtree import Internal
from treetribes.errors import DomainError, ResourceError, UsageError
from treetribes.polyrec import (RationalPoly, coeff_pair, const_coeffs, const_coeffs_closed,
                                const_coeffs_recurrence, eval_p0_p1, eval_sequence, gmax,
                                identity_suite, p0_p1, p0_p1_sequence, p_coeffs, p_star,
                                p_star_value, tribe_tail_gmax)
from treetribes.tribes import build_xor_tribe, num_vars

P = RationalPoly.p()
Q = RationalPoly.q()
ONE = RationalPoly.const(1)


def node_oracle(t, r):
    """Constancy polynomials of a read-once tree by recursion over its nodes.

    A vertex restricted to a constant keeps exactly one subtree; a starred
    vertex is constant b only when both (independent) subtrees are.
    """
    tree = build_xor_tribe(t, r).tree

    def go(i):
        node = tree.nodes[i]
        if not isinstance(node, Internal):
            return (ONE, RationalPoly()) if node.bit == 0 else (RationalPoly(), ONE)
        z, o = go(node.zero), go(node.one)
        return tuple(Q * z[b] + Q * o[b] + P * z[b] * o[b] for b in (0, 1))

    return go(tree.root)


def fractions_(lo=-5, hi=5):
    return st.fractions(min_value=lo, max_value=hi, max_denominator=12)


polys = st.lists(fractions_(), max_size=6).map(RationalPoly)


def test_poly_basics():
    f = RationalPoly([1, 2, 3])
    assert f.coeff(1) == 2 and f.coeff(7) == 0
    assert f.tail(1) == RationalPoly([2, 3])
    assert f.truncate(2) == RationalPoly([1, 2])
    assert f.derivative() == RationalPoly([2, 6])
    assert f.shift(2) == RationalPoly([0, 0, 1, 2, 3])
    assert f(Fraction(1, 2)) == Fraction(11, 4)
    assert RationalPoly([0, 0]).degree == -1
    assert RationalPoly([1, 0, 0]).degree == 0
    assert RationalPoly([Fraction(1, 2)]).to_strings() == ["1/2"]
    with pytest.raises(UsageError):
        f.coeff(-1)
    with pytest.raises(UsageError):
        f ** -1


@settings(max_examples=120, deadline=None)
@given(polys, polys, polys, fractions_())
def test_ring_laws(a, b, c, x):
    assert a + b == b + a and a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert (a * b)(x) == a(x) * b(x)
    assert (a - b)(x) == a(x) - b(x)
    assert a ** 3 == a * a * a


@settings(max_examples=80, deadline=None)
@given(polys, st.integers(0, 6), fractions_(Fraction(1, 12), 2))
def test_tail_reconstructs(a, i, x):
    head = sum((a.coeff(j) * x ** j for j in range(i)), Fraction(0))
    assert head + x ** i * a.tail(i)(x) == a(x)


def test_first_level_examples():
    for t in range(1, 6):
        p0, p1 = p0_p1(t, 1)
        assert p0 == Q ** t
        assert p1 == ONE - (ONE - Q) ** t


@pytest.mark.parametrize("t,r", [(1, r) for r in range(1, 9)]
                         + [(2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)])
def test_recurrence_matches_node_oracle(t, r):
    assert p0_p1(t, r) == node_oracle(t, r)


def test_sequence_starts_at_zero_leaf():
    seq = p0_p1_sequence(2, 3)
    assert seq[0] == (ONE, RationalPoly())
    assert seq[-1] == p0_p1(2, 3)


def test_p_star_and_degree():
    for t, r in ((1, 5), (2, 3), (3, 2)):
        ps = p_star(t, r)
        p0, p1 = p0_p1(t, r)
        assert ps + p0 + p1 == ONE
        assert ps.coeff(0) == 0  # fully fixed input is constant
        assert ps.degree <= num_vars(t, r)
        assert ps(Fraction(1)) == 1


def test_degree_cap_needs_truncation():
    with pytest.raises(ResourceError):
        p0_p1(2, 9)
    low = p0_p1(2, 9, max_degree=2)
    assert low[0].degree <= 2
    with pytest.raises(UsageError):
        p0_p1(0, 2)


def test_truncation_agrees_with_full():
    for t, r in ((1, 12), (2, 5), (3, 3)):
        full = p0_p1(t, r)
        low = p0_p1(t, r, max_degree=3)
        assert low[0] == full[0].truncate(4) and low[1] == full[1].truncate(4)


def test_exact_evaluation_matches_polynomials():
    rng = random.Random(3)
    for t, r in ((1, 9), (2, 4), (3, 3), (4, 2)):
        p0, p1 = p0_p1(t, r)
        for _ in range(8):
            x = Fraction(rng.randint(0, 50), rng.randint(1, 50))
            x = min(x, Fraction(1))
            assert eval_p0_p1(t, r, x) == (p0(x), p1(x))
            assert p_star_value(t, r, x) == 1 - p0(x) - p1(x)


def test_eval_sequence_prefix():
    seq = eval_sequence(2, 4, Fraction(1, 5))
    for j, (a, b) in enumerate(seq[1:], start=1):
        p0, p1 = p0_p1(2, j)
        assert (Fraction(int(a.numerator), int(a.denominator)),
                Fraction(int(b.numerator), int(b.denominator))) == (p0(Fraction(1, 5)),
                                                                    p1(Fraction(1, 5)))


def test_majorant_dominates_coefficients():
    t, r = 2, 3
    p0, p1 = p0_p1(t, r)
    absum = RationalPoly([abs(c) for c in (p0 + p1).coeffs])
    for x in (Fraction(1, 9), Fraction(1, 3), Fraction(1)):
        m = eval_sequence(t, r, x, majorant=True)[-1]
        assert Fraction(int((m[0] + m[1]).numerator), int((m[0] + m[1]).denominator)) >= absum(x)


def test_const_coeffs_examples():
    assert const_coeffs(1, 1) == (Fraction(1, 2), Fraction(1, 2))
    a = Fraction(1, 4)
    assert const_coeffs(2, 1) == (a, 1 - a)
    for t in range(1, 4):
        for r in range(1, 13):
            assert const_coeffs_recurrence(t, r) == const_coeffs_closed(t, r)


def test_coefficients_match_truncated_polynomials():
    for t in range(1, 4):
        for r in range(1, 13):
            p0, p1 = p0_p1(t, r, max_degree=1)
            pair = coeff_pair(t, r)
            assert (pair.c0_P0, pair.c0_P1) == (p0.coeff(0), p1.coeff(0))
            assert (pair.c1_P0, pair.c1_P1) == (p0.coeff(1), p1.coeff(1))
            assert p_coeffs(t, r) == (pair.c1_P0, pair.c1_P1)


def test_coefficients_match_node_oracle():
    for t, r in ((1, 6), (2, 3), (3, 2)):
        o0, o1 = node_oracle(t, r)
        pair = coeff_pair(t, r)
        assert (pair.c0_P0, pair.c0_P1, pair.c1_P0, pair.c1_P1) == (
            o0.coeff(0), o1.coeff(0), o0.coeff(1), o1.coeff(1))


def test_gmax_examples():
    # tail of 1 - p + p^2 from index 1 is -1 + p, max |.| on [0, 1/2] is 1
    f = RationalPoly([1, -1, 1])
    g = gmax(f, 1, Fraction(1, 2), grid_size=5)
    assert g >= 1
    assert g - 1 <= Fraction(1, 8) * Fraction(1, 2)
    assert gmax(RationalPoly.const(3), 0, Fraction(1, 4)) == 3
    with pytest.raises(DomainError):
        gmax(f, 1, Fraction(2))
    with pytest.raises(UsageError):
        gmax(f, 1, Fraction(1, 2), grid_size=1)


def test_gmax_is_an_upper_bound():
    rng = random.Random(7)
    for t, r in ((1, 8), (2, 3), (3, 2)):
        p0, p1 = p0_p1(t, r)
        s = p0 + p1
        p_max = Fraction(1, 2 ** t)
        for i in (1, 2, 3):
            g = gmax(s, i, p_max, grid_size=16)
            tail = s.tail(i)
            for _ in range(1000):
                x = p_max * Fraction(rng.randint(0, 10 ** 6), 10 ** 6)
                assert abs(tail(x)) <= g


def test_tribe_tail_gmax_bounds_true_tail():
    rng = random.Random(9)
    for t, r in ((1, 10), (2, 4), (3, 3)):
        p0, p1 = p0_p1(t, r)
        tail = (p0 + p1).tail(2)
        p_max = Fraction(1, 420 * 2 ** t)
        bound = tribe_tail_gmax(t, r, 2, p_max, grid_size=16)
        assert bound.value == bound.grid_max + bound.slack
        exact_grid = max(abs(tail(p_max * k / 15)) for k in range(16))
        assert bound.grid_max == exact_grid
        for _ in range(300):
            x = p_max * Fraction(rng.randint(0, 10 ** 6), 10 ** 6)
            assert abs(tail(x)) <= bound.value


def test_identity_suite_all_pass():
    results = identity_suite()
    assert len(results) == 6
    assert all(r.passed for r in results), [r for r in results if not r.passed]
