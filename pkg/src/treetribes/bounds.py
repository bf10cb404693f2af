"""Upper and lower bounds on Pr[DT depth of a restricted clipped tree >= d].

The upper bound (4 p 2^t)^d holds for every t-clipped tree.  The lower
bound (c0 p 2^t)^d is for xor tribes with enough levels and small p.  This
module evaluates both and runs the exact checks behind them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from gmpy2 import mpq

from .dtree import DecisionTree
from .errors import DomainError, UsageError
from .polyrec import (_frac, _to_mpq, eval_sequence, p_coeffs, p_star_value,
                      tribe_tail_gmax)
from .restrict import DEFAULT_SEED, RestrictionLaw, depth_histogram
from .tribes import TribeTree, num_vars

SIGMAS = 4


@dataclass(frozen=True)
class BoundConstants:
    kappa: Fraction = Fraction(4)
    c0: Fraction = Fraction(1, 42)
    c1: Fraction = Fraction(1, 6)
    c_p: Fraction = Fraction(1, 420)
    c_d: Fraction = Fraction(1, 8)
    r_factor: int = 4

    def mu(self, t: int) -> Fraction:
        return self.kappa * 2 ** t

    def p_max(self, t: int) -> Fraction:
        return self.c_p / 2 ** t


DEFAULT_CONSTANTS = BoundConstants()


def _check_p(p, closed_top: bool = True) -> Fraction:
    p = _frac(p)
    if p < 0 or p > 1 or (not closed_top and p == 1):
        raise DomainError(f"p = {p} outside the allowed range")
    return p


def upper_bound_value(p, t: int, d: int, kappa=Fraction(4)) -> Fraction:
    """(kappa p 2^t)^d."""
    p = _check_p(p)
    if t < 1 or d < 0:
        raise UsageError(f"need t >= 1 and d >= 0, got t={t}, d={d}")
    return (Fraction(kappa) * p * 2 ** t) ** d


def u_kernel(p, t: int, kappa=Fraction(4)) -> Fraction:
    """The quantity that must stay at most 1 for the upper-bound induction to close."""
    p = _check_p(p, closed_top=False)
    if t < 1:
        raise UsageError("t must be at least 1")
    q = (1 - p) / 2
    r = q + 1 / (Fraction(kappa) * 2 ** t)
    if r == 1:
        raise DomainError("degenerate kernel: q + 1/mu equals 1")
    a = r * (1 - r ** t) / (1 - r) - q * (1 - q ** t) / (1 - q)
    return a * (1 - q) / (1 - 2 * q + q ** (t + 1))


def diagonal_double_sum(p, t: int, kappa=Fraction(4)) -> Fraction:
    p = _check_p(p)
    q = (1 - p) / 2
    inv_mu = 1 / (Fraction(kappa) * 2 ** t)
    return sum((inv_mu ** j * comb(j + i, i) * q ** i
                for j in range(1, t + 1) for i in range(t - j + 1)), Fraction(0))


def diagonal_identity(p, t: int, kappa=Fraction(4)) -> tuple[Fraction, Fraction]:
    """Both sides of the diagonal re-summation of the kernel numerator."""
    p = _check_p(p, closed_top=False)
    q = (1 - p) / 2
    r = q + 1 / (Fraction(kappa) * 2 ** t)
    closed = r * (1 - r ** t) / (1 - r) - q * (1 - q ** t) / (1 - q)
    return diagonal_double_sum(p, t, kappa), closed


# ---- lower bound --------------------------------------------------------------

def min_levels(t: int, d: int, constants: BoundConstants = DEFAULT_CONSTANTS) -> int:
    """Levels we require before claiming the lower bound at depth d.

    ``r_factor * 2^t`` for d = 1, plus 2 * 2^t per further unit of depth.
    """
    if d <= 0:
        return 0
    return constants.r_factor * 2 ** t + 2 * 2 ** t * (d - 1)


def depth_ceiling(t: int, n: int, constants: BoundConstants = DEFAULT_CONSTANTS) -> float:
    """c_d log n / (2^t log t); unbounded when t = 1."""
    if t == 1:
        return math.inf
    if n < 2:
        return 0.0
    return float(constants.c_d) * math.log(n) / (2 ** t * math.log(t))


@dataclass(frozen=True)
class LowerBound:
    value: Fraction
    in_domain: bool
    reasons: tuple = ()


def lower_bound_value(p, t: int, d: int, constants: BoundConstants = DEFAULT_CONSTANTS,
                      n: int | None = None, r: int | None = None) -> LowerBound:
    """(c0 p 2^t)^d with a flag saying whether the proven range covers (p, d, r)."""
    p = _check_p(p)
    if t < 1 or d < 0:
        raise UsageError(f"need t >= 1 and d >= 0, got t={t}, d={d}")
    value = (constants.c0 * p * 2 ** t) ** d
    reasons = []
    if p > constants.p_max(t):
        reasons.append(f"p > c_p 2^-t = {constants.p_max(t)}")
    if d > 0:
        if r is not None and r < min_levels(t, d, constants):
            reasons.append(f"r = {r} < {min_levels(t, d, constants)} levels")
        if n is None and r is not None:
            n = num_vars(t, r)
        if n is not None and d > depth_ceiling(t, n, constants):
            reasons.append(f"d = {d} above depth ceiling {depth_ceiling(t, n, constants):.3g}")
    return LowerBound(value, not reasons, tuple(reasons))


def g_function(t: int, r: int) -> Fraction:
    """[p](P0(r) + P1(r))."""
    a, b = p_coeffs(t, r)
    return a + b


@dataclass(frozen=True)
class G2Result:
    passed: bool
    value: Fraction
    threshold: int
    grid_max: Fraction
    slack: Fraction


def g2_check(t: int, r: int, constants: BoundConstants = DEFAULT_CONSTANTS,
             grid_size: int = 64) -> G2Result:
    """Certified G_2(P0(r) + P1(r)) over [0, c_p 2^-t] against 30 * 4^t."""
    b = tribe_tail_gmax(t, r, 2, constants.p_max(t), grid_size)
    threshold = 30 * 2 ** (2 * t)
    return G2Result(b.value <= threshold, b.value, threshold, b.grid_max, b.slack)


@dataclass(frozen=True)
class D1Result:
    pstar: Fraction
    lower: Fraction
    upper: Fraction
    in_domain: bool
    lower_ok: bool
    upper_ok: bool

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok


def d1_check(t: int, r: int, p, constants: BoundConstants = DEFAULT_CONSTANTS) -> D1Result:
    """Exact P*(r)(p) against c0 p 2^t from below and 4 p 2^t from above.

    ``in_domain`` covers only the p range and the level count; the depth
    ceiling plays no role at depth 1.
    """
    p = _check_p(p)
    pstar = p_star_value(t, r, p)
    lower = constants.c0 * p * 2 ** t
    up = upper_bound_value(p, t, 1, constants.kappa)
    in_domain = p <= constants.p_max(t) and r >= min_levels(t, 1, constants)
    return D1Result(pstar, lower, up, in_domain, pstar >= lower, pstar <= up)


# ---- lower-bound dynamic program ------------------------------------------------

def _round_down(x: mpq, bits: int | None) -> mpq:
    if bits is None or x.denominator.bit_length() <= bits:
        return x
    scale = 1 << bits
    return mpq((x.numerator * scale) // x.denominator, scale)


def gamma_transfer(p, t: int, below, prev):
    """One step of the depth recurrence.

    ``below`` is a lower bound on gamma_{d-1}(r-1), ``prev`` one on
    gamma_d(r-1); the result lower-bounds gamma_d(r) and is nondecreasing
    in both arguments.
    """
    p = _to_mpq(p)
    q = (1 - p) / 2
    mu = 1 - _to_mpq(below)
    prev = _to_mpq(prev)
    total = mpq(0)
    for k in range(1, t):
        inner = mpq(0)
        for i in range(1, k + 1):
            inner += comb(k, i) * q ** (k - i) * p ** i * (1 - mu ** (i + 1))
        total += q * inner
    for i in range(t + 1):
        total += comb(t, i) * q ** (t - i) * p ** i * (1 - mu ** i)
    total += sum((q ** (k + 1) for k in range(t)), mpq(0)) * prev
    return total


@dataclass
class LowerBoundTable:
    """``L[d][r]`` lower-bounds Pr[depth of the restricted xor tribe on r levels >= d]."""

    t: int
    p: Fraction
    L: list = field(default_factory=list)

    @property
    def d_max(self) -> int:
        return len(self.L) - 1

    @property
    def r_max(self) -> int:
        return len(self.L[0]) - 1

    def value(self, d: int, r: int) -> Fraction:
        return _frac(self.L[d][r])

    def first_r_reaching(self, d: int, target) -> int | None:
        target = _to_mpq(target)
        for r, v in enumerate(self.L[d]):
            if v >= target:
                return r
        return None

    def argmax_r(self, d: int) -> int:
        row = self.L[d]
        best = max(row)
        return row.index(best)


def gamma_lower_table(t: int, p, d_max: int, r_max: int, precision_bits: int | None = 512,
                      constants: BoundConstants = DEFAULT_CONSTANTS) -> LowerBoundTable:
    """Fill the table of certified lower bounds.

    Row 1 is the exact P*(r)(p); deeper rows use :func:`gamma_transfer`.
    Values are rounded down to ``precision_bits`` binary digits, which is
    sound because the transfer is monotone.
    """
    p = _check_p(p)
    if p > constants.p_max(t):
        raise DomainError(f"p = {p} exceeds c_p 2^-t = {constants.p_max(t)}")
    if d_max < 0 or r_max < 0:
        raise UsageError("d_max and r_max must be nonnegative")
    L = [[mpq(1)] * (r_max + 1)]
    if d_max >= 1:
        seq = eval_sequence(t, r_max, p)
        L.append([_round_down(1 - a - b, precision_bits) for a, b in seq])
    for d in range(2, d_max + 1):
        row = [mpq(0)]
        for r in range(1, r_max + 1):
            row.append(_round_down(gamma_transfer(p, t, L[d - 1][r - 1], row[r - 1]),
                                   precision_bits))
        L.append(row)
    return LowerBoundTable(t, p, L)


# ---- upper-bound diagnostics ------------------------------------------------------

def gamma_upper_iteration(p, t: int, d_max: int) -> list[Fraction]:
    """Bounds on gamma_d(t) from the t-step expansion with gamma_d(0) = 0.

    Depths at or below zero are bounded by 1.  Each entry should stay at
    most (4 p 2^t)^d when p <= 1/(4 2^t).
    """
    p = _check_p(p, closed_top=False)
    q = (1 - p) / 2
    factor = (1 - q) / (1 - 2 * q + q ** (t + 1))
    weights = [sum((comb(j + i, i) * q ** i for i in range(t - j + 1)), Fraction(0))
               for j in range(t + 1)]
    g = [Fraction(1)]
    for d in range(1, d_max + 1):
        s = sum((p ** j * (g[d - j] if d - j >= 0 else Fraction(1)) * weights[j]
                 for j in range(1, t + 1)), Fraction(0))
        g.append(min(Fraction(1), factor * s))
    return g


def m_step_expansion_check(m: int, p) -> bool:
    """Unroll the one-step gamma recurrence m times and compare with its closed expansion.

    Symbols are ('x', i, a) for gamma_{d-i}(t0-a) and ('t', i) for gamma_{d-i}(t).
    """
    p = _check_p(p)
    q = (1 - p) / 2
    terms: dict = {("x", 0, 0): Fraction(1)}
    for _ in range(m):
        nxt: dict = {}
        for key, c in terms.items():
            if key[0] == "x":
                _, i, a = key
                for k2, w in ((("x", i, a + 1), q), (("t", i), q),
                              (("x", i + 1, a + 1), p), (("t", i + 1), p)):
                    nxt[k2] = nxt.get(k2, Fraction(0)) + c * w
            else:
                nxt[key] = nxt.get(key, Fraction(0)) + c
        terms = nxt
    expected: dict = {}
    for i in range(m + 1):
        expected[("x", i, m)] = comb(m, i) * q ** (m - i) * p ** i
    expected[("t", 0)] = sum((q ** i for i in range(1, m + 1)), Fraction(0))
    for j in range(1, m + 1):
        expected[("t", j)] = p ** j * sum((comb(j + i, i) * q ** i for i in range(m - j + 1)),
                                          Fraction(0))
    keys = set(terms) | set(expected)
    return all(terms.get(k, 0) == expected.get(k, 0) for k in keys)


# ---- Monte Carlo against the bounds ---------------------------------------------

@dataclass(frozen=True)
class EmpiricalCheck:
    phat: Fraction
    stderr: float
    samples: int
    skipped: int
    upper: Fraction
    upper_ok: bool
    lower: Fraction | None
    lower_ok: bool | None


def empirical_bound_check(target, p, d: int, samples: int, seed: int = DEFAULT_SEED,
                          t: int | None = None, lower: Fraction | None = None,
                          workers: int = 1, mode: str = "reported") -> EmpiricalCheck:
    """Monte Carlo phat against the upper bound and, for tribes, a lower bound.

    ``target`` is a :class:`TribeTree` or a plain tree together with its
    clipping parameter ``t``.  For tribes the lower bound defaults to the
    lower-bound table entry when p is in range.
    """
    p = _check_p(p)
    if isinstance(target, TribeTree):
        tree: DecisionTree = target.tree
        t = target.spec.t
        if lower is None and p <= DEFAULT_CONSTANTS.p_max(t) and target.spec.r >= 1:
            table = gamma_lower_table(t, p, d, target.spec.r)
            lower = table.value(d, target.spec.r)
    else:
        tree = target
        if t is None:
            raise UsageError("t is required for a plain tree")
    hist = depth_histogram(tree, RestrictionLaw(p), samples, seed, workers=workers)
    rep = hist.report(d, p, seed, mode)
    ub = upper_bound_value(p, t, d)
    se = rep.stderr
    upper_ok = float(rep.phat) <= float(ub) + SIGMAS * se
    lower_ok = None if lower is None else float(rep.phat) >= float(lower) - SIGMAS * se
    return EmpiricalCheck(rep.phat, se, rep.samples, rep.skipped_overcap, ub, upper_ok,
                          None if lower is None else _frac(lower), lower_ok)
