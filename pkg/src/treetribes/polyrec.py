"""Exact polynomials in p and the constancy-probability recurrences.

P0(r) and P1(r) are the probabilities that the xor tribe on r levels,
hit by a random p-restriction, becomes the constant 0 or 1 function.
Both are polynomials in p once q = (1-p)/2 is substituted.  Their degree
equals the number of variables, so the full polynomials are only built
for small trees; low-order coefficients come from the same recurrence run
modulo p^K, and values at a given p come from running it on numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from gmpy2 import mpq, mpz

from .errors import DomainError, InvariantViolation, ResourceError, UsageError
from .tribes import num_vars

FULL_DEGREE_CAP = 512


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if type(x).__name__ == "mpq":
        # already in lowest terms; skip the second gcd
        return Fraction(int(x.numerator), int(x.denominator), _normalize=False)
    if isinstance(x, str):
        return Fraction(x)
    raise UsageError(f"expected an exact rational, got {type(x).__name__}")


def _to_mpq(x) -> mpq:
    f = _frac(x)
    return mpq(f.numerator, f.denominator)


class RationalPoly:
    """Univariate polynomial with exact rational coefficients, ``coeffs[i] = [p^i]Q``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, c) -> "RationalPoly":
        return cls([c])

    @classmethod
    def p(cls) -> "RationalPoly":
        return cls([0, 1])

    @classmethod
    def q(cls) -> "RationalPoly":
        return cls([Fraction(1, 2), Fraction(-1, 2)])

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> Fraction:
        if i < 0:
            raise UsageError("coefficient index must be nonnegative")
        return self.coeffs[i] if i < len(self.coeffs) else Fraction(0)

    def tail(self, i: int) -> "RationalPoly":
        """Drop the terms below p^i and divide by p^i."""
        if i < 0:
            raise UsageError("tail index must be nonnegative")
        return RationalPoly(self.coeffs[i:])

    def truncate(self, k: int) -> "RationalPoly":
        """Reduce modulo p^k."""
        return RationalPoly(self.coeffs[:k])

    def derivative(self) -> "RationalPoly":
        return RationalPoly([j * c for j, c in enumerate(self.coeffs)][1:])

    def shift(self, j: int) -> "RationalPoly":
        """Multiply by p^j."""
        return RationalPoly([Fraction(0)] * j + list(self.coeffs)) if self.coeffs else self

    def __call__(self, x):
        x = _frac(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def _coerce(self, other):
        if isinstance(other, RationalPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return RationalPoly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalPoly(_mul(list(self.coeffs), list(other.coeffs), None))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise UsageError("negative powers are not polynomials")
        out, base = RationalPoly.const(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def to_strings(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs] or ["0/1"]


def _mul(a: list, b: list, k: int | None) -> list:
    if not a or not b:
        return []
    size = len(a) + len(b) - 1
    if k is not None:
        size = min(size, k)
    out = [0] * size
    for i, x in enumerate(a):
        if i >= size or not x:
            continue
        for j in range(min(len(b), size - i)):
            out[i + j] += x * b[j]
    return out


def _add(a: list, b: list) -> list:
    if len(a) < len(b):
        a, b = b, a
    return [x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)]


def _step_lists(t: int, x: list, q: list, with_tail: bool, k: int | None) -> list:
    """sum_{j<t} q X (q + p X)^j, plus (q + p X)^t when ``with_tail``."""
    base = _add(q, [0] + x)[:k] if k is not None else _add(q, [0] + x)
    qx = _mul(q, x, k)
    acc: list = []
    pw = [Fraction(1)]
    for _ in range(t):
        acc = _add(acc, _mul(qx, pw, k))
        pw = _mul(pw, base, k)
    if with_tail:
        acc = _add(acc, pw)
    return acc


def p0_p1_sequence(t: int, r: int, max_degree: int | None = None):
    """[(P0(j), P1(j)) for j = 0..r], optionally reduced modulo p^(max_degree+1)."""
    if t < 1 or r < 0:
        raise UsageError(f"need t >= 1 and r >= 0, got t={t}, r={r}")
    if max_degree is None and num_vars(t, r) > FULL_DEGREE_CAP:
        raise ResourceError(
            f"full polynomials would have degree {num_vars(t, r)} > {FULL_DEGREE_CAP}; "
            "pass max_degree to work modulo a power of p")
    k = None if max_degree is None else max_degree + 1
    q = [Fraction(1, 2), Fraction(-1, 2)][:k] if k else [Fraction(1, 2), Fraction(-1, 2)]
    p0, p1 = [Fraction(1)], []
    out = [(RationalPoly(p0), RationalPoly(p1))]
    for _ in range(r):
        p0, p1 = _step_lists(t, p1, q, True, k), _step_lists(t, p0, q, False, k)
        out.append((RationalPoly(p0), RationalPoly(p1)))
    return out


def p0_p1(t: int, r: int, max_degree: int | None = None) -> tuple[RationalPoly, RationalPoly]:
    """P0(r) and P1(r) as exact polynomials in p.

    The recursion starts from P0(0) = 1, P1(0) = 0 (a single 0-leaf), which
    reproduces P0(1) = q^t and P1(1) = 1 - (1-q)^t.
    """
    if r < 1:
        raise UsageError("r must be at least 1")
    return p0_p1_sequence(t, r, max_degree)[-1]


def p_star(t: int, r: int, max_degree: int | None = None) -> RationalPoly:
    p0, p1 = p0_p1(t, r, max_degree)
    return RationalPoly.const(1) - p0 - p1


# ---- evaluation at a point -------------------------------------------------

def _eval_scaled(t: int, r: int, p, majorant: bool = False):
    """Yield (N0, N1, s, e) for j = 0..r with P_i(j) = N_i / s**e.

    Working over the fixed denominator s = 2 * den(p) keeps every step in
    integer arithmetic, which avoids a gcd per operation.
    """
    p = _frac(p)
    a, b = mpz(p.numerator), mpz(p.denominator)
    s = 2 * b
    qn = b + a if majorant else b - a  # q = qn / s
    pn = 2 * a                          # p = pn / s
    n0, n1, e = mpz(1), mpz(0), 0
    yield n0, n1, s, e
    for _ in range(r):
        S = s ** (e + 1)

        def step(xn):
            c = qn * xn
            base = qn * s ** e + pn * xn
            g, spow = mpz(1), mpz(1)
            for _ in range(t - 1):
                spow *= S
                g = g * base + spow
            return c * g, base

        acc0, base1 = step(n1)
        pw = base1 ** t
        acc1, _ = step(n0)
        n0, n1 = acc0 + pw, acc1
        e = (e + 1) * t
        yield n0, n1, s, e


def eval_sequence(t: int, r: int, p, majorant: bool = False) -> list:
    """Values [(P0(j), P1(j)) for j = 0..r] at the rational ``p`` as gmpy2 mpq.

    With ``majorant`` the substitution q = (1+p)/2 is used instead; every
    coefficient of the result dominates the absolute value of the
    corresponding true coefficient, since the recurrence has no subtractions.
    """
    out = []
    for n0, n1, s, e in _eval_scaled(t, r, p, majorant):
        den = s ** e
        out.append((mpq(n0, den), mpq(n1, den)))
    return out


def _eval_last(t: int, r: int, p):
    for item in _eval_scaled(t, r, p):
        pass
    return item


def eval_p0_p1(t: int, r: int, p) -> tuple[Fraction, Fraction]:
    n0, n1, s, e = _eval_last(t, r, p)
    den = s ** e
    return _frac(mpq(n0, den)), _frac(mpq(n1, den))


def p_star_value(t: int, r: int, p) -> Fraction:
    """Exact P*(r) at the rational ``p``."""
    n0, n1, s, e = _eval_last(t, r, p)
    den = s ** e
    return _frac(mpq(den - n0 - n1, den))


def _majorant_with_derivative(t: int, r: int, x):
    """(M(x), M'(x)) for the majorant of P0(r)+P1(r), via dual numbers."""
    x = _to_mpq(x)
    q, dq = (1 + x) / 2, mpq(1, 2)

    def step(v, dv, with_tail):
        base, dbase = q + x * v, dq + v + x * dv
        acc, dacc = mpq(0), mpq(0)
        pw, dpw = mpq(1), mpq(0)
        for _ in range(t):
            acc += q * v * pw
            dacc += dq * v * pw + q * dv * pw + q * v * dpw
            pw, dpw = pw * base, dpw * base + pw * dbase
        if with_tail:
            acc, dacc = acc + pw, dacc + dpw
        return acc, dacc

    p0, d0, p1, d1 = mpq(1), mpq(0), mpq(0), mpq(0)
    for _ in range(r):
        (n0, e0), (n1, e1) = step(p1, d1, True), step(p0, d0, False)
        p0, d0, p1, d1 = n0, e0, n1, e1
    return p0 + p1, d0 + d1


# ---- G_i: certified maxima of tails ----------------------------------------

def _grid(p_max: Fraction, grid_size: int) -> list[Fraction]:
    return [p_max * k / (grid_size - 1) for k in range(grid_size)]


def gmax(Q: RationalPoly, i: int, p_max, grid_size: int = 64) -> Fraction:
    """Upper estimate of max |tail(Q, i)| over [0, p_max].

    Grid maximum plus half the spacing times a bound on the tail's
    derivative, so the result is never below the true maximum.
    """
    p_max = _frac(p_max)
    if not 0 <= p_max <= 1:
        raise DomainError("p_max must lie in [0, 1]")
    if grid_size < 2:
        raise UsageError("grid_size must be at least 2")
    T = Q.tail(i)
    best = max(abs(T(x)) for x in _grid(p_max, grid_size))
    lip = sum((j * abs(c) * p_max ** (j - 1) for j, c in enumerate(T.coeffs) if j), Fraction(0))
    h = p_max / (grid_size - 1)
    return best + h * lip / 2


@dataclass(frozen=True)
class TailBound:
    value: Fraction
    grid_max: Fraction
    slack: Fraction


def tribe_tail_gmax(t: int, r: int, i: int, p_max, grid_size: int = 64) -> TailBound:
    """Certified max of |tail(P0(r)+P1(r), i)| over [0, p_max] without the full polynomial.

    Values at grid points come from exact recurrence evaluation.  The
    derivative of the tail is bounded on the whole interval by the
    derivative of the majorant's tail at p_max.
    """
    p_max = _frac(p_max)
    if not 0 < p_max <= 1:
        raise DomainError("p_max must lie in (0, 1]")
    if grid_size < 2:
        raise UsageError("grid_size must be at least 2")
    low = p0_p1(t, r, max_degree=i)
    c = [_to_mpq(x) for x in (low[0] + low[1]).coeffs] + [mpq(0)] * (i + 1)
    c = c[: i + 1]

    best = abs(c[i])
    for x in _grid(p_max, grid_size)[1:]:
        xm = _to_mpq(x)
        n0, n1, s, e = _eval_last(t, r, xm)
        p0, p1 = mpq(n0, s ** e), mpq(n1, s ** e)
        head = sum((c[j] * xm ** j for j in range(i)), mpq(0))
        best = max(best, abs((p0 + p1 - head) / xm ** i))

    mlow = _majorant_low_coeffs(t, r, i)
    pm = _to_mpq(p_max)
    m_val, m_der = _majorant_with_derivative(t, r, pm)
    rest = m_val - sum((mlow[j] * pm ** j for j in range(i + 1)), mpq(0))
    drest = m_der - sum((j * mlow[j] * pm ** (j - 1) for j in range(1, i + 1)), mpq(0))
    lip = drest / pm ** i - i * rest / pm ** (i + 1)
    lip = max(lip, mpq(0))
    slack = _to_mpq(p_max) / (grid_size - 1) * lip / 2
    return TailBound(_frac(best + slack), _frac(best), _frac(slack))


def _majorant_low_coeffs(t: int, r: int, i: int) -> list:
    """Coefficients 0..i of the majorant of P0(r)+P1(r)."""
    k = i + 1
    q = [Fraction(1, 2), Fraction(1, 2)][:k]
    p0, p1 = [Fraction(1)], []
    for _ in range(r):
        p0, p1 = _step_lists(t, p1, q, True, k), _step_lists(t, p0, q, False, k)
    s = _add(p0, p1) + [0] * k
    return [_to_mpq(x) for x in s[:k]]


# ---- coefficient recurrences ------------------------------------------------

@dataclass(frozen=True)
class CoeffPair:
    c0_P0: Fraction
    c0_P1: Fraction
    c1_P0: Fraction
    c1_P1: Fraction


def const_coeffs_recurrence(t: int, r: int) -> tuple[Fraction, Fraction]:
    a = Fraction(1, 2 ** t)
    b = 1 - a
    c0, c1 = Fraction(1), Fraction(0)
    for _ in range(r):
        c0, c1 = b * c1 + a, b * c0
    return c0, c1


def const_coeffs_closed(t: int, r: int) -> tuple[Fraction, Fraction]:
    b = 1 - Fraction(1, 2 ** t)
    if r % 2:
        return (1 - b ** (r + 1)) / (1 + b), (b + b ** (r + 1)) / (1 + b)
    return (1 + b ** (r + 1)) / (1 + b), (b - b ** (r + 1)) / (1 + b)


def const_coeffs(t: int, r: int) -> tuple[Fraction, Fraction]:
    """([1]P0(r), [1]P1(r)), computed two ways that must agree."""
    if t < 1 or r < 1:
        raise UsageError(f"need t >= 1 and r >= 1, got t={t}, r={r}")
    rec = const_coeffs_recurrence(t, r)
    closed = const_coeffs_closed(t, r)
    if rec != closed:
        raise InvariantViolation(f"constant coefficients disagree at t={t}, r={r}: {rec} vs {closed}")
    return rec


def p_coeffs_recurrence(t: int, r: int) -> tuple[Fraction, Fraction]:
    a = Fraction(1, 2 ** t)
    b = 1 - a
    lin = a * (t + 2) - 2
    quad = 2 * (1 - a * (t + 1))
    c0, c1 = Fraction(1), Fraction(0)
    e0, e1 = Fraction(0), Fraction(0)
    for _ in range(r):
        n0 = b * e1 + lin * c1 + quad * c1 * c1 - a * t + 2 * a * t * c1
        n1 = b * e0 + lin * c0 + quad * c0 * c0
        e0, e1 = n0, n1
        c0, c1 = b * c1 + a, b * c0
    return e0, e1


def p_coeffs(t: int, r: int) -> tuple[Fraction, Fraction]:
    """([p]P0(r), [p]P1(r)) by the coefficient recurrence, checked against
    the polynomial recurrence run modulo p^2."""
    if t < 1 or r < 1:
        raise UsageError(f"need t >= 1 and r >= 1, got t={t}, r={r}")
    rec = p_coeffs_recurrence(t, r)
    p0, p1 = p0_p1(t, r, max_degree=1)
    direct = (p0.coeff(1), p1.coeff(1))
    if rec != direct:
        raise InvariantViolation(f"[p] coefficients disagree at t={t}, r={r}: {rec} vs {direct}")
    return rec


def coeff_pair(t: int, r: int) -> CoeffPair:
    c0, c1 = const_coeffs(t, r)
    e0, e1 = p_coeffs(t, r)
    return CoeffPair(c0, c1, e0, e1)


# ---- standard identities ----------------------------------------------------

@dataclass(frozen=True)
class IdentityResult:
    name: str
    passed: bool
    detail: str


def _rational_grid(size: int = 17) -> list[Fraction]:
    return [Fraction(k, size - 1) for k in range(size)]


def identity_suite(n_max: int = 30, grid: Sequence[Fraction] | None = None) -> list[IdentityResult]:
    """Check six elementary sums and inequalities exactly on a rational grid."""
    grid = list(grid) if grid is not None else _rational_grid()
    out = []

    bad = []
    for n in range(1, n_max + 1):
        for p in grid:
            lhs = sum(p ** i for i in range(n + 1))
            rhs = Fraction(n + 1) if p == 1 else (1 - p ** (n + 1)) / (1 - p)
            if lhs != rhs:
                bad.append((n, p))
    out.append(IdentityResult("geometric sum", not bad, f"{len(bad)} mismatches"))

    bad = [n for n in range(1, n_max + 1)
           if sum(Fraction(k, 2 ** k) for k in range(1, n + 1)) != 2 - Fraction(n + 2, 2 ** n)
           or 2 - Fraction(n + 2, 2 ** n) > 2]
    out.append(IdentityResult("sum k/2^k", not bad, f"{len(bad)} mismatches"))

    bad = [n for n in range(1, n_max + 1)
           if sum(Fraction(comb(k, 2), 2 ** k) for k in range(2, n + 1))
           != 2 - Fraction(n * n + 3 * n + 4, 2 ** (n + 1))
           or 2 - Fraction(n * n + 3 * n + 4, 2 ** (n + 1)) > 2]
    out.append(IdentityResult("sum C(k,2)/2^k", not bad, f"{len(bad)} mismatches"))

    bad = []
    pairs = [(p, (1 - p) / 2) for p in grid] + [(Fraction(1, 3), Fraction(1, 3)),
                                                 (Fraction(2, 7), Fraction(5, 9))]
    for n in range(1, n_max + 1):
        for p, q in pairs:
            lhs = sum(comb(n, i) * q ** (n - i) * p ** i * (i + 1) for i in range(n + 1))
            rhs = p * n * (q + p) ** (n - 1) + (q + p) ** n
            if lhs != rhs:
                bad.append((n, p, q))
    out.append(IdentityResult("binomial moment", not bad, f"{len(bad)} mismatches"))

    bad = []
    for t in range(1, n_max + 1):
        for p in grid:
            val = Fraction(t) if p == 0 else (1 - (1 - p) ** t) / p
            if val > t:
                bad.append((t, p))
    out.append(IdentityResult("(1-(1-p)^t)/p <= t", not bad, f"{len(bad)} violations"))

    bad = []
    for t in range(1, n_max + 1):
        for p in grid:
            val = Fraction(comb(t, 2)) if p == 0 else ((1 - p) ** t - 1 + t * p) / p ** 2
            if val > comb(t, 2):
                bad.append((t, p))
    out.append(IdentityResult("((1-p)^t-1+tp)/p^2 <= C(t,2)", not bad, f"{len(bad)} violations"))
    return out
