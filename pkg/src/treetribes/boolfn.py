"""Truth tables and exact measures on boolean functions.

Assignments are encoded as integers: variable ``i`` contributes bit ``i``.
Every measure returned here is an exact :class:`fractions.Fraction`.

Fourier sign convention (used everywhere in the package): boolean 0 maps
to +1 and boolean 1 maps to -1, for inputs and for outputs alike, so that
``f(x) = sum_S fhat[S] * chi_S(x)`` with ``chi_S(x) = prod_{i in S} x_i``.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import ResourceError, UsageError

HARD_CAP = 24
DEPTH_CAP = 14
STAR = 2


class Constancy(enum.Enum):
    CONST0 = "const0"
    CONST1 = "const1"
    NONCONSTANT = "nonconstant"


class TruthTable:
    """Full value table of ``f: {0,1}^n -> {0,1}``.

    ``values[x]`` is ``f`` at the assignment encoded by ``x``.  The array is
    frozen after construction.
    """

    __slots__ = ("n", "values")

    def __init__(self, n: int, values, cap: int = HARD_CAP):
        if n < 0:
            raise UsageError("variable count must be nonnegative")
        if n > cap:
            raise ResourceError(f"{n} variables exceed truth-table cap {cap}")
        arr = np.array(values, dtype=np.uint8).reshape(-1)
        if arr.size != 1 << n:
            raise UsageError(f"expected {1 << n} values for n={n}, got {arr.size}")
        if arr.size and arr.max() > 1:
            raise UsageError("truth-table entries must be 0 or 1")
        arr.setflags(write=False)
        self.n = n
        self.values = arr

    @classmethod
    def from_function(cls, n: int, fn: Callable[[tuple[int, ...]], int]) -> "TruthTable":
        vals = [fn(tuple((x >> i) & 1 for i in range(n))) for x in range(1 << n)]
        return cls(n, vals)

    @classmethod
    def constant(cls, n: int, bit: int) -> "TruthTable":
        return cls(n, np.full(1 << n, bit, dtype=np.uint8))

    @classmethod
    def parity(cls, n: int) -> "TruthTable":
        x = np.arange(1 << n, dtype=np.int64)
        bits = np.zeros_like(x)
        for i in range(n):
            bits ^= (x >> i) & 1
        return cls(n, bits)

    @classmethod
    def or_(cls, n: int) -> "TruthTable":
        vals = np.ones(1 << n, dtype=np.uint8)
        vals[0] = 0
        return cls(n, vals)

    @classmethod
    def dictator(cls, n: int, i: int) -> "TruthTable":
        x = np.arange(1 << n, dtype=np.int64)
        return cls(n, (x >> i) & 1)

    def cube(self) -> np.ndarray:
        """View of the values with shape ``(2,)*n`` indexed as ``cube[x0, x1, ...]``."""
        if self.n == 0:
            return self.values.reshape(())
        return self.values.reshape((2,) * self.n).transpose(tuple(reversed(range(self.n))))

    def negate(self) -> "TruthTable":
        return TruthTable(self.n, 1 - self.values)

    def permute(self, perm: Sequence[int]) -> "TruthTable":
        """Table of ``g(y) = f(x)`` where ``y[perm[i]] = x[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise UsageError("perm must be a permutation of range(n)")
        if self.n == 0:
            return self
        inverse = np.argsort(perm)
        g = self.cube().transpose(tuple(inverse))
        return TruthTable(self.n, g.transpose(tuple(reversed(range(self.n)))).reshape(-1))

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))

    def __repr__(self):
        if self.n <= 5:
            return f"TruthTable(n={self.n}, values={self.values.tolist()})"
        return f"TruthTable(n={self.n}, ones={int(self.values.sum())})"


class FourierSpectrum:
    """Exact Fourier coefficients stored as integer numerators over ``2**n``.

    ``spectrum[mask]`` is the coefficient of the set whose bitmask is ``mask``.
    """

    __slots__ = ("n", "numerators")

    def __init__(self, n: int, numerators: np.ndarray):
        numerators.setflags(write=False)
        self.n = n
        self.numerators = numerators

    def __getitem__(self, mask: int) -> Fraction:
        return Fraction(int(self.numerators[mask]), 1 << self.n)

    def __len__(self):
        return self.numerators.size

    def items(self) -> Iterator[tuple[int, Fraction]]:
        """Nonzero coefficients in increasing mask order."""
        for mask in np.flatnonzero(self.numerators):
            yield int(mask), self[int(mask)]

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.items())

    def parseval_sum(self) -> Fraction:
        total = sum(int(v) * int(v) for v in self.numerators[self.numerators != 0])
        return Fraction(total, 1 << (2 * self.n))


def _check_assignment(tt: TruthTable, assignment: Sequence[int]) -> int:
    if len(assignment) != tt.n:
        raise UsageError(f"assignment has length {len(assignment)}, expected {tt.n}")
    x = 0
    for i, bit in enumerate(assignment):
        if bit not in (0, 1):
            raise UsageError("assignment entries must be 0 or 1")
        x |= int(bit) << i
    return x


def evaluate(tt: TruthTable, assignment: Sequence[int]) -> int:
    return int(tt.values[_check_assignment(tt, assignment)])


def is_constant(tt: TruthTable) -> Constancy:
    lo, hi = int(tt.values.min()), int(tt.values.max())
    if lo != hi:
        return Constancy.NONCONSTANT
    return Constancy.CONST1 if lo else Constancy.CONST0


def relevant_variables(tt: TruthTable) -> list[int]:
    """Variables whose flip changes ``f`` on at least one input."""
    if tt.n == 0:
        return []
    cube = tt.cube()
    return [i for i in range(tt.n)
            if not np.array_equal(cube.take(0, axis=i), cube.take(1, axis=i))]


def dt_depth(tt: TruthTable, cap: int = DEPTH_CAP) -> int:
    """Minimum depth over all decision trees computing ``tt``.

    Dead variables are dropped first; ``cap`` bounds the number of variables
    ``f`` actually depends on.  The search memoizes on subcubes keyed by
    (mask of fixed variables, their values).
    """
    live = relevant_variables(tt)
    if not live:
        return 0
    k = len(live)
    if k > cap:
        raise ResourceError(f"{k} relevant variables exceed depth-search cap {cap}")
    live_set = set(live)
    sub = tt.cube()[tuple(slice(None) if i in live_set else 0 for i in range(tt.n))]
    memo: dict[int, int] = {}

    def solve(mask: int, vals: int) -> int:
        key = mask | (vals << k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        view = sub[tuple(((vals >> i) & 1) if (mask >> i) & 1 else slice(None)
                         for i in range(k))]
        if view.min() == view.max():
            memo[key] = 0
            return 0
        best = k + 1
        for i in range(k):
            bit = 1 << i
            if mask & bit:
                continue
            a0 = solve(mask | bit, vals)
            if a0 + 1 >= best:
                continue
            a1 = solve(mask | bit, vals | bit)
            best = min(best, 1 + max(a0, a1))
            if best == 1:
                break
        memo[key] = best
        return best

    return solve(0, 0)


def fourier_transform(tt: TruthTable) -> FourierSpectrum:
    """Exact Walsh-Hadamard transform under the 0 -> +1, 1 -> -1 convention."""
    a = 1 - 2 * tt.values.astype(np.int64)
    size = a.size
    h = 1
    while h < size:
        blocks = a.reshape(-1, 2, h)
        x, y = blocks[:, 0, :], blocks[:, 1, :]
        a = np.stack((x + y, x - y), axis=1).reshape(-1)
        h *= 2
    return FourierSpectrum(tt.n, np.ascontiguousarray(a))


def bias(tt: TruthTable) -> Fraction:
    zeros = (1 << tt.n) - int(tt.values.sum(dtype=np.int64))
    return abs(Fraction(zeros, 1 << tt.n) - Fraction(1, 2))


def correlation(tt: TruthTable, other: TruthTable) -> Fraction:
    """Probability over a uniform input that the two functions agree."""
    if tt.n != other.n:
        raise UsageError(f"variable counts differ: {tt.n} vs {other.n}")
    agree = int(np.count_nonzero(tt.values == other.values))
    return Fraction(agree, 1 << tt.n)


def influence(tt: TruthTable, i: int) -> Fraction:
    if not 0 <= i < tt.n:
        raise UsageError(f"variable {i} out of range for n={tt.n}")
    cube = tt.cube()
    flips = int(np.count_nonzero(cube.take(0, axis=i) != cube.take(1, axis=i)))
    return Fraction(flips, 1 << (tt.n - 1))


def restrict_table(tt: TruthTable, cells: Sequence[int]) -> TruthTable:
    """Table of ``f`` restricted by ``cells`` (0, 1 or STAR per variable).

    The result ranges over the starred variables in increasing index order.
    """
    cells = list(getattr(cells, "cells", cells))
    if len(cells) != tt.n:
        raise UsageError(f"restriction has length {len(cells)}, expected {tt.n}")
    index = tuple(slice(None) if c == STAR else int(c) for c in cells)
    sub = np.asarray(tt.cube()[index])
    m = sub.ndim
    if m == 0:
        return TruthTable(0, [int(sub)])
    return TruthTable(m, sub.transpose(tuple(reversed(range(m)))).reshape(-1))
