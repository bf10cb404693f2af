"""Closed forms for Fourier coefficients and bias of xor tribes.

Signs follow the package convention of boolean 0 -> +1 and 1 -> -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .boolfn import bias, fourier_transform
from .dtree import to_truth_table
from .errors import DomainError, UsageError
from .tribes import TribeTree, build_xor_tribe


def jacobsthal(i: int) -> int:
    if i < 0:
        raise DomainError("Jacobsthal index must be nonnegative")
    return (2 ** i - (-1) ** i) // 3


def fourier_t1_closed(n: int, S: Iterable[int]) -> Fraction:
    """Coefficient of the chain tribe on n variables at the set S.

    ``S`` holds 1-based positions along the chain (1 is the root).  Only
    odd ``n`` is covered by the closed form.
    """
    S = sorted(set(S))
    if n % 2 == 0:
        raise DomainError(f"closed form holds for odd n only, got n={n}")
    if not S:
        raise UsageError("S must be nonempty")
    if S[0] < 1 or S[-1] > n:
        raise UsageError(f"positions must lie in 1..{n}")
    j = S[-1]
    sign = -1 if (len(S) + j) % 2 else 1
    return Fraction(sign * jacobsthal(n - j + 1), 2 ** (n - 1))


@dataclass(frozen=True)
class PathParams:
    """Where the deepest variable of S sits.

    ``k`` is the number of 0-edges from it to the leaf closing its chain,
    ``d`` its number of edges from the root and ``l`` its level.
    """

    k: int
    d: int
    l: int
    on_path: bool
    deepest: int


def _check_set(tribe: TribeTree, S) -> list[int]:
    S = sorted(set(S))
    if not S:
        raise UsageError("S must be nonempty")
    for v in S:
        if not 0 <= v < tribe.n:
            raise UsageError(f"unknown variable x{v}")
    return S


def on_single_path(tribe: TribeTree, S) -> bool:
    """True when the variables of S are totally ordered by the ancestor relation."""
    S = sorted(_check_set(tribe, S), key=lambda v: tribe.depth[v])
    for upper, lower in zip(S, S[1:]):
        if tribe.depth[upper] == tribe.depth[lower] or upper not in tribe.ancestors(lower):
            return False
    return True


def path_params(tribe: TribeTree, S) -> PathParams:
    S = _check_set(tribe, S)
    v = max(S, key=lambda x: tribe.depth[x])
    k = tribe.spec.t - tribe.chain_pos[v]
    return PathParams(k, tribe.depth[v], tribe.level[v], on_single_path(tribe, S), v)


@dataclass(frozen=True)
class GeneralCoefficient:
    """Closed-form claim for one set: exactly zero, or a magnitude with unknown sign."""

    zero: bool
    magnitude: Fraction

    def matches(self, value: Fraction) -> bool:
        return value == 0 if self.zero else abs(value) == self.magnitude


def fourier_general_closed(tribe: TribeTree, S) -> GeneralCoefficient:
    params = path_params(tribe, S)
    if not params.on_path:
        return GeneralCoefficient(True, Fraction(0))
    t, r = tribe.spec.t, tribe.spec.r
    alpha = Fraction(1, 2 ** t)
    beta = alpha - 1
    mag = Fraction(1, 2 ** (params.k + params.d - 1)) * (1 - beta ** (r - params.l + 1)) / (2 - alpha)
    return GeneralCoefficient(False, abs(mag))


def bias_closed(t: int, r: int) -> Fraction:
    if t < 1 or r < 1:
        raise UsageError(f"need t >= 1 and r >= 1, got t={t}, r={r}")
    alpha = Fraction(1, 2 ** t)
    return abs((1 - (alpha - 1) ** (r + 1)) / (2 - alpha) - Fraction(1, 2))


def bias_bruteforce(t: int, r: int) -> Fraction:
    return bias(to_truth_table(build_xor_tribe(t, r).tree))


@dataclass(frozen=True)
class CompareRow:
    mask: int
    closed: str
    bruteforce: Fraction
    match: bool

    def set_label(self) -> str:
        return "{" + " ".join(f"x{i}" for i in range(self.mask.bit_length()) if self.mask >> i & 1) + "}"


def _members(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def compare_t1(n: int) -> list[CompareRow]:
    """Closed form against the transform for every nonempty set of the n-chain."""
    tribe = build_xor_tribe(1, n)
    spec = fourier_transform(to_truth_table(tribe.tree))
    rows = []
    for mask in range(1, 1 << n):
        val = fourier_t1_closed(n, [i + 1 for i in _members(mask)])
        brute = spec[mask]
        rows.append(CompareRow(mask, str(val), brute, val == brute))
    return rows


def compare_general(t: int, r: int, max_set_size: int | None = None) -> list[CompareRow]:
    """Closed-form magnitudes against the transform for every nonempty set."""
    tribe = build_xor_tribe(t, r)
    spec = fourier_transform(to_truth_table(tribe.tree))
    rows = []
    for mask in range(1, 1 << tribe.n):
        members = _members(mask)
        if max_set_size is not None and len(members) > max_set_size:
            continue
        claim = fourier_general_closed(tribe, members)
        brute = spec[mask]
        label = "0" if claim.zero else f"+-{claim.magnitude}"
        rows.append(CompareRow(mask, label, brute, claim.matches(brute)))
    return rows
