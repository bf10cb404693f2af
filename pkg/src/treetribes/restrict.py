"""Random p-restrictions: sampling, exact enumeration and Monte Carlo estimation.

Sampling is driven by numpy's Philox counter-based generator.  Samples are
grouped in fixed blocks of ``BLOCK`` draws and block ``b`` uses the key
``seed + b * 2**64``, so a run gives the same answer for any number of
workers.  Each cell consumes one 64-bit word ``u``:

* Star when ``u < T`` with ``T = floor(p * 2**64)``;
* Zero when ``T <= u < T + (2**64 - T) // 2``;
* One otherwise.

The rounding shifts each probability by less than 2**-63.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .boolfn import DEPTH_CAP, STAR, TruthTable, is_constant
from .dtree import DecisionTree, nested_depth, simplify_nested, to_truth_table
from .errors import DomainError, LiveCapExceeded, ResourceError, UsageError
from .polyrec import RationalPoly

BLOCK = 8192
ENUM_CAP = 12
CONSTANCY_ENUM_CAP = 14
DEFAULT_SEED = 0xC0FFEE
_TWO64 = 1 << 64


class Cell(enum.IntEnum):
    ZERO = 0
    ONE = 1
    STAR = STAR


@dataclass(frozen=True)
class Restriction:
    cells: tuple

    def __post_init__(self):
        for c in self.cells:
            if c not in (0, 1, STAR):
                raise UsageError(f"restriction cell {c!r} is not 0, 1 or star")

    @classmethod
    def parse(cls, text: str) -> "Restriction":
        table = {"0": Cell.ZERO, "1": Cell.ONE, "*": Cell.STAR}
        try:
            return cls(tuple(table[ch] for ch in text.strip()))
        except KeyError as exc:
            raise UsageError(f"bad restriction character {exc.args[0]!r}") from None

    def __str__(self):
        return "".join("*" if c == STAR else str(int(c)) for c in self.cells)

    def __len__(self):
        return len(self.cells)

    @property
    def stars(self) -> int:
        return sum(1 for c in self.cells if c == STAR)


@dataclass(frozen=True)
class RestrictionLaw:
    p: Fraction

    def __post_init__(self):
        p = Fraction(self.p)
        if not 0 <= p <= 1:
            raise DomainError(f"p must lie in [0, 1], got {p}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> Fraction:
        return (1 - self.p) / 2

    @property
    def star_threshold(self) -> int:
        return (self.p.numerator << 64) // self.p.denominator

    @property
    def zero_threshold(self) -> int:
        t = self.star_threshold
        return t + ((_TWO64 - t) >> 1)


def _cells_from_words(words: np.ndarray, law: RestrictionLaw) -> np.ndarray:
    if law.p == 1:
        return np.full(words.shape, STAR, dtype=np.uint8)
    t_star = np.uint64(law.star_threshold)
    t_zero = np.uint64(law.zero_threshold)
    out = np.where(words < t_zero, 0, 1).astype(np.uint8)
    out[words < t_star] = STAR
    return out


def _block_cells(law: RestrictionLaw, n: int, seed: int, block: int, count: int) -> np.ndarray:
    gen = np.random.Philox(key=(seed + (block << 64)) % (1 << 128))
    words = gen.random_raw(count * n).astype(np.uint64).reshape(count, n)
    return _cells_from_words(words, law)


def sample_many(law: RestrictionLaw, n: int, samples: int, seed: int = DEFAULT_SEED,
                start: int = 0) -> np.ndarray:
    """Rows ``start .. start+samples-1`` of the deterministic restriction stream."""
    rows = []
    i = start
    end = start + samples
    while i < end:
        b, off = divmod(i, BLOCK)
        cells = _block_cells(law, n, seed, b, BLOCK)
        take = min(BLOCK - off, end - i)
        rows.append(cells[off:off + take])
        i += take
    if not rows:
        return np.zeros((0, n), dtype=np.uint8)
    return np.concatenate(rows)


def sample(law: RestrictionLaw, n: int, rng: np.random.Generator) -> Restriction:
    """One restriction drawn from ``rng`` (any numpy Generator)."""
    words = rng.integers(0, _TWO64, size=n, dtype=np.uint64)
    return Restriction(tuple(Cell(int(c)) for c in _cells_from_words(words, law)))


# ---- exact enumeration -----------------------------------------------------

def _ternary_cube(tt: TruthTable) -> tuple[np.ndarray, np.ndarray]:
    """Min and max of ``f`` over every subcube, indexed by cells in {0,1,2}^n."""
    lo = tt.cube().astype(np.uint8)
    hi = lo.copy()
    for axis in range(tt.n):
        lo = np.concatenate([lo, np.minimum(lo.take([0], axis), lo.take([1], axis))], axis=axis)
        hi = np.concatenate([hi, np.maximum(hi.take([0], axis), hi.take([1], axis))], axis=axis)
    return lo, hi


def _star_counts(n: int) -> np.ndarray:
    s = np.zeros((3,) * n, dtype=np.int64) if n else np.zeros((), dtype=np.int64)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = 3
        s = s + (np.arange(3) == STAR).reshape(shape)
    return s


def _class_poly(counts: np.ndarray, n: int) -> RationalPoly:
    """sum_s counts[s] p^s q^(n-s) with q = (1-p)/2."""
    p = RationalPoly.p()
    q = RationalPoly.q()
    total = RationalPoly()
    for s, c in enumerate(counts):
        if c:
            total = total + int(c) * (p ** s) * (q ** (n - s))
    return total


def enumerate_constancy(tree_or_table, cap: int = CONSTANCY_ENUM_CAP) -> dict[str, RationalPoly]:
    """Exact P0, P1 and P* polynomials by running over all 3^n restrictions."""
    tt = tree_or_table if isinstance(tree_or_table, TruthTable) else to_truth_table(tree_or_table)
    if tt.n > cap:
        raise ResourceError(f"{tt.n} variables exceed enumeration cap {cap}")
    lo, hi = _ternary_cube(tt)
    stars = _star_counts(tt.n).reshape(-1)
    lo, hi = lo.reshape(-1), hi.reshape(-1)
    out = {}
    for name, mask in (("P0", hi == 0), ("P1", lo == 1), ("Pstar", lo != hi)):
        counts = np.bincount(stars[mask], minlength=tt.n + 1)
        out[name] = _class_poly(counts, tt.n)
    return out


def enumerate_exact(tree: DecisionTree | TruthTable,
                    classify: Callable[[TruthTable], object] | None = None,
                    cap: int = ENUM_CAP) -> dict:
    """Map each class label to the exact probability polynomial of that class.

    ``classify`` receives the restricted truth table over the starred
    variables.  Without it the classes are constancy outcomes, computed
    by a vectorized path that allows up to 14 variables.
    """
    if classify is None:
        return enumerate_constancy(tree)
    tt = tree if isinstance(tree, TruthTable) else to_truth_table(tree)
    if tt.n > cap:
        raise ResourceError(f"{tt.n} variables exceed enumeration cap {cap}")
    from itertools import product
    from .boolfn import restrict_table
    n = tt.n
    buckets: dict = {}
    for cells in product((0, 1, STAR), repeat=n):
        label = classify(restrict_table(tt, cells))
        s = sum(1 for c in cells if c == STAR)
        buckets.setdefault(label, [0] * (n + 1))[s] += 1
    return {k: _class_poly(v, n) for k, v in buckets.items()}


# ---- Monte Carlo -------------------------------------------------------------

OVERCAP_MODES = ("reported", "upper", "lower")


@dataclass(frozen=True)
class EstimateReport:
    samples: int
    successes: int
    seed: int
    skipped_overcap: int
    d: int
    p: Fraction

    @property
    def phat(self) -> Fraction:
        return Fraction(self.successes, self.samples) if self.samples else Fraction(0)

    @property
    def stderr(self) -> float:
        if not self.samples:
            return float("nan")
        ph = float(self.phat)
        return math.sqrt(ph * (1 - ph) / self.samples)

    def as_row(self, t: int | None = None, r: int | None = None) -> dict:
        return {"t": "" if t is None else t, "r": "" if r is None else r,
                "p_num": self.p.numerator, "p_den": self.p.denominator, "d": self.d,
                "samples": self.samples, "successes": self.successes,
                "phat": repr(float(self.phat)), "stderr": repr(self.stderr),
                "skipped": self.skipped_overcap, "seed": self.seed}


CSV_COLUMNS = ["t", "r", "p_num", "p_den", "d", "samples", "successes", "phat",
               "stderr", "skipped", "seed"]


def reports_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


@dataclass(frozen=True)
class DepthHistogram:
    """Counts of restricted depths; depths -1 stand for over-cap samples."""

    total: int
    counts: dict

    def report(self, d: int, p: Fraction, seed: int, mode: str = "reported") -> EstimateReport:
        if mode not in OVERCAP_MODES:
            raise UsageError(f"unknown over-cap mode {mode!r}")
        over = self.counts.get(-1, 0)
        hits = sum(c for k, c in self.counts.items() if k >= d)
        if d <= 0:
            hits = self.total - over
        samples = self.total
        if mode == "reported":
            samples -= over
        elif mode == "upper" or d <= 0:
            hits += over
        return EstimateReport(samples, hits, seed, over, d, p)


def _depth_counts_block(args) -> Counter:
    tree, law, seed, start, count, live_cap = args
    rows = sample_many(law, _n_cells(tree), count, seed, start)
    counts: Counter = Counter()
    has_star = (rows == STAR).any(axis=1)
    counts[0] += int((~has_star).sum())
    rows = rows[has_star]
    if len(rows) == 0:
        return counts
    uniq, mult = np.unique(rows, axis=0, return_counts=True)
    memo: dict = {}
    for row, m in zip(uniq, mult):
        nested = simplify_nested(tree, row.tolist())
        depth = memo.get(nested)
        if depth is None:
            try:
                depth = nested_depth(nested, tree.read_once, live_cap)
            except LiveCapExceeded:
                depth = -1
            memo[nested] = depth
        counts[depth] += int(m)
    return counts


def _n_cells(tree: DecisionTree) -> int:
    vs = tree.variables
    return vs[-1] + 1 if vs else 0


def depth_histogram(tree: DecisionTree, law: RestrictionLaw, samples: int,
                    seed: int = DEFAULT_SEED, live_cap: int = DEPTH_CAP,
                    workers: int = 1) -> DepthHistogram:
    """Distribution of the exact restricted depth over ``samples`` draws."""
    if samples < 1:
        raise UsageError("samples must be at least 1")
    chunks = []
    start = 0
    while start < samples:
        count = min(BLOCK, samples - start)
        chunks.append((tree, law, seed, start, count, live_cap))
        start += count
    total: Counter = Counter()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for c in pool.map(_depth_counts_block, chunks):
                total.update(c)
    else:
        for chunk in chunks:
            total.update(_depth_counts_block(chunk))
    return DepthHistogram(samples, dict(sorted(total.items())))


def mc_estimate_depth_ge(tree: DecisionTree, law: RestrictionLaw, d: int, samples: int,
                         seed: int = DEFAULT_SEED, live_cap: int = DEPTH_CAP,
                         mode: str = "reported", workers: int = 1) -> EstimateReport:
    """Estimate Pr[depth of the restricted tree >= d]."""
    hist = depth_histogram(tree, law, samples, seed, live_cap, workers)
    rep = hist.report(d, law.p, seed, mode)
    if rep.skipped_overcap and mode == "reported":
        warnings.warn(f"{rep.skipped_overcap} samples exceeded the live-variable cap "
                      f"{live_cap} and were excluded", stacklevel=2)
    return rep


def mc_estimate_constant(tree: DecisionTree, law: RestrictionLaw, bit: int, samples: int,
                         seed: int = DEFAULT_SEED) -> EstimateReport:
    """Estimate the probability that the restricted function is constantly ``bit``."""
    n = _n_cells(tree)
    hits = 0
    start = 0
    while start < samples:
        count = min(BLOCK, samples - start)
        rows = sample_many(law, n, count, seed, start)
        for row in rows:
            nested = simplify_nested(tree, row.tolist())
            if type(nested) is int:
                hits += nested == bit
            elif not tree.read_once:
                tt = _nested_table(nested)
                hits += is_constant(tt).value == ("const1" if bit else "const0")
        start += count
    return EstimateReport(samples, hits, seed, 0, 0, law.p)


def _nested_table(nested) -> TruthTable:
    from .dtree import Internal, Leaf
    nodes: list = []

    def emit(x):
        if type(x) is int:
            nodes.append(Leaf(x))
            return len(nodes) - 1
        slot = len(nodes)
        nodes.append(None)
        z, o = emit(x[1]), emit(x[2])
        nodes[slot] = Internal(x[0], z, o)
        return slot

    root = emit(nested)
    return to_truth_table(DecisionTree(tuple(nodes), root))
