"""The eleven end-to-end acceptance checks, shared by the CLI and the test suite.

Each check returns a :class:`CriterionResult`.  ``quick=True`` shrinks
sample counts and ranges for smoke runs; only the full form counts as
acceptance.
"""

from __future__ import annotations

import random
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import bounds, polyrec, spectral
from .boolfn import TruthTable, bias, correlation, influence
from .dtree import random_clipped_tree, to_truth_table
from .restrict import (DEFAULT_SEED, RestrictionLaw, depth_histogram, enumerate_exact,
                       mc_estimate_depth_ge)
from .tribes import build_xor_tribe, num_vars, verify_tribe

SIGMAS = 4


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


BUDGETS = {1: 30, 2: 5, 3: 30, 4: 60, 5: 10, 6: 120, 7: 300, 8: 10, 9: 120, 10: 60, 11: 600}


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    with warnings.catch_warnings():
        # large tribes are built on purpose; the truth-table cap warning is noise here
        warnings.filterwarnings("ignore", message="tree has .* variables")
        passed, detail = fn()
    return CriterionResult(number, name, passed, detail, time.perf_counter() - start)


def recurrence_matches_enumeration(quick: bool = False) -> CriterionResult:
    def run():
        cases = [(1, r) for r in range(1, 8)] + [(2, r) for r in range(1, 4)]
        if quick:
            cases = [(1, r) for r in range(1, 5)] + [(2, 1), (2, 2)]
        bad = []
        for t, r in cases:
            enum = enumerate_exact(build_xor_tribe(t, r).tree)
            p0, p1 = polyrec.p0_p1(t, r)
            if enum["P0"] != p0 or enum["P1"] != p1:
                bad.append((t, r))
        return not bad, f"{len(cases)} trees compared, mismatches {bad or 'none'}"
    return _timed(1, "recurrence equals enumeration", run)


def constant_coefficients(quick: bool = False) -> CriterionResult:
    def run():
        r_max = 20 if quick else 50
        bad = []
        for t in range(1, 7):
            for r in range(1, r_max + 1):
                rec = polyrec.const_coeffs_recurrence(t, r)
                closed = polyrec.const_coeffs_closed(t, r)
                if rec != closed or sum(rec) != 1:
                    bad.append((t, r))
        return not bad, f"t<=6, r<={r_max}, failures {bad or 'none'}"
    return _timed(2, "constant coefficients", run)


def linear_coefficients(quick: bool = False) -> CriterionResult:
    def run():
        r_max = 15 if quick else 40
        bad = []
        for t in range(1, 6):
            lo = -2 * 2 ** t
            for r in range(1, r_max + 1):
                a, b = polyrec.p_coeffs_recurrence(t, r)
                if not (lo <= a <= 0 and lo <= b <= 0):
                    bad.append((t, r))
        # cross-check the coefficient recurrence against the truncated polynomials
        for t in range(1, 4):
            for r in range(1, 13):
                polyrec.p_coeffs(t, r)
        gs = {}
        for t in (1, 2, 3):
            g = bounds.g_function(t, 4 * 2 ** t)
            gs[t] = g
            if g > -Fraction(2 ** t, 6):
                bad.append(("g", t))
        gtxt = ", ".join(f"g(t={t})={float(v):.4f}" for t, v in gs.items())
        return not bad, f"bounds t<=5 r<={r_max}; {gtxt}; failures {bad or 'none'}"
    return _timed(3, "[p] coefficient bounds", run)


def g2_tail(quick: bool = False) -> CriterionResult:
    def run():
        r_max = 6 if quick else 12
        worst = {}
        bad = []
        for t in (1, 2):
            for r in range(1, r_max + 1):
                res = bounds.g2_check(t, r)
                worst[t] = max(worst.get(t, Fraction(0)), res.value)
                if not res.passed:
                    bad.append((t, r))
        txt = ", ".join(f"t={t} max {float(v):.3g} vs {30 * 4 ** t}" for t, v in worst.items())
        return not bad, f"{txt}; failures {bad or 'none'}"
    return _timed(4, "G2 tail bound", run)


def d1_sandwich(quick: bool = False) -> CriterionResult:
    def run():
        bad, parts = [], []
        for t, r in ((1, 8), (2, 16)):
            pm = bounds.DEFAULT_CONSTANTS.p_max(t)
            for p in (pm / 2, pm):
                res = bounds.d1_check(t, r, p)
                parts.append(f"t={t} p={p}: P*/p={float(res.pstar / p):.4f}")
                if not res.passed:
                    bad.append((t, p))
        return not bad, "; ".join(parts)
    return _timed(5, "d=1 sandwich", run)


def mc_matches_exact(quick: bool = False, workers: int = 1) -> CriterionResult:
    def run():
        samples = 10 ** 5 if quick else 10 ** 6
        p = Fraction(1, 840)
        exact = polyrec.p_star_value(1, 8, p)
        rep = mc_estimate_depth_ge(build_xor_tribe(1, 8).tree, RestrictionLaw(p), 1,
                                   samples, DEFAULT_SEED, workers=workers)
        gap = abs(float(rep.phat - exact))
        ok = gap <= SIGMAS * rep.stderr
        return ok, (f"phat={float(rep.phat):.6g} exact={float(exact):.6g} "
                    f"gap={gap / rep.stderr if rep.stderr else float('inf'):.2f} stderr")
    return _timed(6, "Monte Carlo matches exact P*", run)


def upper_bound_empirical(quick: bool = False, workers: int = 1) -> CriterionResult:
    def run():
        n_trees = 6 if quick else 24
        samples = 10 ** 4 if quick else 10 ** 5
        rng = np.random.default_rng(20240601)
        worst = -float("inf")
        bad = []
        checks = 0
        for k in range(n_trees):
            t = 1 + k % 3
            tree = random_clipped_tree(12, t, rng)
            for p in (Fraction(1, 64), Fraction(1, 32)):
                hist = depth_histogram(tree, RestrictionLaw(p), samples,
                                       DEFAULT_SEED + k, workers=workers)
                for d in (1, 2):
                    rep = hist.report(d, p, DEFAULT_SEED + k, "upper")
                    ub = bounds.upper_bound_value(p, t, d)
                    margin = float(rep.phat) - float(ub) - SIGMAS * rep.stderr
                    worst = max(worst, margin)
                    checks += 1
                    if margin > 0:
                        bad.append((k, t, str(p), d))
        return not bad, (f"{n_trees} trees, {checks} checks, worst phat-UB-4se={worst:.3g}; "
                         f"violations {bad or 'none'}")
    return _timed(7, "upper bound holds empirically", run)


def u_kernel_bound(quick: bool = False) -> CriterionResult:
    def run():
        t_max = 8 if quick else 20
        worst = Fraction(0)
        bad = []
        for t in range(1, t_max + 1):
            for k in range(64):
                u = bounds.u_kernel(Fraction(k, 64), t)
                worst = max(worst, u)
                if u > 1:
                    bad.append((t, k))
        rng = random.Random(8)
        mism = 0
        for _ in range(50):
            t = rng.randint(1, 6)
            p = Fraction(rng.randrange(0, 1000), 1000)
            lhs, rhs = bounds.diagonal_identity(p, t)
            mism += lhs != rhs
        return not bad and not mism, (f"max U={float(worst):.6f} over t<={t_max}; "
                                      f"diagonal mismatches {mism}/50")
    return _timed(8, "U kernel at most 1", run)


def fourier_closed_forms(quick: bool = False) -> CriterionResult:
    def run():
        ns = (3, 5, 7) if quick else (3, 5, 7, 9, 11)
        bad1 = sum(1 for n in ns for row in spectral.compare_t1(n) if not row.match)
        t, r = (2, 2) if quick else (2, 3)
        rows = spectral.compare_general(t, r)
        bad2 = sum(1 for row in rows if not row.match)
        on_path = sum(1 for row in rows if row.closed != "0")
        return bad1 == 0 and bad2 == 0, (f"chain n in {ns}: {bad1} mismatches; "
                                         f"t={t} r={r}: {on_path} on-path sets, {bad2} mismatches")
    return _timed(9, "Fourier closed forms", run)


def structural_properties(quick: bool = False) -> CriterionResult:
    def run():
        problems = []
        built = 0
        for t in range(1, 5):
            for r in range(0, 5):
                if num_vars(t, r) > 400:
                    continue
                built += 1
                msg = verify_tribe(build_xor_tribe(t, r))
                if msg:
                    problems.append(f"tribe({t},{r}): {msg}")
        infl_cases = [(1, r) for r in range(1, 8 if quick else 11)] + [(2, 3)]
        for t, r in infl_cases:
            tribe = build_xor_tribe(t, r)
            tt = to_truth_table(tribe.tree, order=range(tribe.n))
            for v in range(tribe.n):
                if influence(tt, v) > Fraction(1, 2 ** tribe.depth[v]):
                    problems.append(f"influence x{v} in ({t},{r})")
        for t in range(1, 5):
            for r in range(1, 5):
                if num_vars(t, r) <= 16 and spectral.bias_closed(t, r) != spectral.bias_bruteforce(t, r):
                    problems.append(f"bias ({t},{r})")
        corr = {}
        for r in (1, 2, 3):
            tribe = build_xor_tribe(2, r)
            tt = to_truth_table(tribe.tree, order=range(tribe.n))
            corr[r] = correlation(tt, TruthTable.parity(tribe.n))
            if corr[r] != Fraction(1, 2):
                problems.append(f"parity correlation (2,{r}) = {corr[r]}")
        ctxt = ", ".join(f"r={r}: {c}" for r, c in corr.items())
        return not problems, (f"{built} tribes verified; parity correlation at t=2 {ctxt}; "
                              f"problems {problems or 'none'}")
    return _timed(10, "structural properties", run)


def lower_bound_dp(quick: bool = False, workers: int = 1) -> CriterionResult:
    def run():
        t, p, d = 1, Fraction(1, 840), 2
        samples = 10 ** 5 if quick else 10 ** 6
        table = bounds.gamma_lower_table(t, p, d, 64)
        target = (p * 2 / 42) ** 2
        first = table.first_r_reaching(d, target)
        if first is None:
            return False, "no r <= 64 reaches the target"
        r_star = table.argmax_r(d)
        lower = table.value(d, r_star)
        rep = mc_estimate_depth_ge(build_xor_tribe(t, r_star).tree, RestrictionLaw(p), d,
                                   samples, DEFAULT_SEED, workers=workers)
        ok = lower >= target and float(rep.phat) >= float(lower) - SIGMAS * rep.stderr
        return ok, (f"target {float(target):.3g} first reached at r={first}; "
                    f"r*={r_star} L={float(lower):.3g} phat={float(rep.phat):.3g} "
                    f"({rep.successes}/{rep.samples}) stderr={rep.stderr:.2g}")
    return _timed(11, "lower-bound table vs Monte Carlo", run)


CRITERIA = {
    1: recurrence_matches_enumeration,
    2: constant_coefficients,
    3: linear_coefficients,
    4: g2_tail,
    5: d1_sandwich,
    6: mc_matches_exact,
    7: upper_bound_empirical,
    8: u_kernel_bound,
    9: fourier_closed_forms,
    10: structural_properties,
    11: lower_bound_dp,
}

_TAKES_WORKERS = {6, 7, 11}


def run_criterion(number: int, quick: bool = False, workers: int = 1) -> CriterionResult:
    fn = CRITERIA[number]
    if number in _TAKES_WORKERS:
        return fn(quick=quick, workers=workers)
    return fn(quick=quick)


def run_all(quick: bool = False, workers: int = 1, echo: Callable[[str], None] | None = None):
    results = []
    for number in CRITERIA:
        res = run_criterion(number, quick, workers)
        if echo:
            echo(res.line())
        results.append(res)
    return results
