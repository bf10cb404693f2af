"""Decision trees: validation, clipping, restriction and depth of restrictions."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .boolfn import DEPTH_CAP, HARD_CAP, STAR, TruthTable, dt_depth
from .errors import LiveCapExceeded, ResourceError, UsageError


class Leaf(NamedTuple):
    bit: int


class Internal(NamedTuple):
    var: int
    zero: int
    one: int


@dataclass(frozen=True)
class DecisionTree:
    """Pool of nodes addressed by index, with a designated root.

    ``read_once`` is a promise from the builder that no variable labels two
    vertices; it enables leaf-reachability shortcuts for constancy.
    """

    nodes: tuple
    root: int
    read_once: bool = False

    @classmethod
    def leaf(cls, bit: int) -> "DecisionTree":
        return cls((Leaf(int(bit)),), 0, True)

    @property
    def variables(self) -> list[int]:
        return sorted({self.nodes[i].var for i in self.reachable()
                       if isinstance(self.nodes[i], Internal)})

    @property
    def var_count(self) -> int:
        return len(self.variables)

    def reachable(self) -> list[int]:
        out, stack = [], [self.root]
        while stack:
            i = stack.pop()
            out.append(i)
            node = self.nodes[i]
            if isinstance(node, Internal):
                stack.append(node.one)
                stack.append(node.zero)
        return out

    def evaluate(self, assignment) -> int:
        node = self.nodes[self.root]
        while isinstance(node, Internal):
            node = self.nodes[node.one if assignment[node.var] else node.zero]
        return node.bit


@dataclass(frozen=True)
class ClipReport:
    is_clipped: bool
    t_clip: int
    t0_clip: int


def validate(tree: DecisionTree) -> str | None:
    """Return ``None`` for a well-formed tree, else a description of the first problem."""
    n = len(tree.nodes)
    if not 0 <= tree.root < n:
        return f"root id {tree.root} does not resolve"
    parents = {tree.root: None}
    stack = [(tree.root, ())]
    while stack:
        i, path = stack.pop()
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            if node.bit not in (0, 1):
                return f"leaf {i} has label {node.bit!r}, expected 0 or 1"
            continue
        if not isinstance(node, Internal):
            return f"node {i} is neither a leaf nor an internal vertex"
        if node.var < 0:
            return f"node {i} has negative variable id {node.var}"
        if node.var in path:
            trail = " -> ".join(f"x{v}" for v in path + (node.var,))
            return f"variable x{node.var} repeats on path {trail}"
        for child in (node.zero, node.one):
            if not 0 <= child < n:
                return f"node {i} points to missing child {child}"
            if child in parents:
                return f"node {child} has more than one parent"
            parents[child] = i
            stack.append((child, path + (node.var,)))
    return None


def _leaf_distances(tree: DecisionTree) -> dict[int, int]:
    dist: dict[int, int] = {}
    for i in reversed(tree.reachable()):
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            dist[i] = 0
        else:
            dist[i] = 1 + min(dist[node.zero], dist[node.one])
    return dist


def clip_report(tree: DecisionTree, t: int | None = None) -> ClipReport:
    """Smallest t with every vertex within t of a leaf, and the root's distance.

    ``is_clipped`` compares against ``t`` when given, else is always true.
    """
    dist = _leaf_distances(tree)
    t_clip = max(dist.values())
    return ClipReport(t is None or t_clip <= t, t_clip, dist[tree.root])


def to_truth_table(tree: DecisionTree, order: Sequence[int] | None = None,
                   cap: int = HARD_CAP) -> TruthTable:
    """Function computed by ``tree``; table position ``i`` is variable ``order[i]``.

    ``order`` defaults to the sorted tree variables and may include extra
    padding variables the tree never queries.
    """
    if order is None:
        order = tree.variables
    order = list(order)
    pos = {v: i for i, v in enumerate(order)}
    if len(pos) != len(order):
        raise UsageError("variable order contains duplicates")
    missing = [v for v in tree.variables if v not in pos]
    if missing:
        raise UsageError(f"variables {missing} missing from order")
    m = len(order)
    if m > cap:
        raise ResourceError(f"{m} variables exceed truth-table cap {cap}")
    cube = np.zeros((2,) * m, dtype=np.uint8)
    stack = [(tree.root, [slice(None)] * m)]
    while stack:
        i, idx = stack.pop()
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            cube[tuple(idx)] = node.bit
            continue
        p = pos[node.var]
        for child, bit in ((node.zero, 0), (node.one, 1)):
            sub = list(idx)
            sub[p] = bit
            stack.append((child, sub))
    flat = cube.transpose(tuple(reversed(range(m)))).reshape(-1) if m else cube.reshape(-1)
    return TruthTable(m, flat, cap=cap)


def _cells(rho) -> list[int]:
    return [int(c) for c in getattr(rho, "cells", rho)]


def _check_cover(tree: DecisionTree, cells: list[int]) -> None:
    for v in tree.variables:
        if v >= len(cells):
            raise UsageError(f"restriction of length {len(cells)} does not cover x{v}")


def apply_restriction(tree: DecisionTree, rho) -> DecisionTree:
    """Replace every vertex on a fixed variable by its chosen child."""
    cells = _cells(rho)
    _check_cover(tree, cells)
    out: list = []

    def build(i: int) -> int:
        node = tree.nodes[i]
        while isinstance(node, Internal) and cells[node.var] != STAR:
            node = tree.nodes[node.one if cells[node.var] else node.zero]
        if isinstance(node, Leaf):
            out.append(node)
            return len(out) - 1
        slot = len(out)
        out.append(None)
        z = build(node.zero)
        o = build(node.one)
        out[slot] = Internal(node.var, z, o)
        return slot

    root = build(tree.root)
    return DecisionTree(tuple(out), root, tree.read_once)


def has_split_path(tree: DecisionTree) -> bool:
    """True iff reachable leaves carry both labels."""
    seen = set()
    for i in tree.reachable():
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            seen.add(node.bit)
            if len(seen) == 2:
                return True
    return False


def simplify_nested(tree: DecisionTree, cells: Sequence[int]):
    """Restricted tree as nested tuples: a leaf is 0 or 1, a vertex is (var, zero, one).

    Subtrees whose leaves all agree collapse to that leaf, which is exact
    for read-once trees and harmless otherwise.
    """
    nodes = tree.nodes

    def walk(i):
        node = nodes[i]
        while type(node) is Internal:
            c = cells[node.var]
            if c == STAR:
                z = walk(node.zero)
                o = walk(node.one)
                if z == o and type(z) is int:
                    return z
                return (node.var, z, o)
            node = nodes[node.one if c else node.zero]
        return node.bit

    return walk(tree.root)


def _nested_vars(t, acc: set) -> set:
    stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is tuple:
            acc.add(x[0])
            stack.append(x[1])
            stack.append(x[2])
    return acc


def nested_depth(t, read_once: bool, live_cap: int = DEPTH_CAP) -> int:
    """Exact decision-tree depth of the function a nested tree computes."""
    if type(t) is int:
        return 0
    live = sorted(_nested_vars(t, set()))
    if read_once and len(live) == 1:
        return 1
    if len(live) > live_cap:
        raise LiveCapExceeded(len(live), live_cap)
    pos = {v: i for i, v in enumerate(live)}
    m = len(live)
    cube = np.zeros((2,) * m, dtype=np.uint8)
    stack = [(t, [slice(None)] * m)]
    while stack:
        x, idx = stack.pop()
        if type(x) is int:
            if x:
                cube[tuple(idx)] = 1
            continue
        p = pos[x[0]]
        for child, bit in ((x[1], 0), (x[2], 1)):
            sub = list(idx)
            sub[p] = bit
            stack.append((child, sub))
    tt = TruthTable(m, cube.transpose(tuple(reversed(range(m)))).reshape(-1))
    return dt_depth(tt, cap=live_cap)


def restricted_dt_depth(tree: DecisionTree, rho, live_cap: int = DEPTH_CAP) -> int:
    """Exact depth of the function computed by ``tree`` under ``rho``.

    Raises :class:`LiveCapExceeded` when too many starred variables survive.
    """
    cells = _cells(rho)
    _check_cover(tree, cells)
    return nested_depth(simplify_nested(tree, cells), tree.read_once, live_cap)


_TOKEN = re.compile(r"\(|\)|x\d+|L[01]")


def dumps(tree: DecisionTree) -> str:
    parts: list[str] = []

    def emit(i):
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            parts.append(f"L{node.bit}")
            return
        parts.append(f"(x{node.var} ")
        emit(node.zero)
        parts.append(" ")
        emit(node.one)
        parts.append(")")

    emit(tree.root)
    return "".join(parts)


def loads(text: str, read_once: bool | None = None) -> DecisionTree:
    """Parse the ``(x<i> <zero> <one>)`` / ``L0`` / ``L1`` format."""
    stripped = re.sub(r"\s+", " ", text.strip())
    tokens = _TOKEN.findall(stripped)
    if "".join(tokens) != stripped.replace(" ", ""):
        raise UsageError(f"unrecognized characters in tree text: {text!r}")
    nodes: list = []
    pos = 0

    def parse() -> int:
        nonlocal pos
        if pos >= len(tokens):
            raise UsageError("tree text ended early")
        tok = tokens[pos]
        pos += 1
        if tok in ("L0", "L1"):
            nodes.append(Leaf(int(tok[1])))
            return len(nodes) - 1
        if tok != "(":
            raise UsageError(f"unexpected token {tok!r}")
        if pos >= len(tokens) or not tokens[pos].startswith("x"):
            raise UsageError("expected a variable after '('")
        var = int(tokens[pos][1:])
        pos += 1
        slot = len(nodes)
        nodes.append(None)
        z = parse()
        o = parse()
        if pos >= len(tokens) or tokens[pos] != ")":
            raise UsageError("expected ')'")
        pos += 1
        nodes[slot] = Internal(var, z, o)
        return slot

    root = parse()
    if pos != len(tokens):
        raise UsageError("trailing tokens after tree")
    tree = DecisionTree(tuple(nodes), root, False)
    if read_once is None:
        labels = [n.var for n in nodes if isinstance(n, Internal)]
        read_once = len(labels) == len(set(labels))
    return DecisionTree(tree.nodes, root, read_once)


def random_tree(n_vars: int, max_depth: int, rng: np.random.Generator,
                leaf_prob: float = 0.3) -> DecisionTree:
    """Random valid tree; variables may repeat across branches but not on a path."""
    nodes: list = []

    def grow(depth: int, used: frozenset) -> int:
        free = [v for v in range(n_vars) if v not in used]
        if depth >= max_depth or not free or rng.random() < leaf_prob:
            nodes.append(Leaf(int(rng.integers(2))))
            return len(nodes) - 1
        var = int(rng.choice(free))
        slot = len(nodes)
        nodes.append(None)
        z = grow(depth + 1, used | {var})
        o = grow(depth + 1, used | {var})
        nodes[slot] = Internal(var, z, o)
        return slot

    root = grow(0, frozenset())
    labels = [n.var for n in nodes if isinstance(n, Internal)]
    return DecisionTree(tuple(nodes), root, len(labels) == len(set(labels)))


def random_clipped_tree(n_vars: int, t: int, rng: np.random.Generator,
                        max_depth: int | None = None, stop_prob: float = 0.25) -> DecisionTree:
    """Random tree in which every vertex lies within distance ``t`` of a leaf.

    Each vertex sends one child down a branch that must reach a leaf within
    its remaining allowance, and the other child starts afresh with
    allowance ``t``.  Variables never repeat along a path.
    """
    if t < 1:
        raise UsageError("t must be at least 1")
    max_depth = n_vars if max_depth is None else max_depth
    nodes: list = []

    def grow(allow: int, depth: int, used: frozenset) -> int:
        free = [v for v in range(n_vars) if v not in used]
        if allow == 0 or not free or depth >= max_depth or (depth and rng.random() < stop_prob):
            nodes.append(Leaf(int(rng.integers(2))))
            return len(nodes) - 1
        var = int(rng.choice(free))
        slot = len(nodes)
        nodes.append(None)
        short_first = bool(rng.integers(2))
        allows = (allow - 1, t) if short_first else (t, allow - 1)
        z = grow(allows[0], depth + 1, used | {var})
        o = grow(allows[1], depth + 1, used | {var})
        nodes[slot] = Internal(var, z, o)
        return slot

    root = grow(t, 0, frozenset())
    labels = [n.var for n in nodes if isinstance(n, Internal)]
    return DecisionTree(tuple(nodes), root, len(labels) == len(set(labels)))
