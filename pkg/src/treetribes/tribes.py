"""Complete clipped trees and xor tree tribes.

The complete t-clipped tree on r levels is a chain of t vertices joined by
0-edges and ending in a leaf; each 1-edge leads into a fresh copy on r-1
levels.  Labelling every leaf with the parity of edge labels on its root
path gives the xor tribe.  Variable ids are level-major: blocks are numbered
breadth-first and the chain inside a block gets consecutive ids.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

from .boolfn import HARD_CAP
from .dtree import DecisionTree, Internal, Leaf, validate
from .errors import UsageError


@dataclass(frozen=True)
class TribeSpec:
    t: int
    r: int

    def __post_init__(self):
        if self.t < 1:
            raise UsageError(f"t must be at least 1, got {self.t}")
        if self.r < 0:
            raise UsageError(f"r must be nonnegative, got {self.r}")

    @property
    def n(self) -> int:
        return num_vars(self.t, self.r)


@dataclass(frozen=True)
class TribeTree:
    """Xor tribe together with per-variable structure.

    ``level[v]`` is the recursion level (root block is 1), ``depth[v]`` the
    number of edges from the root, ``chain_pos[v]`` the 0-based position in
    its block and ``parent[v]`` the variable directly above (-1 at the root).
    """

    tree: DecisionTree
    spec: TribeSpec
    level: tuple
    depth: tuple
    chain_pos: tuple
    parent: tuple

    @property
    def n(self) -> int:
        return len(self.level)

    def ancestors(self, v: int) -> list[int]:
        out = []
        v = self.parent[v]
        while v >= 0:
            out.append(v)
            v = self.parent[v]
        return out


def num_vars(t: int, r: int) -> int:
    if t < 1 or r < 0:
        raise UsageError(f"need t >= 1 and r >= 0, got t={t}, r={r}")
    if t == 1:
        return r
    return (t ** (r + 1) - t) // (t - 1)


def _build(t: int, r: int, parity_labels: bool):
    spec = TribeSpec(t, r)
    n = spec.n
    if n > HARD_CAP:
        warnings.warn(f"tree has {n} variables, above the truth-table cap {HARD_CAP}",
                      stacklevel=3)
    if r == 0:
        return DecisionTree.leaf(0), spec, (), (), (), ()

    # block = (level, parent var, depth of the block's first vertex, 1-edges above)
    blocks = deque([(1, -1, 0, 0)])
    level, depth, chain_pos, parent = [], [], [], []
    first_var_of_block = []
    child_block = {}
    while blocks:
        lvl, par, d0, ones = blocks.popleft()
        base = len(level)
        first_var_of_block.append((base, lvl, ones))
        for i in range(t):
            v = base + i
            level.append(lvl)
            depth.append(d0 + i)
            chain_pos.append(i)
            parent.append(par if i == 0 else v - 1)
        if lvl < r:
            for i in range(t):
                child_block[base + i] = len(first_var_of_block) + len(blocks)
                blocks.append((lvl + 1, base + i, d0 + i + 1, ones + 1))

    nodes: list = []
    block_root: dict[int, int] = {}

    # emit blocks bottom-up so child roots exist before their parents
    for bidx in reversed(range(len(first_var_of_block))):
        base, lvl, ones = first_var_of_block[bidx]
        nodes.append(Leaf((ones % 2) if parity_labels else 0))
        nxt = len(nodes) - 1
        for i in reversed(range(t)):
            v = base + i
            if v in child_block:
                one = block_root[child_block[v]]
            else:
                nodes.append(Leaf(((ones + 1) % 2) if parity_labels else 1))
                one = len(nodes) - 1
            nodes.append(Internal(v, nxt, one))
            nxt = len(nodes) - 1
        block_root[bidx] = nxt
    tree = DecisionTree(tuple(nodes), block_root[0], True)
    return tree, spec, tuple(level), tuple(depth), tuple(chain_pos), tuple(parent)


def build_complete_clipped(t: int, r: int) -> DecisionTree:
    """Shape of the complete t-clipped tree on r levels.

    Chain-end leaves are labelled 0 and leaves behind 1-edges 1; use
    :func:`build_xor_tribe` for the parity labelling.
    """
    return _build(t, r, parity_labels=False)[0]


def build_xor_tribe(t: int, r: int) -> TribeTree:
    tree, spec, level, depth, chain_pos, parent = _build(t, r, parity_labels=True)
    return TribeTree(tree, spec, level, depth, chain_pos, parent)


def verify_tribe(tribe: TribeTree) -> str | None:
    """Check the tribe invariants; return the first violation or ``None``."""
    tree = tribe.tree
    problem = validate(tree)
    if problem:
        return problem
    labels = [tree.nodes[i].var for i in tree.reachable()
              if isinstance(tree.nodes[i], Internal)]
    if len(labels) != len(set(labels)):
        seen = set()
        for v in labels:
            if v in seen:
                return f"variable x{v} labels more than one vertex"
            seen.add(v)

    t = tribe.spec.t
    inf = float("inf")
    dist = {}
    order = tree.reachable()
    for i in reversed(order):
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            dist[i] = (0, inf) if node.bit == 0 else (inf, 0)
        else:
            z, o = dist[node.zero], dist[node.one]
            dist[i] = (1 + min(z[0], o[0]), 1 + min(z[1], o[1]))

    stack = [(tree.root, 0)]
    while stack:
        i, par = stack.pop()
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            if node.bit != par:
                return f"leaf {i} has label {node.bit} but its path parity is {par}"
            continue
        d0, d1 = dist[i]
        if d0 == inf or d1 == inf:
            which = 1 if d1 == inf else 0
            return f"vertex x{node.var} reaches no leaf labelled {which}"
        if d0 > t + 1 or d1 > t + 1:
            return f"vertex x{node.var} is farther than {t + 1} from a leaf of some value"
        stack.append((node.zero, par))
        stack.append((node.one, par ^ 1))
    return None
