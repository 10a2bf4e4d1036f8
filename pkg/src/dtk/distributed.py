"""Distributed trees: embedding a tree's whole weighted fragment forest in R^d.

A *fragment* of a tree is a connected subgraph with more than one node in
which every included non-leaf node keeps its entire production. ``dtf``
embeds one fragment as a vector by recursively binding node vectors; the
fragment vectors of distinct fragments are nearly orthogonal, so a sum of
weighted fragment vectors acts as a compressed feature map.

``distributed_tree`` computes that sum in one bottom-up pass (one vector of
state per node) without enumerating fragments, via

    s(n) = 0                                     if n is terminal
    s(n) = n~ * (c1~ + sqrt(lam) s(c1)) * ... * (cm~ + sqrt(lam) s(cm))

folded left-to-right, and T~ = sum over nodes of s(n). Expanding s(n) by
bilinearity shows it equals the weighted sum of fragment vectors rooted at
n, with weight lam^((P-1)/2) for a fragment with P internal nodes; the
brute-force ``distributed_tree_by_enumeration`` checks exactly that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .embedding import CompositionSpec, NodeLexicon, compose
from .tree import Tree, postorder, preorder

DEFAULT_ENUMERATION_CAP = 1_000_000


class EnumerationCapExceeded(RuntimeError):
    """Fragment enumeration would exceed the configured cap."""


class ProvenanceMismatch(ValueError):
    """Two DistributedTrees were built under different configurations."""


@dataclass(frozen=True)
class DistributedTree:
    """A tree's embedding vector plus the provenance needed to compare it."""

    vector: np.ndarray
    lam: float
    dim: int
    composition_kind: str
    master_seed: int

    def provenance(self) -> tuple:
        return (self.lam, self.dim, self.composition_kind, self.master_seed)


@dataclass(frozen=True)
class FragmentWeights:
    """Fragment weight conventions.

    ``recursion``: weight lam^((P-1)/2) with P = internal (production) node
    count; this is what the bottom-up recursion produces. ``node_count``:
    lam^((|tau|-1)/2) with |tau| = total nodes, the classic per-node decay.
    """

    convention: str = "recursion"
    lam: float = 0.4

    def __post_init__(self):
        if self.convention not in ("recursion", "node_count"):
            raise ValueError(f"unknown convention {self.convention!r}")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lambda must be in (0, 1]")

    def weight(self, frag: Tree) -> float:
        if self.convention == "recursion":
            size = sum(1 for n in preorder(frag) if not n.is_terminal)
        else:
            size = frag.node_count()
        return math.sqrt(self.lam ** (size - 1))


def dtf(spec: CompositionSpec, lex: NodeLexicon, frag: Tree) -> np.ndarray:
    """Embed a single fragment: terminal -> its node vector, otherwise the
    node vector bound with each child's embedding in a left-to-right fold
    (matching the fold used by the bottom-up recursion)."""
    vec = lex.vector(frag.label)
    for child in frag.children:
        vec = compose(spec, vec, dtf(spec, lex, child))
    return vec


def distributed_tree(spec: CompositionSpec, lex: NodeLexicon, t: Tree,
                     lam: float = 0.4) -> DistributedTree:
    """Bottom-up linear-time computation of the tree's embedding."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must be in (0, 1]")
    sqrt_lam = math.sqrt(lam)
    s: dict[int, np.ndarray] = {}
    total = np.zeros(spec.dim)
    zero = np.zeros(spec.dim)
    for node in postorder(t):
        if node.is_terminal:
            s[id(node)] = zero
            continue
        acc = lex.vector(node.label)
        for child in node.children:
            acc = compose(spec, acc,
                          lex.vector(child.label) + sqrt_lam * s[id(child)])
        s[id(node)] = acc
        total = total + acc
    return DistributedTree(total, lam, spec.dim, spec.kind, spec.master_seed)


def _rooted_fragment_count(node: Tree, memo: dict[int, int]) -> int:
    count = memo.get(id(node))
    if count is None:
        count = 0 if node.is_terminal else math.prod(
            _rooted_fragment_count(c, memo) + 1 for c in node.children)
        memo[id(node)] = count
    return count


def enumerate_rooted_fragments(node: Tree,
                               cap: int = DEFAULT_ENUMERATION_CAP) -> list[Tree]:
    """All fragments rooted at ``node``: for children c1..cm, every tree
    (n, t1, ..., tm) where each ti is either the bare child node or a
    fragment rooted at ci. Terminal nodes yield no fragments."""
    memo: dict[int, int] = {}
    if _rooted_fragment_count(node, memo) > cap:
        raise EnumerationCapExceeded(
            f"fragment count at node {node.label!r} exceeds cap {cap}")

    def build(n: Tree) -> list[Tree]:
        if n.is_terminal:
            return []
        options = [[Tree(c.label)] + build(c) for c in n.children]
        return [Tree(n.label, combo) for combo in iter_product(*options)]

    return build(node)


def all_fragments(t: Tree, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Tree]:
    """Union over all nodes of the fragments rooted there."""
    frags: list[Tree] = []
    for node in preorder(t):
        frags.extend(enumerate_rooted_fragments(node, cap=cap))
        if len(frags) > cap:
            raise EnumerationCapExceeded(f"total fragment count exceeds cap {cap}")
    return frags


def distributed_tree_by_enumeration(spec: CompositionSpec, lex: NodeLexicon,
                                    t: Tree, lam: float = 0.4,
                                    weights: FragmentWeights | None = None,
                                    cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Brute-force oracle: embed every fragment individually and sum."""
    if weights is None:
        weights = FragmentWeights("recursion", lam)
    total = np.zeros(spec.dim)
    for frag in all_fragments(t, cap=cap):
        total += weights.weight(frag) * dtf(spec, lex, frag)
    return total


def dtk(a: DistributedTree, b: DistributedTree) -> float:
    """Kernel value: plain dot product of the two stored vectors."""
    if a.provenance() != b.provenance():
        raise ProvenanceMismatch(
            f"incomparable distributed trees: {a.provenance()} vs {b.provenance()}")
    return float(np.dot(a.vector, b.vector))


def dtk_normalized(a: DistributedTree, b: DistributedTree) -> float:
    saa = dtk(a, a)
    sbb = dtk(b, b)
    if saa == 0.0 or sbb == 0.0:
        raise ZeroDivisionError("zero self-kernel (single-node tree)")
    return dtk(a, b) / math.sqrt(saa * sbb)
