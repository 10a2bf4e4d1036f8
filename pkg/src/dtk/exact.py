"""Exact tree kernels: the quadratic dynamic program, a matching-pair fast
variant, and an explicit feature-map oracle over enumerated fragments.

The kernel counts common fragments of two trees, decayed by lambda per
production:

    delta(n1, n2) = 0                          if productions differ
    delta(n1, n2) = lam * prod_j (1 + delta(c1j, c2j))  otherwise

(terminal nodes have no production, so their delta is 0; for preterminals
the product is empty-ish and delta reduces to lam). The kernel value is the
sum of delta over all node pairs, which equals the sum over matched fragment
pairs of lam^P with P the fragment's internal node count.
"""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .distributed import DEFAULT_ENUMERATION_CAP, FragmentWeights, all_fragments
from .tree import Tree, postorder, serialize_tree


def _index(t: Tree):
    """Post-order node list with per-node production key and child indices."""
    nodes = list(postorder(t))
    pos = {id(n): i for i, n in enumerate(nodes)}
    prods = [None if n.is_terminal
             else (n.label, tuple(c.label for c in n.children)) for n in nodes]
    kids = [[pos[id(c)] for c in n.children] for n in nodes]
    return nodes, prods, kids


def _check_lambda(lam: float) -> None:
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must be in (0, 1]")


def tk_exact(t1: Tree, t2: Tree, lam: float) -> float:
    """Quadratic dynamic program over the full node-pair table."""
    _check_lambda(lam)
    _, prods1, kids1 = _index(t1)
    _, prods2, kids2 = _index(t2)
    delta = np.zeros((len(prods1), len(prods2)))
    for i, p1 in enumerate(prods1):
        if p1 is None:
            continue
        for j, p2 in enumerate(prods2):
            if p1 != p2:
                continue
            acc = lam
            for ci, cj in zip(kids1[i], kids2[j]):
                acc *= 1.0 + delta[ci, cj]
            delta[i, j] = acc
    # fsum: correctly rounded, so the value is exactly symmetric in (t1, t2)
    return math.fsum(delta.flat)


def tk_fast(t1: Tree, t2: Tree, lam: float,
            counter: list | None = None) -> float:
    """Same value as tk_exact, evaluating delta only on the node pairs with
    equal productions. ``counter``, if given, receives the number of delta
    evaluations as its first element."""
    _check_lambda(lam)
    _, prods1, kids1 = _index(t1)
    _, prods2, kids2 = _index(t2)
    by_prod: dict = defaultdict(list)
    for j, p in enumerate(prods2):
        if p is not None:
            by_prod[p].append(j)
    pairs = [(i, j) for i, p in enumerate(prods1) if p in by_prod
             for j in by_prod[p]]
    pairs.sort()  # post-order indices: children precede parents
    delta: dict[tuple[int, int], float] = {}
    for i, j in pairs:
        acc = lam
        for ci, cj in zip(kids1[i], kids2[j]):
            acc *= 1.0 + delta.get((ci, cj), 0.0)
        delta[i, j] = acc
    if counter is not None:
        counter[:] = [len(pairs)]
    return math.fsum(delta.values())


def feature_map(t: Tree, weights: FragmentWeights,
                cap: int = DEFAULT_ENUMERATION_CAP) -> dict[str, float]:
    """Explicit sparse feature vector: canonical fragment string -> weight."""
    fmap: dict[str, float] = defaultdict(float)
    for frag in all_fragments(t, cap=cap):
        fmap[serialize_tree(frag)] += weights.weight(frag)
    return dict(fmap)


def tk_by_feature_map(t1: Tree, t2: Tree, lam: float,
                      weights: FragmentWeights | None = None,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Sparse dot product of the two explicit feature maps. Under the
    ``recursion`` convention a matched fragment pair contributes
    lam^(P-1), so lam * tk_by_feature_map(...) == tk_exact(...)."""
    _check_lambda(lam)
    if weights is None:
        weights = FragmentWeights("recursion", lam)
    f1 = feature_map(t1, weights, cap=cap)
    f2 = feature_map(t2, weights, cap=cap)
    if len(f2) < len(f1):
        f1, f2 = f2, f1
    return float(sum(w * f2[k] for k, w in f1.items() if k in f2))


def tk_normalized(t1: Tree, t2: Tree, lam: float) -> float:
    k11 = tk_exact(t1, t1, lam)
    k22 = tk_exact(t2, t2, lam)
    if k11 == 0.0 or k22 == 0.0:
        raise ZeroDivisionError("zero self-kernel (single-node tree)")
    return tk_exact(t1, t2, lam) / math.sqrt(k11 * k22)
