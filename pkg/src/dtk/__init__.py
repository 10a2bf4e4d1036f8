"""Distributed tree kernels.

Trees are embedded into low-dimensional dense vectors by a linear-time
bottom-up recursion so that tree-kernel similarity becomes a dot product.
Exact-kernel baselines and enumeration oracles verify the approximation.
"""
from .tree import Tree, Production, TreeParseError, parse_tree, serialize_tree
from .embedding import (CompositionSpec, NodeLexicon, Permutation,
                        SHUFFLED_CONVOLUTION, SHUFFLED_PRODUCT,
                        circular_convolution, compose, estimate_gamma,
                        make_spec, random_permutation)
from .distributed import (DistributedTree, FragmentWeights, dtf, dtk,
                          dtk_normalized, distributed_tree,
                          distributed_tree_by_enumeration,
                          enumerate_rooted_fragments)
from .exact import tk_exact, tk_fast, tk_by_feature_map, tk_normalized

__all__ = [
    "Tree", "Production", "TreeParseError", "parse_tree", "serialize_tree",
    "CompositionSpec", "NodeLexicon", "Permutation",
    "SHUFFLED_CONVOLUTION", "SHUFFLED_PRODUCT",
    "circular_convolution", "compose", "estimate_gamma", "make_spec",
    "random_permutation",
    "DistributedTree", "FragmentWeights", "dtf", "dtk", "dtk_normalized",
    "distributed_tree", "distributed_tree_by_enumeration",
    "enumerate_rooted_fragments",
    "tk_exact", "tk_fast", "tk_by_feature_map", "tk_normalized",
]
