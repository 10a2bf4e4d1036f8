from unittest import mock

import numpy as np
import pytest

import dtk.distributed as dist_mod
from dtk.distributed import (DistributedTree, EnumerationCapExceeded,
                             FragmentWeights, ProvenanceMismatch,
                             distributed_tree, distributed_tree_by_enumeration,
                             dtf, dtk, dtk_normalized,
                             enumerate_rooted_fragments, all_fragments)
from dtk.embedding import compose
from dtk.analysis import random_trees
from dtk.tree import parse_tree, serialize_tree


class TestDtf:
    def test_single_node_is_lexicon_vector(self, spec_conv_small, lex_small):
        t = parse_tree("n")
        assert np.array_equal(dtf(spec_conv_small, lex_small, t), lex_small.vector("n"))

    def test_preterminal_binds_node_and_leaf(self, spec_conv_small, lex_small):
        t = parse_tree("(A a)")
        expected = compose(spec_conv_small, lex_small.vector("A"), lex_small.vector("a"))
        assert np.allclose(dtf(spec_conv_small, lex_small, t), expected)

    def test_left_fold_over_children(self, spec_conv_small, lex_small):
        t = parse_tree("(S (A a) (B b))")
        s, a, b = (lex_small.vector(x) for x in "SAB")
        fa = compose(spec_conv_small, a, lex_small.vector("a"))
        fb = compose(spec_conv_small, b, lex_small.vector("b"))
        expected = compose(spec_conv_small, compose(spec_conv_small, s, fa), fb)
        assert np.allclose(dtf(spec_conv_small, lex_small, t), expected)

    def test_norms_near_one(self, spec_conv_big, lex_big):
        norms = [np.linalg.norm(dtf(spec_conv_big, lex_big, t))
                 for t in random_trees(100, seed=17, min_nodes=4, max_nodes=15)]
        assert all(0.9 <= n <= 1.1 for n in norms)
        assert 0.95 <= np.mean(norms) <= 1.05


class TestEnumeration:
    def test_terminal_has_no_fragments(self):
        assert enumerate_rooted_fragments(parse_tree("x")) == []

    def test_preterminal_single_fragment(self):
        frs = enumerate_rooted_fragments(parse_tree("(A a)"))
        assert [serialize_tree(f) for f in frs] == ["(A a)"]

    def test_two_children_cross_product(self):
        frs = enumerate_rooted_fragments(parse_tree("(S (A a) (B b))"))
        assert sorted(serialize_tree(f) for f in frs) == [
            "(S (A a) (B b))", "(S (A a) B)", "(S A (B b))", "(S A B)"]

    def test_all_fragments_counts(self):
        t = parse_tree("(S (A a) (B b))")
        assert len(all_fragments(t)) == 6  # 4 rooted at S, plus (A a) and (B b)

    def test_cap(self):
        # 20 binary levels: fragment count explodes past a tiny cap
        text = "(N x)"
        for _ in range(12):
            text = f"(N {text} {text})"
        with pytest.raises(EnumerationCapExceeded):
            enumerate_rooted_fragments(parse_tree(text), cap=1000)


class TestFragmentWeights:
    def test_recursion_counts_internal_nodes(self):
        w = FragmentWeights("recursion", 0.25)
        assert w.weight(parse_tree("(A a)")) == 1.0  # P = 1
        assert w.weight(parse_tree("(S (A a) (B b))")) == 0.25  # P = 3
        assert w.weight(parse_tree("(S A B)")) == 1.0  # P = 1

    def test_node_count_counts_all_nodes(self):
        w = FragmentWeights("node_count", 0.25)
        assert w.weight(parse_tree("(A a)")) == 0.5  # |tau| = 2
        assert w.weight(parse_tree("(S A B)")) == 0.25  # |tau| = 3

    def test_validation(self):
        with pytest.raises(ValueError):
            FragmentWeights("other", 0.4)
        with pytest.raises(ValueError):
            FragmentWeights("recursion", 0.0)


class TestDistributedTree:
    def test_single_node_is_zero(self, spec_conv_small, lex_small):
        dt = distributed_tree(spec_conv_small, lex_small, parse_tree("x"), 0.4)
        assert not dt.vector.any()

    def test_one_production_tree(self, spec_conv_small, lex_small):
        dt = distributed_tree(spec_conv_small, lex_small, parse_tree("(A a)"), 0.4)
        expected = compose(spec_conv_small, lex_small.vector("A"), lex_small.vector("a"))
        assert np.allclose(dt.vector, expected)

    def test_lambda_validation(self, spec_conv_small, lex_small):
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                distributed_tree(spec_conv_small, lex_small, parse_tree("(A a)"), bad)

    @pytest.mark.parametrize("spec_name", ["spec_conv_small", "spec_prod_small"])
    @pytest.mark.parametrize("lam", [0.2, 0.4, 1.0])
    def test_matches_enumeration_oracle(self, spec_name, lam, request, lex_small):
        spec = request.getfixturevalue(spec_name)
        for t in random_trees(25, seed=23, min_nodes=3, max_nodes=10):
            fast = distributed_tree(spec, lex_small, t, lam).vector
            slow = distributed_tree_by_enumeration(spec, lex_small, t, lam)
            assert np.linalg.norm(fast - slow) / np.linalg.norm(slow) < 1e-6

    def test_composition_call_count_is_linear(self, spec_conv_small, lex_small):
        # one compose per (parent, child) edge: node_count - 1 calls in total
        for t in random_trees(10, seed=31, min_nodes=3, max_nodes=12):
            with mock.patch.object(dist_mod, "compose",
                                   side_effect=compose) as spy:
                distributed_tree(spec_conv_small, lex_small, t, 0.4)
            assert spy.call_count == t.node_count() - 1

    def test_structural_sensitivity(self, spec_conv_big, lex_big):
        base = parse_tree("(S (N (A a) (B b)) (N (C c) (D d)))")
        relabel = parse_tree("(S (N (A a) (B b)) (N (C c) (D e)))")
        reorder = parse_tree("(S (N (B b) (A a)) (N (C c) (D d)))")
        dts = [distributed_tree(spec_conv_big, lex_big, t, 0.4)
               for t in (base, relabel, reorder)]
        assert dtk_normalized(dts[0], dts[1]) < 0.999
        assert dtk_normalized(dts[0], dts[2]) < 0.999


class TestDtk:
    def test_zero_vector(self, spec_conv_small, lex_small):
        a = distributed_tree(spec_conv_small, lex_small, parse_tree("(A a)"), 0.4)
        z = DistributedTree(np.zeros(a.dim), a.lam, a.dim, a.composition_kind,
                            a.master_seed)
        assert dtk(a, z) == 0.0

    def test_self_kernel_nonnegative(self, spec_conv_small, lex_small):
        a = distributed_tree(spec_conv_small, lex_small, parse_tree("(A (B b) c)"), 0.4)
        assert dtk(a, a) == pytest.approx(float(np.dot(a.vector, a.vector)))
        assert dtk(a, a) >= 0

    def test_provenance_mismatch(self, spec_conv_small, lex_small):
        a = distributed_tree(spec_conv_small, lex_small, parse_tree("(A a)"), 0.4)
        b = distributed_tree(spec_conv_small, lex_small, parse_tree("(A a)"), 0.2)
        with pytest.raises(ProvenanceMismatch):
            dtk(a, b)

    def test_normalized_properties(self, spec_conv_small, lex_small):
        trees = random_trees(20, seed=37, min_nodes=4, max_nodes=10,
                             n_nonterminals=4, n_terminals=6)
        dts = [distributed_tree(spec_conv_small, lex_small, t, 0.4) for t in trees]
        for a in dts[:5]:
            assert dtk_normalized(a, a) == pytest.approx(1.0)
        for a in dts[:5]:
            for b in dts[5:10]:
                v = dtk_normalized(a, b)
                assert -1.0 <= v <= 1.0
                assert v == pytest.approx(dtk_normalized(b, a))

    def test_normalized_rejects_zero_self_kernel(self, spec_conv_small, lex_small):
        z = distributed_tree(spec_conv_small, lex_small, parse_tree("x"), 0.4)
        with pytest.raises(ZeroDivisionError):
            dtk_normalized(z, z)
