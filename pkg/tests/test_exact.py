import itertools

import pytest

from dtk.analysis import grammar_trees
from dtk.distributed import FragmentWeights
from dtk.exact import (feature_map, tk_by_feature_map, tk_exact, tk_fast,
                       tk_normalized)
from dtk.tree import parse_tree, preorder


@pytest.fixture(scope="module")
def suite():
    return grammar_trees(20, seed=41, min_nodes=4, max_nodes=12,
                         n_nonterminals=4, n_terminals=6)


def test_disjoint_labels_zero():
    t1 = parse_tree("(S (A a) (B b))")
    t2 = parse_tree("(X (Y y) (Z z))")
    assert tk_exact(t1, t2, 0.4) == 0.0
    assert tk_fast(t1, t2, 0.4) == 0.0
    assert tk_by_feature_map(t1, t2, 0.4) == 0.0


def test_self_kernel_lambda_one():
    t = parse_tree("(S (A a) (B b))")
    assert tk_exact(t, t, 1.0) == 6.0


def test_self_kernel_closed_form():
    t = parse_tree("(S (A a) (B b))")
    for lam in (0.2, 0.5, 0.9):
        assert tk_exact(t, t, lam) == pytest.approx(2 * lam + lam * (1 + lam) ** 2)


def test_lambda_validation():
    t = parse_tree("(A a)")
    with pytest.raises(ValueError):
        tk_exact(t, t, 0.0)


def test_symmetry(suite):
    for t1, t2 in itertools.combinations(suite[:8], 2):
        assert tk_exact(t1, t2, 0.4) == tk_exact(t2, t1, 0.4)


def test_oracle_chain(suite):
    # tk_exact == tk_fast == lam * feature-map dot (recursion convention)
    for lam in (0.2, 0.4, 1.0):
        for t1, t2 in itertools.combinations(suite, 2):
            exact = tk_exact(t1, t2, lam)
            assert tk_fast(t1, t2, lam) == pytest.approx(exact, abs=1e-9)
            assert lam * tk_by_feature_map(t1, t2, lam) == pytest.approx(exact, abs=1e-9)


def test_fast_skips_non_matching_pairs():
    t1 = parse_tree("(S (A a) (B b))")
    t2 = parse_tree("(X (Y y) (Z z))")
    counter = []
    assert tk_fast(t1, t2, 0.4, counter=counter) == 0.0
    assert counter == [0]
    counter = []
    tk_fast(t1, t1, 0.4, counter=counter)
    assert counter == [3]  # only the 3 matching productions, not 6x6 pairs


def test_delta_count_bounded_by_pair_count(suite):
    for t1, t2 in itertools.combinations(suite[:8], 2):
        counter = []
        tk_fast(t1, t2, 0.4, counter=counter)
        assert counter[0] <= t1.node_count() * t2.node_count()


def test_monotone_in_lambda(suite):
    pairs = [p for p in itertools.combinations(suite, 2)
             if tk_exact(*p, lam=1.0) > 0]
    assert pairs
    for t1, t2 in pairs[:10]:
        values = [tk_exact(t1, t2, lam) for lam in (0.2, 0.4, 0.8, 1.0)]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_self_kernel_lower_bound(suite):
    lam = 0.4
    for t in suite:
        n_nonterminals = sum(1 for n in preorder(t) if not n.is_terminal)
        assert tk_exact(t, t, lam) >= lam * n_nonterminals


def test_feature_map_single_production():
    fm = feature_map(parse_tree("(A a)"), FragmentWeights("recursion", 0.4))
    assert fm == {"(A a)": 1.0}


def test_normalized():
    t1 = parse_tree("(S (A a) (B b))")
    t2 = parse_tree("(S (A a) (B c))")
    assert tk_normalized(t1, t1, 0.4) == pytest.approx(1.0)
    v = tk_normalized(t1, t2, 0.4)
    assert 0.0 <= v <= 1.0
    with pytest.raises(ZeroDivisionError):
        tk_normalized(parse_tree("x"), t1, 0.4)
