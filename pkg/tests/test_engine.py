import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import sparse_confusion, tree
from hierarch.engine import (HierarchyConfig, build_hierarchy, find_all_pairs, get_dict,
                             get_intersection, maximal_cliques_containing, merge,
                             pairs_to_graphs, similarity_update, trace_hierarchy)
from hierarch.formats import to_json
from hierarch.hierarchy import Forest, Internal, Leaf, canonical, is_single_inheritance
from hierarch.matrix import ConfusionMatrix, SimilarityMatrix, similarity_from_counts
from hierarch.oracle import oracle_pairs
from hierarch.synth import gen_constant

SIT = HierarchyConfig(0.1, True)
MIT = HierarchyConfig(0.1, False)
REF_PAIRS = [(3, 4), (2, 3), (0, 1), (2, 4), (0, 5)]


def ij(pairs):
    return [(p[0], p[1]) for p in pairs]


def leaves(n):
    return tuple(Leaf(i, str(i)) for i in range(n))


# --- find_all_pairs -------------------------------------------------------

def test_pairs_reference(ref_sim):
    pairs = find_all_pairs(ref_sim, 0.011, SIT)
    assert ij(pairs) == REF_PAIRS
    assert pairs == oracle_pairs(ref_sim, 0.011)


def test_pairs_constant_matrix_all_qualify():
    for delta in (0.0, 0.3):
        assert len(find_all_pairs(gen_constant(5, 0.2, 0.6), delta)) == 10


def test_pairs_zero_offdiagonal():
    assert find_all_pairs(SimilarityMatrix(np.eye(4)), 1.0) == []


def test_epsilon_admits_near_ties():
    s = SimilarityMatrix.from_array([[1, 0.1, 0.1 - 1e-12], [0.1, 1, 0], [0.1 - 1e-12, 0, 1]])
    assert ij(find_all_pairs(s, 0.0)) == [(0, 1)]
    assert ij(find_all_pairs(s, 0.0, HierarchyConfig(0, epsilon=1e-9))) == [(0, 1), (0, 2)]


# --- adjacency helpers ----------------------------------------------------

def test_get_dict_examples():
    assert get_dict([(0, 1, .1), (0, 5, .1)], 6) == {0: [1, 5], 1: [0], 2: [], 3: [], 4: [], 5: [0]}
    assert get_dict([], 3) == {0: [], 1: [], 2: []}
    tri = get_dict([(2, 3, .1), (2, 4, .1), (3, 4, .1)], 5)
    assert tri[2] == [3, 4] and tri[3] == [2, 4] and tri[4] == [2, 3]


def test_get_intersection_examples():
    tri = get_dict([(2, 3, .1), (2, 4, .1), (3, 4, .1)], 5)
    assert get_intersection([3, 4], tri) == [2]
    star = get_dict([(0, 1, .1), (0, 5, .1)], 6)
    assert get_intersection([0, 1], star) == []
    assert get_intersection([0], star) == [1, 5]


def test_maximal_cliques_containing():
    d = get_dict([(0, 1, 1), (0, 2, 1), (1, 2, 1), (2, 3, 1)], 4)
    assert maximal_cliques_containing(2, d) == [[0, 1, 2], [2, 3]]
    assert maximal_cliques_containing(3, get_dict([], 4)) == [[3]]


# --- pairs_to_graphs ------------------------------------------------------

def test_graphs_reference(ref_sim):
    pairs = find_all_pairs(ref_sim, 0.011)
    assert pairs_to_graphs(ref_sim, pairs, SIT) == [[2, 3, 4], [0, 1]]
    assert pairs_to_graphs(ref_sim, pairs, MIT) == [[0, 1], [0, 5], [2, 3, 4]]
    assert pairs_to_graphs(ref_sim, [], SIT) == [] == pairs_to_graphs(ref_sim, [], MIT)


def test_sit_growth_prefers_highest_mean_similarity():
    # seed (0,1); both 2 and 3 join-able, 3 is closer on average
    s = SimilarityMatrix.from_array([[1, .5, .1, .2], [.5, 1, .1, .2], [.1, .1, 1, 0], [.2, .2, 0, 1]])
    pairs = [(0, 1, .5), (0, 3, .2), (1, 3, .2), (0, 2, .1), (1, 2, .1)]
    assert pairs_to_graphs(s, pairs, SIT) == [[0, 1, 3]]


def test_mit_drops_graphs_contained_in_earlier_ones():
    # triangle 0-1-2 plus 1-3 and 2-4: the per-seed loop alone would also emit [1, 2]
    s = SimilarityMatrix(np.eye(5))
    pairs = [(0, 1, .1), (0, 2, .1), (1, 2, .1), (1, 3, .1), (2, 4, .1)]
    graphs = pairs_to_graphs(s, pairs, MIT)
    assert graphs == [[0, 1, 2], [1, 3], [2, 4]]


# --- merge and similarity update -----------------------------------------

def test_merge_reference_sit(ref_sim):
    f = merge(Forest(leaves(6), ref_sim), 0.011, SIT)
    assert [canonical(t) for t in f.trees] == [(2, 3, 4), (0, 1), 5]
    assert f.groups == ((2, 3, 4), (0, 1), (5,))


def test_merge_reference_mit(ref_sim):
    f = merge(Forest(leaves(6), ref_sim), 0.011, MIT)
    assert [canonical(t) for t in f.trees] == [(0, 1), (0, 5), (2, 3, 4)]


def test_merge_without_pairs_keeps_forest():
    s = SimilarityMatrix(np.eye(3))
    f = merge(Forest(leaves(3), s), 0.0, SIT)
    assert f.trees == leaves(3)
    assert np.array_equal(f.sim.s, s.s)


def _block_mean(s, a, b):
    vals = [float(s[x, y]) for x in a for y in b]
    return sum(vals) / len(vals)


def test_similarity_update_sit(ref_sim):
    f = merge(Forest(leaves(6), ref_sim), 0.011, SIT)  # t234, t01, t5
    s2 = f.sim.s
    assert s2[1, 2] == pytest.approx(0.05, abs=1e-15)
    assert s2[1, 2] == pytest.approx(_block_mean(ref_sim.s, [0, 1], [5]), abs=1e-15)
    assert s2[0, 1] == pytest.approx(0.005, abs=1e-15)
    assert np.array_equal(s2, s2.T)


def test_similarity_update_mit_inflates_overlap(ref_sim):
    f = merge(Forest(leaves(6), ref_sim), 0.011, MIT)  # t01, t05, t234
    assert f.sim.s[0, 1] == pytest.approx(0.25, abs=1e-15)
    assert f.sim.s[0, 1] == pytest.approx(_block_mean(ref_sim.s, [0, 1], [0, 5]), abs=1e-15)


def test_similarity_update_uses_previous_level_groups():
    prev = SimilarityMatrix.from_array([[1, .4, .2], [.4, 1, .6], [.2, .6, 1]])
    f = Forest((Internal((Leaf(0), Leaf(1))), Leaf(2)), prev, ((0, 1), (2,)))
    out = similarity_update(f, prev).s
    assert out[0, 1] == pytest.approx(0.4)
    assert out[0, 0] == pytest.approx(0.7)
    assert out[1, 1] == 1


# --- whole construction ---------------------------------------------------

def test_build_reference_sit(ref_sim, ref_sit_tree):
    res = trace_hierarchy(ref_sim, SIT)
    assert canonical(res.tree) == canonical(ref_sit_tree)
    assert [len(st.graphs) for st in res.steps] == [2, 1, 1]


def test_build_reference_mit(ref_sim, ref_mit_tree):
    t = build_hierarchy(ref_sim, MIT)
    assert canonical(t) == canonical(ref_mit_tree)
    assert [canonical(c) for c in t.children] == [((0, 1), (0, 5)), (2, 3, 4)]


def test_build_from_reference_counts_matches(ref_counts, ref_sit_tree, ref_mit_tree):
    s = similarity_from_counts(ref_counts)
    assert canonical(build_hierarchy(s, SIT)) == canonical(ref_sit_tree)
    assert canonical(build_hierarchy(s, MIT)) == canonical(ref_mit_tree)


@pytest.mark.parametrize("cfg", [SIT, MIT, HierarchyConfig(0), HierarchyConfig(5, False)])
def test_constant_matrix_flat(cfg):
    t = build_hierarchy(gen_constant(3, 0.05, 0.9), cfg)
    assert canonical(t) == (0, 1, 2)


def test_single_class_returns_leaf():
    s = SimilarityMatrix(np.array([[1.0]]))
    assert build_hierarchy(s) == Leaf(0, "0")


def test_disconnected_classes_combined_under_root():
    t = build_hierarchy(SimilarityMatrix(np.eye(4)))
    assert canonical(t) == (0, 1, 2, 3)


def test_invalid_config():
    with pytest.raises(ValueError):
        HierarchyConfig(-0.1)
    with pytest.raises(ValueError):
        HierarchyConfig(0.1, epsilon=-1)


def test_mit_fallback_keeps_progress():
    # a 4-cycle of equal pairs: four overlapping cliques would not shrink the forest
    s = SimilarityMatrix.from_array([[1, .1, 0, .1], [.1, 1, .1, 0], [0, .1, 1, .1], [.1, 0, .1, 1]])
    res = trace_hierarchy(s, HierarchyConfig(0, False))
    assert res.steps[0].fallback
    assert res.steps[0].trees_after < 4
    assert res.tree.leaf_set() == {0, 1, 2, 3}


def test_mit_r_above_one_can_diverge_on_sparse_input():
    # known limitation: overlapping trees raise the row maximum in later rounds
    off = {(0, 2): .053, (0, 3): .013, (1, 2): .048, (1, 3): .031, (1, 5): .038,
           (2, 3): .02, (2, 4): .024}
    a = np.zeros((6, 6))
    for (i, j), v in off.items():
        a[i, j] = a[j, i] = v
    np.fill_diagonal(a, 1 - a.sum(axis=1))
    s = SimilarityMatrix.from_array(a)
    sit = {to_json(build_hierarchy(s, HierarchyConfig(r, True))) for r in (1, 1.5, 10)}
    mit = {to_json(build_hierarchy(s, HierarchyConfig(r, False))) for r in (1, 1.5, 10)}
    assert len(sit) == 1
    assert len(mit) == 2


sparse_inputs = st.tuples(st.integers(2, 16), st.integers(0, 2**32 - 1))


@settings(max_examples=120, deadline=None)
@given(sparse_inputs, st.sampled_from([0, 0.05, 0.1, 0.5, 1, 3]), st.booleans())
def test_termination_and_coverage(params, r, flag):
    n, seed = params
    s = similarity_from_counts(ConfusionMatrix.from_counts(
        sparse_confusion(n, np.random.default_rng(seed))))
    res = trace_hierarchy(s, HierarchyConfig(r, flag))
    assert res.iterations <= n - 1
    assert all(st.trees_after < st.trees_before for st in res.steps)
    assert res.tree.leaf_set() == frozenset(range(n))
    if flag:
        assert is_single_inheritance(res.tree)
    assert to_json(res.tree) == to_json(build_hierarchy(s, HierarchyConfig(r, flag)))


@settings(max_examples=60, deadline=None)
@given(sparse_inputs)
def test_sit_stable_for_ratios_above_one_on_sparse_input(params):
    n, seed = params
    s = similarity_from_counts(ConfusionMatrix.from_counts(
        sparse_confusion(n, np.random.default_rng(seed))))
    outs = {to_json(build_hierarchy(s, HierarchyConfig(r, True))) for r in (1, 1.5, 10)}
    assert len(outs) == 1


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 9), st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.1, 0.4]))
def test_pairs_match_oracle_on_random_symmetric(n, seed, r):
    rng = np.random.default_rng(seed)
    a = np.round(rng.uniform(0, 1, (n, n)) * rng.integers(1, 6), 1) / 10
    a = np.triu(a, 1)
    a = a + a.T
    s = SimilarityMatrix(a)
    delta = r * a.max()
    assert find_all_pairs(s, delta) == oracle_pairs(s, delta)
