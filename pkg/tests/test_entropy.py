import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import trees
from treentropy.entropy import (
    Distribution,
    TreeProcess,
    counts_entropy,
    empirical_tree_process,
    history_histogram,
    history_histograms,
    information_content,
    kl_divergence,
    probability,
    random_process,
    shannon_entropy,
    tree_entropies,
    tree_entropy,
    unnormalized_empirical_entropy,
)
from treentropy.errors import AbsoluteContinuityError
from treentropy.trees import X, Node, parse_tree, perfect_tree

TOL = 1e-9


def test_shannon_entropy_examples():
    assert shannon_entropy(Distribution.uniform("ab")) == 1.0
    assert shannon_entropy(Distribution.point("a")) == 0.0
    value = shannon_entropy(Distribution({"a": 2 / 3, "b": 1 / 3}))
    assert value == pytest.approx(oracles.entropy_of_counts([2, 1]) / 3, abs=1e-12)
    assert round(value, 6) == 0.918296


def test_shannon_entropy_ignores_zero_mass():
    assert shannon_entropy(Distribution({"a": 1.0, "b": 0.0})) == 0.0


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution({})
    with pytest.raises(ValueError):
        Distribution({"a": 0.5, "b": 0.4})
    with pytest.raises(ValueError):
        Distribution({"a": 1.5, "b": -0.5})


def test_kl_divergence_examples():
    p = Distribution({"a": 0.3, "b": 0.7})
    assert kl_divergence(p, p) == 0.0
    assert kl_divergence(Distribution({"a": 1.0, "b": 0.0}), Distribution.uniform("ab")) == 1.0
    with pytest.raises(AbsoluteContinuityError):
        kl_divergence(Distribution.uniform("ab"), Distribution({"a": 1.0, "b": 0.0}))


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6), st.lists(st.floats(0.01, 1.0), min_size=6, max_size=6))
def test_kl_nonnegative(ps, qs):
    p = Distribution({i: x / sum(ps) for i, x in enumerate(ps)})
    q = Distribution({i: x / sum(qs) for i, x in enumerate(qs)})
    assert kl_divergence(p, q) >= -TOL


def test_unnormalized_entropy_examples():
    assert unnormalized_empirical_entropy("aab") == pytest.approx(oracles.entropy_of_counts([2, 1]), abs=1e-12)
    assert round(unnormalized_empirical_entropy("aab"), 6) == 2.754888
    assert unnormalized_empirical_entropy("aaaa") == 0.0
    assert unnormalized_empirical_entropy("") == 0.0
    omega = ["a", 3, 4, "b", "b", "a"]
    assert unnormalized_empirical_entropy(omega) == pytest.approx(oracles.entropy_of_counts([2, 2, 1, 1]), abs=1e-12)
    assert round(unnormalized_empirical_entropy(omega), 6) == 11.509775


@given(st.lists(st.integers(0, 5), max_size=40))
def test_counts_entropy_matches_mpmath(items):
    from collections import Counter

    c = list(Counter(items).values())
    assert counts_entropy(c) == pytest.approx(oracles.entropy_of_counts(c), abs=1e-9)


def test_sample_tree_census(sample_tree):
    hist = history_histogram(sample_tree, 1, "a")
    assert hist.m((("a", 0),)) == 3
    assert hist.m((("a", 1),)) == 2
    assert hist.m((("b", 0),)) == 2
    assert hist.m((("b", 1),)) == 2
    assert hist.total == 9
    assert hist.counts[(("a", 0),)] == {("a", 2): 1, ("b", 2): 1, ("b", 0): 1}


def test_sample_tree_first_order_entropy(sample_tree):
    expected = 3 * math.log2(3) + 6
    assert abs(tree_entropy(sample_tree, 1, "a") - expected) <= TOL
    assert abs(tree_entropy(sample_tree, 1) - expected) <= TOL
    assert tree_entropy(sample_tree, 1) == pytest.approx(oracles.tree_entropy(sample_tree, 1, "a"), abs=TOL)


def test_trivial_histograms(sample_tree):
    h0 = history_histogram(sample_tree, 0)
    assert h0.histories() == [()] and h0.m(()) == 9
    leaf = history_histogram(Node("a"), 1)
    assert leaf.counts == {(("a", 0),): {("a", 0): 1}}


@pytest.mark.parametrize("k", [0, 1, 3])
def test_leaf_entropy_is_zero(k):
    assert tree_entropy(Node("a"), k) == 0.0


def test_negative_order_rejected(sample_tree):
    with pytest.raises(ValueError):
        tree_entropy(sample_tree, -1)


def test_perfect_tree_against_oracle():
    t = perfect_tree(10)
    value = tree_entropy(t, 2)
    assert value == pytest.approx(oracles.tree_entropy(t, 2, "a"), abs=TOL)
    nodes = 2 * t.size - 1
    assert 0 < value <= nodes * math.log2(2)


def test_perfect_tree_entropy_per_node_approaches_two_with_labels():
    import random

    rng = random.Random(0)

    def labelled(h):
        if h == 0:
            return Node(rng.choice("ab"))
        return Node(rng.choice("ab"), labelled(h - 1), labelled(h - 1))

    rates = []
    for h in (6, 10, 14):
        t = labelled(h)
        rates.append(tree_entropy(t, 2) / (2 * t.size - 1))
    assert rates[-1] > rates[0]
    assert 1.8 < rates[-1] <= 2.0


def test_empirical_process_examples(sample_tree):
    p = empirical_tree_process(sample_tree, 1, "a")
    row = p.row((("a", 0),))
    assert set(row.support) == {("a", 2), ("b", 2), ("b", 0)}
    assert all(v == pytest.approx(1 / 3) for v in row.values())
    assert p.is_arbitrary((("c", 1),)) and not p.is_arbitrary((("a", 0),))

    leaf = empirical_tree_process(Node("a"), 0)
    assert dict(leaf.row(())) == {("a", 0): 1.0}

    small = empirical_tree_process(parse_tree("a(b,b)"), 0)
    assert small.row(()) == {("a", 2): pytest.approx(1 / 3), ("b", 0): pytest.approx(2 / 3)}


def test_information_content_uniform_process():
    p = TreeProcess(0, "a", {(): Distribution({("a", 0): 0.5, ("a", 2): 0.5})})
    t = perfect_tree(5)
    assert information_content(p, t) == 2 * t.size - 1


def test_information_content_zero_probability(sample_tree):
    p = TreeProcess(0, "a", {(): Distribution({("a", 0): 0.5, ("a", 2): 0.5})})
    assert information_content(p, sample_tree) == math.inf
    assert probability(p, sample_tree) == 0.0


def test_information_content_of_empty_context():
    p = TreeProcess(0, "a", {(): Distribution.point(("a", 0))})
    assert information_content(p, X) == 0.0


def test_missing_row_without_default_raises():
    p = TreeProcess(1, "a", {})
    with pytest.raises(KeyError):
        p.row((("a", 0),))


def test_random_process_rows_are_full_support():
    rng = np.random.default_rng(0)
    p = random_process(1, "ab", rng)
    assert len(p.rows) == 4
    for row in p.rows.values():
        assert len(row.support) == 4
        assert math.fsum(row.values()) == pytest.approx(1.0)


@given(trees(), st.integers(0, 4))
def test_entropy_matches_census_oracle(t, k):
    assert tree_entropy(t, k, "a") == pytest.approx(oracles.tree_entropy(t, k, "a"), abs=TOL)


@given(trees(), st.integers(0, 4))
def test_alternative_form(t, k):
    words = oracles.words_by_history(t, k, "a")
    alt = math.fsum(unnormalized_empirical_entropy(w) for w in words.values())
    assert abs(tree_entropy(t, k, "a") - alt) <= TOL


@given(trees())
def test_monotone_in_k(t):
    hk = tree_entropies(t, range(6))
    for k in range(5):
        assert hk[k + 1] <= hk[k] + TOL


@given(trees(), st.integers(0, 4))
def test_entropy_bounds(t, k):
    sigma = len({lbl for _, _, lbl, _ in oracles.nodes_with_paths(t)})
    value = tree_entropy(t, k)
    assert -TOL <= value <= (2 * t.size - 1) * math.log2(2 * sigma) + TOL


@given(trees(), st.integers(0, 4))
def test_histogram_invariants(t, k):
    hist = history_histogram(t, k)
    assert hist.total == 2 * t.size - 1
    assert all(len(z) == k for z in hist.histories())
    many = history_histograms(t, [0, k])
    assert many[k].counts == hist.counts


@given(trees(max_leaves=20), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_empirical_process_minimises_information_content(t, k, seed):
    hk = tree_entropy(t, k, "a")
    own = empirical_tree_process(t, k, "a")
    assert abs(information_content(own, t) - hk) <= TOL
    rng = np.random.default_rng(seed)
    other = random_process(k, ["a", "b", "c"], rng, box="a")
    assert hk <= information_content(other, t) + TOL
