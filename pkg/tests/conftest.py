import sys
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from treentropy.trees import X, Alphabet, Node, parse_tree  # noqa: E402
from treentropy.tslp import parse_grammar  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SAMPLE_TREE = "a(b(b(a,b),a),a(b,a))"
EXAMPLE_NF = """\
A0 -> A1(A2)
A1 -> a(x,A3)
A2 -> A4(A3)
A3 -> A4(b)
A4 -> b(x,a)
"""
EXAMPLE_GENERAL = """\
A0 -> a(A1,A2(b))
A1 -> A2(A2(b))
A2 -> b(x,a)
"""
EXAMPLE_VAL = "a(b(b(b,a),a),b(b,a))"


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def sample_tree():
    return parse_tree(SAMPLE_TREE)


@pytest.fixture
def example_nf():
    return parse_grammar(EXAMPLE_NF)


@pytest.fixture
def example_general():
    return parse_grammar(EXAMPLE_GENERAL)


@pytest.fixture
def ab():
    return Alphabet(("a", "b"))


def trees(labels=("a", "b", "c"), max_leaves=30):
    """Hypothesis strategy for labelled full binary trees."""
    label = st.sampled_from(labels)
    return st.recursive(
        label.map(Node),
        lambda kids: st.tuples(label, kids, kids).map(lambda t: Node(*t)),
        max_leaves=max_leaves,
    )


def contexts(labels=("a", "b"), max_leaves=12):
    """Hypothesis strategy for contexts: a tree with one leaf replaced by x."""

    def punch(args):
        t, choice = args
        leaves = []

        def walk(v, path):
            if v.left is None:
                leaves.append(path)
            else:
                walk(v.left, path + "0")
                walk(v.right, path + "1")

        walk(t, "")
        target = leaves[choice % len(leaves)]

        def rebuild(v, path):
            if path == target:
                return X
            if v.left is None:
                return v
            return Node(v.label, rebuild(v.left, path + "0"), rebuild(v.right, path + "1"))

        return rebuild(t, "")

    return st.tuples(trees(labels, max_leaves), st.integers(0, 10**6)).map(punch)
