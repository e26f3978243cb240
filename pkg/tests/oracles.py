"""Independent reference implementations used only by the tests.

They favour obviousness over speed: recursion, explicit paths, full
enumeration and mpmath arithmetic.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict

import mpmath

from treentropy.trees import X, Node

mpmath.mp.dps = 50


def entropy_of_counts(counts):
    """sum c * log2(n / c) in 50-digit arithmetic."""
    counts = [c for c in counts if c]
    n = sum(counts)
    return float(mpmath.fsum(c * mpmath.log(mpmath.mpf(n) / c, 2) for c in counts))


def nodes_with_paths(s, path=()):
    """(address, path of (label, dir) pairs from the root, label, degree) recursively."""
    if s is X:
        return []
    out = [("".join(str(d) for _, d in path), path, s.label, 0 if s.left is None else 2)]
    if s.left is not None:
        out += nodes_with_paths(s.left, path + ((s.label, 0),))
        out += nodes_with_paths(s.right, path + ((s.label, 1),))
    return out


def history(path, k, box):
    padded = ((box, 0),) * k + tuple(path)
    return padded[len(padded) - k:] if k else ()


def census(s, k, box):
    table = defaultdict(Counter)
    for _, path, label, deg in nodes_with_paths(s):
        table[history(path, k, box)][(label, deg)] += 1
    return table


def tree_entropy(s, k, box):
    return sum(entropy_of_counts(c.values()) for c in census(s, k, box).values())


def words_by_history(s, k, box):
    """w(t, z): the (label, degree) sequence of nodes with history z, in preorder."""
    words = defaultdict(list)
    for _, path, label, deg in nodes_with_paths(s):
        words[history(path, k, box)].append((label, deg))
    return words


def lex_rank(word, symbols):
    """Index of ``word`` among the sorted distinct permutations of its letters."""
    order = {s: i for i, s in enumerate(symbols)}
    key = tuple(order[s] for s in word)
    perms = sorted(set(itertools.permutations(key)))
    return perms.index(key), len(perms)


def expand_general(g, name=None):
    """val of a GeneralTSLP by naive recursive substitution."""
    name = g.start if name is None else name

    def build(term, param):
        if term.label == "x" and not term.children:
            return param
        if term.label in g.rules:
            inner = build(term.children[0], param) if term.children else None
            return expand_rhs(term.label, inner)
        if not term.children:
            return Node(term.label)
        return Node(term.label, build(term.children[0], param), build(term.children[1], param))

    def expand_rhs(nt, arg):
        return build(g.rules[nt], arg if arg is not None else X)

    return expand_rhs(name, None)


def expand_normal(g, i=0, arg=X):
    """val of a NormalFormTSLP by naive recursion on the rule table."""
    from treentropy.tslp import APPLY, COMPOSE, LEAF, LEFT, RIGHT

    r = g.rules[i]

    def sym(s):
        return expand_normal(g, s) if isinstance(s, int) else Node(s)

    if r.kind == LEAF:
        return Node(r.head)
    if r.kind == APPLY:
        return expand_normal(g, r.head, sym(r.arg))
    if r.kind == COMPOSE:
        return expand_normal(g, r.head, expand_normal(g, r.arg, arg))
    if r.kind == LEFT:
        return Node(r.head, sym(r.arg), arg)
    if r.kind == RIGHT:
        return Node(r.head, arg, sym(r.arg))
    raise ValueError(r.kind)


def substitute_param(c, s):
    if c is X:
        return s
    if c.left is None:
        return c
    return Node(c.label, substitute_param(c.left, s), substitute_param(c.right, s))


def distinct_subtrees(t):
    seen = set()

    def walk(v):
        key = str(v)
        seen.add(key)
        if v.left is not None:
            walk(v.left)
            walk(v.right)

    walk(t)
    return len(seen)
