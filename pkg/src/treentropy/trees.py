"""Labelled full binary trees and contexts.

A tree is either a leaf ``a`` or an internal node ``a(left, right)``.  A
context is a tree in which exactly one leaf is the parameter ``x``.  Both
are represented by :class:`Node`; the parameter is the singleton :data:`X`.

Node addresses are bit strings: ``""`` is the root, ``"0"``/``"1"`` step to
the left/right child.  All traversals are iterative, so trees with very long
spines (fcns encodings of wide XML documents, caterpillars) are fine.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .config import ENUMERATION_BUDGET
from .errors import AddressError, BudgetExceeded, ParseError

LABEL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
PARAM_LABEL = "x"


class Node:
    """Immutable tree/context node.

    ``size`` is the leaf count, excluding the parameter.  The structural hash
    is computed once at construction, so hashing and most inequality tests
    are O(1).
    """

    __slots__ = ("label", "left", "right", "size", "has_param", "_hash")

    def __init__(self, label, left=None, right=None):
        if (left is None) != (right is None):
            raise ValueError("a node has either zero or two children")
        self.label = label
        self.left = left
        self.right = right
        if left is None:
            self.size = 1
            self.has_param = False
            self._hash = hash((label,))
        else:
            if left.has_param and right.has_param:
                raise ValueError("a context has exactly one parameter")
            self.size = left.size + right.size
            self.has_param = left.has_param or right.has_param
            self._hash = hash((label, left._hash, right._hash))

    @property
    def is_leaf(self):
        return self.left is None

    @property
    def degree(self):
        return 0 if self.left is None else 2

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if (
                a._hash != b._hash
                or a.label != b.label
                or a.size != b.size
                or a.has_param != b.has_param
                or (a.left is None) != (b.left is None)
            ):
                return False
            if a.left is not None:
                stack.append((a.right, b.right))
                stack.append((a.left, b.left))
        return True

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __repr__(self):
        if self.size > 64:
            return f"<Node {self.label} with {self.size} leaves>"
        return f"Node({format_term(self)!r})"

    def __str__(self):
        return format_term(self)


def _make_param():
    p = object.__new__(Node)
    p.label = None
    p.left = None
    p.right = None
    p.size = 0
    p.has_param = True
    p._hash = hash(("<param>",))
    return p


X = _make_param()
"""The parameter leaf; the context ``x`` itself."""


def leaf(label):
    return Node(label)


def is_context(s):
    return s.has_param


def node_count(s):
    """Number of nodes in V(s), i.e. 2|s|-1 for a tree and 2|s| for a context."""
    if s is X:
        return 0
    return 2 * s.size - 1 + (1 if s.has_param else 0)


# -- term syntax --------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:([^\s(),]+)|([(),]))")


def _tokens(text):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character at offset {pos}")
        pos = m.end()
        yield m.group(1) or m.group(2), m.start(1) if m.group(1) else m.start(2)


def parse_term(text, build, max_children=2):
    """Parse ``label`` / ``label(t1,...)`` terms bottom-up without recursion.

    ``build(label, children)`` is called in post-order; its results become the
    children of enclosing terms.  Returns the value built for the whole term.
    """
    toks = list(_tokens(text))
    if not toks:
        raise ParseError("empty input")
    pos = 0
    out = []  # finished values
    frames = []  # (label, number of finished values before its children)
    n = len(toks)
    while True:
        if pos >= n:
            raise ParseError("unexpected end of input")
        tok, off = toks[pos]
        if tok in "(),":
            raise ParseError(f"expected a label at offset {off}, got {tok!r}")
        pos += 1
        if pos < n and toks[pos][0] == "(":
            frames.append((tok, len(out)))
            pos += 1
            continue
        out.append(build(tok, ()))
        # close as many frames as the following ')' tokens allow
        while True:
            if not frames:
                if pos != n:
                    raise ParseError(f"trailing input at offset {toks[pos][1]}")
                return out[0]
            if pos >= n:
                raise ParseError("unexpected end of input")
            tok, off = toks[pos]
            if tok == ",":
                pos += 1
                break
            if tok != ")":
                raise ParseError(f"expected ',' or ')' at offset {off}, got {tok!r}")
            pos += 1
            label, start = frames.pop()
            children = tuple(out[start:])
            del out[start:]
            if len(children) > max_children:
                raise ParseError(f"too many children for {label!r} at offset {off}")
            out.append(build(label, children))


def _build_node(label, children):
    if label == PARAM_LABEL:
        if children:
            raise ParseError("the parameter x cannot have children")
        return X
    if not children:
        return Node(label)
    if len(children) != 2:
        raise ParseError(f"{label!r} has {len(children)} children; binary trees need 0 or 2")
    try:
        return Node(label, children[0], children[1])
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_tree(text):
    """Parse term syntax such as ``a(b(a,x),a)`` into a tree or context."""
    return parse_term(text, _build_node)


def format_term(s):
    out = []
    stack = [s]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif item is X:
            out.append(PARAM_LABEL)
        elif item.left is None:
            out.append(str(item.label))
        else:
            out.append(str(item.label))
            out.append("(")
            stack.extend((")", item.right, ",", item.left))
    return "".join(out)


# -- alphabets ------------------------------------------------------------------


@dataclass(frozen=True)
class Alphabet:
    """Ordered label set with a designated padding label (the box)."""

    labels: tuple
    box_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise ValueError("an alphabet needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("alphabet labels must be distinct")
        if not 0 <= self.box_index < len(self.labels):
            raise ValueError("box_index out of range")

    @property
    def box(self):
        return self.labels[self.box_index]

    @property
    def sigma(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    def __contains__(self, label):
        return label in self.labels

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)

    @classmethod
    def of(cls, *trees, box=None):
        """Sorted labels of the given trees; ``box`` defaults to the first one."""
        found = set()
        for t in trees:
            found |= labels_of(t)
        if box is not None:
            found.add(box)
        ordered = tuple(sorted(found))
        return cls(ordered, ordered.index(box) if box is not None else 0)


def labels_of(s):
    seen = set()
    visited = set()
    stack = [s]
    while stack:
        v = stack.pop()
        if v is X or id(v) in visited:
            continue
        visited.add(id(v))
        seen.add(v.label)
        if v.left is not None:
            stack.append(v.left)
            stack.append(v.right)
    return seen


def default_box(s):
    """The smallest label occurring in ``s``, used when no box is given."""
    labels = labels_of(s)
    return min(labels) if labels else None


# -- addressing -----------------------------------------------------------------


def node_set(s) -> Iterator[str]:
    """Yield the addresses of V(s) in preorder; the parameter is excluded."""
    stack = [(s, "")]
    while stack:
        v, addr = stack.pop()
        if v is X:
            continue
        yield addr
        if v.left is not None:
            stack.append((v.right, addr + "1"))
            stack.append((v.left, addr + "0"))


def _walk(s, v):
    cur = s
    for bit in v:
        if cur is X or cur.left is None:
            raise AddressError(v)
        if bit == "0":
            cur = cur.left
        elif bit == "1":
            cur = cur.right
        else:
            raise AddressError(v)
    return cur


def subtree(s, v):
    node = _walk(s, v)
    if node is X:
        raise AddressError(v)
    return node


def label_degree(s, v):
    """``(label, degree)`` of the node at address ``v``; degree is 0 or 2."""
    node = subtree(s, v)
    return (node.label, node.degree)


def param_addr(c):
    """Address of the parameter leaf of context ``c``."""
    if not c.has_param:
        raise ValueError("not a context")
    bits = []
    cur = c
    while cur is not X:
        if cur.left.has_param:
            bits.append("0")
            cur = cur.left
        else:
            bits.append("1")
            cur = cur.right
    return "".join(bits)


def substitute(c, s):
    """Replace the parameter of context ``c`` by the tree or context ``s``."""
    if not c.has_param:
        raise ValueError("not a context")
    path = []
    cur = c
    while cur is not X:
        if cur.left.has_param:
            path.append((cur, 0))
            cur = cur.left
        else:
            path.append((cur, 1))
            cur = cur.right
    result = s
    for v, d in reversed(path):
        result = Node(v.label, result, v.right) if d == 0 else Node(v.label, v.left, result)
    return result


# -- histories --------------------------------------------------------------------


def k_history(s, v, k, box):
    """Last ``k`` (label, direction) pairs on the root-to-``v`` path.

    Padded on the left with ``(box, 0)``.  ``v`` may be a node of V(s) or, for
    a context, the parameter address.
    """
    pairs = []
    cur = s
    for bit in v:
        if cur is X or cur.left is None or bit not in "01":
            raise AddressError(v)
        pairs.append((cur.label, int(bit)))
        cur = cur.left if bit == "0" else cur.right
    if k == 0:
        return ()
    padded = [(box, 0)] * k + pairs
    return tuple(padded[-k:])


def iter_histories(s, k, box):
    """Yield ``(k_history, (label, degree))`` for every node of V(s), in preorder."""
    pad = ((box, 0),) * k
    stack = [(s, pad)]
    pop = stack.pop
    push = stack.append
    while stack:
        v, h = pop()
        if v is X:
            continue
        if v.left is None:
            yield h, (v.label, 0)
            continue
        yield h, (v.label, 2)
        if k:
            tail = h[1:]
            push((v.right, tail + ((v.label, 1),)))
            push((v.left, tail + ((v.label, 0),)))
        else:
            push((v.right, h))
            push((v.left, h))


# -- construction helpers ------------------------------------------------------------


def perfect_tree(height, label="a"):
    """Complete binary tree with 2**height leaves, all nodes labelled ``label``."""
    t = Node(label)
    for _ in range(height):
        t = Node(label, t, t)
    return t


def random_tree(n, labels: Sequence, rng):
    """Random full binary tree with ``n`` leaves (uniform random splits)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    stack = [n]
    choice = rng.choice
    while stack:
        item = stack.pop()
        if isinstance(item, tuple):
            right = out.pop()
            left = out.pop()
            out.append(Node(item[1], left, right))
        elif item == 1:
            out.append(Node(choice(labels)))
        else:
            i = rng.randint(1, item - 1)
            stack.append(("join", choice(labels)))
            stack.append(item - i)
            stack.append(i)
    return out[0]


def expand(s):
    """Copy ``s`` so that no subtree object is shared (undoes DAG sharing)."""
    out = []
    stack = [s]
    while stack:
        item = stack.pop()
        if isinstance(item, tuple):
            right = out.pop()
            left = out.pop()
            out.append(Node(item[1], left, right))
        elif item is X:
            out.append(X)
        elif item.left is None:
            out.append(Node(item.label))
        else:
            stack.append(("join", item.label))
            stack.append(item.right)
            stack.append(item.left)
    return out[0]


def depth(s):
    best = 0
    stack = [(s, 0)]
    while stack:
        v, d = stack.pop()
        if v is X:
            continue
        best = max(best, d)
        if v.left is not None:
            stack.append((v.left, d + 1))
            stack.append((v.right, d + 1))
    return best


# -- exhaustive enumerators (test oracles) -----------------------------------------------


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


def count_trees(n, sigma):
    return sigma ** (2 * n - 1) * catalan(n - 1)


def count_contexts(n, sigma):
    # a context with |c| = n is a tree with n+1 leaves, one of which is unlabelled x
    return (n + 1) * catalan(n) * sigma ** (2 * n)


def _labels(alphabet):
    return tuple(alphabet.labels if isinstance(alphabet, Alphabet) else alphabet)


def _check_budget(count, budget):
    cap = ENUMERATION_BUDGET if budget is None else budget
    if count > cap:
        raise BudgetExceeded(f"{count} objects exceed the enumeration budget {cap}")


def _trees_by_size(n, labels):
    table = {1: [Node(a) for a in labels]}
    for size in range(2, n + 1):
        row = []
        for i in range(1, size):
            for left in table[i]:
                for right in table[size - i]:
                    for a in labels:
                        row.append(Node(a, left, right))
        table[size] = row
    return table


def enumerate_trees(n, alphabet, budget=None):
    """All trees with ``n`` leaves over ``alphabet``, each exactly once."""
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = _labels(alphabet)
    _check_budget(count_trees(n, len(labels)), budget)
    return _trees_by_size(n, labels)[n]


def enumerate_contexts(n, alphabet, budget=None):
    """All contexts ``c`` with ``|c| = n`` (parameter not counted)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    labels = _labels(alphabet)
    _check_budget(count_contexts(n, len(labels)), budget)
    trees = _trees_by_size(max(n, 1), labels)
    table = {0: [X]}
    for size in range(1, n + 1):
        row = []
        for j in range(size):
            for c in table[j]:
                for t in trees[size - j]:
                    for a in labels:
                        row.append(Node(a, c, t))
                        row.append(Node(a, t, c))
        table[size] = row
    return table[n]


def count_depth_family(d, sigma):
    count = sigma
    for _ in range(d - 1):
        count = sigma + sigma * count * count
    return count


def enumerate_depth_family(d, alphabet, budget=None):
    """Trees of depth below ``d``: T'_1 = leaves, T'_{d+1} = T'_d plus a(t1,t2) over T'_d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    labels = _labels(alphabet)
    _check_budget(count_depth_family(d, len(labels)), budget)
    leaves = [Node(a) for a in labels]
    family = list(leaves)
    for _ in range(d - 1):
        family = leaves + [Node(a, l, r) for l in family for r in family for a in labels]
    return family
