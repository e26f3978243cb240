"""Unranked trees, the first-child/next-sibling encoding and XML structure profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.parsers import expat
from xml.sax.saxutils import escape

from .entropy import tree_entropies, tree_entropy
from .errors import ParseError, ShapeError
from .trees import Node

# U+25A1 is not a valid XML name character, so it never collides with a tag
BOX = "□"


class UnrankedTree:
    """A labelled node with an ordered tuple of children; a forest is a tuple of these."""

    __slots__ = ("label", "children")

    def __init__(self, label, children=()):
        self.label = label
        self.children = tuple(children)

    def __eq__(self, other):
        if not isinstance(other, UnrankedTree):
            return NotImplemented
        return forests_equal((self,), (other,))

    def __hash__(self):
        return hash((self.label, len(self.children)))

    def __repr__(self):
        return f"UnrankedTree({format_forest((self,))!r})"

    def __str__(self):
        return format_forest((self,))


def forests_equal(f, g):
    stack = [(tuple(f), tuple(g))]
    while stack:
        a, b = stack.pop()
        if len(a) != len(b):
            return False
        for x, y in zip(a, b):
            if x is y:
                continue
            if x.label != y.label:
                return False
            stack.append((x.children, y.children))
    return True


def iter_nodes(forest):
    """All nodes of a forest in document order."""
    stack = list(reversed(forest))
    while stack:
        v = stack.pop()
        yield v
        stack.extend(reversed(v.children))


def forest_size(forest):
    return sum(1 for _ in iter_nodes(forest))


def forest_labels(forest):
    return {v.label for v in iter_nodes(forest)}


def format_forest(forest):
    """Compact text form, e.g. ``a(b c) d(e)``."""
    out = []
    stack = [("forest", tuple(forest))]
    while stack:
        kind, item = stack.pop()
        if kind == "text":
            out.append(item)
            continue
        for i, t in reversed(list(enumerate(item))):
            if t.children:
                stack.append(("text", ")"))
                stack.append(("forest", t.children))
                stack.append(("text", "("))
            stack.append(("text", t.label))
            if i:
                stack.append(("text", " "))
    return "".join(out)


def parse_forest(text):
    """Inverse of :func:`format_forest`; labels are runs without spaces or parentheses."""
    frames = [[]]
    labels = [None]
    token = []

    def flush():
        if token:
            frames[-1].append(UnrankedTree("".join(token)))
            token.clear()

    for ch in text:
        if ch == "(":
            if not token:
                raise ParseError("'(' must follow a label")
            labels.append("".join(token))
            token.clear()
            frames.append([])
        elif ch == ")":
            flush()
            if len(frames) == 1:
                raise ParseError("unbalanced ')'")
            kids = frames.pop()
            frames[-1].append(UnrankedTree(labels.pop(), kids))
        elif ch.isspace():
            flush()
        else:
            token.append(ch)
    flush()
    if len(frames) != 1:
        raise ParseError("unbalanced '('")
    return tuple(frames[0])


def _as_forest(f):
    return (f,) if isinstance(f, UnrankedTree) else tuple(f)


# -- fcns ----------------------------------------------------------------------------------


def fcns(forest, box=BOX):
    """First-child/next-sibling encoding: fcns(empty) = box, fcns(a(f) g) = a(fcns(f), fcns(g))."""
    forest = _as_forest(forest)
    empty = Node(box)
    encoded_children = {}
    order = list(iter_nodes(forest))

    def fold(trees):
        acc = empty
        for t in reversed(trees):
            acc = Node(t.label, encoded_children[id(t)], acc)
        return acc

    for v in reversed(order):
        encoded_children[id(v)] = fold(v.children)
    return fold(forest)


def inverse_fcns(t, box=BOX):
    """The forest f with fcns(f) = t; raises ShapeError if there is none."""
    order = []
    stack = [t]
    while stack:
        v = stack.pop()
        if v.left is None:
            if v.label != box:
                raise ShapeError(f"leaf labelled {v.label!r}; only {box!r} may be a leaf")
            continue
        if v.label == box:
            raise ShapeError(f"internal node labelled with the padding symbol {box!r}")
        order.append(v)
        stack.append(v.right)
        stack.append(v.left)
    built = {}

    def spine(v):
        trees = []
        while v.left is not None:
            trees.append(built[id(v)])
            v = v.right
        return tuple(trees)

    for v in reversed(order):
        built[id(v)] = UnrankedTree(v.label, spine(v.left))
    return spine(t)


def unranked_entropy(t, k, box=BOX):
    """H_k of an unranked tree (or forest): H_k of its fcns encoding, padded with ``box``."""
    return tree_entropy(fcns(t, box), k, box)


# -- XML ---------------------------------------------------------------------------------------


def ingest_xml(data):
    """Element structure of an XML document as an :class:`UnrankedTree`.

    Tag names are kept literally (prefixes included).  Text, attributes,
    comments and processing instructions are dropped.  Entity declarations
    are rejected, so only the five predefined entities can appear.
    """
    parser = expat.ParserCreate()
    parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)
    stack = [[]]
    names = []

    def start(name, attrs):
        names.append(name)
        stack.append([])

    def end(name):
        kids = stack.pop()
        stack[-1].append(UnrankedTree(names.pop(), kids))

    def reject_entity(*args):
        raise ParseError("entity declarations are not supported")

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.EntityDeclHandler = reject_entity
    parser.UnparsedEntityDeclHandler = reject_entity
    parser.SkippedEntityHandler = reject_entity
    try:
        if isinstance(data, str):
            parser.Parse(data, True)
        else:
            parser.Parse(bytes(data), True)
    except expat.ExpatError as exc:
        raise ParseError(f"malformed XML: {exc}") from None
    roots = stack[0]
    if len(roots) != 1:
        raise ParseError("document has no root element")
    return roots[0]


def read_xml(path):
    with open(path, "rb") as fh:
        return ingest_xml(fh.read())


def to_xml(t):
    """Serialize an unranked tree as bare nested elements."""
    out = []
    stack = [("open", t)]
    while stack:
        kind, v = stack.pop()
        if kind == "close":
            out.append(f"</{v.label}>")
        elif not v.children:
            out.append(f"<{v.label}/>")
        else:
            out.append(f"<{v.label}>")
            stack.append(("close", v))
            for c in reversed(v.children):
                stack.append(("open", c))
    return "".join(out)


def random_unranked_tree(n, labels, rng):
    """Random tree with ``n`` nodes: each new node picks a uniformly random parent."""
    labels = list(labels)
    kids = [[] for _ in range(n)]
    for i in range(1, n):
        kids[rng.randrange(i)].append(i)
    names = [rng.choice(labels) for _ in range(n)]
    built = [None] * n
    for i in reversed(range(n)):
        built[i] = UnrankedTree(names[i], [built[j] for j in kids[i]])
    return built[0]


def random_xml_document(n, labels, rng):
    """Synthetic document with text, attributes and comments mixed into the structure."""
    t = random_unranked_tree(n, labels, rng)
    out = ['<?xml version="1.0" encoding="UTF-8"?>\n']
    stack = [("open", t)]
    while stack:
        kind, v = stack.pop()
        if kind == "close":
            out.append(f"</{v.label}>")
            continue
        attr = f' id="{rng.randrange(1000)}"' if rng.random() < 0.3 else ""
        out.append(f"<{v.label}{attr}>")
        if rng.random() < 0.3:
            out.append(escape(f"text & {rng.randrange(100)} <"))
        if rng.random() < 0.1:
            out.append("<!-- note -->")
        stack.append(("close", v))
        for c in reversed(v.children):
            stack.append(("open", c))
    return "".join(out), t


# -- profiling ---------------------------------------------------------------------------------

CSV_HEADER = ("document", "n", "sigma", "w_bits", "k", "Hk_bits", "quotient_pct")


@dataclass(frozen=True)
class ProfileRow:
    document: str
    n: int
    sigma: int
    w_bits: float
    k: int
    hk_bits: float
    quotient_pct: float


def worst_case_bits(n, sigma):
    """w = (2 + log2 sigma) n; with sigma = 1 this is 2n."""
    return (2 + math.log2(sigma)) * n


def profile(t, ks=(1, 2, 4, 8), document="", box=BOX):
    """One row per k with H_k(t) and its share of w in percent.

    sigma counts the source labels only; the padding symbol is part of the
    entropy alphabet but not of sigma.
    """
    forest = _as_forest(t)
    n = forest_size(forest)
    sigma = len(forest_labels(forest))
    w = worst_case_bits(n, sigma)
    hk = tree_entropies(fcns(forest, box), ks, box)
    return [
        ProfileRow(document, n, sigma, w, k, hk[k], 100.0 * hk[k] / w if w else 0.0)
        for k in sorted(set(ks))
    ]


# Reference rows per document: n, sigma, w and H_k/w in percent for k = 1, 2, 4, 8.
REFERENCE_PROFILES = {
    "Baseball": (28306, 46, 212961.9447, (2.9818, 1.2547, 0.6739, 0.6662)),
    "DBLP": (3332130, 35, 23755697.8193, (10.9775, 8.7407, 8.2134, 6.7270)),
    "DCSD-Normal": (2242699, 50, 17142868.6330, (4.2437, 2.2481, 1.7517, 1.3038)),
    "EnWikiNew": (404652, 20, 2558180.8475, (9.5317, 3.0760, 3.0759, 2.9378)),
    "EnWikiQuote": (262955, 20, 1662382.6021, (9.4270, 3.1014, 3.1014, 3.1006)),
    "EnWikiVersity": (495839, 20, 3134658.5046, (8.8952, 2.3753, 2.3753, 2.3750)),
    "EXI-Array": (226523, 47, 1711288.1304, (0.2506, 0.2495, 0.2492, 0.2483)),
    "EXI-factbook": (55453, 199, 534379.7451, (2.2034, 0.9450, 0.8132, 0.8092)),
    "EXI-Invoice": (15075, 52, 116084.1288, (0.0484, 0.0268, 0.0139, 0.0098)),
    "EXI-Telecomp": (177634, 39, 1294135.1377, (1.5405, 0.0044, 0.0034, 0.0021)),
    "EXI-weblog": (93435, 12, 521830.9713, (0.0032, 0.0028, 0.0028, 0.0028)),
    "Lineitem": (1022976, 18, 6311685.1983, (0.0003, 0.0003, 0.0003, 0.0003)),
    "Mondial": (22423, 23, 146277.8297, (11.1285, 9.2940, 8.4702, 7.7679)),
    "NASA": (476646, 61, 3780154.2290, (7.7424, 4.4588, 3.8898, 3.8054)),
    "Shakespeare": (179690, 22, 1160695.2676, (11.9140, 10.8416, 10.6368, 10.4765)),
    "SwissProt": (2977031, 85, 25035017.5080, (12.1892, 10.5249, 9.2455, 8.1204)),
    "TCSD-Normal": (2749751, 24, 18107007.2213, (8.5450, 8.4004, 8.2862, 8.2472)),
    "Treebank": (2437666, 250, 24293253.5140, (30.8912, 23.0825, 19.2444, 13.4058)),
    "USHouse": (6712, 43, 49845.0890, (21.0500, 18.2164, 12.6572, 9.3754)),
    "XMark1": (167865, 74, 1378079.8892, (12.1610, 9.5101, 9.2271, 8.4281)),
    "XMark2": (1666315, 74, 13679535.2849, (12.2125, 9.5634, 9.3259, 8.9400)),
}
REFERENCE_KS = (1, 2, 4, 8)


def reference_profile(document):
    """``(n, sigma, w, {k: quotient_pct})`` for a published document name, or None."""
    row = REFERENCE_PROFILES.get(document)
    if row is None:
        return None
    n, sigma, w, quotients = row
    return n, sigma, w, dict(zip(REFERENCE_KS, quotients))
