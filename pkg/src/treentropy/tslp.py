"""Tree straight-line programs (TSLPs).

A normal-form TSLP is stored as a tuple of :class:`Rule` objects indexed by
nonterminal number.  Symbols inside rules are ``int`` for nonterminals and
``str`` for alphabet labels.  Every rule has a two-symbol word rho(A) =
``(head, arg)``:

========  =======================  ==============
kind      right-hand side          rho
========  =======================  ==============
APPLY     A_j(alpha)               A_j alpha
COMPOSE   A_j(A_k(x))              A_j A_k
LEFT      a(alpha, x)              a alpha
RIGHT     a(x, alpha)              a alpha
========  =======================  ==============

The kind numbers double as the 2-bit rule types of the binary coding.  The
singleton grammar ``A0 -> a`` uses the extra kind LEAF.

Values of nonterminals are identified through :class:`Interner`, which
hash-conses trees and contexts into a DAG so that equality of values never
requires expanding them.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .config import resolve_budget
from .entropy import unnormalized_empirical_entropy
from .errors import BudgetExceeded, NotNormalForm, ParseError
from .trees import PARAM_LABEL, Node, X, parse_term

APPLY, COMPOSE, LEFT, RIGHT = 0, 1, 2, 3
LEAF = -1

NT_RE = re.compile(r"A(\d+)$")


@dataclass(frozen=True)
class Rule:
    kind: int
    head: object
    arg: object = None

    @property
    def rank(self):
        return 0 if self.kind in (APPLY, LEAF) else 1

    @property
    def rho(self):
        if self.kind == LEAF:
            return (self.head,)
        return (self.head, self.arg)


def is_nonterminal(symbol):
    return isinstance(symbol, int)


def symbol_name(symbol):
    return f"A{symbol}" if is_nonterminal(symbol) else str(symbol)


def format_rhs(rule):
    h, a = symbol_name(rule.head), symbol_name(rule.arg) if rule.arg is not None else None
    if rule.kind == APPLY:
        return f"{h}({a})"
    if rule.kind == COMPOSE:
        return f"{h}({a}(x))"
    if rule.kind == LEFT:
        return f"{h}({a},x)"
    if rule.kind == RIGHT:
        return f"{h}(x,{a})"
    return h


@dataclass(frozen=True)
class NormalFormTSLP:
    """TSLP with rules A_0 ... A_{m-1}; A_0 is the start nonterminal.

    Construction does not validate; use :func:`is_normal_form`.
    """

    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    @classmethod
    def singleton(cls, label):
        return cls((Rule(LEAF, label),))

    @property
    def m(self):
        return len(self.rules)

    @property
    def is_singleton(self):
        return len(self.rules) == 1 and self.rules[0].kind == LEAF

    def rank(self, i):
        return self.rules[i].rank

    def terminals(self):
        found = set()
        for r in self.rules:
            for s in r.rho:
                if not is_nonterminal(s):
                    found.add(s)
        return found

    def __str__(self):
        return format_grammar(self)


@dataclass(frozen=True)
class Term:
    """Right-hand-side term of a general TSLP: a label with 0, 1 or 2 children."""

    label: str
    children: tuple = ()


@dataclass
class GeneralTSLP:
    """TSLP with arbitrary right-hand sides over labels, nonterminals and ``x``.

    ``rules`` maps nonterminal names to :class:`Term`; a nonterminal has rank 1
    exactly when its right-hand side contains ``x``.
    """

    start: str
    rules: dict = field(default_factory=dict)

    def rank(self, name):
        return 1 if _contains_param(self.rules[name]) else 0

    def ranks(self):
        return {name: self.rank(name) for name in self.rules}

    def __str__(self):
        return format_grammar(self)


def _contains_param(term):
    stack = [term]
    while stack:
        t = stack.pop()
        if t.label == PARAM_LABEL and not t.children:
            return True
        stack.extend(t.children)
    return False


# -- text format -------------------------------------------------------------------


def _format_term(term):
    out = []
    stack = [term]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        out.append(item.label)
        if item.children:
            out.append("(")
            stack.append(")")
            for i, child in enumerate(reversed(item.children)):
                stack.append(child)
                if i < len(item.children) - 1:
                    stack.append(",")
    return "".join(out)


def format_grammar(g):
    """One rule per line, ``A3 -> A4(b)``; the start rule comes first."""
    if isinstance(g, NormalFormTSLP):
        return "\n".join(f"A{i} -> {format_rhs(r)}" for i, r in enumerate(g.rules)) + "\n"
    names = [g.start] + [n for n in g.rules if n != g.start]
    return "\n".join(f"{n} -> {_format_term(g.rules[n])}" for n in names) + "\n"


def parse_general(text):
    """Parse the rule-per-line grammar format into a :class:`GeneralTSLP`.

    The first rule's left-hand side is the start symbol unless ``A0`` is
    defined.  Blank lines and ``#`` comments are ignored.
    """
    rules = {}
    first = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise ParseError(f"line {lineno}: expected 'NAME -> term'")
        lhs, rhs = (part.strip() for part in line.split("->", 1))
        if not lhs or not re.fullmatch(r"[^\s(),]+", lhs) or lhs == PARAM_LABEL:
            raise ParseError(f"line {lineno}: bad nonterminal name {lhs!r}")
        if lhs in rules:
            raise ParseError(f"line {lineno}: duplicate rule for {lhs}")
        try:
            rules[lhs] = parse_term(rhs, lambda label, ch: Term(label, tuple(ch)), max_children=2)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        first = first or lhs
    if not rules:
        raise ParseError("empty grammar")
    start = "A0" if "A0" in rules else first
    g = GeneralTSLP(start, rules)
    _check_general(g)
    return g


def _check_general(g):
    ranks = {}
    for name, rhs in g.rules.items():
        ranks[name] = 1 if _contains_param(rhs) else 0
    if ranks[g.start] != 0:
        raise ParseError(f"start symbol {g.start} must derive a tree")
    for name, rhs in g.rules.items():
        params = 0
        stack = [rhs]
        while stack:
            t = stack.pop()
            n = len(t.children)
            if t.label == PARAM_LABEL:
                params += 1
                if n:
                    raise ParseError(f"{name}: the parameter x cannot have children")
            elif t.label in ranks:
                if n != 1 and ranks[t.label] == 1:
                    raise ParseError(f"{name}: rank-1 nonterminal {t.label} needs one argument")
                if n != 0 and ranks[t.label] == 0:
                    raise ParseError(f"{name}: rank-0 nonterminal {t.label} takes no argument")
            elif n not in (0, 2):
                raise ParseError(f"{name}: label {t.label} needs 0 or 2 children")
            stack.extend(t.children)
        if params > 1:
            raise ParseError(f"{name}: more than one parameter")
    for name, rhs in g.rules.items():
        _term_kind(rhs, ranks, name)


def _term_kind(term, ranks, where):
    """0 for trees, 1 for contexts; raises if a subterm would hold two parameters."""
    kinds = {}
    order = []
    stack = [term]
    while stack:
        t = stack.pop()
        order.append(t)
        stack.extend(t.children)
    for t in reversed(order):
        child = sum(kinds[id(c)] for c in t.children)
        if child > 1:
            raise ParseError(f"{where}: more than one parameter below {t.label}")
        kinds[id(t)] = 1 if (t.label == PARAM_LABEL and not t.children) else child
    return kinds[id(term)]


def to_normal_form(g):
    """Read a :class:`GeneralTSLP` whose rules already have normal-form shapes.

    Nonterminals must be named ``A0`` ... ``A{m-1}``.  Only shapes are
    checked here; :func:`is_normal_form` checks the remaining conditions.
    """
    if isinstance(g, NormalFormTSLP):
        return g
    names = list(g.rules)
    index = {}
    for name in names:
        m = NT_RE.match(name)
        if not m:
            raise NotNormalForm(f"nonterminal {name!r} is not named A<i>")
        index[name] = int(m.group(1))
    if sorted(index.values()) != list(range(len(names))):
        raise NotNormalForm("nonterminals must be numbered A0 .. A{m-1} without gaps")
    if g.start != "A0":
        raise NotNormalForm("the start symbol must be A0")
    ranks = g.ranks()

    def sym(t):
        if t.children:
            return None
        if t.label in index:
            return index[t.label]
        if t.label == PARAM_LABEL:
            return None
        return t.label

    rules = [None] * len(names)
    errors = []
    for name, rhs in g.rules.items():
        i = index[name]
        ch = rhs.children
        rule = None
        if rhs.label in index and len(ch) == 1:
            inner = ch[0]
            if inner.label in index and len(inner.children) == 1 and inner.children[0].label == PARAM_LABEL \
                    and not inner.children[0].children:
                rule = Rule(COMPOSE, index[rhs.label], index[inner.label])
            elif sym(inner) is not None and not (inner.label in index and ranks[inner.label] == 1):
                rule = Rule(APPLY, index[rhs.label], sym(inner))
        elif rhs.label not in index and rhs.label != PARAM_LABEL and len(ch) == 2:
            left, right = ch
            if left.label == PARAM_LABEL and not left.children and sym(right) is not None:
                rule = Rule(RIGHT, rhs.label, sym(right))
            elif right.label == PARAM_LABEL and not right.children and sym(left) is not None:
                rule = Rule(LEFT, rhs.label, sym(left))
        elif not ch and rhs.label not in index and rhs.label != PARAM_LABEL and len(names) == 1:
            rule = Rule(LEAF, rhs.label)
        if rule is None:
            errors.append(f"A{i} -> {_format_term(rhs)} is not a permitted right-hand side shape")
        rules[i] = rule
    if errors:
        raise NotNormalForm(errors)
    return NormalFormTSLP(tuple(rules))


def parse_grammar(text):
    """Parse grammar text; returns a :class:`NormalFormTSLP` when the shapes allow it."""
    g = parse_general(text)
    try:
        return to_normal_form(g)
    except NotNormalForm:
        return g


# -- canonical DAG identities -----------------------------------------------------------


class Interner:
    """Hash-consing store for trees and contexts.

    Every distinct tree/context gets one integer id, so equal values have
    equal ids.  Id 0 is the parameter ``x``.  ``budget`` caps the number of
    DAG nodes created.
    """

    PARAM = 0

    def __init__(self, budget=None):
        self.budget = resolve_budget(budget)
        self.keys = [None]
        self.sizes = [0]
        self.params = [True]
        self.table = {}
        self._subst = {}

    def __len__(self):
        return len(self.keys)

    def _new(self, key, size, param):
        i = self.table.get(key)
        if i is None:
            if len(self.keys) >= self.budget:
                raise BudgetExceeded(f"more than {self.budget} DAG nodes")
            i = len(self.keys)
            self.keys.append(key)
            self.sizes.append(size)
            self.params.append(param)
            self.table[key] = i
        return i

    def leaf(self, label):
        return self._new((label, None, None), 1, False)

    def node(self, label, left, right):
        if self.params[left] and self.params[right]:
            raise ValueError("two parameters")
        return self._new(
            (label, left, right), self.sizes[left] + self.sizes[right], self.params[left] or self.params[right]
        )

    def symbol(self, s, ids):
        return ids[s] if is_nonterminal(s) else self.leaf(s)

    def substitute(self, c, s):
        """Id of c[s] for a context id ``c``."""
        if not self.params[c]:
            raise ValueError("not a context")
        key = (c, s)
        hit = self._subst.get(key)
        if hit is not None:
            return hit
        path = []
        cur = c
        while cur != self.PARAM:
            label, left, right = self.keys[cur]
            if self.params[left]:
                path.append((label, 0, right))
                cur = left
            else:
                path.append((label, 1, left))
                cur = right
            if len(path) > self.budget:
                raise BudgetExceeded("context spine exceeds the budget")
        result = s
        for label, d, other in reversed(path):
            result = self.node(label, result, other) if d == 0 else self.node(label, other, result)
        self._subst[key] = result
        return result

    def is_context(self, i):
        return self.params[i]

    def size(self, i):
        return self.sizes[i]

    def to_node(self, i):
        """Build the :class:`~treentropy.trees.Node` for id ``i``, sharing equal subtrees."""
        built = {self.PARAM: X}
        stack = [i]
        while stack:
            j = stack[-1]
            if j in built:
                stack.pop()
                continue
            label, left, right = self.keys[j]
            if left is None:
                built[j] = Node(label)
                stack.pop()
            elif left in built and right in built:
                built[j] = Node(label, built[left], built[right])
                stack.pop()
            else:
                stack.append(right)
                stack.append(left)
        return built[i]

    def from_node(self, s):
        ids = {}
        stack = [s]
        while stack:
            v = stack[-1]
            if id(v) in ids:
                stack.pop()
                continue
            if v is X:
                ids[id(v)] = self.PARAM
                stack.pop()
            elif v.left is None:
                ids[id(v)] = self.leaf(v.label)
                stack.pop()
            elif id(v.left) in ids and id(v.right) in ids:
                ids[id(v)] = self.node(v.label, ids[id(v.left)], ids[id(v.right)])
                stack.pop()
            else:
                stack.append(v.right)
                stack.append(v.left)
        return ids[id(s)]


def topological_order(rules, roots=None):
    """Nonterminal indices, dependencies first; raises NotNormalForm on a cycle.

    ``rules`` maps nonterminal -> Rule (a dict or a sequence).
    """
    items = dict(enumerate(rules)) if not isinstance(rules, dict) else rules
    if roots is None:
        roots = list(items)
    state = {}
    order = []
    for root in roots:
        if root in state:
            continue
        stack = [(root, False)]
        while stack:
            nt, done = stack.pop()
            if done:
                state[nt] = 2
                order.append(nt)
                continue
            st = state.get(nt)
            if st == 2:
                continue
            if st == 1:
                raise NotNormalForm(f"the rules are cyclic through {symbol_name(nt)}")
            state[nt] = 1
            stack.append((nt, True))
            for s in items[nt].rho:
                if is_nonterminal(s):
                    if s not in items:
                        raise NotNormalForm(f"{symbol_name(s)} has no rule")
                    if state.get(s) == 1:
                        raise NotNormalForm(f"the rules are cyclic through {symbol_name(s)}")
                    if state.get(s) is None:
                        stack.append((s, False))
    return order


def intern_rules(rules, interner=None, roots=None):
    """Canonical ids of all (or the reachable) nonterminals of a rule map."""
    interner = interner or Interner()
    items = dict(enumerate(rules)) if not isinstance(rules, dict) else rules
    ids = {}
    for nt in topological_order(items, roots):
        r = items[nt]
        if r.kind == LEAF:
            ids[nt] = interner.leaf(r.head)
        elif r.kind == APPLY:
            ids[nt] = interner.substitute(ids[r.head], interner.symbol(r.arg, ids))
        elif r.kind == COMPOSE:
            ids[nt] = interner.substitute(ids[r.head], ids[r.arg])
        elif r.kind == LEFT:
            ids[nt] = interner.node(r.head, interner.symbol(r.arg, ids), Interner.PARAM)
        elif r.kind == RIGHT:
            ids[nt] = interner.node(r.head, Interner.PARAM, interner.symbol(r.arg, ids))
        else:
            raise NotNormalForm(f"unknown rule kind {r.kind}")
    return ids, interner


def canonical_ids(g, budget=None):
    """Interned value id for every nonterminal of a normal-form grammar."""
    ids, _ = intern_rules(g.rules, Interner(budget))
    return [ids[i] for i in range(g.m)]


def _intern_general(g, interner):
    ranks = g.ranks()
    deps = {}
    for name, rhs in g.rules.items():
        found = set()
        stack = [rhs]
        while stack:
            t = stack.pop()
            if t.label in g.rules:
                found.add(t.label)
            stack.extend(t.children)
        deps[name] = found
    order = []
    state = {}
    for root in g.rules:
        stack = [(root, False)]
        while stack:
            name, done = stack.pop()
            if done:
                state[name] = 2
                order.append(name)
                continue
            if state.get(name) == 2:
                continue
            if state.get(name) == 1:
                raise NotNormalForm(f"the rules are cyclic through {name}")
            state[name] = 1
            stack.append((name, True))
            for d in deps[name]:
                if state.get(d) == 1:
                    raise NotNormalForm(f"the rules are cyclic through {d}")
                if state.get(d) is None:
                    stack.append((d, False))
    ids = {}
    for name in order:
        ids[name] = _intern_term(g.rules[name], ids, ranks, interner)
    return ids


def _intern_term(term, ids, ranks, interner):
    post = []
    stack = [term]
    while stack:
        t = stack.pop()
        post.append(t)
        stack.extend(t.children)
    value = {}
    for t in reversed(post):
        if t.label == PARAM_LABEL and not t.children:
            value[id(t)] = Interner.PARAM
        elif t.label in ranks:
            if ranks[t.label] == 1:
                value[id(t)] = interner.substitute(ids[t.label], value[id(t.children[0])])
            else:
                value[id(t)] = ids[t.label]
        elif t.children:
            value[id(t)] = interner.node(t.label, value[id(t.children[0])], value[id(t.children[1])])
        else:
            value[id(t)] = interner.leaf(t.label)
    return value[id(term)]


# -- evaluation -------------------------------------------------------------------------


def _check_expansion(size, has_param, budget):
    nodes = 2 * size - 1 + (1 if has_param else 0)
    if nodes > budget:
        raise BudgetExceeded(f"expansion has {nodes} nodes, budget is {budget}")


def val(g, nonterminal=None, budget=None):
    """The tree (or context, for a rank-1 nonterminal) derived by ``g``.

    The result shares equal subtrees, so it is built in time proportional to
    the DAG size; ``budget`` still bounds the size of the expanded tree.
    """
    budget = resolve_budget(budget)
    interner = Interner(budget)
    if isinstance(g, NormalFormTSLP):
        ids, _ = intern_rules(g.rules, interner)
        target = ids[0 if nonterminal is None else nonterminal]
    else:
        ids = _intern_general(g, interner)
        target = ids[g.start if nonterminal is None else nonterminal]
    _check_expansion(interner.size(target), interner.is_context(target), budget)
    return interner.to_node(target)


def rho(g):
    """The word rho_G = rho(A_0) rho(A_1) ... rho(A_{m-1})."""
    word = []
    for r in g.rules:
        word.extend(r.rho)
    return word


def omega(g):
    """rho_G with the first occurrence of each A_i (i >= 1) removed."""
    seen = set()
    out = []
    for s in rho(g):
        if is_nonterminal(s) and s >= 1 and s not in seen:
            seen.add(s)
            continue
        out.append(s)
    return out


def split_rho(g):
    """The factors u_1 ... u_{m-1} of rho_G = A_1 u_1 A_2 u_2 ... A_{m-1} u_{m-1}."""
    word = rho(g)
    parts = []
    seen = set()
    for s in word:
        if is_nonterminal(s) and s >= 1 and s not in seen:
            seen.add(s)
            parts.append([])
        elif parts:
            parts[-1].append(s)
    return parts


def grammar_entropy(g):
    """H(G): the unnormalized empirical entropy of omega_G."""
    return unnormalized_empirical_entropy(omega(g))


def grammar_size(g):
    """|G| = m, the number of nonterminals."""
    return g.m


# -- derivation trees -------------------------------------------------------------------


@dataclass(frozen=True)
class DerivationNode:
    symbol: object
    children: tuple = ()

    def leaves(self):
        out = []
        stack = [self]
        while stack:
            v = stack.pop()
            if v.children:
                stack.extend(reversed(v.children))
            else:
                out.append(v)
        return out


def derivation_leaf_counts(g):
    """Leaf count of the derivation subtree below each nonterminal."""
    counts = {}
    for nt in topological_order(g.rules):
        total = 0
        for s in g.rules[nt].rho:
            total += counts[s] if is_nonterminal(s) else 1
        counts[nt] = total
    return counts


def derivation_tree(g, budget=None):
    """T_G; equal subtrees are shared objects."""
    budget = resolve_budget(budget)
    if g.is_singleton:
        return DerivationNode(g.rules[0].head)
    if derivation_leaf_counts(g)[0] > budget:
        raise BudgetExceeded("derivation tree exceeds the budget")
    built = {}
    for nt in topological_order(g.rules):
        kids = tuple(built[s] if is_nonterminal(s) else DerivationNode(s) for s in g.rules[nt].rho)
        built[nt] = DerivationNode(nt, kids)
    return built[0]


def initial_subtree_leaves(g, prune, budget=None):
    """Leaves of the initial subtree of T_G obtained by cutting below ``prune``.

    ``prune`` is a set of node addresses (bit strings) of T_G.  Returns a
    list of ``(address, symbol)`` in left-to-right order.
    """
    budget = resolve_budget(budget)
    prune = set(prune)
    root = 0 if not g.is_singleton else g.rules[0].head
    out = []
    stack = [("", root)]
    while stack:
        addr, s = stack.pop()
        if addr in prune or not is_nonterminal(s) or g.is_singleton:
            out.append((addr, s))
            if len(out) > budget:
                raise BudgetExceeded("initial subtree exceeds the budget")
            continue
        a, b = g.rules[s].rho
        stack.append((addr + "1", b))
        stack.append((addr + "0", a))
    return out


def first_occurrence_prune_set(g):
    """Cut below every nonterminal node that repeats an earlier one in preorder.

    The resulting initial subtree has one inner node per nonterminal and
    m + 1 leaves.
    """
    if g.is_singleton:
        return set()
    prune = set()
    seen = set()
    stack = [("", 0)]
    while stack:
        addr, s = stack.pop()
        if not is_nonterminal(s):
            continue
        if s in seen:
            prune.add(addr)
            continue
        seen.add(s)
        a, b = g.rules[s].rho
        stack.append((addr + "1", b))
        stack.append((addr + "0", a))
    return prune


def value_sizes(g, budget=None):
    """|val(A_i)| for every nonterminal (leaf count; the parameter is not counted)."""
    ids, interner = intern_rules(g.rules, Interner(budget))
    return {nt: interner.size(i) for nt, i in ids.items()}


def check_initial_subtree_bound(g, prune, budget=None):
    """True iff 2|val(G)| >= sum of |s_v| over the leaves v of the initial subtree."""
    sizes = value_sizes(g, budget)
    total = 0
    for _, s in initial_subtree_leaves(g, prune, budget):
        total += sizes[s] if is_nonterminal(s) else 1
    n = sizes[0]
    return 2 * n >= total


# -- normal-form validation ---------------------------------------------------------------


class NormalFormReport:
    """Result of :func:`is_normal_form`; truthy iff no condition is violated."""

    def __init__(self, violations):
        self.violations = list(violations)

    def __bool__(self):
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __repr__(self):
        return f"NormalFormReport(ok={not self.violations}, violations={self.violations!r})"


def _shape_violations(g, alphabet=None):
    out = []
    m = g.m
    if m < 1:
        return ["a grammar needs at least one rule"]
    if any(r.kind == LEAF for r in g.rules):
        if m == 1:
            if alphabet is not None and g.rules[0].head not in alphabet:
                out.append(f"label {g.rules[0].head!r} is not in the alphabet")
            return out
        out.append("a LEAF rule is only allowed in the singleton grammar")
        return out

    def nt_ok(s, rank):
        return is_nonterminal(s) and 0 <= s < m and g.rules[s].rank == rank

    def alpha_ok(s):
        if is_nonterminal(s):
            return nt_ok(s, 0)
        return isinstance(s, str) and (alphabet is None or s in alphabet)

    for i, r in enumerate(g.rules):
        name = f"A{i}"
        if r.kind == APPLY:
            if not nt_ok(r.head, 1):
                out.append(f"{name}: {symbol_name(r.head)} must be a rank-1 nonterminal")
            if not alpha_ok(r.arg):
                out.append(f"{name}: argument {symbol_name(r.arg)} must be a label or rank-0 nonterminal")
        elif r.kind == COMPOSE:
            if not (nt_ok(r.head, 1) and nt_ok(r.arg, 1)):
                out.append(f"{name}: both composed symbols must be rank-1 nonterminals")
        elif r.kind in (LEFT, RIGHT):
            if is_nonterminal(r.head) or (alphabet is not None and r.head not in alphabet):
                out.append(f"{name}: {symbol_name(r.head)} must be an alphabet label")
            if not alpha_ok(r.arg):
                out.append(f"{name}: argument {symbol_name(r.arg)} must be a label or rank-0 nonterminal")
        else:
            out.append(f"{name}: unknown rule kind {r.kind}")
    if g.rules[0].rank != 0:
        out.append("A0 must have rank 0")
    return out


def _order_violations(g):
    out = []
    expected = 1
    for pos, s in enumerate(rho(g)):
        if not is_nonterminal(s):
            continue
        if s == 0:
            out.append(f"A0 occurs in a right-hand side (position {pos} of rho)")
        elif s > expected:
            out.append(f"A{s} occurs before the first occurrence of A{expected} (position {pos} of rho)")
            return out
        elif s == expected:
            expected += 1
    if expected != g.m and not out:
        out.append(f"A{expected} never occurs in rho")
    if not out and g.m > 1 and rho(g)[0] != 1:
        out.append("rho must start with A1")
    return out


def is_normal_form(g, alphabet=None, budget=None):
    """Check every normal-form condition and report the violated ones."""
    if isinstance(g, GeneralTSLP):
        try:
            g = to_normal_form(g)
        except NotNormalForm as exc:
            return NormalFormReport(exc.violations)
    violations = _shape_violations(g, alphabet)
    if violations or g.is_singleton:
        return NormalFormReport(violations)
    violations += _order_violations(g)
    try:
        ids = canonical_ids(g, budget)
    except NotNormalForm as exc:
        return NormalFormReport(violations + exc.violations)
    first = {}
    for i, v in enumerate(ids):
        if v in first:
            violations.append(f"val(A{first[v]}) = val(A{i})")
        else:
            first[v] = i
    return NormalFormReport(violations)


def require_normal_form(g, alphabet=None, budget=None):
    report = is_normal_form(g, alphabet, budget)
    if not report:
        raise NotNormalForm(report.violations)
    return g


def symbol_counts(g):
    return Counter(rho(g))
