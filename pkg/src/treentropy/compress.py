"""Grammar-based tree compressors producing normal-form TSLPs.

Two compressors are provided:

``dag``
    Hash-conses the tree into its minimal DAG.  Every shared subtree
    ``a(l, r)`` becomes ``T -> C(r)`` with ``C -> a(l, x)``.
``digram``
    Repeatedly replaces the most frequent digram (a parent symbol, a child
    position and a child symbol whose merge has at most one dangling child)
    by a fresh nonterminal, in the spirit of Re-Pair.  Once no digram occurs
    twice the remaining tree is folded the same way.

Neither carries a worst-case O(n / log n) size guarantee.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .codec import encoded_length_report
from .entropy import tree_entropies
from .errors import NotNormalForm
from .trees import PARAM_LABEL, Alphabet, node_count
from .tslp import (
    APPLY,
    COMPOSE,
    LEAF,
    LEFT,
    RIGHT,
    Interner,
    NormalFormTSLP,
    Rule,
    grammar_entropy,
    intern_rules,
    is_nonterminal,
)

METHODS = ("dag", "digram")


# -- canonical renumbering ---------------------------------------------------------------


def canonicalize(rules, start, budget=None):
    """Turn a rule map with integer keys into a normal-form TSLP.

    Nonterminals with equal values are merged (the lowest key survives),
    unreachable ones are dropped, and the rest are renumbered in order of
    first occurrence in rho, scanning rules breadth first from ``start``.
    """
    if not is_nonterminal(start):
        return NormalFormTSLP.singleton(start)
    if rules[start].kind == LEAF:
        return NormalFormTSLP.singleton(rules[start].head)
    ids, _ = intern_rules(rules, Interner(budget), roots=[start])
    rep_of_id = {}
    for key in sorted(ids):
        rep_of_id.setdefault(ids[key], key)
    rep = {key: rep_of_id[ids[key]] for key in ids}

    def sym(s):
        return rep[s] if is_nonterminal(s) else s

    number = {rep[start]: 0}
    order = [rep[start]]
    pos = 0
    while pos < len(order):
        r = rules[order[pos]]
        pos += 1
        for s in r.rho:
            if is_nonterminal(s):
                s = sym(s)
                if s not in number:
                    number[s] = len(order)
                    order.append(s)

    def renum(s):
        return number[sym(s)] if is_nonterminal(s) else s

    out = []
    for key in order:
        r = rules[key]
        out.append(Rule(r.kind, renum(r.head), renum(r.arg)))
    return NormalFormTSLP(tuple(out))


# -- normalization of general TSLPs ----------------------------------------------------------


class _RuleBuilder:
    """Collects normal-form rules under fresh integer keys, sharing identical ones."""

    IDENTITY = None

    def __init__(self):
        self.rules = {}
        self.seen = {}

    def add(self, rule):
        key = self.seen.get(rule)
        if key is None:
            key = len(self.rules)
            self.rules[key] = rule
            self.seen[rule] = key
        return key

    def apply(self, ctx, tree_sym):
        if ctx is self.IDENTITY:
            return tree_sym
        return self.add(Rule(APPLY, ctx, tree_sym))

    def compose(self, outer, inner):
        if outer is self.IDENTITY:
            return inner
        if inner is self.IDENTITY:
            return outer
        return self.add(Rule(COMPOSE, outer, inner))


def normalize(g, budget=None):
    """Normal-form TSLP deriving the same tree as the general TSLP ``g``."""
    if isinstance(g, NormalFormTSLP):
        rules = {i: r for i, r in enumerate(g.rules)}
        return canonicalize(rules, 0 if not g.is_singleton else g.rules[0].head, budget)
    ranks = g.ranks()
    builder = _RuleBuilder()
    resolved = {}
    for name in _general_order(g):
        resolved[name] = _lower(g.rules[name], ranks, resolved, builder)
    start = resolved[g.start]
    return canonicalize(builder.rules, start, budget)


def _general_order(g):
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
            deps = []
            inner = [g.rules[name]]
            while inner:
                t = inner.pop()
                if t.label in g.rules:
                    deps.append(t.label)
                inner.extend(t.children)
            for d in deps:
                if state.get(d) == 1:
                    raise NotNormalForm(f"the rules are cyclic through {d}")
                if state.get(d) is None:
                    stack.append((d, False))
    return order


def _lower(term, ranks, resolved, builder):
    """Normal-form symbol for a tree term, or context key (None = identity) for a context term."""
    post = []
    stack = [term]
    while stack:
        t = stack.pop()
        post.append(t)
        stack.extend(t.children)
    has_param = {}
    value = {}
    for t in reversed(post):
        ch = t.children
        if t.label == PARAM_LABEL and not ch:
            has_param[id(t)] = True
            value[id(t)] = builder.IDENTITY
        elif t.label in ranks:
            if ranks[t.label] == 0:
                has_param[id(t)] = False
                value[id(t)] = resolved[t.label]
            else:
                inner = ch[0]
                has_param[id(t)] = has_param[id(inner)]
                if has_param[id(inner)]:
                    value[id(t)] = builder.compose(resolved[t.label], value[id(inner)])
                else:
                    value[id(t)] = builder.apply(resolved[t.label], value[id(inner)])
        elif not ch:
            has_param[id(t)] = False
            value[id(t)] = t.label
        else:
            left, right = ch
            if has_param[id(left)]:
                has_param[id(t)] = True
                ctx = builder.add(Rule(RIGHT, t.label, value[id(right)]))
                value[id(t)] = builder.compose(ctx, value[id(left)])
            elif has_param[id(right)]:
                has_param[id(t)] = True
                ctx = builder.add(Rule(LEFT, t.label, value[id(left)]))
                value[id(t)] = builder.compose(ctx, value[id(right)])
            else:
                has_param[id(t)] = False
                ctx = builder.add(Rule(LEFT, t.label, value[id(left)]))
                value[id(t)] = builder.apply(ctx, value[id(right)])
    return value[id(term)]


# -- dag -----------------------------------------------------------------------------------------


def dag_compress(t, budget=None):
    """Normal-form TSLP from the minimal DAG of ``t``."""
    if t.left is None:
        return NormalFormTSLP.singleton(t.label)
    builder = _RuleBuilder()
    sym = {}
    shared = {}
    stack = [t]
    while stack:
        v = stack[-1]
        if id(v) in sym:
            stack.pop()
            continue
        if v.left is None:
            sym[id(v)] = v.label
            stack.pop()
            continue
        if id(v.left) in sym and id(v.right) in sym:
            key = (v.label, sym[id(v.left)], sym[id(v.right)])
            s = shared.get(key)
            if s is None:
                ctx = builder.add(Rule(LEFT, v.label, sym[id(v.left)]))
                s = shared[key] = builder.apply(ctx, sym[id(v.right)])
            sym[id(v)] = s
            stack.pop()
        else:
            stack.append(v.right)
            stack.append(v.left)
    return canonicalize(builder.rules, sym[id(t)], budget)


def distinct_subtrees(t):
    """Number of distinct subtrees of ``t`` (nodes of its minimal DAG)."""
    seen = {}
    sym = {}
    stack = [t]
    while stack:
        v = stack[-1]
        if id(v) in sym:
            stack.pop()
            continue
        if v.left is None:
            key = (v.label,)
        elif id(v.left) in sym and id(v.right) in sym:
            key = (v.label, sym[id(v.left)], sym[id(v.right)])
        else:
            stack.append(v.right)
            stack.append(v.left)
            continue
        sym[id(v)] = seen.setdefault(key, len(seen))
        stack.pop()
    return len(seen)


# -- digram --------------------------------------------------------------------------------------


class _MNode:
    __slots__ = ("sym", "kids", "parent", "pidx", "order", "alive")

    def __init__(self, sym, order):
        self.sym = sym
        self.kids = []
        self.parent = None
        self.pidx = 0
        self.order = order
        self.alive = True


def _symkey(s):
    return (1, s) if is_nonterminal(s) else (0, s)


def _sortkey(key):
    p, i, c = key
    return (_symkey(p), i, _symkey(c))


@dataclass
class DigramTrace:
    """Sizes (nodes + 2 * rules) after each round; ``shared_rounds`` replaced >= 2 occurrences."""

    sizes: list = field(default_factory=list)
    shared_rounds: int = 0


class _DigramState:
    def __init__(self, t):
        self.occ = {}
        self.heap = []
        self.rules = {}
        self.next_key = 0
        self.root = self._build(t)
        self.nodes = self._count
        for v in self._preorder():
            for j, c in enumerate(v.kids):
                self._add(v, j, c)

    def _build(self, t):
        count = 0
        root = _MNode(t.label, 0)
        stack = [(t, root)]
        while stack:
            src, dst = stack.pop()
            count += 1
            if src.left is not None:
                left = _MNode(src.left.label, 0)
                right = _MNode(src.right.label, 0)
                dst.kids = [left, right]
                left.parent, left.pidx = dst, 0
                right.parent, right.pidx = dst, 1
                stack.append((src.right, right))
                stack.append((src.left, left))
        self._count = count
        order = 0
        for v in self._walk(root):
            v.order = order
            order += 1
        return root

    @staticmethod
    def _walk(root):
        stack = [root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(v.kids))

    def _preorder(self):
        return self._walk(self.root)

    @staticmethod
    def _key(p, j, c):
        if len(p.kids) + len(c.kids) - 1 > 1:
            return None
        return (p.sym, j, c.sym)

    def _add(self, p, j, c):
        key = self._key(p, j, c)
        if key is None:
            return
        s = self.occ.get(key)
        if s is None:
            s = self.occ[key] = set()
        s.add(p)
        heapq.heappush(self.heap, (-len(s), _sortkey(key), key))

    def _remove(self, p, j, c):
        key = self._key(p, j, c)
        if key is None:
            return
        s = self.occ.get(key)
        if s is not None:
            s.discard(p)
            if not s:
                del self.occ[key]

    def effective(self, key):
        s = self.occ.get(key)
        if not s:
            return 0
        if key[0] != key[2]:
            return len(s)
        return len(self._greedy(key, s))

    def _greedy(self, key, s):
        chosen = []
        taken = set()
        for p in sorted(s, key=lambda v: v.order):
            c = p.kids[key[1]]
            if p in taken:
                continue
            chosen.append(p)
            taken.add(c)
        return chosen

    def best(self):
        while self.heap:
            neg, sk, key = self.heap[0]
            eff = self.effective(key)
            if eff == 0:
                heapq.heappop(self.heap)
                continue
            if eff != -neg:
                heapq.heapreplace(self.heap, (-eff, sk, key))
                continue
            return key, eff
        return None, 0

    def replace(self, key):
        s = self.occ[key]
        targets = self._greedy(key, s) if key[0] == key[2] else sorted(s, key=lambda v: v.order)
        new = self.next_key
        self.next_key += 1
        psym, i, csym = key
        first = targets[0]
        crank = len(first.kids[i].kids)
        if is_nonterminal(psym):
            rule = Rule(APPLY if crank == 0 else COMPOSE, psym, csym)
        else:
            rule = Rule(LEFT if i == 0 else RIGHT, psym, csym)
        self.rules[new] = rule
        done = 0
        for p in targets:
            if not p.alive or p not in self.occ.get(key, ()):
                continue
            c = p.kids[i]
            if p.parent is not None:
                self._remove(p.parent, p.pidx, p)
            for j, kid in enumerate(p.kids):
                self._remove(p, j, kid)
            for j, kid in enumerate(c.kids):
                self._remove(c, j, kid)
            kids = p.kids[:i] + c.kids + p.kids[i + 1:]
            p.sym = new
            p.kids = kids
            for j, kid in enumerate(kids):
                kid.parent, kid.pidx = p, j
            c.alive = False
            if p.parent is not None:
                self._add(p.parent, p.pidx, p)
            for j, kid in enumerate(kids):
                self._add(p, j, kid)
            done += 1
        self.nodes -= done
        return done


def digram_compress(t, budget=None, trace=None):
    """Normal-form TSLP built by repeated digram replacement."""
    if t.left is None:
        if trace is not None:
            trace.sizes.append(1)
        return NormalFormTSLP.singleton(t.label)
    state = _DigramState(t)
    if trace is not None:
        trace.sizes.append(state.nodes)
    while state.root.kids:
        key, count = state.best()
        if key is None:
            raise RuntimeError("no digram left in a tree with more than one node")
        state.replace(key)
        if trace is not None:
            if count >= 2:
                trace.shared_rounds += 1
            trace.sizes.append(state.nodes + 2 * len(state.rules))
    return canonicalize(state.rules, state.root.sym, budget)


def compress(t, method="dag", budget=None):
    """Compress ``t`` into a normal-form TSLP with the chosen method."""
    if method == "dag":
        return dag_compress(t, budget)
    if method == "digram":
        return digram_compress(t, budget)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


# -- measurement --------------------------------------------------------------------------------


@dataclass
class Measurement:
    """Sizes and entropies of a tree and its compressed grammar."""

    n: int
    nodes: int
    sigma: int
    m: int
    code_bits: int
    grammar_entropy: float
    hk: dict
    method: str

    def code_within_entropy(self, k):
        """Whether |B(G)| <= H_k(t); reported, never asserted."""
        return self.code_bits <= self.hk[k]


def measure(t, ks=(0, 1, 2), method="dag", box=None, alphabet=None, budget=None):
    if alphabet is None:
        alphabet = Alphabet.of(t, box=box)
    g = compress(t, method, budget)
    report = encoded_length_report(g, alphabet, check=False)
    nodes = node_count(t)
    return Measurement(
        n=(nodes + 1) // 2,
        nodes=nodes,
        sigma=alphabet.sigma,
        m=g.m,
        code_bits=report.total,
        grammar_entropy=0.0 if g.is_singleton else grammar_entropy(g),
        hk=tree_entropies(t, ks, alphabet.box),
        method=method,
    )


# -- random grammars ----------------------------------------------------------------------------


def random_normal_form(m, labels, rng, max_size=10**5, budget=None):
    """Random normal-form TSLP with at most ``m`` nonterminals.

    Rules are drawn bottom up, preferring operands that are still unused so
    that most of them stay reachable; duplicates and unreachable rules are
    then removed by :func:`canonicalize`.  ``max_size`` bounds the number of
    leaves of every derived value.  ``rng`` is a :class:`random.Random`.
    """
    labels = list(labels)
    if m <= 1:
        return NormalFormTSLP.singleton(rng.choice(labels))
    rules = {}
    size = {}
    rank = {}
    unused = {0: [], 1: []}

    def pick(r):
        pool = unused[r]
        if pool and rng.random() < 0.95:
            return pool.pop(rng.randrange(len(pool)))
        keys = [key for key in rules if rank[key] == r]
        return rng.choice(keys) if keys else None

    def alpha():
        if rng.random() < 0.5:
            key = pick(0)
            if key is not None and size[key] <= max_size // 2:
                return key, size[key]
        return rng.choice(labels), 1

    def add(rule, r, s):
        key = len(rules)
        rules[key] = rule
        rank[key] = r
        size[key] = s
        unused[r].append(key)
        return key

    # tying the unused operands together below adds at most two rules per operand, plus one
    while not rules or len(rules) + 2 * (len(unused[0]) + len(unused[1])) + 1 < m:
        roll = rng.random()
        have_ctx = any(rank[key] == 1 for key in rules)
        if not have_ctx or roll < 0.45:
            a, s = alpha()
            add(Rule(LEFT if rng.random() < 0.5 else RIGHT, rng.choice(labels), a), 1, s + 1)
        elif roll < 0.7:
            outer, inner = pick(1), pick(1)
            if size[outer] + size[inner] <= max_size:
                add(Rule(COMPOSE, outer, inner), 1, size[outer] + size[inner])
        else:
            ctx = pick(1)
            a, s = alpha()
            if size[ctx] + s <= max_size:
                add(Rule(APPLY, ctx, a), 0, size[ctx] + s)
    while True:
        ctxs, trees = unused[1], unused[0]
        if len(ctxs) >= 2:
            outer, inner = ctxs.pop(), ctxs.pop()
            add(Rule(COMPOSE, outer, inner), 1, size[outer] + size[inner])
        elif ctxs and trees:
            ctx, a = ctxs.pop(), trees.pop()
            add(Rule(APPLY, ctx, a), 0, size[ctx] + size[a])
        elif ctxs:
            ctx = ctxs.pop()
            add(Rule(APPLY, ctx, rng.choice(labels)), 0, size[ctx] + 1)
        elif len(trees) >= 2:
            a = trees.pop()
            add(Rule(LEFT if rng.random() < 0.5 else RIGHT, rng.choice(labels), a), 1, size[a] + 1)
        else:
            break
    start = trees[0] if trees else len(rules) - 1
    return canonicalize(rules, start, budget)
