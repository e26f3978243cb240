"""Empirical entropy of strings, string SLPs and the S_n family.

S_1 = baa and S_n = b S_(n-1) S_(n-1) is the preorder word of a perfect binary
tree.  It has an SLP of size 3n, yet H_k(S_n) >= 2^(n-k) for 1 <= k < n.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .config import resolve_budget
from .entropy import counts_entropy, unnormalized_empirical_entropy
from .errors import BudgetExceeded


def following_string(w, alpha):
    """w(alpha): the characters right after each (possibly overlapping) occurrence of alpha."""
    if not alpha:
        raise ValueError("alpha must be non-empty")
    out = []
    k = len(alpha)
    i = w.find(alpha)
    while i != -1 and i + k < len(w):
        out.append(w[i + k])
        i = w.find(alpha, i + 1)
    return "".join(out)


def string_entropy(w, k):
    """H_k(w) = sum over length-k contexts alpha of H(w(alpha)); k = 0 gives H(w)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return unnormalized_empirical_entropy(w)
    table = {}
    for i in range(len(w) - k):
        ctx = w[i:i + k]
        c = table.get(ctx)
        if c is None:
            c = table[ctx] = Counter()
        c[w[i + k]] += 1
    return sum(counts_entropy(c.values()) for c in table.values())


def gen_S(n, budget=None):
    """S_n as a string of length 2^(n+1) - 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if 2 ** (n + 1) - 1 > resolve_budget(budget):
        raise BudgetExceeded(f"S_{n} has 2^{n + 1} - 1 characters")
    s = "baa"
    for _ in range(n - 1):
        s = "b" + s + s
    return s


@dataclass(frozen=True)
class StringSLP:
    """Straight-line program: ``rules[i]`` is a tuple of labels (str) and earlier rule numbers (int)."""

    rules: tuple
    start: int

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(tuple(rhs) for rhs in self.rules))
        for i, rhs in enumerate(self.rules):
            if any(isinstance(s, int) and not 0 <= s < i for s in rhs):
                raise ValueError(f"rule {i} refers to a rule that is not earlier")
        if not 0 <= self.start < len(self.rules):
            raise ValueError(f"start rule {self.start} does not exist")

    @property
    def size(self):
        return sum(len(rhs) for rhs in self.rules)

    def length(self):
        lengths = []
        for rhs in self.rules:
            lengths.append(sum(lengths[s] if isinstance(s, int) else 1 for s in rhs))
        return lengths[self.start]

    def expand(self, budget=None):
        if self.length() > resolve_budget(budget):
            raise BudgetExceeded("SLP expansion exceeds the budget")
        values = []
        for rhs in self.rules:
            values.append("".join(values[s] if isinstance(s, int) else s for s in rhs))
        return values[self.start]


def slp_S(n):
    """The size-3n SLP X_1 -> baa, X_i -> b X_(i-1) X_(i-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rules = [("b", "a", "a")]
    for i in range(1, n):
        rules.append(("b", i - 1, i - 1))
    return StringSLP(tuple(rules), n - 1)


@dataclass(frozen=True)
class SnRow:
    n: int
    k: int
    hk_bits: float
    bound: int

    @property
    def holds(self):
        return self.hk_bits >= self.bound


def sn_table(n_max=16, n_min=1):
    """Rows (n, k, H_k(S_n), 2^(n-k)) for 1 <= k < n."""
    rows = []
    for n in range(max(n_min, 2), n_max + 1):
        s = gen_S(n)
        for k in range(1, n):
            rows.append(SnRow(n, k, string_entropy(s, k), 2 ** (n - k)))
    return rows
