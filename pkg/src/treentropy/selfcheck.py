"""Invariant suites shared by the ``selfcheck`` command and the test-suite.

Each suite returns a :class:`SuiteResult` with the number of checks run and
a list of failure messages.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .codec import SymbolCounts, decode, encode, multinomial, multiset_rank, multiset_unrank
from .compress import METHODS, compress, random_normal_form
from .entropy import history_histograms, random_process, tree_entropies
from .strings import following_string, gen_S, sn_table, string_entropy
from .trees import (
    Alphabet,
    count_contexts,
    count_depth_family,
    count_trees,
    enumerate_contexts,
    enumerate_depth_family,
    enumerate_trees,
    random_tree,
)
from .tslp import APPLY, COMPOSE, LEFT, RIGHT, NormalFormTSLP, Rule, is_normal_form, val

TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self):
        return not self.failures

    def check(self, cond, message):
        self.checks += 1
        if not cond:
            self.failures.append(message)


# -- probability sums over exhaustive families ------------------------------------------


def feature_matrix(family, k, box):
    """Count matrix C with C[i, j] = number of nodes of family[i] with history/outcome keys[j]."""
    index = {}
    rows, cols, vals = [], [], []
    for i, s in enumerate(family):
        for z, counts in history_histograms(s, [k], box)[k].counts.items():
            for a, c in counts.items():
                j = index.setdefault((z, a), len(index))
                rows.append(i)
                cols.append(j)
                vals.append(c)
    mat = np.zeros((len(family), max(len(index), 1)))
    np.add.at(mat, (rows, cols), vals)
    return mat, list(index)


def probability_sums(family, k, box, processes):
    """Sum of Prob_P(s) over the family, one value per process."""
    mat, keys = feature_matrix(family, k, box)
    logp = np.zeros((mat.shape[1], len(processes)))
    for p, proc in enumerate(processes):
        for j, (z, a) in enumerate(keys):
            logp[j, p] = math.log2(proc.row(z)[a])
    return np.exp2(mat @ logp).sum(axis=0)


def probability_sum_suite(max_depth=4, max_context=4, sigmas=(1, 2), ks=(0, 1, 2), processes=100, seed=0):
    """Sum over the depth family <= 1 and sum over C_n <= n + 1 for random processes."""
    res = SuiteResult("probability-sums")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    for sigma in sigmas:
        labels = [chr(ord("a") + i) for i in range(sigma)]
        families = [("T'", d, enumerate_depth_family(d, labels), 1.0) for d in range(1, max_depth + 1)]
        families += [("C", n, enumerate_contexts(n, labels), n + 1.0) for n in range(max_context + 1)]
        for k in ks:
            procs = [random_process(k, labels, rng) for _ in range(processes)]
            for name, size, family, bound in families:
                sums = probability_sums(family, k, labels[0], procs)
                worst = float(sums.max())
                res.check(
                    worst <= bound + TOL,
                    f"{name}_{size} sigma={sigma} k={k}: sum of probabilities {worst} > {bound}",
                )
    res.seconds = time.perf_counter() - start
    return res


# -- enumeration ---------------------------------------------------------------------------


def enumeration_suite(max_n=5, sigmas=(1, 2)):
    res = SuiteResult("enumeration")
    start = time.perf_counter()
    for sigma in sigmas:
        labels = [chr(ord("a") + i) for i in range(sigma)]
        for n in range(1, max_n + 1):
            trees = enumerate_trees(n, labels)
            res.check(len(trees) == count_trees(n, sigma), f"|T_{n}| for sigma={sigma}")
            res.check(len(set(trees)) == len(trees), f"duplicate trees for n={n}, sigma={sigma}")
        for n in range(0, max_n):
            ctxs = enumerate_contexts(n, labels)
            res.check(len(ctxs) == count_contexts(n, sigma), f"|C_{n}| for sigma={sigma}")
            res.check(len(set(ctxs)) == len(ctxs), f"duplicate contexts for n={n}, sigma={sigma}")
        for d in range(1, 4):
            fam = enumerate_depth_family(d, labels)
            res.check(len(fam) == count_depth_family(d, sigma), f"|T'_{d}| for sigma={sigma}")
    res.seconds = time.perf_counter() - start
    return res


# -- codec -----------------------------------------------------------------------------------


def _flip(bits, rng):
    i = rng.randrange(len(bits))
    return bits[:i] + ("1" if bits[i] == "0" else "0") + bits[i + 1:]


def codec_suite(cases=200, max_m=50, max_sigma=8, seed=0, inject_fault=False):
    """Round trips of random grammars; with ``inject_fault`` one bit of each code is flipped."""
    res = SuiteResult("codec")
    start = time.perf_counter()
    rng = random.Random(seed)
    for i in range(cases):
        sigma = rng.randint(1, max_sigma)
        labels = [chr(ord("a") + j) for j in range(sigma)]
        alphabet = Alphabet(labels)
        g = random_normal_form(rng.randint(1, max_m), labels, rng)
        bits = encode(g, alphabet)
        if inject_fault:
            bits = _flip(bits, rng)
        try:
            back, used = decode(bits + "1", alphabet)
            res.check(back == g and used == len(bits), f"case {i}: round trip changed the grammar")
        except ValueError as exc:
            res.check(False, f"case {i}: {exc}")
    res.seconds = time.perf_counter() - start
    return res


def rank_suite(max_arrangements=10**4, max_total=8):
    """Exhaustive rank/unrank bijection for every positive count vector with |S| <= the cap."""
    res = SuiteResult("rank")
    start = time.perf_counter()
    for counts in iter_count_vectors(max_total, max_arrangements):
        sc = SymbolCounts(tuple(range(len(counts))), counts)
        i = -1
        for i, word in enumerate(distinct_permutations(sc.smallest())):
            if multiset_rank(word, sc) != i or tuple(multiset_unrank(i, sc)) != word:
                res.check(False, f"counts {counts}: rank mismatch at {i}")
                break
        else:
            res.check(i + 1 == sc.arrangements(), f"counts {counts}: |S| mismatch")
    res.seconds = time.perf_counter() - start
    return res


def iter_count_vectors(max_total, max_arrangements):
    """Compositions (ordered, positive parts) of 1..max_total with few enough arrangements."""
    for total in range(1, max_total + 1):
        for cuts in itertools.product((False, True), repeat=total - 1):
            counts, run = [], 1
            for cut in cuts:
                if cut:
                    counts.append(run)
                    run = 1
                else:
                    run += 1
            counts.append(run)
            if multinomial(counts) <= max_arrangements:
                yield tuple(counts)


def distinct_permutations(word):
    """Distinct permutations of a sorted word in lexicographic order."""
    w = list(word)
    n = len(w)
    while True:
        yield tuple(w)
        i = n - 2
        while i >= 0 and w[i] >= w[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while w[j] <= w[i]:
            j -= 1
        w[i], w[j] = w[j], w[i]
        w[i + 1:] = reversed(w[i + 1:])


def enumerate_normal_forms(max_m, alphabet):
    """Every normal-form grammar with at most ``max_m`` rules over ``alphabet``."""
    labels = list(alphabet.labels)
    out = [NormalFormTSLP.singleton(a) for a in labels]
    for m in range(2, max_m + 1):
        nts = list(range(1, m))
        args = labels + nts
        choices = []
        for h in nts:
            for a in args:
                choices.append(Rule(APPLY, h, a))
        for h in nts:
            for a in nts:
                choices.append(Rule(COMPOSE, h, a))
        for h in labels:
            for a in args:
                choices.append(Rule(LEFT, h, a))
                choices.append(Rule(RIGHT, h, a))
        firsts = [r for r in choices if r.kind == APPLY]
        for rules in itertools.product(firsts, *([choices] * (m - 1))):
            g = NormalFormTSLP(rules)
            if _order_ok(g) and is_normal_form(g, alphabet):
                out.append(g)
    return out


def _order_ok(g):
    expected = 1
    for r in g.rules:
        for s in r.rho:
            if isinstance(s, int):
                if s > expected or s == 0:
                    return False
                if s == expected:
                    expected += 1
    return expected == g.m


def prefix_suite(max_m=3, sigmas=(1, 2)):
    """No code word is a prefix of another, over all normal-form grammars with m <= max_m."""
    res = SuiteResult("prefix")
    start = time.perf_counter()
    for sigma in sigmas:
        alphabet = Alphabet([chr(ord("a") + i) for i in range(sigma)])
        codes = sorted(encode(g, alphabet) for g in enumerate_normal_forms(max_m, alphabet))
        res.check(len(codes) > 0, f"sigma={sigma}: no grammars enumerated")
        for a, b in zip(codes, codes[1:]):
            res.check(not b.startswith(a), f"sigma={sigma}: {a} is a prefix of {b}")
    res.seconds = time.perf_counter() - start
    return res


# -- entropy and compression ---------------------------------------------------------------------


def monotonicity_suite(cases=100, max_leaves=200, max_k=4, seed=0):
    res = SuiteResult("monotonicity")
    start = time.perf_counter()
    rng = random.Random(seed)
    for i in range(cases):
        sigma = rng.randint(1, 4)
        labels = [chr(ord("a") + j) for j in range(sigma)]
        t = random_tree(rng.randint(1, max_leaves), labels, rng)
        hk = tree_entropies(t, range(max_k + 1))
        bound = (2 * t.size - 1) * math.log2(2 * sigma)
        for k in range(max_k):
            res.check(hk[k + 1] <= hk[k] + TOL, f"case {i}: H_{k + 1} > H_{k}")
        res.check(0 <= hk[0] <= bound + TOL, f"case {i}: H_0 outside [0, (2n-1) log2(2 sigma)]")
    res.seconds = time.perf_counter() - start
    return res


def compress_suite(cases=50, max_leaves=500, seed=0):
    res = SuiteResult("compress")
    start = time.perf_counter()
    rng = random.Random(seed)
    for i in range(cases):
        labels = [chr(ord("a") + j) for j in range(rng.randint(1, 3))]
        t = random_tree(rng.randint(1, max_leaves), labels, rng)
        for method in METHODS:
            g = compress(t, method)
            res.check(val(g) == t, f"case {i}: {method} does not reproduce the tree")
            res.check(bool(is_normal_form(g)), f"case {i}: {method} output is not in normal form")
    res.seconds = time.perf_counter() - start
    return res


def sn_suite(n_max=16):
    res = SuiteResult("sn")
    start = time.perf_counter()
    for row in sn_table(n_max):
        res.check(row.holds, f"H_{row.k}(S_{row.n}) = {row.hk_bits} < {row.bound}")
    for n in range(1, n_max + 1):
        s = gen_S(n)
        res.check(len(s) == 2 ** (n + 1) - 1, f"|S_{n}|")
        res.check(string_entropy(s, 0) >= 0.9 * len(s), f"H(S_{n}) < 0.9 |S_{n}|")
        for m in range(1, n + 1):
            w = following_string(s, "b" * m)
            res.check(len(w) == 2 ** (n - m + 1) - 1, f"|S_{n}(b^{m})|")
            res.check(w.count("a") == 2 ** (n - m), f"|S_{n}(b^{m})|_a")
    res.seconds = time.perf_counter() - start
    return res


def run(level="quick", inject_fault=None):
    """Run the suites for ``level``; returns the list of results."""
    fault = inject_fault == "codec"
    if level == "quick":
        return [
            enumeration_suite(max_n=4),
            codec_suite(cases=100, inject_fault=fault),
            monotonicity_suite(cases=50),
        ]
    if level == "full":
        return [
            enumeration_suite(),
            codec_suite(cases=1000, inject_fault=fault),
            rank_suite(),
            prefix_suite(),
            monotonicity_suite(),
            compress_suite(),
            probability_sum_suite(),
            sn_suite(),
        ]
    raise ValueError(f"unknown level {level!r}")
