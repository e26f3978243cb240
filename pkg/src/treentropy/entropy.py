"""Shannon entropy, empirical distributions and k-th order tree entropy.

All logarithms are base 2 and ``0 * log 0 = 0``.  Sums of many small terms
go through :func:`math.fsum`.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import product

from .errors import AbsoluteContinuityError
from .trees import X, default_box, iter_histories, labels_of

PROB_TOL = 1e-9


class Distribution(Mapping):
    """Finite probability distribution, a read-only mapping outcome -> probability."""

    __slots__ = ("_probs",)

    def __init__(self, probs, tol=PROB_TOL):
        probs = dict(probs)
        if not probs:
            raise ValueError("a distribution needs a non-empty support")
        for outcome, p in probs.items():
            if not p >= 0:
                raise ValueError(f"negative or NaN probability for {outcome!r}: {p}")
        total = math.fsum(probs.values())
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self._probs = probs

    @classmethod
    def uniform(cls, outcomes):
        outcomes = list(outcomes)
        return cls({o: 1.0 / len(outcomes) for o in outcomes})

    @classmethod
    def point(cls, outcome):
        return cls({outcome: 1.0})

    @classmethod
    def empirical(cls, items):
        counts = Counter(items)
        n = sum(counts.values())
        return cls({a: c / n for a, c in counts.items()})

    @property
    def support(self):
        return [a for a, p in self._probs.items() if p > 0]

    def __getitem__(self, outcome):
        return self._probs[outcome]

    def get(self, outcome, default=0.0):
        return self._probs.get(outcome, default)

    def __iter__(self):
        return iter(self._probs)

    def __len__(self):
        return len(self._probs)

    def __repr__(self):
        return f"Distribution({self._probs!r})"


def shannon_entropy(p):
    """H(p) in bits."""
    return math.fsum(-q * math.log2(q) for q in p.values() if q > 0)


def kl_divergence(p, q):
    """D(p || q) in bits; raises if q is zero somewhere p is not."""
    terms = []
    for a, pa in p.items():
        if pa <= 0:
            continue
        qa = q.get(a, 0.0)
        if qa <= 0:
            raise AbsoluteContinuityError(f"q({a!r}) = 0 while p({a!r}) = {pa}")
        terms.append(pa * math.log2(pa / qa))
    return math.fsum(terms)


def counts_entropy(counts):
    n = sum(counts)
    return math.fsum(c * math.log2(n / c) for c in counts if c)


def unnormalized_empirical_entropy(items):
    """n * H(p) of the empirical distribution of ``items``; 0 for empty input."""
    return counts_entropy(Counter(items).values())


# -- tree processes -----------------------------------------------------------


@dataclass
class HistoryHistogram:
    """Per-history counts: ``counts[z][(label, degree)]`` is m_{z,(label,degree)}."""

    k: int
    box: object
    counts: dict = field(default_factory=dict)

    def m(self, z):
        c = self.counts.get(z)
        return sum(c.values()) if c else 0

    @property
    def total(self):
        return sum(sum(c.values()) for c in self.counts.values())

    def histories(self):
        return list(self.counts)


def _resolve_box(s, box):
    if box is None:
        box = default_box(s)
    return box


def history_histogram(s, k, box=None):
    """Count nodes of V(s) by k-history and by (label, degree)."""
    box = _resolve_box(s, box)
    counts = {}
    for z, ld in iter_histories(s, k, box):
        c = counts.get(z)
        if c is None:
            c = counts[z] = Counter()
        c[ld] += 1
    return HistoryHistogram(k, box, counts)


def history_histograms(s, ks, box=None):
    """Histograms for several orders from a single traversal."""
    box = _resolve_box(s, box)
    ks = sorted(set(ks))
    kmax = ks[-1] if ks else 0
    tables = {k: {} for k in ks}
    for z, ld in iter_histories(s, kmax, box):
        for k in ks:
            zk = z[kmax - k:]
            table = tables[k]
            c = table.get(zk)
            if c is None:
                c = table[zk] = Counter()
            c[ld] += 1
    return {k: HistoryHistogram(k, box, tables[k]) for k in ks}


def histogram_entropy(hist):
    """Sum over histories z of m_z * H(P_z) for a histogram."""
    return math.fsum(
        c * math.log2(n / c)
        for counts in hist.counts.values()
        for n in (sum(counts.values()),)
        for c in counts.values()
    )


def tree_entropy(t, k, box=None):
    """k-th order empirical entropy H_k(t) in bits.

    ``box`` is the padding label for histories shorter than ``k``; it defaults
    to the smallest label of ``t``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    return histogram_entropy(history_histogram(t, k, box))


def tree_entropies(t, ks, box=None):
    """``{k: H_k(t)}`` for all requested orders, sharing one traversal."""
    return {k: histogram_entropy(h) for k, h in history_histograms(t, ks, box).items()}


def label_degree_pairs(labels):
    return [(a, d) for a in labels for d in (0, 2)]


def all_histories(k, labels):
    """L_k: every sequence of k (label, direction) pairs."""
    pairs = [(a, d) for a in labels for d in (0, 1)]
    return [tuple(z) for z in product(pairs, repeat=k)]


@dataclass
class TreeProcess:
    """A k-th order tree process: one distribution over (label, degree) per k-history.

    Histories missing from ``rows`` use ``default``.  For empirical processes
    those rows are arbitrary (no node of the source tree had that history),
    which :meth:`is_arbitrary` reports.
    """

    k: int
    box: object
    rows: dict
    default: Distribution | None = None

    def row(self, z):
        p = self.rows.get(z)
        if p is None:
            if self.default is None:
                raise KeyError(f"no distribution for history {z!r}")
            return self.default
        return p

    def is_arbitrary(self, z):
        return z not in self.rows

    def __getitem__(self, z):
        return self.row(z)


def empirical_tree_process(t, k, box=None, labels=None):
    """P^t: P_z(a) = m_{z,a} / m_z for every history seen in ``t``.

    Unseen histories fall back to the uniform distribution over
    ``labels x {0, 2}`` (labels default to those of ``t`` plus the box).
    """
    hist = history_histogram(t, k, box)
    rows = {}
    for z, counts in hist.counts.items():
        m = sum(counts.values())
        rows[z] = Distribution({a: c / m for a, c in counts.items()})
    if labels is None:
        labels = sorted(labels_of(t) | {hist.box})
    default = Distribution.uniform(label_degree_pairs(labels))
    return TreeProcess(k, hist.box, rows, default)


def random_process(k, labels, rng, box=None, histories=None, concentration=1.0):
    """Random full-support k-th order process (Dirichlet rows).

    ``rng`` is a :class:`numpy.random.Generator`.  Only the rows for
    ``histories`` are materialised when given; by default all of L_k.
    """
    labels = list(labels)
    outcomes = label_degree_pairs(labels)
    if histories is None:
        histories = all_histories(k, labels)
    histories = list(histories)
    alpha = [concentration] * len(outcomes)
    draws = rng.dirichlet(alpha, size=len(histories)) if histories else []
    rows = {}
    for z, ps in zip(histories, draws):
        ps = [max(float(p), 1e-300) for p in ps]
        total = math.fsum(ps)
        rows[z] = Distribution({o: p / total for o, p in zip(outcomes, ps)})
    return TreeProcess(k, labels[0] if box is None else box, rows)


def information_content(process, s):
    """-log2 Prob_P(s) in bits, or ``math.inf`` when some factor is zero.

    Summed as -log2 terms, so tiny probabilities do not underflow.
    """
    if s is X:
        return 0.0
    hist = history_histogram(s, process.k, process.box)
    terms = []
    for z, counts in hist.counts.items():
        row = process.row(z)
        for a, c in counts.items():
            p = row.get(a, 0.0)
            if p <= 0:
                return math.inf
            terms.append(-c * math.log2(p))
    return math.fsum(terms)


def probability(process, s):
    """Prob_P(s) as a float (may underflow to 0 for large trees)."""
    bits = information_content(process, s)
    return 0.0 if bits == math.inf else 2.0 ** -bits
