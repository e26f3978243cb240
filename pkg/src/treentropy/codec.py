"""Prefix-free binary coding B(G) = w0 w1 w2 w3 w4 of normal-form TSLPs.

Bit strings are ``str`` objects over ``"01"``.  With m rules and sigma labels:

* w0 = 0^(m-1) 1 gives m;
* w1 holds the 2-bit type of every rule;
* w2 = 1 0^|u_1| ... 1 0^|u_(m-1)| gives the gaps between first occurrences in rho_G;
* w3 = 0^(k_1-1) 1 ... 0^(k_(m-1)-1) 1  0^(l_1) 1 ... 0^(l_sigma) 1 gives the
  symbol counts of omega_G (k_i occurrences of A_i in rho_G, l_j of label j);
* w4 is the lexicographic rank of omega_G among all words with those counts,
  written with exactly ceil(log2 |S|) bits.

The singleton grammar ``A0 -> a`` is coded as ``1`` followed by the index of
``a`` in ceil(log2 sigma) bits.  All arithmetic is on exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .entropy import unnormalized_empirical_entropy
from .errors import MalformedCode, MultiplicityMismatch, NotNormalForm
from .trees import Alphabet
from .tslp import (
    APPLY,
    COMPOSE,
    LEAF,
    NormalFormTSLP,
    Rule,
    is_nonterminal,
    is_normal_form,
    omega,
    rho,
    split_rho,
)

MAGIC = b"TSLP"
VERSION = 1


# -- enumerative coding of multiset permutations -----------------------------------


@dataclass(frozen=True)
class SymbolCounts:
    """Ordered symbols with multiplicities; the order defines the lexicographic order."""

    symbols: tuple
    counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.symbols) != len(self.counts):
            raise ValueError("symbols and counts differ in length")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("symbols must be distinct")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative multiplicity")

    @classmethod
    def of(cls, word, order):
        index = {s: i for i, s in enumerate(order)}
        counts = [0] * len(order)
        for s in word:
            if s not in index:
                raise MultiplicityMismatch(f"symbol {s!r} is not in the ordering")
            counts[index[s]] += 1
        return cls(tuple(order), tuple(counts))

    @property
    def total(self):
        return sum(self.counts)

    def arrangements(self):
        """|S|: the number of distinct words with these multiplicities."""
        return multinomial(self.counts)

    def smallest(self):
        return [s for s, c in zip(self.symbols, self.counts) for _ in range(c)]


def multinomial(counts):
    result = math.factorial(sum(counts))
    for c in counts:
        result //= math.factorial(c)
    return result


class _Fenwick:
    def __init__(self, values):
        self.n = len(values)
        self.tree = [0] * (self.n + 1)
        for i, v in enumerate(values):
            self.add(i, v)

    def add(self, i, delta):
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & -i

    def prefix(self, i):
        """Sum of values[0:i]."""
        total = 0
        while i > 0:
            total += self.tree[i]
            i -= i & -i
        return total

    def search(self, target):
        """Smallest i with prefix(i + 1) > target (values must be nonnegative)."""
        pos = 0
        step = 1 << self.n.bit_length()
        while step:
            nxt = pos + step
            if nxt <= self.n and self.tree[nxt] <= target:
                pos = nxt
                target -= self.tree[nxt]
            step >>= 1
        return pos


def multiset_rank(word, counts):
    """Lexicographic index of ``word`` among all arrangements of ``counts``."""
    index = {s: i for i, s in enumerate(counts.symbols)}
    remaining = list(counts.counts)
    word = list(word)
    if len(word) != counts.total:
        raise MultiplicityMismatch(f"word has length {len(word)}, counts sum to {counts.total}")
    fen = _Fenwick(remaining)
    n = len(word)
    arrangements = multinomial(remaining)
    rank = 0
    for s in word:
        i = index.get(s)
        if i is None or remaining[i] == 0:
            raise MultiplicityMismatch(f"symbol {s!r} occurs more often than its count")
        rank += arrangements * fen.prefix(i) // n
        arrangements = arrangements * remaining[i] // n
        remaining[i] -= 1
        fen.add(i, -1)
        n -= 1
    return rank


def multiset_unrank(rank, counts):
    """Inverse of :func:`multiset_rank`."""
    remaining = list(counts.counts)
    n = sum(remaining)
    arrangements = multinomial(remaining)
    if not 0 <= rank < arrangements:
        raise ValueError(f"rank {rank} outside [0, {arrangements})")
    fen = _Fenwick(remaining)
    word = []
    while n:
        i = fen.search(rank * n // arrangements)
        rank -= arrangements * fen.prefix(i) // n
        arrangements = arrangements * remaining[i] // n
        remaining[i] -= 1
        fen.add(i, -1)
        n -= 1
        word.append(counts.symbols[i])
    return word


def code_length(arrangements):
    """ceil(log2 |S|) for |S| >= 1."""
    return (arrangements - 1).bit_length()


# -- B(G) ---------------------------------------------------------------------------


def rule_type(rule):
    if rule.kind == LEAF:
        raise ValueError("the singleton rule has no type")
    return rule.kind


def symbol_order(g, alphabet):
    """a_1 < ... < a_sigma < A_1 < ... < A_(m-1)."""
    return tuple(alphabet.labels) + tuple(range(1, g.m))


def symbol_counts(g, alphabet):
    return SymbolCounts.of(omega(g), symbol_order(g, alphabet))


@dataclass(frozen=True)
class EncodedParts:
    w0: str
    w1: str
    w2: str
    w3: str
    w4: str
    arrangements: int
    rank: int

    @property
    def bits(self):
        return self.w0 + self.w1 + self.w2 + self.w3 + self.w4

    def lengths(self):
        return tuple(len(w) for w in (self.w0, self.w1, self.w2, self.w3, self.w4))


def _singleton_width(alphabet):
    return code_length(alphabet.sigma)


def encode_parts(g, alphabet, check=True):
    """The five component words of B(G)."""
    if check:
        report = is_normal_form(g, alphabet)
        if not report:
            raise NotNormalForm(report.violations)
    if g.is_singleton:
        width = _singleton_width(alphabet)
        index = alphabet.index(g.rules[0].head)
        return EncodedParts("1", "", "", "", format(index, f"0{width}b") if width else "", alphabet.sigma, index)
    m = g.m
    w0 = "0" * (m - 1) + "1"
    w1 = "".join(format(rule_type(r), "02b") for r in g.rules)
    w2 = "".join("1" + "0" * len(u) for u in split_rho(g))
    word = rho(g)
    occurrences = [0] * m
    for s in word:
        if is_nonterminal(s):
            occurrences[s] += 1
    counts = symbol_counts(g, alphabet)
    w3 = "".join("0" * (occurrences[i] - 1) + "1" for i in range(1, m))
    w3 += "".join("0" * counts.counts[j] + "1" for j in range(alphabet.sigma))
    arrangements = counts.arrangements()
    rank = multiset_rank(omega(g), counts)
    width = code_length(arrangements)
    w4 = format(rank, f"0{width}b") if width else ""
    return EncodedParts(w0, w1, w2, w3, w4, arrangements, rank)


def encode(g, alphabet, check=True):
    """B(G) as a bit string."""
    return encode_parts(g, alphabet, check).bits


class _Reader:
    def __init__(self, bits, pos=0):
        self.bits = bits
        self.pos = pos

    def bit(self):
        if self.pos >= len(self.bits):
            raise MalformedCode("code ends prematurely")
        b = self.bits[self.pos]
        if b not in "01":
            raise MalformedCode(f"invalid bit {b!r} at position {self.pos}")
        self.pos += 1
        return b

    def zeros_then_one(self):
        """Length of a run 0^j 1."""
        j = 0
        while self.bit() == "0":
            j += 1
        return j

    def take(self, n):
        if self.pos + n > len(self.bits):
            raise MalformedCode("code ends prematurely")
        chunk = self.bits[self.pos:self.pos + n]
        if chunk.strip("01"):
            raise MalformedCode(f"invalid bits near position {self.pos}")
        self.pos += n
        return chunk


def decode(bits, alphabet, strict=True):
    """Decode the code word at the start of ``bits``.

    Returns ``(grammar, consumed)``.  With ``strict`` the decoded grammar must
    also satisfy the value-distinctness condition of the normal form.
    """
    r = _Reader(bits)
    m = r.zeros_then_one() + 1
    sigma = alphabet.sigma
    if m == 1:
        width = _singleton_width(alphabet)
        index = int(r.take(width), 2) if width else 0
        if index >= sigma:
            raise MalformedCode(f"label index {index} out of range")
        return NormalFormTSLP.singleton(alphabet.labels[index]), r.pos
    types = [int(r.take(2), 2) for _ in range(m)]
    # |w2| = 2m is fixed, which is what makes the last gap unambiguous
    w2 = r.take(2 * m)
    if not w2.startswith("1") or w2.count("1") != m - 1:
        raise MalformedCode("w2 must consist of m - 1 blocks 1 0^j")
    gaps = [len(block) for block in w2[1:].split("1")]
    occurrences = [r.zeros_then_one() + 1 for _ in range(m - 1)]
    label_counts = [r.zeros_then_one() for _ in range(sigma)]
    counts = SymbolCounts(
        tuple(alphabet.labels) + tuple(range(1, m)),
        tuple(label_counts) + tuple(k - 1 for k in occurrences),
    )
    if counts.total != m + 1:
        raise MalformedCode(f"w3 counts sum to {counts.total}, expected {m + 1}")
    arrangements = counts.arrangements()
    width = code_length(arrangements)
    rank = int(r.take(width), 2) if width else 0
    if rank >= arrangements:
        raise MalformedCode(f"rank {rank} exceeds |S| = {arrangements}")
    word = multiset_unrank(rank, counts)
    rho_word = []
    pos = 0
    for i, gap in enumerate(gaps, 1):
        rho_word.append(i)
        rho_word.extend(word[pos:pos + gap])
        pos += gap
    g = _rules_from_rho(rho_word, types)
    report = is_normal_form(g, alphabet) if strict else _cheap_report(g, alphabet)
    if not report:
        raise MalformedCode("decoded grammar is not in normal form: " + "; ".join(report.violations))
    return g, r.pos


def _rules_from_rho(word, types):
    rules = []
    for i, t in enumerate(types):
        head, arg = word[2 * i], word[2 * i + 1]
        if t in (APPLY, COMPOSE):
            if not is_nonterminal(head):
                raise MalformedCode(f"A{i}: type {t} needs a nonterminal head")
        elif is_nonterminal(head):
            raise MalformedCode(f"A{i}: type {t} needs a label head")
        rules.append(Rule(t, head, arg))
    return NormalFormTSLP(tuple(rules))


def _cheap_report(g, alphabet):
    from .tslp import NormalFormReport, _order_violations, _shape_violations, topological_order

    violations = _shape_violations(g, alphabet) + _order_violations(g)
    if not violations:
        try:
            topological_order(g.rules)
        except NotNormalForm as exc:
            violations += exc.violations
    return NormalFormReport(violations)


# -- length report -----------------------------------------------------------------------


@dataclass(frozen=True)
class LengthReport:
    lengths: tuple
    total: int
    arrangements: int
    log2_arrangements: float
    grammar_entropy: float
    m: int
    sigma: int

    @property
    def enumerative_bound_holds(self):
        """log2 |S| <= H(G), up to rounding."""
        return self.log2_arrangements <= self.grammar_entropy + 1e-9

    @property
    def construction_total(self):
        """m + 2m + 2m + (2m + sigma) + |w4|, the length the construction gives."""
        if self.m == 1:
            return self.total
        return 7 * self.m + self.sigma + self.lengths[4]


def log2_int(n):
    """log2 of a positive integer of any size."""
    if n < 1:
        raise ValueError("log2 of a non-positive integer")
    shift = max(n.bit_length() - 64, 0)
    return math.log2(n >> shift) + shift


def encoded_length_report(g, alphabet, check=True):
    parts = encode_parts(g, alphabet, check)
    lengths = parts.lengths()
    h = 0.0 if g.is_singleton else unnormalized_empirical_entropy(omega(g))
    log2s = 0.0 if g.is_singleton else log2_int(parts.arrangements)
    return LengthReport(lengths, sum(lengths), parts.arrangements, log2s, h, g.m, alphabet.sigma)


# -- container ------------------------------------------------------------------------------


def _leb128(n):
    if n < 0:
        raise ValueError("LEB128 needs a nonnegative integer")
    out = bytearray()
    while True:
        byte = n & 0x7F
        n >>= 7
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _read_leb128(data, pos):
    result = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise MalformedCode("truncated LEB128 integer")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7


def pack_bits(bits):
    if not bits:
        return b""
    padded = bits + "0" * (-len(bits) % 8)
    return int(padded, 2).to_bytes(len(padded) // 8, "big")


def unpack_bits(data, nbits):
    if nbits > 8 * len(data):
        raise MalformedCode("bit payload shorter than its declared length")
    if not data:
        return ""
    return format(int.from_bytes(data, "big"), f"0{8 * len(data)}b")[:nbits]


def write_container(g, alphabet, check=True):
    """Serialize a grammar with its alphabet header."""
    bits = encode(g, alphabet, check)
    out = bytearray(MAGIC)
    out.append(VERSION)
    out += _leb128(alphabet.sigma)
    for label in alphabet.labels:
        raw = str(label).encode("utf-8")
        out += _leb128(len(raw)) + raw
    out += _leb128(alphabet.box_index)
    out += _leb128(len(bits))
    out += pack_bits(bits)
    return bytes(out)


def read_container(data, strict=True):
    """Parse a container; returns ``(grammar, alphabet)``."""
    data = bytes(data)
    if data[:4] != MAGIC:
        raise MalformedCode("bad magic")
    if len(data) < 5 or data[4] != VERSION:
        raise MalformedCode("unsupported container version")
    pos = 5
    sigma, pos = _read_leb128(data, pos)
    if sigma < 1:
        raise MalformedCode("empty alphabet")
    labels = []
    for _ in range(sigma):
        n, pos = _read_leb128(data, pos)
        if pos + n > len(data):
            raise MalformedCode("truncated label")
        try:
            labels.append(data[pos:pos + n].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise MalformedCode(f"label is not UTF-8: {exc}") from None
        pos += n
    box, pos = _read_leb128(data, pos)
    nbits, pos = _read_leb128(data, pos)
    try:
        alphabet = Alphabet(tuple(labels), box)
    except ValueError as exc:
        raise MalformedCode(str(exc)) from None
    payload = data[pos:]
    if len(payload) != (nbits + 7) // 8:
        raise MalformedCode("payload length does not match the declared bit length")
    full = format(int.from_bytes(payload, "big"), f"0{8 * len(payload)}b") if payload else ""
    if full[nbits:].strip("0"):
        raise MalformedCode("nonzero padding bits")
    g, used = decode(full[:nbits], alphabet, strict)
    if used != nbits:
        raise MalformedCode(f"code word uses {used} of {nbits} bits")
    return g, alphabet
