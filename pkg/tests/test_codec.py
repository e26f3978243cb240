import math
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from treentropy.codec import (
    MAGIC,
    SymbolCounts,
    code_length,
    decode,
    encode,
    encode_parts,
    encoded_length_report,
    log2_int,
    multinomial,
    multiset_rank,
    multiset_unrank,
    pack_bits,
    read_container,
    rule_type,
    symbol_counts,
    unpack_bits,
    write_container,
)
from treentropy.compress import random_normal_form
from treentropy.errors import MalformedCode, MultiplicityMismatch, NotNormalForm
from treentropy.trees import Alphabet
from treentropy.tslp import NormalFormTSLP, grammar_entropy, omega, parse_grammar

GOLDEN = ("00001", "0011000011", "1101100000", "110101001001", "00101111")


def test_rule_types(example_nf):
    assert [rule_type(r) for r in example_nf.rules] == [0, 3, 0, 0, 3]
    with pytest.raises(ValueError):
        rule_type(NormalFormTSLP.singleton("a").rules[0])


def test_golden_parts(example_nf, ab):
    parts = encode_parts(example_nf, ab)
    assert (parts.w0, parts.w1, parts.w2, parts.w3, parts.w4) == GOLDEN
    assert parts.arrangements == 180
    assert parts.rank == 47
    assert parts.lengths() == (5, 10, 10, 12, 8)
    assert len(parts.bits) == 45


def test_golden_rank_matches_permutation_oracle(example_nf, ab):
    counts = symbol_counts(example_nf, ab)
    assert counts.symbols == ("a", "b", 1, 2, 3, 4)
    assert counts.counts == (2, 2, 0, 0, 1, 1)
    assert multiset_rank(omega(example_nf), counts) == 47
    assert multiset_unrank(47, counts) == ["a", 3, 4, "b", "b", "a"]
    rank, total = oracles.lex_rank(omega(example_nf), counts.symbols)
    assert (rank, total) == (47, 180)


def test_golden_decode(example_nf, ab):
    bits = "".join(GOLDEN)
    assert decode(bits, ab) == (example_nf, 45)


def test_multinomial_and_code_length():
    assert multinomial([2, 2, 1, 1]) == 180
    assert multinomial([]) == 1
    assert [code_length(s) for s in (1, 2, 3, 4, 5, 180, 256, 257)] == [0, 1, 2, 2, 3, 8, 8, 9]


def test_rank_errors():
    sc = SymbolCounts(("a", "b"), (1, 1))
    with pytest.raises(MultiplicityMismatch):
        multiset_rank(["a", "a"], sc)
    with pytest.raises(MultiplicityMismatch):
        multiset_rank(["a"], sc)
    with pytest.raises(MultiplicityMismatch):
        SymbolCounts.of("abc", "ab")
    with pytest.raises(ValueError):
        multiset_unrank(2, sc)


@given(st.lists(st.integers(0, 3), min_size=0, max_size=8))
def test_rank_matches_permutation_oracle(word):
    symbols = (0, 1, 2, 3)
    sc = SymbolCounts.of(word, symbols)
    rank, total = oracles.lex_rank(word, symbols)
    assert multiset_rank(word, sc) == rank
    assert sc.arrangements() == total
    assert multiset_unrank(rank, sc) == list(word)


@given(st.lists(st.integers(0, 9), min_size=1, max_size=300))
def test_rank_round_trip_on_long_words(word):
    sc = SymbolCounts.of(word, tuple(range(10)))
    r = multiset_rank(word, sc)
    assert 0 <= r < sc.arrangements()
    assert multiset_unrank(r, sc) == word


def test_singleton_codes():
    abc = Alphabet(("a", "b", "c"))
    assert encode(NormalFormTSLP.singleton("c"), abc) == "110"
    assert decode("110", abc) == (NormalFormTSLP.singleton("c"), 3)
    one = Alphabet(("a",))
    assert encode(NormalFormTSLP.singleton("a"), one) == "1"
    with pytest.raises(MalformedCode):
        decode("111", abc)


def test_encode_rejects_non_normal_form(example_general, ab):
    g = parse_grammar("A0 -> A1(A2)\nA1 -> a(x,b)\nA2 -> A3(b)\nA3 -> a(x,b)\n")
    with pytest.raises(NotNormalForm):
        encode(g, ab)


@pytest.mark.parametrize("bits", ["", "1", "0000", "00001", "0000100", "00001x"])
def test_truncated_or_invalid_codes(bits, ab):
    with pytest.raises(MalformedCode):
        decode(bits, ab)


def test_junk_after_code_is_not_consumed(example_nf, ab):
    bits = encode(example_nf, ab)
    for junk in ("", "0", "1", "0110101"):
        assert decode(bits + junk, ab) == (example_nf, len(bits))


def test_length_report(example_nf, ab):
    rep = encoded_length_report(example_nf, ab)
    assert rep.lengths == (5, 10, 10, 12, 8)
    assert rep.total == 45 == rep.construction_total == 7 * 5 + 2 + 8
    assert rep.log2_arrangements == pytest.approx(math.log2(180))
    assert rep.enumerative_bound_holds


def test_log2_int_on_huge_values():
    assert log2_int(1) == 0.0
    assert log2_int(2**4000) == pytest.approx(4000.0)
    assert log2_int(3 * 2**3000) == pytest.approx(3000 + math.log2(3))


@settings(max_examples=200)
@given(st.integers(1, 50), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_random_round_trip(m, sigma, seed):
    labels = [chr(97 + i) for i in range(sigma)]
    alphabet = Alphabet(labels)
    g = random_normal_form(m, labels, random.Random(seed))
    bits = encode(g, alphabet)
    assert decode(bits, alphabet) == (g, len(bits))
    rep = encoded_length_report(g, alphabet)
    assert rep.total == len(bits) == rep.construction_total
    assert rep.enumerative_bound_holds
    if not g.is_singleton:
        assert rep.grammar_entropy == pytest.approx(grammar_entropy(g))


def test_pack_bits():
    assert pack_bits("") == b""
    assert pack_bits("1") == b"\x80"
    assert pack_bits("000000001") == b"\x00\x80"
    assert unpack_bits(b"\x00\x80", 9) == "000000001"
    with pytest.raises(MalformedCode):
        unpack_bits(b"\x00", 9)


def test_container_layout(example_nf, ab):
    data = write_container(example_nf, ab)
    bits = "".join(GOLDEN)
    expected = MAGIC + bytes([1, 2, 1]) + b"a" + bytes([1]) + b"b" + bytes([0, 45]) + pack_bits(bits)
    assert data == expected
    assert len(data) == 4 + 1 + 1 + 4 + 1 + 1 + 6
    assert read_container(data) == (example_nf, ab)


def test_container_preserves_box_and_unicode():
    alphabet = Alphabet(("a", "b", "□"), 2)
    g = parse_grammar("A0 -> A1(□)\nA1 -> a(x,b)\n")
    g2, a2 = read_container(write_container(g, alphabet))
    assert g2 == g and a2.labels == alphabet.labels and a2.box == "□"


def test_container_long_label_uses_multibyte_length():
    label = "q" * 200
    alphabet = Alphabet((label,))
    data = write_container(NormalFormTSLP.singleton(label), alphabet)
    assert data[6:8] == bytes([0xC8, 0x01])
    assert read_container(data)[0] == NormalFormTSLP.singleton(label)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: b"XSLP" + d[4:],
        lambda d: d[:4] + b"\x02" + d[5:],
        lambda d: d[:-1],
        lambda d: d + b"\x00",
        lambda d: d[:-1] + bytes([d[-1] | 0x01]),
        lambda d: d[:5] + b"\x00" + d[6:],
        lambda d: d[:10],
    ],
    ids=["magic", "version", "short", "long", "padding", "empty-alphabet", "truncated-header"],
)
def test_malformed_containers(mutate, example_nf, ab):
    data = write_container(example_nf, ab)
    with pytest.raises(MalformedCode):
        read_container(mutate(data))


def test_bit_flips_never_crash(example_nf, ab):
    data = write_container(example_nf, ab)
    header = len(data) - 6
    for i in range(header * 8, len(data) * 8):
        flipped = bytearray(data)
        flipped[i // 8] ^= 0x80 >> (i % 8)
        try:
            g, _ = read_container(bytes(flipped))
        except MalformedCode:
            continue
        assert g != example_nf
