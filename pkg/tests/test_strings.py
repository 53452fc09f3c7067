import pytest
from hypothesis import given, strategies as st

from pi01lab.strings import (
    EMPTY,
    Alphabet,
    AlphabetError,
    FinString,
    PairCode,
    bits,
    compatible,
    concat,
    first_disagreement,
    incompatible,
    pair,
    string_code,
    string_from_code,
    tern,
    unpair,
)

binary_strings = st.text(alphabet="01", max_size=12).map(bits)


def test_concat_examples():
    assert concat(bits("01"), bits("10")) == bits("0110")
    assert concat(EMPTY, bits("101")) == bits("101")
    assert concat(tern("1#"), bits("01")) == tern("1#01")


def test_concat_rejects_binary_then_ternary():
    with pytest.raises(AlphabetError):
        concat(bits("01"), tern("1#"))


def test_concat_lengths():
    a, b = bits("0011"), bits("110")
    assert len(concat(a, b)) == len(a) + len(b)


def test_compatible_examples():
    assert compatible(bits("01"), bits("0110"))
    assert not compatible(bits("00"), bits("01"))
    sigma = bits("1101")
    assert compatible(sigma, sigma)


def test_hash_rejected_in_binary():
    with pytest.raises(AlphabetError):
        FinString("0#1", Alphabet.BINARY)


def test_empty_string_distinct_and_renders():
    assert len(EMPTY) == 0
    assert str(EMPTY) == "ε"
    assert EMPTY != bits("0")


@given(binary_strings, binary_strings)
def test_trichotomy(sigma, tau):
    cases = [
        sigma.is_prefix_of(tau),
        tau.is_proper_prefix_of(sigma),
        incompatible(sigma, tau),
    ]
    assert sum(cases) == 1


@given(binary_strings, binary_strings, binary_strings)
def test_prefix_partial_order(a, b, c):
    assert a.is_prefix_of(a)
    if a.is_prefix_of(b) and b.is_prefix_of(a):
        assert a == b
    if a.is_prefix_of(b) and b.is_prefix_of(c):
        assert a.is_prefix_of(c)


@given(binary_strings, binary_strings)
def test_compatibility_symmetric(sigma, tau):
    assert compatible(sigma, tau) == compatible(tau, sigma)


def test_first_disagreement():
    assert first_disagreement(bits("00"), bits("01")) == 1
    with pytest.raises(ValueError):
        first_disagreement(bits("0"), bits("01"))


def test_pair_base_case():
    assert pair(0, 0) == 0


def test_pair_round_trip_example():
    assert unpair(pair(3, 5)) == (3, 5)


def test_pair_injective_small():
    seen = {}
    for i in range(50):
        for j in range(50):
            code = pair(i, j)
            assert code not in seen, f"collision {seen.get(code)} vs {(i, j)}"
            seen[code] = (i, j)


def test_pair_bijective_brute_force():
    # surjectivity below the grid's guaranteed range plus round trips
    codes = {pair(i, j) for i in range(200) for j in range(200)}
    assert set(range(pair(0, 199) + 1)) <= codes
    for n in range(20000):
        i, j = unpair(n)
        assert pair(i, j) == n


@given(st.integers(0, 10**9), st.integers(0, 10**9))
def test_pair_round_trip_property(i, j):
    assert unpair(pair(i, j)) == (i, j)


def test_pair_monotone_each_argument():
    for i in range(30):
        for j in range(30):
            assert pair(i + 1, j) > pair(i, j)
            assert pair(i, j + 1) > pair(i, j)


def test_pair_code_record():
    pc = PairCode.of(7, 9)
    assert pc.code == pair(7, 9)
    with pytest.raises(ValueError):
        PairCode(1, 2, 999)


def test_string_code_round_trip_and_order():
    previous = -1
    for n in range(300):
        sigma = string_from_code(n)
        assert string_code(sigma) == n
        assert n > previous
        previous = n
    ordered = sorted((string_from_code(n) for n in range(100)), key=lambda s: s.lexkey)
    assert [string_code(s) for s in ordered] == list(range(100))


def test_lexkey_orders_hash_after_one():
    assert tern("1").lexkey < tern("#").lexkey
    assert bits("0").lexkey < bits("1").lexkey
    assert bits("1").lexkey < bits("00").lexkey
