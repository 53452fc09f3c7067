import itertools
import random

import pytest
from hypothesis import given, strategies as st

from pi01lab.joins import (
    FiniteJoinCode,
    JoinError,
    UndeterminedPosition,
    classical_join,
    constant_join,
    finite_join,
    finite_join_decode,
    join_oracle,
)
from pi01lab.strings import bits, pair, unpair


def brute_force_join(components):
    """Independent rendering of the defining union of sets
    {(n+1)i + j : i in A_j}, evaluated positionwise."""
    arity = len(components)
    m = min(len(c) for c in components)
    ones = set()
    for j, comp in enumerate(components):
        for i in range(m):
            if comp.bit(i) == 1:
                ones.add(arity * i + j)
    return bits("".join("1" if p in ones else "0" for p in range(arity * m)))


def test_join_example_from_sets():
    # A0 = {0,1}, A1 = {2} as strings 110 and 001: ones at 0, 2, 5
    out = finite_join([bits("110"), bits("001")])
    assert out == bits("101001")
    assert {i for i in range(len(out)) if out.bit(i)} == {0, 2, 5}


def test_join_single_component_identity():
    sigma = bits("01101")
    assert finite_join([sigma]) == sigma


def test_join_all_zero():
    out = finite_join([bits("000"), bits("00")])
    assert set(out.symbols) <= {"0"}
    assert len(out) == 4


def test_join_empty_rejected():
    with pytest.raises(JoinError):
        finite_join([])


def test_join_matches_brute_force_exhaustive_small():
    pool = [bits(format(v, f"0{length}b")) for length in range(1, 5) for v in range(1 << length)]
    rng = random.Random(3)
    for arity in (1, 2, 3):
        for combo in rng.sample(list(itertools.product(pool, repeat=arity)), 400):
            assert finite_join(list(combo)) == brute_force_join(list(combo))


def test_decode_example():
    assert finite_join_decode(bits("110011"), 3) == [bits("10"), bits("11"), bits("01")]


def test_decode_identity_arity_one():
    sigma = bits("0101")
    assert finite_join_decode(sigma, 1) == [sigma]


def test_decode_zero_arity_rejected():
    with pytest.raises(JoinError):
        finite_join_decode(bits("01"), 0)


@given(st.lists(st.text(alphabet="01", min_size=1, max_size=8).map(bits), min_size=1, max_size=4))
def test_decode_encode_round_trip(components):
    joined = finite_join(components)
    decoded = finite_join_decode(joined, len(components))
    m = min(len(c) for c in components)
    assert decoded == [c.prefix(m) for c in components]
    assert finite_join(decoded) == joined


def test_finite_join_code_record():
    fc = FiniteJoinCode.of([bits("011"), bits("10")])
    assert fc.arity == 2
    assert finite_join_decode(fc.joined, 2) == list(fc.components)


def test_classical_join_agrees_exhaustively():
    for la in range(6):
        for lb in range(6):
            for va in range(1 << la):
                for vb in range(1 << lb):
                    a = bits(format(va, f"0{la}b") if la else "")
                    b = bits(format(vb, f"0{lb}b") if lb else "")
                    if min(la, lb) == 0:
                        continue
                    joined = classical_join(a, b)
                    m = min(la, lb)
                    expect = {2 * i for i in range(m) if a.bit(i)} | {
                        2 * i + 1 for i in range(m) if b.bit(i)
                    }
                    got = {i for i in range(len(joined)) if joined.bit(i)}
                    assert got == expect


def test_join_oracle_position_rule_brute_force():
    rows = [bits("1011"), bits("01"), bits("111000")]
    oracle = join_oracle(rows)
    for k in range(10**4):
        j, x = unpair(k)
        expect = rows[j].bit(x) if j < len(rows) and x < len(rows[j]) else None
        assert oracle.bit_at(k) == expect


def test_join_oracle_single_one():
    oracle = join_oracle([bits("1")])
    assert oracle.bit_at(pair(0, 0)) == 1
    # brute force the first undefined position
    k = 0
    while True:
        j, x = unpair(k)
        if j >= 1 or x >= 1:
            break
        k += 1
    assert oracle.determined_length() == k
    assert oracle.determined_length() == 1  # pair(0,1) == 1 under this pairing


def test_join_oracle_empty_rows():
    assert join_oracle([]).determined_length() == 0


def test_oracle_string_error_names_position():
    oracle = join_oracle([bits("1")])
    with pytest.raises(UndeterminedPosition) as err:
        oracle.oracle_string(5)
    assert err.value.position == 1


def test_constant_join_row0_reproduces_sigma():
    sigma = bits("10110")
    oracle = constant_join(sigma)
    for x in range(len(sigma)):
        assert oracle.bit_at(pair(0, x)) == sigma.bit(x)


def test_constant_join_default_rows():
    assert constant_join(bits("101")).rows == (bits("101"),) * 3
    assert constant_join(bits("")).determined_length() == 0


def test_determined_prefix_monotone_under_extension():
    for sym in ("1", "10", "101", "1010"):
        shorter = constant_join(bits(sym))
        longer = constant_join(bits(sym + "1"))
        a = shorter.determined_prefix()
        b = longer.determined_prefix()
        assert a.is_prefix_of(b)
