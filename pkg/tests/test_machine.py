import random

import pytest
from hypothesis import given, strategies as st

from pi01lab.machine import (
    BIT_FLIP,
    CONST_ZERO,
    DIVERGE_PROG,
    IDENTITY_ORACLE,
    ORACLE_BIT0,
    AssemblyError,
    Halted,
    Instr,
    OP_DIVERGE,
    Registry,
    Running,
    assemble,
    computable_prefix,
    disassemble,
    evaluate,
    halting_approx,
    instr_code,
    instr_from_code,
    lookup_program,
    pad,
    program_code,
    program_from_code,
    run_program,
)
from pi01lab.strings import EMPTY, bits


def test_every_natural_decodes():
    for e in range(2000):
        program = program_from_code(e)
        assert isinstance(program, tuple)


@given(st.integers(0, 10**12))
def test_decoding_total(e):
    program_from_code(e)


def test_program_code_round_trip():
    for program in (DIVERGE_PROG, CONST_ZERO, IDENTITY_ORACLE, BIT_FLIP, ORACLE_BIT0):
        assert program_from_code(program_code(program)) == program


def test_instr_code_round_trip():
    for m in range(500):
        ins = instr_from_code(m)
        assert instr_from_code(instr_code(ins)) == ins


def test_invalid_opcodes_decode_to_diverge():
    ins = instr_from_code(instr_code(Instr(OP_DIVERGE + 7, 3, 4)))
    assert ins.op == OP_DIVERGE


def test_const_zero_everywhere():
    for n in range(31):
        for s in range(31):
            res = run_program(CONST_ZERO, bits("0101"), n, s)
            if n <= s and s >= 1:
                assert res == Halted(value=0, use=0, steps=1)
            else:
                assert res == Running()


def test_stage_convention_n_above_s():
    for s in range(10):
        assert run_program(CONST_ZERO, EMPTY, s + 1, s) == Running()


def test_identity_oracle_example():
    res = run_program(IDENTITY_ORACLE, bits("0110"), 2, 1000)
    assert res == Halted(value=1, use=3, steps=2)


def test_identity_oracle_out_of_range():
    assert run_program(IDENTITY_ORACLE, bits("01"), 5, 1000) == Running()


def test_bit_flip():
    sigma = bits("0110")
    for n in range(4):
        res = run_program(BIT_FLIP, sigma, n, 100)
        assert isinstance(res, Halted)
        assert res.value == 1 - sigma.bit(n)
        assert res.use == n + 1


def test_lookup_program():
    table = bits("10110")
    program = lookup_program(table)
    for n in range(len(table)):
        res = run_program(program, EMPTY, n, 100)
        assert isinstance(res, Halted)
        assert res.value == table.bit(n)
        assert res.use == 0
    assert run_program(program, EMPTY, len(table), 100) == Running()


def test_diverge_program():
    assert run_program(DIVERGE_PROG, bits("1"), 0, 10**6) == Running()


def test_halted_stable_under_bigger_budget():
    rng = random.Random(7)
    for _ in range(300):
        e = rng.randrange(200)
        sigma = bits("".join(rng.choice("01") for _ in range(rng.randrange(17))))
        n = rng.randrange(25)
        for s in range(n, 25):
            res = evaluate(e, sigma, n, s)
            if isinstance(res, Halted):
                for s2 in range(s, 26):
                    assert evaluate(e, sigma, n, s2) == res
                break


def test_use_consistency():
    rng = random.Random(11)
    checked = 0
    for e in range(200):
        sigma = bits("".join(rng.choice("01") for _ in range(16)))
        res = evaluate(e, sigma, 3, 24)
        if isinstance(res, Halted):
            stem = sigma.prefix(res.use)
            for suffix in ("", "0", "1", "101"):
                extended = bits(stem.symbols + suffix)
                assert evaluate(e, extended, 3, 24) == res
            checked += 1
    assert checked > 0


def test_determinism():
    for e in range(100):
        a = evaluate(e, bits("0101"), 2, 20)
        b = evaluate(e, bits("0101"), 2, 20)
        assert a == b


def test_padding_preserves_behavior():
    programs = [CONST_ZERO, IDENTITY_ORACLE, BIT_FLIP]
    oracle = bits("100101")
    for program in programs:
        base = [(n, s, run_program(program, oracle, n, s)) for n in range(6) for s in range(12)]
        padded = program
        seen = {program_code(program)}
        for _ in range(5):
            padded = pad(padded)
            code = program_code(padded)
            assert code not in seen
            seen.add(code)
            for n, s, expect in base:
                assert run_program(padded, oracle, n, s) == expect


def test_computable_prefix_diverger():
    for s in range(20):
        assert computable_prefix(DIVERGE_PROG, s) == EMPTY


def test_computable_prefix_const_zero():
    previous = EMPTY
    for s in range(12):
        cp = computable_prefix(CONST_ZERO, s)
        assert set(cp.symbols) <= {"0"}
        assert previous.is_prefix_of(cp)
        previous = cp
    assert len(computable_prefix(CONST_ZERO, 10)) == 10


def test_computable_prefix_monotone_in_stage():
    # one bounded run per (e, n) pair, then prefixes derived from halt steps
    cap = 60
    for e in range(100):
        program = program_from_code(e)
        outcomes = []
        for n in range(cap):
            res = run_program(program, EMPTY, n, cap)
            outcomes.append(res if isinstance(res, Halted) else None)
        previous = EMPTY
        for s in range(cap + 1):
            cp = computable_prefix(program, s)
            assert previous.is_prefix_of(cp)
            previous = cp
            # cross-check against the bounded-run table
            expect = []
            for n in range(s):
                res = outcomes[n]
                if res is not None and res.steps <= s and res.value in (0, 1):
                    expect.append(str(res.value))
                else:
                    break
            assert cp.symbols == "".join(expect)


def test_halting_approx_monotone():
    previous = frozenset()
    for s in range(0, 120, 3):
        approx = halting_approx(s)
        assert previous <= approx.members
        previous = approx.members
    assert all(isinstance(evaluate(e, EMPTY, e, 120), Halted) for e in previous)


def test_halting_approx_contains_const_zero_index():
    e = program_code(CONST_ZERO)
    approx = halting_approx(e + 1)
    assert e in approx.members


def test_program_zero_is_empty_and_diverges():
    assert program_from_code(0) == ()
    assert halting_approx(0).members == frozenset()


def test_assemble_disassemble_round_trip():
    text = """
    # flip the oracle bit named by the input
    query 0 1
    jz 1 3
    halt 2
    inc 2
    halt 2
    """
    program = assemble(text)
    assert program == BIT_FLIP
    assert assemble(disassemble(program)) == program


def test_assemble_errors():
    with pytest.raises(AssemblyError):
        assemble("frobnicate 1")
    with pytest.raises(AssemblyError):
        assemble("inc")
    with pytest.raises(AssemblyError):
        assemble("jz 1")
    with pytest.raises(AssemblyError):
        assemble("inc -2")


def test_registry_explicit_and_universal():
    reg = Registry.explicit([CONST_ZERO])
    assert not reg.knows_divergent(0)
    assert reg.knows_divergent(1)
    assert isinstance(reg.evaluate(0, EMPTY, 0, 5), Halted)
    assert reg.evaluate(7, EMPTY, 0, 5) == Running()
    uni = Registry.universal()
    assert not uni.knows_divergent(7)
    e = program_code(CONST_ZERO)
    assert uni.evaluate(e, EMPTY, 0, 5) == Halted(value=0, use=0, steps=1)


def test_registry_json_round_trip():
    reg = Registry.explicit([CONST_ZERO, BIT_FLIP])
    back = Registry.from_json(reg.to_json())
    assert back.programs == reg.programs
    assert Registry.from_json(Registry.universal().to_json()).is_universal
