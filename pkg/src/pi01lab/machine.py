"""A minimal oracle register machine and its total numbering.

Programs are finite instruction sequences over unbounded natural-valued
registers.  The input arrives in register 0; every other register starts
at 0.

Opcodes:
  inc R        increment register R
  dec R        decrement register R (floored at 0)
  jz R L       jump to instruction L if register R is 0
  query R S    put the oracle bit at position reg[R] into register S;
               a position at or beyond the oracle's length makes the whole
               run come out as Running (the computation is undefined on
               this oracle string but may converge on an extension)
  halt R       halt with output reg[R]
  diverge      loop forever

Numbering: an instruction decodes from a natural via the pairing function
as (op, (a, b)); opcodes 5 and above decode to ``diverge``, so every
natural is a syntactically valid instruction.  A program decodes from a
natural through the standard sequence bijection (0 is the empty program,
e+1 splits into head and tail codes), so every natural names a program.

One instruction costs one step.  Evaluation at stage s runs at most s
steps and, following the stage convention, is Running outright on inputs
n > s.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .strings import EMPTY, FinString, bits, pair, unpair

OP_INC, OP_DEC, OP_JZ, OP_QUERY, OP_HALT, OP_DIVERGE = range(6)

_MNEMONIC = {
    OP_INC: "inc",
    OP_DEC: "dec",
    OP_JZ: "jz",
    OP_QUERY: "query",
    OP_HALT: "halt",
    OP_DIVERGE: "diverge",
}
_ARITY = {OP_INC: 1, OP_DEC: 1, OP_JZ: 2, OP_QUERY: 2, OP_HALT: 1, OP_DIVERGE: 0}


@dataclass(frozen=True)
class Instr:
    op: int
    a: int = 0
    b: int = 0

    def __str__(self) -> str:
        args = (self.a, self.b)[: _ARITY[self.op]]
        return " ".join((_MNEMONIC[self.op], *map(str, args)))


Program = tuple[Instr, ...]


def instr_code(ins: Instr) -> int:
    op = ins.op if ins.op < OP_DIVERGE else OP_DIVERGE
    return pair(op, pair(ins.a, ins.b))


def instr_from_code(m: int) -> Instr:
    op, rest = unpair(m)
    a, b = unpair(rest)
    if op >= OP_DIVERGE:
        return Instr(OP_DIVERGE)
    return Instr(op, a, b)


def program_code(program: Program) -> int:
    """Goedel index of a program under the sequence bijection."""
    code = 0
    for ins in reversed(program):
        code = pair(instr_code(ins), code) + 1
    return code


@lru_cache(maxsize=65536)
def program_from_code(e: int) -> Program:
    out = []
    while e > 0:
        head, e = unpair(e - 1)
        out.append(instr_from_code(head))
    return tuple(out)


def pad(program: Program) -> Program:
    """Same function, different index: a trailing diverge is unreachable
    except where the original would walk off the end, which also diverges."""
    return program + (Instr(OP_DIVERGE),)


# -- evaluation -----------------------------------------------------------


@dataclass(frozen=True)
class Halted:
    value: int
    use: int
    steps: int


@dataclass(frozen=True)
class Running:
    pass


RUNNING = Running()
EvalResult = Halted | Running


def run_program(program: Program, oracle: FinString, n: int, s: int) -> EvalResult:
    """Evaluate a program on input n with the given oracle string, budget s."""
    if n > s:
        return RUNNING
    oracle_syms = oracle.symbols
    oracle_len = len(oracle_syms)
    regs: dict[int, int] = {0: n}
    pc = 0
    steps = 0
    use = 0
    size = len(program)
    while True:
        if pc < 0 or pc >= size:
            return RUNNING
        ins = program[pc]
        op = ins.op
        if op == OP_DIVERGE:
            return RUNNING
        if steps == s:
            return RUNNING
        steps += 1
        if op == OP_INC:
            regs[ins.a] = regs.get(ins.a, 0) + 1
            pc += 1
        elif op == OP_DEC:
            v = regs.get(ins.a, 0)
            if v:
                regs[ins.a] = v - 1
            pc += 1
        elif op == OP_JZ:
            pc = ins.b if regs.get(ins.a, 0) == 0 else pc + 1
        elif op == OP_QUERY:
            pos = regs.get(ins.a, 0)
            if pos >= oracle_len:
                return RUNNING
            c = oracle_syms[pos]
            if c == "#":
                return RUNNING
            regs[ins.b] = int(c)
            if pos + 1 > use:
                use = pos + 1
            pc += 1
        else:  # OP_HALT
            return Halted(value=regs.get(ins.a, 0), use=use, steps=steps)


def evaluate(e: int, oracle: FinString, n: int, s: int) -> EvalResult:
    """Run the e-th program of the numbering."""
    return run_program(program_from_code(e), oracle, n, s)


def computable_prefix(program: Program, s: int) -> FinString:
    """Longest bit string the program computes on the empty oracle by stage s.

    Position i is taken only while the run on input i halts within s steps
    with output 0 or 1; the result never exceeds length s and grows
    monotonically with s.
    """
    out = []
    for i in range(s):
        res = run_program(program, EMPTY, i, s)
        if isinstance(res, Halted) and res.value in (0, 1):
            out.append(str(res.value))
        else:
            break
    return bits("".join(out))


@dataclass(frozen=True)
class HaltingApprox:
    stage: int
    members: frozenset[int]


def halting_approx(s: int) -> HaltingApprox:
    """Stage-s approximation of the halting set: indices e <= s whose
    program halts on input e within s steps, with nothing in the oracle."""
    members = frozenset(
        e for e in range(s + 1) if isinstance(evaluate(e, EMPTY, e, s), Halted)
    )
    return HaltingApprox(stage=s, members=members)


# -- assembler ------------------------------------------------------------

_BY_NAME = {name: op for op, name in _MNEMONIC.items()}


class AssemblyError(ValueError):
    pass


def assemble(text: str) -> Program:
    """Parse the one-instruction-per-line text format ('#' starts a comment)."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.lower().split()
        op = _BY_NAME.get(parts[0])
        if op is None:
            raise AssemblyError(f"line {lineno}: unknown opcode {parts[0]!r}")
        args = parts[1:]
        if len(args) != _ARITY[op]:
            raise AssemblyError(
                f"line {lineno}: {parts[0]} takes {_ARITY[op]} argument(s), got {len(args)}"
            )
        try:
            nums = [int(a) for a in args]
        except ValueError as exc:
            raise AssemblyError(f"line {lineno}: non-numeric argument in {line!r}") from exc
        if any(v < 0 for v in nums):
            raise AssemblyError(f"line {lineno}: arguments must be naturals")
        nums += [0] * (2 - len(nums))
        out.append(Instr(op, *nums))
    return tuple(out)


def disassemble(program: Program) -> str:
    return "\n".join(str(ins) for ins in program)


# -- stock programs -------------------------------------------------------

DIVERGE_PROG: Program = (Instr(OP_DIVERGE),)
CONST_ZERO: Program = (Instr(OP_HALT, 1),)
IDENTITY_ORACLE: Program = (Instr(OP_QUERY, 0, 1), Instr(OP_HALT, 1))
BIT_FLIP: Program = (
    Instr(OP_QUERY, 0, 1),
    Instr(OP_JZ, 1, 3),
    Instr(OP_HALT, 2),
    Instr(OP_INC, 2),
    Instr(OP_HALT, 2),
)
ORACLE_BIT0: Program = (Instr(OP_QUERY, 1, 2), Instr(OP_HALT, 2))


def lookup_program(table: FinString) -> Program:
    """Oracle-free program computing table(n) for n < len(table), diverging
    beyond; branches on the input by repeated decrement."""
    table = table.as_binary()
    head: list[Instr] = []
    branches: list[Instr] = []
    branch_offsets = []
    offset = 2 * len(table) + 1  # head plus the trailing diverge
    for c in table.symbols:
        branch_offsets.append(offset)
        offset += 2 if c == "1" else 1
    for i, c in enumerate(table.symbols):
        head.append(Instr(OP_JZ, 0, branch_offsets[i]))
        head.append(Instr(OP_DEC, 0))
        if c == "1":
            branches.append(Instr(OP_INC, 1))
        branches.append(Instr(OP_HALT, 1))
    return tuple(head) + (Instr(OP_DIVERGE),) + tuple(branches)


# -- functional registries -------------------------------------------------


class Registry:
    """The enumeration of functionals a construction runs against.

    Either the universal numbering (every index decodes to its program) or
    an explicit finite list, with every unlisted index treated as a
    diverging functional.  Knowing an index diverges lets the drivers skip
    evaluations outright.
    """

    def __init__(self, programs: list[Program] | None = None) -> None:
        self.programs = None if programs is None else list(programs)

    @classmethod
    def universal(cls) -> "Registry":
        return cls(None)

    @classmethod
    def explicit(cls, programs: list[Program]) -> "Registry":
        return cls(list(programs))

    @property
    def is_universal(self) -> bool:
        return self.programs is None

    def knows_divergent(self, e: int) -> bool:
        if self.programs is None:
            return False
        return e >= len(self.programs) or self.programs[e] == DIVERGE_PROG

    def program_for(self, e: int) -> Program:
        if self.programs is None:
            return program_from_code(e)
        if e < len(self.programs):
            return self.programs[e]
        return DIVERGE_PROG

    def evaluate(self, e: int, oracle: FinString, n: int, s: int) -> EvalResult:
        if self.knows_divergent(e):
            return RUNNING
        return run_program(self.program_for(e), oracle, n, s)

    def computable_prefix(self, e: int, s: int) -> FinString:
        if self.knows_divergent(e):
            return EMPTY
        return computable_prefix(self.program_for(e), s)

    def to_json(self) -> dict:
        if self.programs is None:
            return {"universal": True}
        return {"programs": [disassemble(p) for p in self.programs]}

    @classmethod
    def from_json(cls, data: dict) -> "Registry":
        if data.get("universal"):
            return cls.universal()
        return cls.explicit([assemble(text) for text in data["programs"]])
