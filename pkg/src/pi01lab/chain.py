"""Coding an r.e. set into a class and iterating along a chain.

Given an r.e. set A (a stage table or an enumerating program) and a class
presented by a downward-closed tree, a new ternary tree grows a path that
codes A's enumeration function in unary blocks separated by ``#`` marks,
and plants a copy of the class above every mark.  When a value of the
enumeration function jumps, the coded path re-routes and the stranded mark
keeps its copy; that is how the class accumulates one copy per argument
while the path itself follows the final function.

The base class (every member computable) branches only at 0-runs: a leaf
ending in 1 extends by 1, anything else extends both ways, so depth-d
strings are exactly the 0^a 1^b shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .machine import Halted, Program, run_program
from .strings import EMPTY, Alphabet, FinString, bits, tern
from .trees import ClosureTree, StagedTree


class EnumerationError(ValueError):
    pass


class ReEnumeration:
    """A monotone stage enumeration A_0 ⊆ A_1 ⊆ ... of naturals.

    Backed either by an explicit (stage, element) table or by a program:
    an element n is enumerated by stage s when the program halts on input
    n within s steps (and n <= s).
    """

    def __init__(self, entry_stage: dict[int, int] | None, program: Program | None) -> None:
        self._entry_stage = entry_stage
        self._program = program
        self._halt_cache: dict[int, tuple[int | None, int]] = {}

    @classmethod
    def from_table(cls, entries: list[tuple[int, int]]) -> "ReEnumeration":
        entry_stage: dict[int, int] = {}
        for stage, element in entries:
            if stage < 0 or element < 0:
                raise EnumerationError("stages and elements are naturals")
            if element in entry_stage:
                raise EnumerationError(f"element {element} enters at two stages")
            entry_stage[element] = stage
        return cls(entry_stage, None)

    @classmethod
    def from_program(cls, program: Program) -> "ReEnumeration":
        return cls(None, program)

    @classmethod
    def empty(cls) -> "ReEnumeration":
        return cls({}, None)

    def _halts_by(self, n: int, s: int) -> bool:
        steps, tried = self._halt_cache.get(n, (None, -1))
        if steps is not None:
            return steps <= s
        if tried >= s:
            return False
        res = run_program(self._program, EMPTY, n, s)
        if isinstance(res, Halted):
            self._halt_cache[n] = (res.steps, s)
            return True
        self._halt_cache[n] = (None, s)
        return False

    def at(self, s: int) -> frozenset[int]:
        """A_s, the elements enumerated by the end of stage s."""
        if self._entry_stage is not None:
            return frozenset(e for e, st in self._entry_stage.items() if st <= s)
        return frozenset(n for n in range(s + 1) if self._halts_by(n, s))

    def entering_at(self, s: int) -> frozenset[int]:
        if s == 0:
            return self.at(0)
        return self.at(s) - self.at(s - 1)

    def to_json(self) -> dict:
        if self._entry_stage is not None:
            table = sorted((st, e) for e, st in self._entry_stage.items())
            return {"table": [list(t) for t in table]}
        from .machine import disassemble

        return {"program": disassemble(self._program)}

    @classmethod
    def from_json(cls, data: dict) -> "ReEnumeration":
        if "table" in data:
            return cls.from_table([tuple(t) for t in data["table"]])
        from .machine import assemble

        return cls.from_program(assemble(data["program"]))


def enum_fn(enum: ReEnumeration, s: int, n: int) -> int:
    """Least s' <= s whose enumeration agrees with A_s below n."""
    if n > s:
        raise EnumerationError(f"horizon violated: n={n} > s={s}")
    goal = frozenset(x for x in enum.at(s) if x < n)
    for sp in range(s + 1):
        if frozenset(x for x in enum.at(sp) if x < n) == goal:
            return sp
    raise AssertionError("unreachable: s itself always agrees")


@dataclass(frozen=True)
class EnumFnApprox:
    """The stage-s enumeration-function approximation on arguments <= s."""

    s: int
    values: tuple[int, ...]

    def __call__(self, n: int) -> int:
        return self.values[n]

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    @classmethod
    def compute(cls, enum: ReEnumeration, s: int, horizon: int | None = None) -> "EnumFnApprox":
        """Walk stages forward: a value resets to the current stage exactly
        when an element below its argument enters."""
        horizon = s if horizon is None else horizon
        values = [0] * (horizon + 1)
        for stage in range(1, s + 1):
            fresh = enum.entering_at(stage)
            if not fresh:
                continue
            least = min(fresh)
            for n in range(least + 1, horizon + 1):
                values[n] = stage
        return cls(s=s, values=tuple(values))


def pi_strings(f: EnumFnApprox, blocks: int) -> FinString:
    """The coded path prefix: per argument, a 1-run of length f(n)+1, then #."""
    if blocks > f.horizon + 1:
        raise EnumerationError(f"blocks={blocks} exceeds the approximation horizon")
    out = []
    for n in range(blocks):
        out.append("1" * (f(n) + 1))
        out.append("#")
    return tern("".join(out))


class PathDecodeError(ValueError):
    def __init__(self, position: int, reason: str):
        super().__init__(f"position {position}: {reason}")
        self.position = position


def decode_path(sigma: FinString) -> list[int]:
    """Block lengths minus one: the function values the path codes."""
    out = []
    run = 0
    for idx, ch in enumerate(sigma.symbols):
        if ch == "1":
            run += 1
        elif ch == "#":
            if run == 0:
                raise PathDecodeError(idx, "empty block before delimiter")
            out.append(run - 1)
            run = 0
        else:
            raise PathDecodeError(idx, f"symbol {ch!r} inside a block")
    if run:
        raise PathDecodeError(len(sigma), "block missing its delimiter")
    return out


def copy_class(tau: FinString, lam: ClosureTree, depth: int) -> set[FinString]:
    """The class translated above tau, cut at the depth budget."""
    from .strings import concat

    return {concat(tau, sigma) for sigma in lam.members_up_to(depth)}


def base_computable_class(stages: int) -> StagedTree:
    """The countable class whose members are all computable: leaves ending
    in 1 go right only, everything else (the root included) branches."""
    tree = StagedTree(index=0, birth_stage=0)
    frontier = [tree.root]
    for stage in range(1, stages + 1):
        nxt = []
        for sigma in frontier:
            if sigma.symbols.endswith("1"):
                children = ("1",)
            else:
                children = ("0", "1")
            for c in children:
                child = sigma.append(c)
                tree.enumerate_node(child, stage)
                nxt.append(child)
        frontier = nxt
    return tree


@dataclass
class QState:
    """The coded class under construction."""

    upsilon: StagedTree
    upsilon_star: list[FinString]
    lam: ClosureTree
    stage: int
    pi_s: set[FinString] = field(default_factory=set)
    enum: ReEnumeration | None = None

    def markers(self) -> list[FinString]:
        return list(self.upsilon_star)

    def longest_coded_string(self) -> FinString:
        """The longest enumerated string in pure block form (1-runs split by
        delimiters, delimiter-terminated); decoding it yields function values."""
        best = None
        for sigma in self.upsilon.nodes:
            sym = sigma.symbols
            if not sym or not sym.endswith("#"):
                continue
            if set(sym) - {"1", "#"} or "##" in sym or not sym.startswith("1"):
                continue
            if best is None or (len(sym), sym) > (len(best.symbols), best.symbols):
                best = sigma
        if best is None:
            raise EnumerationError("no delimiter-terminated coded string enumerated yet")
        return best


def build_Q(enum: ReEnumeration, lam: ClosureTree, stages: int) -> QState:
    """Grow the coded class for the given number of stages.

    Per stage, with the previous stage's path prefix: (i) every leaf whose
    one-symbol extension stays on the prefix gains it, and a gained ``#``
    is recorded as a marker; (ii) every leaf under a marker grows the copy
    of the class: for each marker prefix, the leaf's post-marker suffix
    extends by every symbol that keeps it a member of the class.
    """
    lam_symbols = "01" if lam.source.alphabet is Alphabet.BINARY else "01#"
    tree = StagedTree(index=0, birth_stage=0, alphabet=Alphabet.TERNARY)
    markers: list[FinString] = []
    marker_set: set[str] = set()
    # node symbols -> lengths of its marker prefixes, oldest first
    marker_prefixes: dict[str, tuple[int, ...]] = {"": ()}
    leaves: set[str] = {""}
    # class membership by raw symbols, against the source's stage cutoff
    member_index: dict[str, int] = {
        node.symbols: rec.enumerated_at for node, rec in lam.source.nodes.items()
    }

    def lam_member(symbols: str) -> bool:
        first = member_index.get(symbols)
        return first is not None and first <= len(symbols)

    f = EnumFnApprox.compute(enum, 0, horizon=stages)
    pi = pi_strings(f, blocks=1)
    for stage in range(1, stages + 1):
        new_nodes: dict[str, tuple[int, ...]] = {}
        frontier = sorted(leaves, key=lambda c: (len(c), c))
        # (i) follow the coded path
        for sym in frontier:
            if len(sym) >= len(pi.symbols) or not pi.symbols.startswith(sym):
                continue
            nxt = pi.symbols[len(sym)]
            child = sym + nxt
            prefixes = marker_prefixes[sym]
            if nxt == "#":
                prefixes = prefixes + (len(child),)
                if child not in marker_set:
                    marker_set.add(child)
                    markers.append(tern(child))
            new_nodes[child] = prefixes
        # (ii) plant copies above every marker prefix
        for sym in frontier:
            prefixes = marker_prefixes[sym]
            if not prefixes:
                continue
            for c in lam_symbols:
                child = sym + c
                if child in new_nodes:
                    continue
                for mlen in prefixes:
                    if lam_member(child[mlen:]):
                        new_nodes[child] = prefixes
                        break
        for child in sorted(new_nodes, key=lambda c: (len(c), c)):
            tree.enumerate_node(tern(child), stage)
            marker_prefixes[child] = new_nodes[child]
            leaves.discard(child[:-1])
            leaves.add(child)
        # the next stage reads this stage's function approximation
        f = EnumFnApprox.compute(enum, stage, horizon=stages)
        pi = pi_strings(f, blocks=min(stage + 1, stages + 1))
    return QState(
        upsilon=tree,
        upsilon_star=markers,
        lam=lam,
        stage=stages,
        pi_s={pi},
        enum=enum,
    )


@dataclass
class ChainResult:
    """A finite chain of coded classes and their tagged union."""

    base: StagedTree
    levels: list[QState]
    stages: int

    def tag(self, level: int) -> FinString:
        """Self-delimiting prefix 0^level 1 for the union."""
        return tern("0" * level + "1")

    def union_tree(self) -> StagedTree:
        """One tree holding every level, each under its tag."""
        out = StagedTree(index=0, birth_stage=0, alphabet=Alphabet.TERNARY)
        trees = [self.base] + [q.upsilon for q in self.levels]
        batch: list[tuple[int, int, str]] = []
        for level, src in enumerate(trees):
            tag = self.tag(level).symbols
            for k in range(1, level + 1):
                batch.append((0, k, "0" * k))
            batch.append((0, len(tag), tag))
            for sigma, rec in src.nodes.items():
                if len(sigma) == 0:
                    continue
                sym = tag + sigma.symbols
                batch.append((rec.enumerated_at, len(sym), sym))
        batch.sort()
        for stage, _, sym in batch:
            out.enumerate_node(tern(sym), stage)
        return out


def iterate_chain(enums: list[ReEnumeration], stages: int) -> ChainResult:
    """Apply the coding construction along the supplied chain of r.e. sets,
    each level coding its set over the closure of the previous level."""
    if not enums:
        raise EnumerationError("the chain needs at least one enumeration")
    base = base_computable_class(stages)
    levels = []
    lam = ClosureTree(base)
    for enum in enums:
        q = build_Q(enum, lam, stages)
        levels.append(q)
        lam = ClosureTree(q.upsilon)
    return ChainResult(base=base, levels=levels, stages=stages)
