"""Subtree selection for lower and upper cone avoidance, at finite depth.

Both procedures replace a jump oracle with budgeted step search: answers
are Converged (stable under any larger budget) or Unknown (the budget is
part of the output, and nothing is silently guessed).

Lower cone: find the least pair of incompatible depth-extendible strings,
ask whether the given functional converges at their first disagreement
through the infinite-join oracle of the supplied rows, and restrict the
tree to whichever string disagrees with the answer; an Unknown answer
leaves the tree unrestricted and flags it.

Upper cone: for each argument n below the target's horizon, collect the
strings whose constant-sequence join makes the functional diverge or
disagree with the target; the least n whose collection reaches every
length up to the depth budget names the selected subtree.  If no n does,
every collection dies out at some length, and the witnesses (all strings
of one length forcing a single halt value) are reported: they would make
the target computable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .joins import JoinOracle, constant_join, join_oracle
from .machine import Halted, Program, run_program
from .strings import FinString, compatible, first_disagreement
from .trees import NodeStatus, StagedTree


@dataclass(frozen=True)
class Converged:
    value: int


@dataclass(frozen=True)
class Unknown:
    budget_spent: int


ConvergenceAnswer = Converged | Unknown


def ask_convergence(program: Program, oracle: JoinOracle, n: int, budget: int) -> ConvergenceAnswer:
    """Budgeted stand-in for a jump query about convergence at n."""
    prefix = oracle.determined_prefix()
    res = run_program(program, prefix, n, budget)
    if isinstance(res, Halted):
        return Converged(value=res.value)
    return Unknown(budget_spent=budget)


@dataclass(frozen=True)
class SubtreeResult:
    """A restriction of the input tree plus the diagnostics that chose it.

    ``kind`` is one of:
      compatible    -- strings compatible with ``restriction`` (lower cone)
      unrestricted  -- the whole tree (the Unknown branch)
      avoid_set     -- the explicit string set ``selected_set`` (upper cone)
      target_computable -- upper-cone dead end: every collection finite,
                           witnesses say the target is computable
      undecided     -- the depth budget cannot classify (degenerate input)
    """

    kind: str
    restriction: FinString | None = None
    selected_set: frozenset[FinString] | None = None
    chosen_n: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def members(self, tree: StagedTree, depth: int, stage: int | None = None) -> list[FinString]:
        """The restricted tree's strings of length <= depth."""
        stage = tree.last_stage if stage is None else stage
        out = []
        for sigma in tree.nodes_at(stage):
            if len(sigma) > depth:
                continue
            if tree.status_at(sigma, stage) is not NodeStatus.ALIVE:
                continue
            if self.kind == "compatible" and self.restriction is not None:
                if not compatible(sigma, self.restriction):
                    continue
            elif self.kind == "avoid_set":
                if sigma not in (self.selected_set or frozenset()):
                    continue
            out.append(sigma)
        return out

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "restriction": None if self.restriction is None else self.restriction.symbols,
            "selected_set": None
            if self.selected_set is None
            else sorted(s.symbols for s in self.selected_set),
            "chosen_n": self.chosen_n,
            "diagnostics": self.diagnostics,
        }


class PairNotFound(ValueError):
    """The tree has no two incompatible depth-extendible strings."""


def least_incompatible_extendibles(
    tree: StagedTree, depth: int, stage: int | None = None
) -> tuple[FinString, FinString, int]:
    """The least pair of incompatible depth-extendible strings and their
    first disagreement position."""
    stage = tree.last_stage if stage is None else stage
    ext = sorted(tree.extendible_set(depth, stage), key=lambda s: s.lexkey)
    for a_idx, sigma in enumerate(ext):
        for tau in ext[a_idx + 1:]:
            if not compatible(sigma, tau):
                return sigma, tau, first_disagreement(sigma, tau)
    raise PairNotFound(
        f"no incompatible pair of depth-{depth} extendible strings at stage {stage}"
    )


def lower_cone_subtree(
    tree: StagedTree,
    rows: list[FinString],
    program: Program,
    budget: int,
    depth: int,
    stage: int | None = None,
) -> SubtreeResult:
    """Restrict the tree away from what the functional computes from the
    rows' infinite join, when that value converges within budget."""
    stage = tree.last_stage if stage is None else stage
    sigma, tau, n = least_incompatible_extendibles(tree, depth, stage)
    oracle = join_oracle(rows)
    answer = ask_convergence(program, oracle, n, budget)
    diag = {
        "n": n,
        "pair": [sigma.symbols, tau.symbols],
        "depth": depth,
        "budget": budget,
        "determined_prefix_length": oracle.determined_length(),
    }
    if isinstance(answer, Unknown):
        diag["answer"] = "unknown"
        return SubtreeResult(kind="unrestricted", diagnostics=diag)
    diag["answer"] = {"converged": answer.value}
    chosen = sigma if sigma.bit(n) != answer.value else tau
    return SubtreeResult(kind="compatible", restriction=chosen, chosen_n=n, diagnostics=diag)


def compute_avoidance_set(
    tree: StagedTree,
    program: Program,
    target: FinString,
    n: int,
    depth: int,
    budget: int,
    stage: int | None = None,
) -> set[FinString]:
    """Strings sigma (alive, length <= depth) on which the functional,
    run through the constant-sequence join of sigma, fails to produce
    target(n): it diverges within budget or halts with a different value."""
    if n >= len(target):
        raise ValueError(f"argument {n} is beyond the target's horizon {len(target)}")
    stage = tree.last_stage if stage is None else stage
    want = target.bit(n)
    out = set()
    for sigma in tree.nodes_at(stage):
        if len(sigma) > depth:
            continue
        if tree.status_at(sigma, stage) is not NodeStatus.ALIVE:
            continue
        res = run_program(program, constant_join(sigma).determined_prefix(), n, budget)
        if not (isinstance(res, Halted) and res.value == want):
            out.add(sigma)
    return out


def upper_cone_subtree(
    tree: StagedTree,
    program: Program,
    target: FinString,
    depth: int,
    budget: int,
    stage: int | None = None,
) -> SubtreeResult:
    """Select the least n whose avoidance set reaches every length up to
    depth; report the computability witnesses when none does."""
    stage = tree.last_stage if stage is None else stage
    alive_lengths = set()
    for sigma in tree.nodes_at(stage):
        if len(sigma) <= depth and tree.status_at(sigma, stage) is NodeStatus.ALIVE:
            alive_lengths.add(len(sigma))
    missing = [m for m in range(depth + 1) if m not in alive_lengths]
    if missing:
        return SubtreeResult(
            kind="undecided",
            diagnostics={
                "reason": f"tree has no alive string of length {missing[0]} <= depth",
                "depth": depth,
                "budget": budget,
            },
        )
    witnesses = []
    for n in range(len(target)):
        avoid = compute_avoidance_set(tree, program, target, n, depth, budget, stage)
        lengths = {len(s) for s in avoid}
        if all(m in lengths for m in range(depth + 1)):
            return SubtreeResult(
                kind="avoid_set",
                selected_set=frozenset(avoid),
                chosen_n=n,
                diagnostics={"depth": depth, "budget": budget, "size": len(avoid)},
            )
        m = min(m for m in range(depth + 1) if m not in lengths)
        # the avoidance set misses length m, so every alive length-m string
        # made the functional halt with one value; re-derive it from the runs
        values = set()
        for sigma in tree.nodes_at(stage):
            if len(sigma) != m or tree.status_at(sigma, stage) is not NodeStatus.ALIVE:
                continue
            res = run_program(program, constant_join(sigma).determined_prefix(), n, budget)
            values.add(res.value if isinstance(res, Halted) else None)
        k = values.pop() if len(values) == 1 else None
        witnesses.append({"n": n, "m": m, "k": k})
    return SubtreeResult(
        kind="target_computable",
        diagnostics={"witnesses": witnesses, "depth": depth, "budget": budget},
    )


def full_binary_tree(depth: int) -> StagedTree:
    """The complete binary tree to the given depth, node enumerated at the
    stage equal to its length."""
    tree = StagedTree(index=0, birth_stage=0)
    frontier = [tree.root]
    for stage in range(1, depth + 1):
        nxt = []
        for sigma in frontier:
            for c in "01":
                child = sigma.append(c)
                tree.enumerate_node(child, stage)
                nxt.append(child)
        frontier = nxt
    return tree
