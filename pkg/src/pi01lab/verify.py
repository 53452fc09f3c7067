"""Invariant checkers shared by the CLI check runner and the test suite.

Every violation names the module, the invariant, the stage it was observed
at, and a witness string, so a failing check is directly actionable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .joins import finite_join
from .machine import Halted, Registry
from .strings import FinString, compatible
from .trees import ClosureTree, NodeStatus, StagedTree
from .thm2 import DiagonalizeD, FollowerAssign, OddPrune


@dataclass(frozen=True)
class Violation:
    module: str
    invariant: str
    stage: int
    witness: str
    detail: str = ""

    def __str__(self) -> str:
        msg = f"{self.module}: {self.invariant} violated at stage {self.stage} by {self.witness!r}"
        return f"{msg} ({self.detail})" if self.detail else msg


def check_tree_history(tree: StagedTree) -> list[Violation]:
    """Monotone enumeration stamps, absorbing statuses, dovetailed birth,
    and no extension ever enumerated above a terminal node."""
    out = []
    root_rec = tree.nodes.get(tree.root)
    if root_rec is None or root_rec.enumerated_at != tree.birth_stage:
        out.append(
            Violation("trees", "root enumerated at birth stage", tree.birth_stage, "ε")
        )
    for sigma, rec in tree.nodes.items():
        if rec.enumerated_at < tree.birth_stage:
            out.append(
                Violation(
                    "trees", "no node before birth stage", rec.enumerated_at, sigma.symbols
                )
            )
        if rec.status is NodeStatus.TERMINAL and rec.status_since < rec.enumerated_at:
            out.append(
                Violation(
                    "trees", "status change precedes enumeration", rec.status_since, sigma.symbols
                )
            )
        for k in range(len(sigma)):
            prefix = sigma.prefix(k)
            prec = tree.nodes.get(prefix)
            if prec is None:
                continue
            if (
                prec.status is NodeStatus.TERMINAL
                and prec.status_since < rec.enumerated_at
            ):
                out.append(
                    Violation(
                        "trees",
                        "terminal node extended",
                        rec.enumerated_at,
                        sigma.symbols,
                        f"prefix {prefix} terminal since {prec.status_since}",
                    )
                )
    return out


def check_leaf_pair_liveness(tree: StagedTree, through_stage: int | None = None) -> list[Violation]:
    """At every end-of-stage snapshot: a non-leaf with one alive leaf above
    it has two incompatible alive leaves above it.

    Distinct leaves are automatically incompatible, so the check is a
    descendant count.  Only stages where the tree changed are re-examined.
    """
    through = tree.last_stage if through_stage is None else through_stage
    event_stages = sorted(
        {r.enumerated_at for r in tree.nodes.values()}
        | {r.status_since for r in tree.nodes.values() if r.status is NodeStatus.TERMINAL}
    )
    out = []
    by_len = sorted(tree.nodes, key=len, reverse=True)
    for s in event_stages:
        if s > through:
            break
        present = {sigma: rec for sigma, rec in tree.nodes.items() if rec.enumerated_at <= s}
        counts: dict[FinString, int] = {}
        for sigma in by_len:
            rec = tree.nodes[sigma]
            if rec.enumerated_at > s:
                continue
            own = counts.get(sigma, 0)
            if own == 0 and tree.is_leaf(sigma, s) and tree.status_at(sigma, s) is NodeStatus.ALIVE:
                counts[sigma] = own = 1
            if len(sigma) > 0:
                for k in range(len(sigma) - 1, -1, -1):
                    parent = sigma.prefix(k)
                    if parent in present:
                        counts[parent] = counts.get(parent, 0) + own
                        break
        for sigma in present:
            if tree.is_leaf(sigma, s):
                continue
            c = counts.get(sigma, 0)
            if c == 1:
                out.append(
                    Violation(
                        "thm2_construction",
                        "leaf-pair liveness",
                        s,
                        sigma.symbols,
                        "exactly one alive leaf extends a non-leaf",
                    )
                )
    return out


def check_dovetailing(trees: list[StagedTree], through_stage: int) -> list[Violation]:
    out = []
    for tree in trees:
        for sigma, rec in tree.nodes.items():
            if rec.enumerated_at < tree.index:
                out.append(
                    Violation(
                        "thm2_construction",
                        "dovetailing",
                        rec.enumerated_at,
                        sigma.symbols,
                        f"tree {tree.index} has a node before its stage",
                    )
                )
        if tree.index <= through_stage:
            if tree.nodes[tree.root].enumerated_at != tree.index:
                out.append(
                    Violation(
                        "thm2_construction", "dovetailing", tree.index, "ε",
                        f"tree {tree.index} root not born on time",
                    )
                )
    return out


def check_d_soundness(
    d_set: set[int], actions: list, registry: Registry
) -> list[Violation]:
    """Every D entry is justified by exactly one diagonalization whose
    halt-with-0 re-verifies, on a follower previously assigned to the tuple."""
    out = []
    diags = [a for a in actions if isinstance(a, DiagonalizeD)]
    assigns = {
        (a.key, a.x): a.stage for a in actions if isinstance(a, FollowerAssign)
    }
    for x in sorted(d_set):
        mine = [a for a in diags if a.x == x]
        if len(mine) != 1:
            out.append(
                Violation(
                    "thm2_construction", "D-soundness", -1, str(x),
                    f"{len(mine)} justifying actions",
                )
            )
            continue
        action = mine[0]
        if (action.key, x) not in assigns or assigns[(action.key, x)] > action.stage:
            out.append(
                Violation(
                    "thm2_construction", "D-soundness", action.stage, str(x),
                    "follower was not assigned to the tuple beforehand",
                )
            )
        res = registry.evaluate(
            action.e, finite_join(list(action.extensions)), x, action.stage
        )
        if not (isinstance(res, Halted) and res.value == 0):
            out.append(
                Violation(
                    "thm2_construction", "D-soundness", action.stage, str(x),
                    "the witnessing evaluation does not halt with 0",
                )
            )
    for action in diags:
        if action.x not in d_set:
            out.append(
                Violation(
                    "thm2_construction", "D-soundness", action.stage, str(action.x),
                    "diagonalization logged but follower not in D",
                )
            )
    return out


def check_prune_soundness(trees: list[StagedTree], actions: list) -> list[Violation]:
    """After an odd prune: the survivor is alive at that stage and every
    enumerated extension of the predecessor compatible with the target is
    terminal by that stage."""
    out = []
    for action in actions:
        if not isinstance(action, OddPrune):
            continue
        tree = trees[action.tree]
        s = action.stage
        if action.tau1 is not None and tree.status_at(action.tau1, s) is not NodeStatus.ALIVE:
            out.append(
                Violation(
                    "thm2_construction", "prune soundness", s, action.tau1.symbols,
                    "survivor leaf not alive after the prune",
                )
            )
        for sigma, rec in tree.nodes.items():
            if rec.enumerated_at > s or not action.tau0.is_proper_prefix_of(sigma):
                continue
            if not compatible(sigma, action.tau):
                continue
            if tree.status_at(sigma, s) is not NodeStatus.TERMINAL:
                out.append(
                    Violation(
                        "thm2_construction", "prune soundness", s, sigma.symbols,
                        "extension compatible with the diagonalized node stayed alive",
                    )
                )
    return out


def check_closure_downward_closed(tree: StagedTree, depth: int) -> list[Violation]:
    """Exhaustive downward-closure scan of the closure view up to depth."""
    closure = ClosureTree(tree)
    out = []
    symbols = "01" if tree.alphabet.value == "binary" else "01#"
    stack = [FinString("", tree.alphabet)]
    while stack:
        sigma = stack.pop()
        if len(sigma) >= depth:
            continue
        for c in symbols:
            child = sigma.append(c)
            if closure.member(child):
                if not closure.member(sigma):
                    out.append(
                        Violation(
                            "trees", "closure downward closed", len(sigma), sigma.symbols,
                            f"member child {child} with non-member prefix",
                        )
                    )
                stack.append(child)
    return out


def check_base_shape(tree: StagedTree, depth: int) -> list[Violation]:
    """Depth-d strings of the base class are exactly the 0^a 1^b shapes and
    carry the stage stamp equal to their length."""
    out = []
    for sigma, rec in tree.nodes.items():
        sym = sigma.symbols
        if len(sym) > depth:
            continue
        if "10" in sym:
            out.append(
                Violation("chain_spectrum", "base class shape", rec.enumerated_at, sym,
                          "a 0 follows a 1")
            )
        if rec.enumerated_at != len(sym):
            out.append(
                Violation("chain_spectrum", "base class stage rule", rec.enumerated_at, sym,
                          "node stage differs from its length")
            )
    for d in range(depth + 1):
        have = {s.symbols for s in tree.nodes if len(s) == d}
        want = {"0" * a + "1" * (d - a) for a in range(d + 1)}
        if have != want:
            missing = sorted(want - have)
            extra = sorted(have - want)
            out.append(
                Violation("chain_spectrum", "base class shape", d, f"depth {d}",
                          f"missing {missing}, extra {extra}")
            )
    return out


def check_markers(markers: list[FinString]) -> list[Violation]:
    out = []
    for m in markers:
        if not m.symbols.endswith("#"):
            out.append(
                Violation("chain_spectrum", "marker soundness", -1, m.symbols,
                          "marker does not end with the delimiter")
            )
    return out


def check_graft_soundness(
    upsilon: StagedTree,
    markers: list[FinString],
    lam: ClosureTree,
    final_stage: int,
    completeness_depth: int | None = None,
) -> list[Violation]:
    """Above every marker: hash-free suffixes all belong to the copied
    class, and every class member fits within the remaining depth budget.

    The remaining depth is measured from the marker's enumeration stage.
    Completeness can be capped to keep big scans affordable.
    """
    out = []
    suffixes: dict[str, set[str]] = {m.symbols: set() for m in markers}
    marker_syms = sorted(suffixes, key=len)
    for sigma in upsilon.nodes:
        sym = sigma.symbols
        for msym in marker_syms:
            if len(sym) > len(msym) and sym.startswith(msym):
                suffixes[msym].add(sym[len(msym):])
    binary_lam = lam.source.alphabet.value == "binary"
    for m in markers:
        born = upsilon.nodes[m].enumerated_at
        remaining = final_stage - born
        if completeness_depth is not None:
            remaining = min(remaining, completeness_depth)
        got = suffixes[m.symbols]
        if binary_lam:
            for suf in got:
                if "#" in suf:
                    continue
                if not lam.member(FinString(suf)):
                    out.append(
                        Violation(
                            "chain_spectrum", "graft soundness", born,
                            m.symbols + suf, "suffix above a marker is not a class member",
                        )
                    )
        for member in lam.members_up_to(remaining):
            if len(member) == 0:
                continue
            if member.symbols not in got:
                out.append(
                    Violation(
                        "chain_spectrum", "graft completeness", born,
                        m.symbols + member.symbols,
                        f"class member of length {len(member)} <= {remaining} missing above marker",
                    )
                )
    return out
