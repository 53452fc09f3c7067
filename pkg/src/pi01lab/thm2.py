"""Stage-driven construction of a family of trees with diagonalization.

The driver maintains finitely many staged trees (tree i silent until stage
i), a diagonal set D, and a follower table.  Each stage s > 0 runs, in
order:

  (i)  odd requirements: in every born tree, for every e whose odd level
       2e+1 already exists, if the alive level-(2e+1) node lying on the
       stage-s computable prefix of functional e exists, its parent's cone
       toward that node is declared terminal, keeping the least alive leaf
       off the diagonalized branch;
  (ii) even requirements: tuples of pairwise-incompatible alive nodes at a
       common even level 2e (components may come from different trees) are
       enrolled with fresh followers, fairly and in code order, at most
       ``tuples_per_stage`` new enrollments a stage; every earlier-enrolled
       tuple is then serviced: if each component has an alive level-(2e+2)
       extension making functional e halt with 0 on the tuple's follower x,
       and x is not yet in D, then x enters D and each component's cone is
       cut down to the witnessing chain;
  then every alive leaf of every earlier-born tree gains two incompatible
  children (its 0- and 1-successor), subject to the optional depth budget.

Everything is deterministic: orderings are length-lexicographic, follower
values come from a counter, and no randomness is involved anywhere.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from .joins import finite_join
from .machine import Halted, Registry, run_program
from .strings import FinString, incompatible, pair, string_code
from .trees import NodeStatus, StagedTree


@dataclass(frozen=True)
class StageBudget:
    """Per-stage work limits.

    ``tuples_per_stage`` caps new tuple enrollments (the scan notes in the
    log when it stopped early).  ``max_depth`` is the desk-scale depth
    horizon: leaves at that length stop extending, which keeps long runs
    materializable; None grows trees freely.
    """

    tuples_per_stage: int = 64
    max_depth: int | None = None


@dataclass(frozen=True)
class TupleKey:
    """An ordered tuple of (tree index, node) components at one even level."""

    parts: tuple[tuple[int, FinString], ...]
    level: int

    @property
    def functional(self) -> int:
        return self.level // 2

    @property
    def arity(self) -> int:
        return len(self.parts)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "parts": [[t, node.symbols] for t, node in self.parts],
        }


# -- actions ----------------------------------------------------------------


@dataclass(frozen=True)
class OddPrune:
    stage: int
    e: int
    tree: int
    tau: FinString
    tau0: FinString
    tau1: FinString | None
    marked: int

    kind = "odd_prune"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "stage": self.stage,
            "e": self.e,
            "tree": self.tree,
            "tau": self.tau.symbols,
            "tau0": self.tau0.symbols,
            "tau1": None if self.tau1 is None else self.tau1.symbols,
            "marked": self.marked,
        }


@dataclass(frozen=True)
class FollowerAssign:
    stage: int
    key: TupleKey
    x: int

    kind = "follower_assign"

    def to_json(self) -> dict:
        return {"kind": self.kind, "stage": self.stage, "tuple": self.key.to_json(), "x": self.x}


@dataclass(frozen=True)
class DiagonalizeD:
    stage: int
    e: int
    key: TupleKey
    extensions: tuple[FinString, ...]
    x: int
    marked: int

    kind = "diagonalize_d"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "stage": self.stage,
            "e": self.e,
            "tuple": self.key.to_json(),
            "extensions": [s.symbols for s in self.extensions],
            "x": self.x,
            "marked": self.marked,
        }


@dataclass(frozen=True)
class LeafExtend:
    stage: int
    tree: int
    sigma: FinString

    kind = "leaf_extend"

    def to_json(self) -> dict:
        return {"kind": self.kind, "stage": self.stage, "tree": self.tree, "sigma": self.sigma.symbols}


@dataclass(frozen=True)
class TupleScanTruncated:
    stage: int
    registered: int

    kind = "tuple_scan_truncated"

    def to_json(self) -> dict:
        return {"kind": self.kind, "stage": self.stage, "registered": self.registered}


Action = OddPrune | FollowerAssign | DiagonalizeD | LeafExtend | TupleScanTruncated


class TupleNotRegistered(KeyError):
    pass


@dataclass
class FollowerEntry:
    x: int
    assign_stage: int


class FollowerTable:
    """tuple -> follower, assigned once, pairwise distinct, never in D."""

    def __init__(self) -> None:
        self.entries: dict[TupleKey, FollowerEntry] = {}
        self.order: list[TupleKey] = []
        self._next = 0

    def __contains__(self, key: TupleKey) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def follower(self, key: TupleKey) -> int:
        entry = self.entries.get(key)
        if entry is None:
            raise TupleNotRegistered(f"tuple {key} has no follower")
        return entry.x

    def assign(self, key: TupleKey, stage: int, d_set: set[int]) -> int:
        if key in self.entries:
            return self.entries[key].x
        while self._next in d_set:
            self._next += 1
        x = self._next
        self._next += 1
        self.entries[key] = FollowerEntry(x=x, assign_stage=stage)
        self.order.append(key)
        return x


class ConstructionState:
    """Everything a run owns: the trees, D, followers, and the action log."""

    def __init__(self, num_trees: int, registry: Registry) -> None:
        if num_trees < 1:
            raise ValueError("need at least one tree")
        self.registry = registry
        self.trees = [StagedTree(index=i, birth_stage=i) for i in range(num_trees)]
        self.d_set: set[int] = set()
        self.followers = FollowerTable()
        self.actions: list[Action] = []
        self.stage = -1
        # engine indexes
        self._alive_leaves: list[set[FinString]] = [{t.root} for t in self.trees]
        self._nodes_by_len: list[dict[int, list[FinString]]] = [
            {0: [t.root]} for t in self.trees
        ]
        self._frontier = [0 for _ in self.trees]
        self._mutations = 0
        self._universe_cache: tuple[int, dict[int, list]] = (-1, {})
        self._cp_cache: tuple[int, dict[int, FinString]] = (-1, {})

    # -- index upkeep -------------------------------------------------------

    def _born(self, s: int) -> list[StagedTree]:
        return [t for t in self.trees if t.birth_stage <= s]

    def _add_node(self, tree_idx: int, sigma: FinString, stage: int) -> None:
        self.trees[tree_idx].enumerate_node(sigma, stage)
        self._nodes_by_len[tree_idx].setdefault(len(sigma), []).append(sigma)
        self._alive_leaves[tree_idx].add(sigma)
        if len(sigma) > 0:
            self._alive_leaves[tree_idx].discard(sigma.prefix(len(sigma) - 1))
        self._mutations += 1

    def _kill(self, tree_idx: int, killed: list[FinString]) -> None:
        for sigma in killed:
            self._alive_leaves[tree_idx].discard(sigma)
        if killed:
            self._mutations += 1

    def alive_nodes_of_length(self, tree_idx: int, length: int, stage: int) -> list[FinString]:
        tree = self.trees[tree_idx]
        out = [
            sigma
            for sigma in self._nodes_by_len[tree_idx].get(length, [])
            if tree.nodes[sigma].enumerated_at <= stage
            and tree.status_at(sigma, stage) is NodeStatus.ALIVE
        ]
        out.sort(key=lambda s: s.lexkey)
        return out

    def computable_prefix(self, e: int, s: int) -> FinString:
        mark, cache = self._cp_cache
        if mark != s:
            cache = {}
            self._cp_cache = (s, cache)
        if e not in cache:
            cache[e] = self.registry.computable_prefix(e, s)
        return cache[e]

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "d_set": sorted(self.d_set),
            "followers": [
                {
                    "tuple": key.to_json(),
                    "x": self.followers.entries[key].x,
                    "assign_stage": self.followers.entries[key].assign_stage,
                }
                for key in self.followers.order
            ],
        }


# -- tuple enumeration -------------------------------------------------------


def _tuple_code(element_codes: tuple[int, ...]) -> int:
    code = 0
    for c in reversed(element_codes):
        code = pair(c, code) + 1
    return code


def _level_universe(state: ConstructionState, s: int) -> dict[int, list[tuple[int, int, FinString]]]:
    """Per even level: (element code, tree, node) for alive nodes, sorted.

    Engine trees grow children one symbol at a time, so a node's level is
    its length.
    """
    mark, cached = state._universe_cache
    if mark == state._mutations:
        return cached
    universe: dict[int, list[tuple[int, int, FinString]]] = {}
    max_len = max(state._frontier, default=0)
    for length in range(0, max_len + 1, 2):
        elems = []
        for tree in state._born(s):
            for node in state.alive_nodes_of_length(tree.index, length, s):
                elems.append((pair(tree.index, string_code(node)), tree.index, node))
        if elems:
            elems.sort()
            universe[length] = elems
    state._universe_cache = (state._mutations, universe)
    return universe


def _iter_candidate_tuples(state: ConstructionState, s: int):
    """Yield valid tuples (every arity, all levels) in increasing code order.

    Lazy best-first enumeration: a heap node is a tuple of universe
    indices; its successors prepend the first compatible element (child)
    and bump the head to the next compatible element (sibling).  Both
    successors have strictly larger codes, so pops come out sorted.
    """
    universe = _level_universe(state, s)
    heap: list[tuple[int, int, tuple[int, ...]]] = []

    def first_valid(level: int, start: int, chosen: tuple[int, ...]) -> int | None:
        elems = universe[level]
        blocked = [elems[i][2] for i in chosen]
        for k in range(start, len(elems)):
            node = elems[k][2]
            if all(incompatible(node, other) for other in blocked):
                return k
        return None

    for level in sorted(universe):
        k = first_valid(level, 0, ())
        if k is not None:
            idxs = (k,)
            heapq.heappush(heap, (_tuple_code((universe[level][k][0],)), level, idxs))
    while heap:
        code, level, idxs = heapq.heappop(heap)
        elems = universe[level]
        key = TupleKey(
            parts=tuple((elems[i][1], elems[i][2]) for i in idxs), level=level
        )
        yield code, key
        # sibling: advance the head
        head, rest = idxs[0], idxs[1:]
        j = first_valid(level, head + 1, rest)
        if j is not None:
            nxt = (j,) + rest
            heapq.heappush(
                heap, (_tuple_code(tuple(elems[i][0] for i in nxt)), level, nxt)
            )
        # child: prepend a fresh head
        k = first_valid(level, 0, idxs)
        if k is not None:
            nxt = (k,) + idxs
            heapq.heappush(
                heap, (_tuple_code(tuple(elems[i][0] for i in nxt)), level, nxt)
            )


# -- the stage driver ---------------------------------------------------------


def _odd_step(state: ConstructionState, s: int) -> None:
    for tree in state._born(s):
        height = state._frontier[tree.index]
        for level in range(1, height + 1, 2):
            e = level // 2
            cp = state.computable_prefix(e, s)
            if len(cp) < level:
                continue
            tau = cp.prefix(level)
            if not tree.is_enumerated(tau, s):
                continue
            if tree.status_at(tau, s) is not NodeStatus.ALIVE:
                continue
            tau0 = tree.immediate_predecessor(tau, s)
            survivors = [
                leaf
                for leaf in state._alive_leaves[tree.index]
                if leaf.extends(tau0) and incompatible(leaf, tau)
            ]
            tau1 = min(survivors, key=lambda x: x.lexkey) if survivors else None
            killed = tree.declare_terminal_cone(tau0, stage=s, prune_target=tau)
            state._kill(tree.index, killed)
            state.actions.append(
                OddPrune(stage=s, e=e, tree=tree.index, tau=tau, tau0=tau0,
                         tau1=tau1, marked=len(killed))
            )


def _register_step(state: ConstructionState, s: int, budget: StageBudget) -> None:
    new = 0
    gen = _iter_candidate_tuples(state, s)
    for _code, key in gen:
        if key in state.followers:
            continue
        x = state.followers.assign(key, stage=s, d_set=state.d_set)
        state.actions.append(FollowerAssign(stage=s, key=key, x=x))
        new += 1
        if new >= budget.tuples_per_stage:
            try:
                next(gen)
                state.actions.append(TupleScanTruncated(stage=s, registered=new))
            except StopIteration:
                pass
            break


def _witness_search(
    state: ConstructionState, key: TupleKey, x: int, s: int
) -> tuple[FinString, ...] | None:
    """Alive level-(2e+2) extensions of the tuple making functional e halt
    with 0 on input x, the lexicographically first such combination."""
    e = key.functional
    if state.registry.knows_divergent(e) or x > s:
        return None
    target = key.level + 2
    options = []
    for tree_idx, sigma in key.parts:
        exts = [
            node
            for node in state.alive_nodes_of_length(tree_idx, target, s)
            if node.extends(sigma)
        ]
        if not exts:
            return None
        options.append(exts)
    program = state.registry.program_for(e)
    for combo in itertools.product(*options):
        oracle = finite_join(list(combo))
        res = run_program(program, oracle, x, s)
        if isinstance(res, Halted) and res.value == 0:
            return combo
    return None


def _service_step(state: ConstructionState, s: int) -> None:
    for key in list(state.followers.order):
        entry = state.followers.entries[key]
        if entry.assign_stage >= s:
            continue
        x = entry.x
        if x in state.d_set:
            continue
        if any(
            state.trees[t].status_at(node, s) is not NodeStatus.ALIVE
            for t, node in key.parts
        ):
            continue
        combo = _witness_search(state, key, x, s)
        if combo is None:
            continue
        state.d_set.add(x)
        total = 0
        for (tree_idx, sigma), witness in zip(key.parts, combo):
            killed = state.trees[tree_idx].declare_terminal_cone(
                sigma, stage=s, keep_compatible_with=witness
            )
            state._kill(tree_idx, killed)
            total += len(killed)
        state.actions.append(
            DiagonalizeD(stage=s, e=key.functional, key=key, extensions=combo, x=x, marked=total)
        )


def _extend_step(state: ConstructionState, s: int, budget: StageBudget) -> None:
    for tree in state.trees:
        if tree.birth_stage >= s:
            continue
        leaves = sorted(state._alive_leaves[tree.index], key=lambda x: x.lexkey)
        for sigma in leaves:
            if budget.max_depth is not None and len(sigma) >= budget.max_depth:
                continue
            for c in "01":
                state._add_node(tree.index, sigma.append(c), s)
            state.actions.append(LeafExtend(stage=s, tree=tree.index, sigma=sigma))
            if len(sigma) + 1 > state._frontier[tree.index]:
                state._frontier[tree.index] = len(sigma) + 1


def run_stage(state: ConstructionState, budget: StageBudget = StageBudget()) -> ConstructionState:
    """Execute the next stage; stage 0 only makes tree 0 visible."""
    s = state.stage + 1
    if s > 0:
        if any(t.birth_stage == s for t in state.trees):
            state._mutations += 1  # a newly born root changes the tuple universe
        _odd_step(state, s)
        _register_step(state, s, budget)
        _service_step(state, s)
        _extend_step(state, s, budget)
    state.stage = s
    return state


def run(state: ConstructionState, stages: int, budget: StageBudget = StageBudget()) -> ConstructionState:
    """Iterate run_stage; deterministic in (registry, budget, stages)."""
    for _ in range(stages):
        run_stage(state, budget)
    return state


# -- requirement checkers ------------------------------------------------------


@dataclass(frozen=True)
class OddStatus:
    satisfied: bool
    pending_node: FinString | None = None


@dataclass(frozen=True)
class EvenStatus:
    satisfied: bool
    threat: tuple[FinString, ...] | None = None


def check_requirement_odd(state: ConstructionState, e: int, i: int, s: int) -> OddStatus:
    """Satisfied iff no alive level-(2e+1) node of tree i lies on the
    stage-s computable prefix of functional e; Pending names the node,
    which the next stage must prune."""
    tree = state.trees[i]
    if tree.birth_stage > s:
        return OddStatus(satisfied=True)
    cp = state.registry.computable_prefix(e, s)
    level = 2 * e + 1
    if len(cp) < level:
        return OddStatus(satisfied=True)
    tau = cp.prefix(level)
    if tree.is_enumerated(tau, s) and tree.status_at(tau, s) is NodeStatus.ALIVE:
        return OddStatus(satisfied=False, pending_node=tau)
    return OddStatus(satisfied=True)


def check_requirement_even(state: ConstructionState, key: TupleKey, s: int) -> EvenStatus:
    """Satisfied iff the tuple's follower is already diagonalized (with its
    witnesses alive and the halt-0 re-verified) or no qualifying extensions
    have converged to 0 by stage s."""
    entry = state.followers.entries.get(key)
    if entry is None:
        raise TupleNotRegistered(f"tuple {key.to_json()} was never assigned a follower")
    x = entry.x
    if x in state.d_set:
        action = next(
            (a for a in state.actions if isinstance(a, DiagonalizeD) and a.x == x), None
        )
        if action is None:
            return EvenStatus(satisfied=False)
        witnesses_alive = all(
            state.trees[t].status_at(node, s) is NodeStatus.ALIVE
            for (t, _), node in zip(key.parts, action.extensions)
        )
        res = state.registry.evaluate(
            key.functional, finite_join(list(action.extensions)), x, max(s, action.stage)
        )
        ok = witnesses_alive and isinstance(res, Halted) and res.value == 0
        return EvenStatus(satisfied=ok, threat=None if ok else action.extensions)
    combo = _witness_search(state, key, x, s)
    if combo is None:
        return EvenStatus(satisfied=True)
    return EvenStatus(satisfied=False, threat=combo)
