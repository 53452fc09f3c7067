"""Stage-indexed enumerated trees and their downward-closed closures.

A ``StagedTree`` records, per node, the stage at which it was enumerated and
an Alive/Terminal status with its own stage stamp.  Enumeration is monotone
and Terminal is absorbing, so every historical snapshot can be reconstructed
from the final record set; all queries take a ``stage`` argument and answer
against that snapshot.  The enumerated set need not be downward closed.

The closure view makes membership computable by a length cutoff: a string
belongs to the closure iff it is a prefix of some node enumerated by the
stage equal to the string's own length.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .strings import Alphabet, FinString, compatible, incompatible


class NodeStatus(enum.Enum):
    ALIVE = "alive"
    TERMINAL = "terminal"


class TreeError(ValueError):
    pass


class NodeNotFound(TreeError):
    pass


class NoPredecessor(TreeError):
    pass


@dataclass
class NodeRecord:
    enumerated_at: int
    status: NodeStatus = NodeStatus.ALIVE
    status_since: int = 0


class StagedTree:
    """An enumerated tree with per-stage history.

    The root (empty string) is enumerated at ``birth_stage``; snapshots
    before the birth stage are empty.  Mutations must arrive with
    non-decreasing stage numbers.
    """

    def __init__(self, index: int = 0, birth_stage: int = 0,
                 alphabet: Alphabet = Alphabet.BINARY) -> None:
        self.index = index
        self.birth_stage = birth_stage
        self.alphabet = alphabet
        self.nodes: dict[FinString, NodeRecord] = {}
        self.last_stage = birth_stage
        # extended_since[sigma] = earliest stage at which an enumerated
        # proper extension of sigma exists; drives leaf queries.
        self._extended_since: dict[FinString, int] = {}
        self._downward_closed = True
        self._prefix_min: dict[FinString, int] | None = None
        root = FinString("", alphabet)
        self.nodes[root] = NodeRecord(enumerated_at=birth_stage, status_since=birth_stage)
        self.root = root

    # -- mutation ---------------------------------------------------------

    def _coerce(self, sigma: FinString) -> FinString:
        if sigma.alphabet is self.alphabet:
            return sigma
        if self.alphabet is Alphabet.TERNARY:
            return sigma.as_ternary()
        return sigma.as_binary()

    def enumerate_node(self, sigma: FinString, stage: int) -> bool:
        """Enumerate sigma at ``stage``; returns False if already present.

        Rejects extensions of a node that is Terminal at this stage, which
        is what keeps Terminal cones dead for good.
        """
        sigma = self._coerce(sigma)
        if stage < self.birth_stage:
            raise TreeError(f"stage {stage} precedes birth stage {self.birth_stage}")
        if stage < self.last_stage:
            raise TreeError(f"stage {stage} is in the past (last mutation at {self.last_stage})")
        self.last_stage = stage
        if sigma in self.nodes:
            return False
        for k in range(len(sigma) - 1, -1, -1):
            prefix = sigma.prefix(k)
            rec = self.nodes.get(prefix)
            if rec is not None and rec.status is NodeStatus.TERMINAL:
                raise TreeError(
                    f"cannot enumerate {sigma}: its prefix {prefix} is terminal"
                )
        if len(sigma) > 0 and sigma.prefix(len(sigma) - 1) not in self.nodes:
            self._downward_closed = False
        self.nodes[sigma] = NodeRecord(enumerated_at=stage, status_since=stage)
        for k in range(len(sigma)):
            prefix = sigma.prefix(k)
            if prefix not in self._extended_since:
                self._extended_since[prefix] = stage
        if self._prefix_min is not None:
            for k in range(len(sigma) + 1):
                prefix = sigma.prefix(k)
                if prefix not in self._prefix_min:
                    self._prefix_min[prefix] = stage
        return True

    def mark_terminal(self, sigma: FinString, stage: int) -> bool:
        """Mark sigma Terminal at ``stage``; absorbing, returns False if already dead."""
        sigma = self._coerce(sigma)
        rec = self.nodes.get(sigma)
        if rec is None:
            raise NodeNotFound(f"{sigma} is not enumerated in tree {self.index}")
        if stage < self.last_stage:
            raise TreeError(f"stage {stage} is in the past (last mutation at {self.last_stage})")
        self.last_stage = stage
        if rec.status is NodeStatus.TERMINAL:
            return False
        rec.status = NodeStatus.TERMINAL
        rec.status_since = stage
        return True

    # -- snapshot queries --------------------------------------------------

    def is_enumerated(self, sigma: FinString, stage: int) -> bool:
        rec = self.nodes.get(self._coerce(sigma))
        return rec is not None and rec.enumerated_at <= stage

    def status_at(self, sigma: FinString, stage: int) -> NodeStatus:
        rec = self.nodes.get(self._coerce(sigma))
        if rec is None or rec.enumerated_at > stage:
            raise NodeNotFound(f"{sigma} is not enumerated by stage {stage}")
        if rec.status is NodeStatus.TERMINAL and rec.status_since <= stage:
            return NodeStatus.TERMINAL
        return NodeStatus.ALIVE

    def is_alive(self, sigma: FinString, stage: int) -> bool:
        return self.status_at(sigma, stage) is NodeStatus.ALIVE

    def nodes_at(self, stage: int) -> list[FinString]:
        """All nodes of the snapshot, in length-lex order."""
        out = [s for s, r in self.nodes.items() if r.enumerated_at <= stage]
        out.sort(key=lambda s: s.lexkey)
        return out

    def is_leaf(self, sigma: FinString, stage: int) -> bool:
        """Enumerated with no enumerated proper extension at the snapshot."""
        if not self.is_enumerated(sigma, stage):
            return False
        ext = self._extended_since.get(self._coerce(sigma))
        return ext is None or ext > stage

    def leaves(self, stage: int, alive_only: bool = False) -> list[FinString]:
        out = []
        for sigma, rec in self.nodes.items():
            if rec.enumerated_at > stage:
                continue
            ext = self._extended_since.get(sigma)
            if ext is not None and ext <= stage:
                continue
            if alive_only and self.status_at(sigma, stage) is not NodeStatus.ALIVE:
                continue
            out.append(sigma)
        out.sort(key=lambda s: s.lexkey)
        return out

    def immediate_predecessor(self, sigma: FinString, stage: int) -> FinString:
        """Longest enumerated proper prefix at the snapshot."""
        sigma = self._coerce(sigma)
        if not self.is_enumerated(sigma, stage):
            raise NodeNotFound(f"{sigma} is not enumerated by stage {stage}")
        if len(sigma) == 0:
            raise NoPredecessor("the root has no predecessor")
        for k in range(len(sigma) - 1, -1, -1):
            prefix = sigma.prefix(k)
            if self.is_enumerated(prefix, stage):
                return prefix
        raise NoPredecessor(f"no enumerated proper prefix of {sigma} at stage {stage}")

    def level(self, sigma: FinString, stage: int) -> int:
        """Number of enumerated proper prefixes at the snapshot (tree depth)."""
        sigma = self._coerce(sigma)
        if not self.is_enumerated(sigma, stage):
            raise NodeNotFound(f"{sigma} is not enumerated by stage {stage}")
        return sum(
            1 for k in range(len(sigma)) if self.is_enumerated(sigma.prefix(k), stage)
        )

    def declare_terminal_cone(
        self,
        tau0: FinString,
        stage: int,
        prune_target: FinString | None = None,
        keep_compatible_with: FinString | None = None,
    ) -> list[FinString]:
        """Mark Terminal the enumerated proper extensions of tau0, filtered.

        With ``prune_target`` set, only extensions compatible with it die
        (the diagonalized branch); with ``keep_compatible_with`` set, only
        extensions incompatible with it die (everything off the surviving
        chain); with neither, the whole cone above tau0 dies.  Idempotent:
        already-Terminal nodes are not re-marked.  Returns the newly marked
        nodes (their count is the usual quantity of interest).
        """
        tau0 = self._coerce(tau0)
        if tau0 not in self.nodes:
            raise NodeNotFound(f"{tau0} is not enumerated in tree {self.index}")
        marked = []
        for sigma, rec in self.nodes.items():
            if rec.enumerated_at > stage or sigma == tau0:
                continue
            if not tau0.is_proper_prefix_of(sigma):
                continue
            if prune_target is not None and incompatible(sigma, prune_target):
                continue
            if keep_compatible_with is not None and compatible(sigma, keep_compatible_with):
                continue
            if self.mark_terminal(sigma, stage):
                marked.append(sigma)
        return marked

    def extendible_to_depth(self, sigma: FinString, depth: int, stage: int) -> bool:
        """True iff some Alive node of length >= depth extends sigma."""
        sigma = self._coerce(sigma)
        if not self.is_enumerated(sigma, stage):
            raise NodeNotFound(f"{sigma} is not enumerated by stage {stage}")
        for node, rec in self.nodes.items():
            if rec.enumerated_at > stage or len(node) < depth:
                continue
            if not node.extends(sigma):
                continue
            if self.status_at(node, stage) is NodeStatus.ALIVE:
                return True
        return False

    def extendible_set(self, depth: int, stage: int) -> set[FinString]:
        """All enumerated nodes with an Alive depth-d witness above them."""
        out: set[FinString] = set()
        for node, rec in self.nodes.items():
            if rec.enumerated_at > stage or len(node) < depth:
                continue
            if self.status_at(node, stage) is not NodeStatus.ALIVE:
                continue
            for k in range(len(node), -1, -1):
                prefix = node.prefix(k)
                if prefix in out:
                    break
                if self.is_enumerated(prefix, stage):
                    out.add(prefix)
        return out

    # -- serialization ----------------------------------------------------

    def snapshot(self, stage: int | None = None) -> dict:
        stage = self.last_stage if stage is None else stage
        nodes = []
        for sigma in self.nodes_at(stage):
            rec = self.nodes[sigma]
            status = self.status_at(sigma, stage)
            since = rec.status_since if status is NodeStatus.TERMINAL else rec.enumerated_at
            nodes.append(
                {
                    "string": sigma.symbols,
                    "enumerated_at": rec.enumerated_at,
                    "status": status.value,
                    "status_since": since,
                }
            )
        return {
            "index": self.index,
            "birth_stage": self.birth_stage,
            "stage": stage,
            "alphabet": self.alphabet.value,
            "nodes": nodes,
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "StagedTree":
        alphabet = Alphabet(data.get("alphabet", "binary"))
        tree = cls(data["index"], data["birth_stage"], alphabet)
        entries = sorted(
            data["nodes"], key=lambda n: (n["enumerated_at"], len(n["string"]), n["string"])
        )
        for entry in entries:
            sigma = FinString(entry["string"], alphabet)
            if sigma not in tree.nodes:
                tree.nodes[sigma] = NodeRecord(enumerated_at=entry["enumerated_at"])
                for k in range(len(sigma)):
                    prefix = sigma.prefix(k)
                    prev = tree._extended_since.get(prefix)
                    if prev is None or entry["enumerated_at"] < prev:
                        tree._extended_since[prefix] = entry["enumerated_at"]
                if len(sigma) > 0 and sigma.prefix(len(sigma) - 1) not in tree.nodes:
                    tree._downward_closed = False
            else:
                tree.nodes[sigma].enumerated_at = entry["enumerated_at"]
        for entry in data["nodes"]:
            sigma = FinString(entry["string"], alphabet)
            rec = tree.nodes[sigma]
            if entry["status"] == NodeStatus.TERMINAL.value:
                rec.status = NodeStatus.TERMINAL
                rec.status_since = entry["status_since"]
        tree.last_stage = max(
            (data["stage"], *(n["enumerated_at"] for n in data["nodes"])), default=data["stage"]
        )
        tree._downward_closed = all(
            len(s) == 0 or s.prefix(len(s) - 1) in tree.nodes for s in tree.nodes
        )
        return tree


@dataclass
class ClosureTree:
    """Downward-closed computable view of a staged tree.

    Membership consults the source snapshot at stage ``len(sigma)``: a
    string is in iff it is a prefix of some node enumerated by then.  For
    trees built parent-before-child this reduces to a node lookup; for
    arbitrary enumerated sets a prefix index is built on first use.
    """

    source: StagedTree
    _lazy_index: dict[FinString, int] | None = field(default=None, repr=False)

    def member(self, sigma: FinString) -> bool:
        sigma = self.source._coerce(sigma)
        rec = self.source.nodes.get(sigma)
        if rec is not None and rec.enumerated_at <= len(sigma):
            return True
        if self.source._downward_closed:
            # Every prefix of a node is itself a node with an earlier (or
            # equal) stage, so the lookup above is already the full answer.
            return False
        if self._lazy_index is None:
            index: dict[FinString, int] = {}
            for node, nrec in self.source.nodes.items():
                for k in range(len(node) + 1):
                    prefix = node.prefix(k)
                    prev = index.get(prefix)
                    if prev is None or nrec.enumerated_at < prev:
                        index[prefix] = nrec.enumerated_at
            self._lazy_index = index
        first = self._lazy_index.get(sigma)
        return first is not None and first <= len(sigma)

    def members_up_to(self, depth: int) -> list[FinString]:
        """Every closure member of length <= depth, in length-lex order."""
        symbols = "01" if self.source.alphabet is Alphabet.BINARY else "01#"
        root = FinString("", self.source.alphabet)
        if not self.member(root):
            return []
        out = [root]
        frontier = [root]
        for _ in range(depth):
            nxt = []
            for sigma in frontier:
                for c in symbols:
                    child = sigma.append(c)
                    if self.member(child):
                        nxt.append(child)
            out.extend(nxt)
            frontier = nxt
            if not frontier:
                break
        out.sort(key=lambda s: s.lexkey)
        return out


def closure_member(closure: ClosureTree, sigma: FinString) -> bool:
    return closure.member(sigma)
