import pytest

from pi01lab.strings import Alphabet, bits, tern
from pi01lab.trees import (
    ClosureTree,
    NodeNotFound,
    NoPredecessor,
    NodeStatus,
    StagedTree,
    TreeError,
)


def chain_tree():
    """Non-downward-closed chain: root, then 01, then 0110."""
    tree = StagedTree()
    tree.enumerate_node(bits("01"), 1)
    tree.enumerate_node(bits("0110"), 2)
    return tree


def small_binary(depth=3):
    tree = StagedTree()
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


def test_root_only_leaves():
    tree = StagedTree()
    assert tree.leaves(0) == [tree.root]


def test_leaves_after_first_split():
    tree = StagedTree()
    tree.enumerate_node(bits("0"), 1)
    tree.enumerate_node(bits("1"), 1)
    assert tree.leaves(1) == [bits("0"), bits("1")]
    # the old snapshot still answers
    assert tree.leaves(0) == [tree.root]


def test_leaves_before_birth_empty():
    tree = StagedTree(index=3, birth_stage=3)
    assert tree.leaves(2) == []


def test_immediate_predecessor_chain():
    tree = chain_tree()
    assert tree.immediate_predecessor(bits("0110"), 2) == bits("01")
    assert tree.immediate_predecessor(bits("01"), 2) == tree.root
    with pytest.raises(NoPredecessor):
        tree.immediate_predecessor(tree.root, 2)
    with pytest.raises(NodeNotFound):
        tree.immediate_predecessor(bits("111"), 2)


def test_level_counts_enumerated_prefixes():
    tree = chain_tree()
    assert tree.level(bits("0110"), 2) == 2
    assert tree.level(bits("01"), 2) == 1
    assert tree.level(tree.root, 2) == 0


def test_monotone_enumeration_and_snapshots():
    tree = small_binary(2)
    for sigma, rec in tree.nodes.items():
        for s in range(rec.enumerated_at, 3):
            assert tree.is_enumerated(sigma, s)
        if rec.enumerated_at > 0:
            assert not tree.is_enumerated(sigma, rec.enumerated_at - 1)


def test_terminal_absorbing():
    tree = small_binary(2)
    tree.mark_terminal(bits("0"), 2)
    for s in range(2, 6):
        assert tree.status_at(bits("0"), s) is NodeStatus.TERMINAL
    assert tree.status_at(bits("0"), 1) is NodeStatus.ALIVE
    # second mark is a no-op and keeps the original stamp
    assert tree.mark_terminal(bits("0"), 2) is False
    assert tree.nodes[bits("0")].status_since == 2


def test_terminal_node_never_extended():
    tree = small_binary(1)
    tree.mark_terminal(bits("0"), 1)
    with pytest.raises(TreeError):
        tree.enumerate_node(bits("00"), 2)


def test_declare_terminal_cone_prune_target():
    tree = small_binary(1)
    killed = tree.declare_terminal_cone(tree.root, stage=1, prune_target=bits("00"))
    assert killed == [bits("0")]
    assert tree.status_at(bits("0"), 1) is NodeStatus.TERMINAL
    assert tree.status_at(bits("1"), 1) is NodeStatus.ALIVE
    # idempotent
    assert tree.declare_terminal_cone(tree.root, stage=1, prune_target=bits("00")) == []


def test_declare_terminal_cone_keep_mode():
    tree = small_binary(4)
    killed = tree.declare_terminal_cone(
        bits("0"), stage=4, keep_compatible_with=bits("010")
    )
    assert bits("00") in killed and bits("011") in killed
    assert tree.status_at(bits("01"), 4) is NodeStatus.ALIVE
    assert tree.status_at(bits("010"), 4) is NodeStatus.ALIVE
    assert tree.status_at(bits("0100"), 4) is NodeStatus.ALIVE
    assert tree.status_at(bits("011"), 4) is NodeStatus.TERMINAL
    assert tree.status_at(bits("1"), 4) is NodeStatus.ALIVE


def test_declare_terminal_cone_bare_kills_all():
    tree = small_binary(2)
    killed = tree.declare_terminal_cone(bits("1"), stage=2)
    assert set(killed) == {bits("10"), bits("11")}


def test_closure_membership_stage_cutoff():
    tree = StagedTree()
    # a long node arriving late is invisible to short-string queries
    tree.enumerate_node(bits("0"), 1)
    tree.enumerate_node(bits("00"), 5)
    closure = ClosureTree(tree)
    assert closure.member(tree.root)
    assert closure.member(bits("0"))
    assert not closure.member(bits("00"))  # enumerated at 5 > length 2
    long_enough = bits("00000")
    assert not closure.member(long_enough)


def test_closure_non_downward_closed_source():
    tree = chain_tree()
    closure = ClosureTree(tree)
    # 0 and 011 are prefixes of nodes enumerated by their own length
    assert closure.member(bits("0"))
    assert closure.member(bits("011"))
    assert not closure.member(bits("1"))
    # downward closure holds exhaustively to depth 6
    members = set(closure.members_up_to(6))
    for sigma in members:
        for cut in range(len(sigma)):
            assert sigma.prefix(cut) in members


def test_members_up_to():
    tree = small_binary(2)
    closure = ClosureTree(tree)
    members = closure.members_up_to(1)
    assert members == [tree.root, bits("0"), bits("1")]


def test_extendible_to_depth():
    tree = small_binary(3)
    leaf = bits("010")
    assert tree.extendible_to_depth(leaf, 3, 3)  # its own witness
    tree.declare_terminal_cone(bits("0"), stage=3)
    assert not tree.extendible_to_depth(bits("0"), 3, 3)
    assert tree.extendible_to_depth(bits("1"), 3, 3)
    # the dead cone is still extendible at the earlier snapshot
    assert tree.extendible_to_depth(bits("0"), 2, 2) is True


def test_extendible_set_matches_pointwise():
    tree = small_binary(3)
    tree.declare_terminal_cone(bits("11"), stage=3)
    fast = tree.extendible_set(3, 3)
    slow = {
        sigma
        for sigma in tree.nodes_at(3)
        if tree.extendible_to_depth(sigma, 3, 3)
    }
    assert fast == slow


def test_ternary_tree_and_snapshot_round_trip():
    tree = StagedTree(alphabet=Alphabet.TERNARY)
    tree.enumerate_node(tern("1"), 1)
    tree.enumerate_node(tern("1#"), 2)
    tree.mark_terminal(tern("1#"), 3)
    snap = tree.snapshot()
    back = StagedTree.from_snapshot(snap)
    assert back.snapshot() == snap
    assert back.status_at(tern("1#"), 3) is NodeStatus.TERMINAL
    assert back.status_at(tern("1#"), 2) is NodeStatus.ALIVE


def test_stage_must_not_regress():
    tree = StagedTree()
    tree.enumerate_node(bits("0"), 4)
    with pytest.raises(TreeError):
        tree.enumerate_node(bits("1"), 3)
