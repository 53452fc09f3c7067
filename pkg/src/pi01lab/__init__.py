"""Desk-scale workbench for constructions over effectively closed sets."""

from .strings import (
    Alphabet,
    FinString,
    PairCode,
    bits,
    compatible,
    concat,
    incompatible,
    pair,
    tern,
    unpair,
)
from .trees import ClosureTree, NodeStatus, StagedTree
from .machine import (
    Registry,
    assemble,
    computable_prefix,
    disassemble,
    evaluate,
    halting_approx,
    program_code,
    program_from_code,
    run_program,
)
from .joins import constant_join, finite_join, finite_join_decode, join_oracle

__all__ = [
    "Alphabet",
    "ClosureTree",
    "FinString",
    "NodeStatus",
    "PairCode",
    "Registry",
    "StagedTree",
    "assemble",
    "bits",
    "compatible",
    "computable_prefix",
    "concat",
    "constant_join",
    "disassemble",
    "evaluate",
    "finite_join",
    "finite_join_decode",
    "halting_approx",
    "incompatible",
    "join_oracle",
    "pair",
    "program_code",
    "program_from_code",
    "run_program",
    "tern",
    "unpair",
]
