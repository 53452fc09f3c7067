"""Finite and infinite joins of binary strings.

The finite join of components A_0..A_n interleaves them at positions
(n+1)i + j; on finite strings only (n+1) * min-length positions are
determined, and nothing beyond is claimed.  The infinite join places row
j's bit x at position <j,x> under the pairing bijection; an oracle built
from finitely many finite rows therefore determines exactly a finite
prefix, and functional evaluation through it sees that prefix and nothing
more.
"""

from __future__ import annotations

from dataclasses import dataclass

from .strings import FinString, bits, pair, unpair


class JoinError(ValueError):
    pass


class UndeterminedPosition(JoinError):
    def __init__(self, position: int):
        super().__init__(f"oracle position {position} is not determined")
        self.position = position


def finite_join(components: list[FinString]) -> FinString:
    """Interleave components: output bit (n+1)i + j is components[j](i).

    The output length is (n+1) * min component length; a single component
    joins to itself.
    """
    if not components:
        raise JoinError("the finite join needs at least one component")
    comps = [c.as_binary().symbols for c in components]
    arity = len(comps)
    m = min(len(c) for c in comps)
    out = [""] * (arity * m)
    for j, comp in enumerate(comps):
        out[j::arity] = comp[:m]
    return bits("".join(out))


def finite_join_decode(joined: FinString, arity: int) -> list[FinString]:
    """Unweave a join into its components (up to the determined length)."""
    if arity < 1:
        raise JoinError("arity must be at least 1")
    syms = joined.as_binary().symbols
    m = len(syms) // arity
    return [bits(syms[j : arity * m : arity]) for j in range(arity)]


@dataclass(frozen=True)
class FiniteJoinCode:
    """A join together with the components it decodes back to."""

    arity: int
    components: tuple[FinString, ...]

    @classmethod
    def of(cls, components: list[FinString]) -> "FiniteJoinCode":
        joined = finite_join(components)
        return cls(arity=len(components), components=tuple(finite_join_decode(joined, len(components))))

    @property
    def joined(self) -> FinString:
        return finite_join(list(self.components))


@dataclass(frozen=True)
class JoinOracle:
    """Infinite-join oracle over finitely many finite rows."""

    rows: tuple[FinString, ...]

    def bit_at(self, k: int) -> int | None:
        """Bit at position k = <j,x>, or None where undetermined."""
        j, x = unpair(k)
        if j >= len(self.rows):
            return None
        row = self.rows[j]
        if x >= len(row):
            return None
        return row.bit(x)

    def determined_length(self) -> int:
        """Length of the maximal determined prefix (the least undefined k)."""
        k = 0
        while self.bit_at(k) is not None:
            k += 1
        return k

    def oracle_string(self, length: int) -> FinString:
        """The length-L prefix; fails naming the first undetermined position."""
        out = []
        for k in range(length):
            b = self.bit_at(k)
            if b is None:
                raise UndeterminedPosition(k)
            out.append(str(b))
        return bits("".join(out))

    def determined_prefix(self) -> FinString:
        return self.oracle_string(self.determined_length())


def join_oracle(rows: list[FinString]) -> JoinOracle:
    return JoinOracle(tuple(r.as_binary() for r in rows))


def constant_join(sigma: FinString, row_count: int | None = None) -> JoinOracle:
    """The join of the constant sequence through sigma.

    Realizes a join applied to a single string: every row j < row_count is
    sigma itself, with row_count defaulting to len(sigma).
    """
    sigma = sigma.as_binary()
    r = len(sigma) if row_count is None else row_count
    return JoinOracle((sigma,) * r)


def classical_join(a: FinString, b: FinString) -> FinString:
    """A (+) B at positions 2i / 2i+1; coincides with the arity-2 finite join."""
    return finite_join([a, b])
