"""Finite strings over {0,1} and {0,1,#}, their prefix algebra, and pairing.

Strings are immutable values backed by a plain ``str`` of the characters
``0``, ``1`` and ``#``.  A string carries an alphabet tag; the hash mark is
legal only in ternary strings.  The empty string is a first-class value and
renders as ``ε``.

The pairing bijection is the Cantor function ``<i,j> = (i+j)(i+j+1)/2 + j``,
which is monotone in each argument.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import isqrt


class Alphabet(enum.Enum):
    BINARY = "binary"
    TERNARY = "ternary"


HASH = "#"

# '#' sorts after '1' in length-lex order, unlike its ASCII position.
_LEX_TABLE = str.maketrans({HASH: "2"})


class AlphabetError(ValueError):
    """Raised when an operation mixes alphabets illegally."""


@dataclass(frozen=True)
class FinString:
    """A finite string over {0,1} (binary) or {0,1,#} (ternary)."""

    symbols: str = ""
    alphabet: Alphabet = Alphabet.BINARY

    def __post_init__(self) -> None:
        legal = "01" if self.alphabet is Alphabet.BINARY else "01#"
        bad = set(self.symbols) - set(legal)
        if bad:
            raise AlphabetError(
                f"symbols {sorted(bad)} not allowed in {self.alphabet.value} string"
            )

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.symbols if self.symbols else "ε"

    def __getitem__(self, i: int) -> str:
        return self.symbols[i]

    def bit(self, i: int) -> int:
        """Value of position i as an integer; only defined off the hash mark."""
        c = self.symbols[i]
        if c == HASH:
            raise ValueError(f"position {i} holds the delimiter, not a bit")
        return int(c)

    @property
    def lexkey(self) -> tuple[int, str]:
        """Sort key for length-lexicographic order with 0 < 1 < #."""
        return (len(self.symbols), self.symbols.translate(_LEX_TABLE))

    def __lt__(self, other: "FinString") -> bool:
        return self.lexkey < other.lexkey

    def is_prefix_of(self, other: "FinString") -> bool:
        """Initial-segment relation; a string is a prefix of itself."""
        return other.symbols.startswith(self.symbols)

    def is_proper_prefix_of(self, other: "FinString") -> bool:
        return len(self.symbols) < len(other.symbols) and self.is_prefix_of(other)

    def extends(self, other: "FinString") -> bool:
        return other.is_prefix_of(self)

    def prefix(self, n: int) -> "FinString":
        """The length-n initial segment."""
        return FinString(self.symbols[:n], self.alphabet)

    def suffix_after(self, other: "FinString") -> "FinString":
        if not other.is_prefix_of(self):
            raise ValueError(f"{other} is not a prefix of {self}")
        return FinString(self.symbols[len(other.symbols):], self.alphabet)

    def append(self, symbol: str) -> "FinString":
        return FinString(self.symbols + symbol, self.alphabet)

    def as_ternary(self) -> "FinString":
        return self if self.alphabet is Alphabet.TERNARY else FinString(self.symbols, Alphabet.TERNARY)

    def as_binary(self) -> "FinString":
        if HASH in self.symbols:
            raise AlphabetError(f"{self} contains the delimiter; not a binary string")
        return self if self.alphabet is Alphabet.BINARY else FinString(self.symbols, Alphabet.BINARY)

    @property
    def is_hash_free(self) -> bool:
        return HASH not in self.symbols


EMPTY = FinString()
EMPTY_TERNARY = FinString("", Alphabet.TERNARY)


def bits(symbols: str) -> FinString:
    """Binary string from its characters."""
    return FinString(symbols, Alphabet.BINARY)


def tern(symbols: str) -> FinString:
    """Ternary string from its characters."""
    return FinString(symbols, Alphabet.TERNARY)


def concat(sigma: FinString, tau: FinString) -> FinString:
    """sigma followed by tau.

    Both operands in the same alphabet concatenate within it; a ternary
    sigma also accepts a binary tau (the result is ternary), which is how
    class copies are planted above delimiter-marked strings.  A binary
    sigma followed by a ternary tau is rejected.
    """
    if sigma.alphabet is tau.alphabet:
        return FinString(sigma.symbols + tau.symbols, sigma.alphabet)
    if sigma.alphabet is Alphabet.TERNARY and tau.alphabet is Alphabet.BINARY:
        return FinString(sigma.symbols + tau.symbols, Alphabet.TERNARY)
    raise AlphabetError("cannot concatenate a binary string with a ternary extension")


def compatible(sigma: FinString, tau: FinString) -> bool:
    """True iff one string is an initial segment of the other."""
    if sigma.alphabet is not tau.alphabet:
        raise AlphabetError("compatibility is defined within one alphabet")
    return sigma.is_prefix_of(tau) or tau.is_prefix_of(sigma)


def incompatible(sigma: FinString, tau: FinString) -> bool:
    return not compatible(sigma, tau)


def first_disagreement(sigma: FinString, tau: FinString) -> int:
    """Least n with sigma(n) != tau(n); requires incompatible strings."""
    for n, (a, b) in enumerate(zip(sigma.symbols, tau.symbols)):
        if a != b:
            return n
    raise ValueError(f"{sigma} and {tau} are compatible; no disagreement exists")


def pair(i: int, j: int) -> int:
    """Cantor pairing <i,j>, a bijection from pairs to naturals."""
    if i < 0 or j < 0:
        raise ValueError("pairing is defined on naturals")
    s = i + j
    return s * (s + 1) // 2 + j


def unpair(n: int) -> tuple[int, int]:
    """Inverse of pair: unpair(pair(i,j)) == (i,j)."""
    if n < 0:
        raise ValueError("pairing is defined on naturals")
    w = (isqrt(8 * n + 1) - 1) // 2
    j = n - w * (w + 1) // 2
    return w - j, j


@dataclass(frozen=True)
class PairCode:
    """A pair together with its code; construction checks the round trip."""

    i: int
    j: int
    code: int

    def __post_init__(self) -> None:
        if pair(self.i, self.j) != self.code or unpair(self.code) != (self.i, self.j):
            raise ValueError(f"({self.i},{self.j}) <-> {self.code} is not a pairing round trip")

    @classmethod
    def of(cls, i: int, j: int) -> "PairCode":
        return cls(i, j, pair(i, j))


def string_code(sigma: FinString) -> int:
    """Bijection between binary strings and naturals, ordered length-lex.

    ε -> 0, 0 -> 1, 1 -> 2, 00 -> 3, ...  Used wherever strings need a
    canonical code number (tuple scheduling, for one).
    """
    sigma = sigma.as_binary()
    return int("1" + sigma.symbols, 2) - 1


def string_from_code(n: int) -> FinString:
    if n < 0:
        raise ValueError("string codes are naturals")
    return bits(bin(n + 1)[3:])
