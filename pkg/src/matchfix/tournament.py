"""Round-robin tournaments stored as packed edge bitmasks.

A tournament on ``n`` players keeps one bit per unordered pair ``i < j``;
the bit is set when the lower-indexed player wins.  Pairs are numbered in
``itertools.combinations(range(n), 2)`` order, so enumerating every
tournament is an integer counter and flipping the matches inside a
coalition is an XOR with a coalition mask.

Players are 0-indexed.  The witness families translate the 1-indexed
labels (player 1, ..., player n) as follows: label ``p`` is index ``p - 1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import (
    AntisymmetryViolation,
    CoalitionTooLarge,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidParameters,
    LimitExceeded,
    ParseError,
    SelfPlay,
)

ENUMERATION_LIMIT = 7

WIN_CHARS = {"1": True, "0": False}
DIAGONAL_CHARS = {"-"}


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int, i: int, j: int) -> int:
    """Bit position of the unordered pair {i, j}."""
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class MatchFlip:
    """Force ``winner`` to beat ``loser``."""

    winner: int
    loser: int

    def __post_init__(self):
        if self.winner == self.loser:
            raise InvalidParameters("a player cannot play itself")


@dataclass(frozen=True)
class Coalition:
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        if len(set(members)) != len(members):
            raise InvalidParameters(f"duplicate coalition members: {members}")
        if len(members) < 2:
            raise InvalidParameters("a coalition needs at least two members")
        if min(members) < 0:
            raise IndexOutOfRange(f"negative player index in {members}")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def edge_bits(self, n: int) -> list[int]:
        """Bit positions of the matches played inside the coalition, in pair order."""
        if len(self.members) > n:
            raise CoalitionTooLarge(f"coalition of {len(self.members)} on {n} players")
        if max(self.members) >= n:
            raise IndexOutOfRange(f"coalition {self.members} on {n} players")
        ordered = sorted(self.members)
        return [pair_index(n, a, b) for a, b in itertools.combinations(ordered, 2)]


@dataclass(frozen=True)
class Tournament:
    n: int
    bits: int = field(default=0)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameters("a tournament needs at least one player")
        if not 0 <= self.bits < (1 << num_pairs(self.n)):
            raise InvalidParameters(f"edge mask {self.bits} out of range for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Tournament":
        """Build from ``(winner, loser)`` pairs; every match must appear exactly once."""
        bits = 0
        seen = set()
        for w, l in edges:
            _check_index(n, w)
            _check_index(n, l)
            if w == l:
                raise SelfPlay(f"player {w} cannot play itself")
            key = (min(w, l), max(w, l))
            if key in seen:
                raise AntisymmetryViolation(f"match {key} given twice")
            seen.add(key)
            if w < l:
                bits |= 1 << pair_index(n, w, l)
        if len(seen) != num_pairs(n):
            raise DimensionMismatch(f"expected {num_pairs(n)} matches, got {len(seen)}")
        return cls(n, bits)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[bool]]) -> "Tournament":
        n = len(matrix)
        edges = [(i, j) if matrix[i][j] else (j, i) for i, j in itertools.combinations(range(n), 2)]
        return cls.from_edges(n, edges)

    def beats(self, i: int, j: int) -> bool:
        if i == j:
            raise InvalidParameters("a player does not play itself")
        bit = (self.bits >> pair_index(self.n, i, j)) & 1
        return bool(bit) if i < j else not bit

    @cached_property
    def win_masks(self) -> tuple[int, ...]:
        """``win_masks[i]`` has bit ``j`` set when ``i`` beats ``j``."""
        masks = [0] * self.n
        pos = 0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if (self.bits >> pos) & 1:
                    masks[i] |= 1 << j
                else:
                    masks[j] |= 1 << i
                pos += 1
        return tuple(masks)

    def matrix(self) -> list[list[bool]]:
        masks = self.win_masks
        return [[bool((masks[i] >> j) & 1) for j in range(self.n)] for i in range(self.n)]

    def relabel(self, perm: Sequence[int]) -> "Tournament":
        """Player ``p`` becomes player ``perm[p]``."""
        if sorted(perm) != list(range(self.n)):
            raise InvalidParameters(f"{perm} is not a permutation of range({self.n})")
        edges = []
        for i, j in itertools.combinations(range(self.n), 2):
            w, l = (i, j) if self.beats(i, j) else (j, i)
            edges.append((perm[w], perm[l]))
        return Tournament.from_edges(self.n, edges)

    def with_dummies(self, count: int) -> "Tournament":
        """Append ``count`` players who lose every match."""
        if count < 0:
            raise InvalidParameters("dummy count must be non-negative")
        if count == 0:
            return self
        m = self.n + count
        edges = []
        for i, j in itertools.combinations(range(m), 2):
            if j >= self.n:
                edges.append((i, j))
            else:
                edges.append((i, j) if self.beats(i, j) else (j, i))
        return Tournament.from_edges(m, edges)

    def to_text(self) -> str:
        return format_tournament(self)

    def __str__(self):
        return self.to_text()


def _check_index(n: int, p: int):
    if not 0 <= p < n:
        raise IndexOutOfRange(f"player {p} not in range(0, {n})")


def build_tournament(n: int, raw_rows: Sequence[Sequence]) -> Tournament:
    """Validate an outcome matrix given row by row.

    Entries may be the characters of the text format (``'1'``, ``'0'``,
    ``'-'``) or Python values (``True``/``1``, ``False``/``0``, ``None``).
    """
    if n < 1:
        raise InvalidParameters("a tournament needs at least one player")
    if n == 1 and len(raw_rows) == 0:
        return Tournament(1)
    if len(raw_rows) != n:
        raise DimensionMismatch(f"expected {n} rows, got {len(raw_rows)}")
    cells = []
    for i, row in enumerate(raw_rows):
        row = list(row)
        if len(row) != n:
            raise DimensionMismatch(f"row {i} has length {len(row)}, expected {n}")
        cells.append([_cell_value(c, i, j) for j, c in enumerate(row)])
    for i in range(n):
        if cells[i][i] is not None:
            raise SelfPlay(f"diagonal entry ({i},{i}) is set")
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        a, b = cells[i][j], cells[j][i]
        if a is None or b is None:
            raise AntisymmetryViolation(f"off-diagonal entry ({i},{j}) left empty")
        if a == b:
            raise AntisymmetryViolation(f"entries ({i},{j}) and ({j},{i}) agree")
        edges.append((i, j) if a else (j, i))
    return Tournament.from_edges(n, edges)


def _cell_value(c, i, j):
    if c is None or (isinstance(c, str) and c in DIAGONAL_CHARS):
        return None
    if isinstance(c, str):
        if c not in WIN_CHARS:
            raise ParseError(f"bad character {c!r} at ({i},{j})")
        return WIN_CHARS[c]
    if c in (0, 1):
        return bool(c)
    raise ParseError(f"bad entry {c!r} at ({i},{j})")


def format_tournament(t: Tournament) -> str:
    lines = [str(t.n)]
    masks = t.win_masks
    for i in range(t.n):
        lines.append("".join("-" if i == j else ("1" if (masks[i] >> j) & 1 else "0") for j in range(t.n)))
    return "\n".join(lines) + "\n"


def parse_tournament(text: str) -> Tournament:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty tournament text")
    try:
        n = int(lines[0])
    except ValueError:
        raise ParseError(f"first line must be the player count, got {lines[0]!r}") from None
    return build_tournament(n, lines[1:])


def flip_to(t: Tournament, f: MatchFlip) -> Tournament:
    _check_index(t.n, f.winner)
    _check_index(t.n, f.loser)
    bit = 1 << pair_index(t.n, f.winner, f.loser)
    if f.winner < f.loser:
        return Tournament(t.n, t.bits | bit)
    return Tournament(t.n, t.bits & ~bit)


def condorcet_winner(t: Tournament) -> int | None:
    full = (1 << t.n) - 1
    for i, mask in enumerate(t.win_masks):
        if mask | (1 << i) == full:
            return i
    return None


def copeland_scores(t: Tournament) -> tuple[int, ...]:
    return tuple(bin(m).count("1") for m in t.win_masks)


def top_cycle(t: Tournament) -> frozenset[int]:
    """Smallest set whose members all beat every outsider.

    Players sorted by descending score: the top cycle is the shortest prefix
    of size ``s`` whose members collect all ``s * (n - s)`` cross matches.
    """
    scores = copeland_scores(t)
    order = sorted(range(t.n), key=lambda p: -scores[p])
    total = 0
    for s in range(1, t.n + 1):
        total += scores[order[s - 1]]
        if total == s * (s - 1) // 2 + s * (t.n - s):
            return frozenset(order[:s])
    raise AssertionError("unreachable: the full player set always dominates")


def adjacent_tournaments(t: Tournament, s: Coalition) -> list[Tournament]:
    """All tournaments agreeing with ``t`` outside the coalition, ``t`` first."""
    edges = s.edge_bits(t.n)
    out = []
    for sub in range(1 << len(edges)):
        mask = 0
        for pos, bit in enumerate(edges):
            if (sub >> pos) & 1:
                mask |= 1 << bit
        out.append(Tournament(t.n, t.bits ^ mask))
    return out


def enumerate_tournaments(n: int, limit: int = ENUMERATION_LIMIT) -> Iterator[Tournament]:
    if n > limit:
        raise LimitExceeded(f"n={n} exceeds enumeration limit {limit}")
    if n < 1:
        raise InvalidParameters("n must be at least 1")
    for bits in range(1 << num_pairs(n)):
        yield Tournament(n, bits)


WITNESS_FAMILIES = ("three_cycle_padded", "cyclic_odd", "superman_kryptonite")


def generate_witness(family: str, n: int, k: int | None = None) -> Tournament:
    """Tournaments used in the manipulability lower bounds.

    three_cycle_padded
        0 beats 1, 1 beats 2, 2 beats 0; players 3.. lose to everybody.
    cyclic_odd
        On the first ``2k - 1`` players, ``i`` beats ``i+1, ..., i+k-1``
        (mod ``2k - 1``); the rest are dummies.
    superman_kryptonite
        ``i`` beats ``j`` whenever ``i < j``, except that ``n - 1`` beats ``0``.
    """
    family = family.replace("-", "_")
    if family == "three_cycle_padded":
        if n < 3:
            raise InvalidParameters("three_cycle_padded needs n >= 3")
        core = Tournament.from_edges(3, [(0, 1), (1, 2), (2, 0)])
        return core.with_dummies(n - 3)
    if family == "cyclic_odd":
        if k is None or k < 2:
            raise InvalidParameters("cyclic_odd needs k >= 2")
        m = 2 * k - 1
        if n < m:
            raise InvalidParameters(f"cyclic_odd with k={k} needs n >= {m}, got {n}")
        edges = [(i, (i + d) % m) for i in range(m) for d in range(1, k)]
        return Tournament.from_edges(m, edges).with_dummies(n - m)
    if family == "superman_kryptonite":
        if n < 3:
            raise InvalidParameters("superman_kryptonite needs n >= 3")
        edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if (i, j) != (0, n - 1)]
        edges.append((n - 1, 0))
        return Tournament.from_edges(n, edges)
    raise InvalidParameters(f"unknown witness family {family!r}")
