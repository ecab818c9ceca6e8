"""Single-elimination brackets and the random-bracket rule.

A bracket of height ``h`` is its leaf sequence of ``2**h`` players.  Round
``r`` (1-based) pairs up the winners of consecutive blocks of ``2**(r-1)``
leaves; the block of size ``2**g`` with index ``b`` covers leaves
``[b * 2**g, (b + 1) * 2**g)``.

The exact rule counts, for every player, the leaf orderings it wins.  Let
``c(S, i)`` be that count over orderings of the set ``S``.  Whoever ends up
in ``i``'s half of the bracket is a uniformly random ``|S|/2``-subset of
``S`` containing ``i``, so::

    c(S, i) = 2 * sum_{H} c(H, i) * sum_{w in S - H, i beats w} c(S - H, w)

over those halves ``H``.  The factor 2 places ``i``'s half left or right.
The recursion is checked against brute-force bracket enumeration in the
test suite.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .distribution import WinDistribution
from .errors import InvalidParameters, LimitExceeded, NotPowerOfTwo, ParseError, PlayerSetMismatch
from .tournament import Tournament, num_pairs, pair_index

BRACKET_LIMIT = 8
MC_CHUNK = 4096


def is_power_of_two(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


def padded_size(n: int) -> int:
    return 1 << (n - 1).bit_length()


def pad(t: Tournament) -> Tournament:
    """Add always-losing dummies up to the next power of two."""
    return t.with_dummies(padded_size(t.n) - t.n)


@dataclass(frozen=True)
class Bracket:
    leaves: tuple[int, ...]

    def __post_init__(self):
        leaves = tuple(int(p) for p in self.leaves)
        object.__setattr__(self, "leaves", leaves)
        if not is_power_of_two(len(leaves)):
            raise NotPowerOfTwo(f"bracket has {len(leaves)} leaves")
        if len(set(leaves)) != len(leaves) or min(leaves) < 0:
            raise PlayerSetMismatch(f"leaves are not distinct players: {leaves}")

    @classmethod
    def _trusted(cls, leaves: tuple[int, ...]) -> "Bracket":
        # skips validation; callers guarantee a permutation of power-of-two length
        b = object.__new__(cls)
        object.__setattr__(b, "leaves", leaves)
        return b

    @property
    def height(self) -> int:
        return len(self.leaves).bit_length() - 1

    def position(self, player: int) -> int:
        return self.leaves.index(player)

    def to_text(self) -> str:
        return format_bracket(self)

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class BracketOutcome:
    """``node_labels[g][b]`` is the winner of block ``b`` of size ``2**g``.

    Level 0 holds the leaves themselves; the last level is the root.
    """

    node_labels: tuple[tuple[int, ...], ...]

    @property
    def champion(self) -> int:
        return self.node_labels[-1][0]


def format_bracket(b: Bracket) -> str:
    return " ".join(str(p) for p in b.leaves)


def parse_bracket(text: str) -> Bracket:
    try:
        return Bracket(tuple(int(tok) for tok in text.split()))
    except ValueError:
        raise ParseError(f"bad bracket line {text!r}") from None


def bracket_levels(leaves: Sequence[int], win_masks: Sequence[int]) -> list[tuple[int, ...]]:
    levels = [tuple(leaves)]
    cur = levels[0]
    while len(cur) > 1:
        cur = tuple(a if (win_masks[a] >> b) & 1 else b for a, b in zip(cur[0::2], cur[1::2]))
        levels.append(cur)
    return levels


def winner_table(t: Tournament) -> list[list[int]]:
    """``table[a][b]`` is the winner of the match between ``a`` and ``b``."""
    masks = t.win_masks
    return [[a if a == b or (masks[a] >> b) & 1 else b for b in range(t.n)] for a in range(t.n)]


def levels_from_table(leaves: Sequence[int], table: list[list[int]]) -> list[tuple[int, ...]]:
    levels = [tuple(leaves)]
    cur = levels[0]
    while len(cur) > 1:
        cur = tuple([table[cur[x]][cur[x + 1]] for x in range(0, len(cur), 2)])
        levels.append(cur)
    return levels


def evaluate_bracket(b: Bracket, t: Tournament) -> BracketOutcome:
    """Play out ``b``; ``t`` is padded with dummies first when needed."""
    padded = pad(t) if not is_power_of_two(t.n) else t
    if max(b.leaves) >= padded.n:
        raise PlayerSetMismatch(f"bracket uses players outside range({padded.n})")
    return BracketOutcome(tuple(bracket_levels(b.leaves, padded.win_masks)))


def enumerate_brackets(player_count: int, limit: int = BRACKET_LIMIT) -> Iterator[Bracket]:
    """All ``player_count!`` leaf orderings, mirror images included."""
    if not is_power_of_two(player_count):
        raise NotPowerOfTwo(f"{player_count} is not a power of two")
    if player_count > limit:
        raise LimitExceeded(f"{player_count} players exceeds bracket limit {limit}")
    for perm in itertools.permutations(range(player_count)):
        yield Bracket(perm)


@functools.lru_cache(maxsize=None)
def _all_leaf_orders(size: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(size))), dtype=np.int8)


def champion_frequencies(t: Tournament, limit: int = BRACKET_LIMIT) -> WinDistribution:
    """Brute force: play every bracket and tally champions."""
    padded = pad(t)
    if padded.n > limit:
        raise LimitExceeded(f"{padded.n} players exceeds bracket limit {limit}")
    beats = np.array(padded.matrix(), dtype=bool)
    leaves = _all_leaf_orders(padded.n)
    while leaves.shape[1] > 1:
        a, b = leaves[:, 0::2], leaves[:, 1::2]
        leaves = np.where(beats[a, b], a, b)
    tally = np.bincount(leaves[:, 0], minlength=padded.n)
    return WinDistribution.from_counts(tally.tolist(), padded.n - t.n)


def _winning_counts(size: int, beat: Callable[[int, int], object]) -> list:
    """Per-player count of the ``size!`` leaf orderings that player wins.

    ``beat(a, b)`` returns 1/0, or an integer array when many tournaments
    are evaluated at once.
    """
    memo: dict[int, dict[int, object]] = {}

    def counts(subset: int) -> dict[int, object]:
        got = memo.get(subset)
        if got is not None:
            return got
        members = [p for p in range(size) if (subset >> p) & 1]
        if len(members) == 1:
            res = {members[0]: 1}
        else:
            half = len(members) // 2
            res = {}
            for i in members:
                others = [p for p in members if p != i]
                total = 0
                for mates in itertools.combinations(others, half - 1):
                    h = 1 << i
                    for p in mates:
                        h |= 1 << p
                    rest = subset ^ h
                    rest_counts = counts(rest)
                    beaten = 0
                    for w, cw in rest_counts.items():
                        beaten = beaten + cw * beat(i, w)
                    total = total + counts(h)[i] * beaten
                res[i] = 2 * total
        memo[subset] = res
        return res

    full = counts((1 << size) - 1)
    return [full[p] for p in range(size)]


def rseb_exact(t: Tournament) -> WinDistribution:
    """Exact random-bracket winning probabilities, dummies appended last."""
    padded = pad(t)
    masks = padded.win_masks
    counts = _winning_counts(padded.n, lambda a, b: (masks[a] >> b) & 1)
    return WinDistribution(
        tuple(Fraction(c, math.factorial(padded.n)) for c in counts), padded.n - t.n
    )


def rseb_counts_batch(n: int, bitmasks: np.ndarray) -> np.ndarray:
    """Winning-ordering counts for many tournaments on ``n`` players at once.

    Returns an int64 array of shape ``(len(bitmasks), padded_size(n))``;
    divide by ``padded_size(n)!`` for probabilities.  Same recursion as
    :func:`rseb_exact`, evaluated elementwise.
    """
    bitmasks = np.asarray(bitmasks, dtype=np.int64)
    size = padded_size(n)
    edge = {}
    for a, b in itertools.combinations(range(n), 2):
        edge[a, b] = (bitmasks >> pair_index(n, a, b)) & 1

    def beat(a, b):
        if a >= n or b >= n:
            # dummies lose to real players; among dummies the lower index wins
            if a < n:
                return 1
            if b < n:
                return 0
            return 1 if a < b else 0
        if a < b:
            return edge[a, b]
        return 1 - edge[b, a]

    counts = _winning_counts(size, beat)
    out = np.zeros((len(bitmasks), size), dtype=np.int64)
    for p, c in enumerate(counts):
        out[:, p] = c
    return out


def rseb_monte_carlo(t: Tournament, samples: int, seed: int) -> WinDistribution:
    """Champion frequencies over ``samples`` uniformly random brackets.

    Sample ``s`` belongs to chunk ``s // 4096``; each chunk draws from its
    own Philox stream keyed by ``(seed, chunk)``, so results do not depend
    on how chunks are distributed over workers.
    """
    if samples < 1:
        raise InvalidParameters("samples must be >= 1")
    padded = pad(t)
    size = padded.n
    beats = np.array(padded.matrix(), dtype=bool)
    tally = np.zeros(size, dtype=np.int64)
    for chunk in range(math.ceil(samples / MC_CHUNK)):
        m = min(MC_CHUNK, samples - chunk * MC_CHUNK)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))
        leaves = rng.permuted(np.tile(np.arange(size), (m, 1)), axis=1)
        while leaves.shape[1] > 1:
            a, b = leaves[:, 0::2], leaves[:, 1::2]
            leaves = np.where(beats[a, b], a, b)
        tally += np.bincount(leaves[:, 0], minlength=size)
    return WinDistribution(tuple(Fraction(int(c), samples) for c in tally), size - t.n)
