"""Finite certificates for the 1/3 bound of the random bracket.

Fix a tournament in which ``j`` beats ``i``.  A bracket is *bad* for the
pair when ``i`` and ``j`` meet but ``j`` does not go on to win; only bad
brackets let the pair profit from ``j`` throwing the match.  Two maps send
bad brackets to good ones:

``sigma_i``
    swap ``i``'s block with ``k``'s block, where ``k`` is the latest player
    on ``j``'s path who beats ``j`` and blocks have the size of the subtree
    that delivered ``i`` to the meeting.
``sigma_j``
    for every earlier round in which ``i``'s opponent beats ``j``, swap that
    opponent's subtree with the matching subtree on ``j``'s side; then swap
    ``j``'s block with ``k``'s block.

If both maps are injective, land in good brackets and have disjoint images,
there are at least twice as many good brackets as bad ones.
:func:`verify_coupling` checks each of those properties separately by
enumerating every bracket, and also checks the counting inequality and the
resulting gain bound directly.

Conventions: round ``r`` is 1-based; a player's round-``r`` opponent is the
winner of the sibling block of size ``2**(r-1)``, whether or not the player
gets that far.  Moved subtrees keep their internal leaf order.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .brackets import (
    Bracket,
    format_bracket,
    is_power_of_two,
    levels_from_table,
    pad,
    rseb_exact,
    winner_table,
)
from .errors import InvalidParameters, LimitExceeded, NotBadBracket, PlayerSetMismatch
from .tournament import MatchFlip, Tournament, flip_to

COUPLING_LIMIT = 8
MAX_REPORTED_FAILURES = 5


class BracketClass(enum.Enum):
    BAD = "bad"
    GOOD_NONMEETING = "good_nonmeeting"
    GOOD_J_CHAMPION = "good_j_champion"


def meet_round(p: int, q: int) -> int:
    """Round in which leaf positions ``p`` and ``q`` would meet."""
    return (p ^ q).bit_length()


def _opponent(levels, pos: int, r: int) -> int:
    return levels[r - 1][(pos >> (r - 1)) ^ 1]


def _sibling_start(pos: int, r: int) -> int:
    return ((pos >> (r - 1)) ^ 1) << (r - 1)


def _block_start(pos: int, size_log: int) -> int:
    return (pos >> size_log) << size_log


def _swap(leaves: list, a: int, b: int, size: int):
    leaves[a:a + size], leaves[b:b + size] = leaves[b:b + size], leaves[a:a + size]


def _classify(levels, pos_i: int, pos_j: int, i: int, j: int) -> BracketClass:
    m = meet_round(pos_i, pos_j)
    lvl = levels[m - 1]
    if lvl[pos_i >> (m - 1)] != i or lvl[pos_j >> (m - 1)] != j:
        return BracketClass.GOOD_NONMEETING
    return BracketClass.GOOD_J_CHAMPION if levels[-1][0] == j else BracketClass.BAD


class _Cell:
    """Precomputed lookups for one padded tournament and one pair."""

    def __init__(self, t: Tournament, i: int, j: int):
        padded = t if is_power_of_two(t.n) else pad(t)
        for p in (i, j):
            if not 0 <= p < padded.n:
                raise PlayerSetMismatch(f"player {p} not in the bracket")
        if i == j or not padded.beats(j, i):
            raise InvalidParameters(f"the pair must satisfy: {j} beats {i}")
        self.t = padded
        self.i, self.j = i, j
        self.table = winner_table(padded)
        # beats_j[p] is True when p beats j
        self.beats_j = [p != j and self.table[p][j] == p for p in range(padded.n)]

    def levels(self, leaves):
        return levels_from_table(leaves, self.table)

    def check(self, b: Bracket):
        if sorted(b.leaves) != list(range(self.t.n)):
            raise PlayerSetMismatch(f"bracket {b.leaves} is not a seeding of {self.t.n} players")

    def context(self, leaves: tuple, levels) -> "CouplingContext":
        i, j = self.i, self.j
        pos_i, pos_j = leaves.index(i), leaves.index(j)
        if _classify(levels, pos_i, pos_j, i, j) is not BracketClass.BAD:
            raise NotBadBracket(f"bracket {' '.join(map(str, leaves))} is not bad for ({i}, {j})")
        m = meet_round(pos_i, pos_j)
        height = len(levels) - 1
        k_round = max(r for r in range(m + 1, height + 1) if self.beats_j[_opponent(levels, pos_j, r)])
        k = _opponent(levels, pos_j, k_round)
        return CouplingContext(
            tournament=self.t,
            pair=(i, j),
            bracket=Bracket._trusted(leaves),
            meet_round=m,
            k_player=k,
            k_round=k_round,
            block_i=_block_start(pos_i, m - 1),
            block_j=_block_start(pos_j, m - 1),
            block_k=_block_start(leaves.index(k), m - 1),
            opponents_i=tuple(_opponent(levels, pos_i, r) for r in range(1, m)),
            opponents_j=tuple(_opponent(levels, pos_j, r) for r in range(1, m)),
            subtrees_i=tuple(_sibling_start(pos_i, r) for r in range(1, m)),
            subtrees_j=tuple(_sibling_start(pos_j, r) for r in range(1, m)),
        )

    def invert_i(self, leaves: tuple, levels=None) -> tuple | None:
        levels = levels or self.levels(leaves)
        pos_i, pos_j = leaves.index(self.i), leaves.index(self.j)
        for r in range(1, len(levels)):
            if self.beats_j[_opponent(levels, pos_j, r)]:
                out = list(leaves)
                _swap(out, _sibling_start(pos_j, r), _block_start(pos_i, r - 1), 1 << (r - 1))
                return tuple(out)
        return None

    def invert_j(self, leaves: tuple, levels=None) -> tuple | None:
        levels = levels or self.levels(leaves)
        pos_i, pos_j = leaves.index(self.i), leaves.index(self.j)
        for m in range(1, len(levels)):
            if self.beats_j[_opponent(levels, pos_i, m)]:
                break
        else:
            return None
        out = list(leaves)
        _swap(out, _sibling_start(pos_i, m), _block_start(pos_j, m - 1), 1 << (m - 1))
        levels = self.levels(out)
        pos_j = out.index(self.j)
        for r in range(1, m):
            if self.beats_j[_opponent(levels, pos_j, r)]:
                _swap(out, _sibling_start(pos_j, r), _sibling_start(pos_i, r), 1 << (r - 1))
        return tuple(out)


def classify_bracket(t: Tournament, i: int, j: int, b: Bracket) -> BracketClass:
    cell = _Cell(t, i, j)
    cell.check(b)
    return _classify(cell.levels(b.leaves), b.leaves.index(i), b.leaves.index(j), i, j)


@dataclass(frozen=True)
class CouplingContext:
    """A bad bracket with everything both maps need.

    ``meet_round`` is the round in which ``i`` and ``j`` meet and ``k_round``
    the round in which ``j`` would face ``k``.  Block fields hold start
    positions; ``block_i``, ``block_j`` and ``block_k`` have
    ``2**(meet_round-1)`` leaves.  ``subtrees_i[r-1]`` is the start of the
    block holding ``i``'s round-``r`` opponent ``opponents_i[r-1]`` (size
    ``2**(r-1)``), and likewise for ``j``.
    """

    tournament: Tournament
    pair: tuple[int, int]
    bracket: Bracket
    meet_round: int
    k_player: int
    k_round: int
    block_i: int
    block_j: int
    block_k: int
    opponents_i: tuple[int, ...]
    opponents_j: tuple[int, ...]
    subtrees_i: tuple[int, ...]
    subtrees_j: tuple[int, ...]

    @property
    def block_size(self) -> int:
        return 1 << (self.meet_round - 1)


def make_context(t: Tournament, i: int, j: int, b: Bracket) -> CouplingContext:
    cell = _Cell(t, i, j)
    cell.check(b)
    return cell.context(b.leaves, cell.levels(b.leaves))


def sigma_i(ctx: CouplingContext) -> Bracket:
    leaves = list(ctx.bracket.leaves)
    _swap(leaves, ctx.block_i, ctx.block_k, ctx.block_size)
    return Bracket._trusted(tuple(leaves))


def sigma_j(ctx: CouplingContext) -> Bracket:
    leaves = list(ctx.bracket.leaves)
    masks = ctx.tournament.win_masks
    j = ctx.pair[1]
    for r, a in enumerate(ctx.opponents_i, start=1):
        if (masks[a] >> j) & 1:
            _swap(leaves, ctx.subtrees_i[r - 1], ctx.subtrees_j[r - 1], 1 << (r - 1))
    _swap(leaves, ctx.block_j, ctx.block_k, ctx.block_size)
    return Bracket._trusted(tuple(leaves))


def naive_sigma_j(ctx: CouplingContext) -> Bracket:
    """``sigma_j`` without the subtree exchanges; not injective in general."""
    leaves = list(ctx.bracket.leaves)
    _swap(leaves, ctx.block_j, ctx.block_k, ctx.block_size)
    return Bracket._trusted(tuple(leaves))


def invert_sigma_i(t: Tournament, i: int, j: int, b: Bracket) -> Bracket:
    """Undo ``sigma_i``: the first player to beat ``j`` sits in the swapped block."""
    cell = _Cell(t, i, j)
    cell.check(b)
    out = cell.invert_i(b.leaves)
    if out is None:
        raise NotBadBracket(f"{format_bracket(b)} is not in the image of sigma_i: nobody on {j}'s path beats {j}")
    return Bracket._trusted(out)


def invert_sigma_j(t: Tournament, i: int, j: int, b: Bracket) -> Bracket:
    """Undo ``sigma_j``.

    The first player on ``i``'s path who beats ``j`` is ``k`` and fixes the
    block size.  After swapping ``j``'s block back, every early opponent of
    ``j`` who beats ``j`` must have been moved in by a subtree exchange, so
    those subtrees go back to ``i``'s side.
    """
    cell = _Cell(t, i, j)
    cell.check(b)
    out = cell.invert_j(b.leaves)
    if out is None:
        raise NotBadBracket(f"{format_bracket(b)} is not in the image of sigma_j: nobody on {i}'s path beats {j}")
    return Bracket._trusted(out)


@dataclass
class CouplingRecord:
    """Outcome of :func:`verify_coupling` for one tournament and pair."""

    tournament: Tournament
    i: int
    j: int
    total: int
    bad: int
    good_nonmeeting: int
    good_j_champion: int
    shared_images: int
    pair_gain: Fraction
    checks: dict[str, bool]
    failures: list[str] = field(default_factory=list)

    @property
    def good(self) -> int:
        return self.good_nonmeeting + self.good_j_champion

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "i": self.i,
            "j": self.j,
            "total": self.total,
            "bad": self.bad,
            "good": self.good,
            "good_nonmeeting": self.good_nonmeeting,
            "good_j_champion": self.good_j_champion,
            "shared_images": self.shared_images,
            "pair_gain": f"{self.pair_gain.numerator}/{self.pair_gain.denominator}",
            "checks": dict(self.checks),
            "passed": self.passed,
            "failures": list(self.failures),
        }


CHECK_NAMES = (
    "domain",
    "images_good",
    "injective_i",
    "injective_j",
    "roundtrip_i",
    "roundtrip_j",
    "disjoint",
    "separator",
    "counting",
    "gain_identity",
    "gain_bound",
)


def all_bracket_levels(t: Tournament, limit: int = COUPLING_LIMIT):
    """``(leaves, levels, positions)`` for every bracket on the padded tournament.

    ``positions[p]`` is the leaf index of player ``p``.
    """
    padded = t if is_power_of_two(t.n) else pad(t)
    if padded.n > limit:
        raise LimitExceeded(f"{padded.n} players exceeds coupling limit {limit}")
    table = winner_table(padded)
    out = []
    for perm in itertools.permutations(range(padded.n)):
        positions = [0] * padded.n
        for pos, p in enumerate(perm):
            positions[p] = pos
        out.append((perm, levels_from_table(perm, table), positions))
    return out


def _fmt(leaves) -> str:
    return " ".join(str(p) for p in leaves)


def verify_coupling(
    t: Tournament,
    i: int,
    j: int,
    sigma_j_map: Callable[[CouplingContext], Bracket] = sigma_j,
    limit: int = COUPLING_LIMIT,
    levels_table=None,
) -> CouplingRecord:
    """Enumerate every bracket and check the coupling for the pair ``(i, j)``.

    Checks: contexts exist exactly for bad brackets (``domain``); both
    images are good; both maps are injective and invert correctly; the
    images are disjoint, and each image shows ``k`` meeting ``j`` (for
    ``sigma_i``) or ``i`` (for ``sigma_j``) before ``i`` and ``j`` could meet
    (``separator``); ``#good >= 2 #bad``; the exact random-bracket gain equals
    the sum over meeting brackets and is at most ``#bad / #brackets <= 1/3``.
    """
    cell = _Cell(t, i, j)
    padded = cell.t
    if padded.n > limit:
        raise LimitExceeded(f"{padded.n} players exceeds coupling limit {limit}")
    table = levels_table if levels_table is not None else all_bracket_levels(padded, limit)
    total = len(table)
    bad = nonmeeting = champion = 0
    failures: list[str] = []
    checks = {name: True for name in CHECK_NAMES}
    images_i: dict[tuple, tuple] = {}
    images_j: dict[tuple, tuple] = {}
    meeting_sum = 0
    beats_j = cell.beats_j
    i_beats = [cell.table[i][p] == i and p != i for p in range(padded.n)]
    checked_good_domain = False

    def fail(name, detail):
        checks[name] = False
        if len(failures) < MAX_REPORTED_FAILURES:
            failures.append(f"{name}: {detail}")

    for perm, levels, positions in table:
        pos_i, pos_j = positions[i], positions[j]
        cls = _classify(levels, pos_i, pos_j, i, j)
        if cls is BracketClass.BAD:
            bad += 1
        elif cls is BracketClass.GOOD_NONMEETING:
            nonmeeting += 1
        else:
            champion += 1
        if cls is not BracketClass.GOOD_NONMEETING:
            # after j throws, i wins iff it beats every later opponent of j
            m = meet_round(pos_i, pos_j)
            i_wins_after = all(i_beats[_opponent(levels, pos_j, r)] for r in range(m + 1, len(levels)))
            meeting_sum += int(i_wins_after) - int(cls is BracketClass.GOOD_J_CHAMPION)
        if cls is not BracketClass.BAD:
            if not checked_good_domain:
                checked_good_domain = True
                try:
                    cell.context(perm, levels)
                    fail("domain", f"context built for good bracket {_fmt(perm)}")
                except NotBadBracket:
                    pass
            continue
        try:
            ctx = cell.context(perm, levels)
        except NotBadBracket:
            fail("domain", f"no context for bad bracket {_fmt(perm)}")
            continue
        k = ctx.k_player
        for name, image, store, inverse in (
            ("i", sigma_i(ctx).leaves, images_i, cell.invert_i),
            ("j", sigma_j_map(ctx).leaves, images_j, cell.invert_j),
        ):
            img_levels = cell.levels(image)
            pi_, pj, pk = image.index(i), image.index(j), image.index(k)
            if _classify(img_levels, pi_, pj, i, j) is BracketClass.BAD:
                fail("images_good", f"sigma_{name}({_fmt(perm)}) = {_fmt(image)} is bad")
            previous = store.setdefault(image, perm)
            if previous is not perm:
                fail(f"injective_{name}", f"sigma_{name} sends {_fmt(previous)} and {_fmt(perm)} to {_fmt(image)}")
            if inverse(image, img_levels) != perm:
                fail(f"roundtrip_{name}", f"inverse of sigma_{name} does not recover {_fmt(perm)}")
            near, far = (pj, pi_) if name == "i" else (pi_, pj)
            if not meet_round(pk, near) < meet_round(pk, far):
                fail("separator", f"sigma_{name}({_fmt(perm)}) = {_fmt(image)}")
    shared = sorted(images_i.keys() & images_j.keys())
    for img in shared:
        fail("disjoint", f"{_fmt(img)} = sigma_i({_fmt(images_i[img])}) = sigma_j({_fmt(images_j[img])})")
    if total - bad < 2 * bad:
        fail("counting", f"{total - bad} good < 2 * {bad} bad")
    before = rseb_exact(padded)
    after = rseb_exact(flip_to(padded, MatchFlip(i, j)))
    exact_gain = after[i] + after[j] - before[i] - before[j]
    if exact_gain != Fraction(meeting_sum, total):
        fail("gain_identity", f"exact gain {exact_gain} != meeting-bracket sum {Fraction(meeting_sum, total)}")
    if not exact_gain <= Fraction(bad, total) <= Fraction(1, 3):
        fail("gain_bound", f"gain {exact_gain}, bad fraction {Fraction(bad, total)}")
    return CouplingRecord(
        padded, i, j, total, bad,
        nonmeeting, champion,
        len(shared), exact_gain, checks, failures,
    )


def oriented_pairs(t: Tournament) -> list[tuple[int, int]]:
    """Every pair once, as ``(i, j)`` with ``j`` beating ``i``."""
    return [(a, b) if t.beats(b, a) else (b, a) for a, b in itertools.combinations(range(t.n), 2)]


def verify_tournament(t: Tournament, sigma_j_map=sigma_j, limit: int = COUPLING_LIMIT) -> list[CouplingRecord]:
    """Run :func:`verify_coupling` for every pair, oriented so ``j`` beats ``i``.

    Pairs where ``i`` already beats ``j`` need no certificate: throwing a
    match the thrower already loses changes nothing.
    """
    padded = t if is_power_of_two(t.n) else pad(t)
    table = all_bracket_levels(padded, limit)
    return [verify_coupling(padded, i, j, sigma_j_map, limit, levels_table=table) for i, j in oriented_pairs(padded)]
