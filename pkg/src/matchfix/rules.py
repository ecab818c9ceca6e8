"""Tournament rules sharing one interface.

Every rule maps a :class:`Tournament` to an exact :class:`WinDistribution`.
The subset recursions below count orderings with integers and divide once at
the end, which keeps them fast enough for exhaustive scans.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .brackets import rseb_exact
from .distribution import WinDistribution
from .errors import UnknownRule
from .tournament import Tournament, copeland_scores, top_cycle


class TieBreakPolicy(enum.Enum):
    UNIFORM_RANDOM_EXACT = "uniform"
    LEXICOGRAPHIC_MIN = "lex"


def copeland(t: Tournament, policy: TieBreakPolicy = TieBreakPolicy.UNIFORM_RANDOM_EXACT) -> WinDistribution:
    scores = copeland_scores(t)
    best = max(scores)
    leaders = [p for p, s in enumerate(scores) if s == best]
    if policy is TieBreakPolicy.LEXICOGRAPHIC_MIN:
        return WinDistribution.point_mass(t.n, leaders[0])
    return WinDistribution.uniform_over(t.n, leaders)


def top_cycle_rule(t: Tournament) -> WinDistribution:
    return WinDistribution.uniform_over(t.n, top_cycle(t))


def _subset_condorcet_winner(subset: int, win_masks) -> int | None:
    rest = subset
    while rest:
        low = rest & -rest
        p = low.bit_length() - 1
        if subset & ~win_masks[p] == low:
            return p
        rest ^= low
    return None


def iterative_condorcet(t: Tournament) -> WinDistribution:
    """Remove uniformly random players until someone beats all the rest.

    A Condorcet winner is looked for before every removal, so a tournament
    that already has one removes nobody.  ``count(S)[w]`` is the number of
    removal orders of ``S`` that end with ``w`` crowned; it totals ``|S|!``.
    """
    masks = t.win_masks
    memo: dict[int, list[int]] = {}

    def count(subset: int) -> list[int]:
        got = memo.get(subset)
        if got is not None:
            return got
        size = bin(subset).count("1")
        cw = _subset_condorcet_winner(subset, masks)
        res = [0] * t.n
        if cw is not None:
            res[cw] = math.factorial(size)
        else:
            rest = subset
            while rest:
                low = rest & -rest
                for p, c in enumerate(count(subset ^ low)):
                    res[p] += c
                rest ^= low
        memo[subset] = res
        return res

    final = count((1 << t.n) - 1)
    return WinDistribution(tuple(Fraction(c, math.factorial(t.n)) for c in final))


def caterpillar(t: Tournament) -> WinDistribution:
    """King of the hill over a uniformly random entry order.

    The first two entrants play, every later entrant challenges the current
    holder, and whoever wins the final match is crowned.  States are
    ``(entered set, holder)`` weighted by the number of entry orders reaching
    them; with one player there are no matches and that player wins.
    """
    n = t.n
    if n == 1:
        return WinDistribution.point_mass(1, 0)
    masks = t.win_masks
    layer: dict[tuple[int, int], int] = {}
    for a, b in itertools.combinations(range(n), 2):
        w = a if (masks[a] >> b) & 1 else b
        key = ((1 << a) | (1 << b), w)
        layer[key] = layer.get(key, 0) + 2
    for _ in range(n - 2):
        nxt: dict[tuple[int, int], int] = {}
        for (entered, holder), ways in layer.items():
            for x in range(n):
                if (entered >> x) & 1:
                    continue
                w = holder if (masks[holder] >> x) & 1 else x
                key = (entered | (1 << x), w)
                nxt[key] = nxt.get(key, 0) + ways
        layer = nxt
    counts = [0] * n
    for (_, holder), ways in layer.items():
        counts[holder] += ways
    return WinDistribution(tuple(Fraction(c, math.factorial(n)) for c in counts))


@dataclass(frozen=True)
class RuleHandle:
    """A named rule plus the properties the test suite holds it to."""

    name: str
    evaluate: Callable[[Tournament], WinDistribution] = field(compare=False)
    condorcet_consistent: bool = True
    monotone: bool = True
    anonymous: bool = True

    def __call__(self, t: Tournament) -> WinDistribution:
        return self.evaluate(t)


def _copeland_uniform(t):
    return copeland(t, TieBreakPolicy.UNIFORM_RANDOM_EXACT)


def _copeland_lex(t):
    return copeland(t, TieBreakPolicy.LEXICOGRAPHIC_MIN)


_REGISTRY = (
    RuleHandle("rseb", rseb_exact),
    RuleHandle("copeland-uniform", _copeland_uniform),
    RuleHandle("copeland-lex", _copeland_lex, anonymous=False),
    RuleHandle("topcycle", top_cycle_rule),
    RuleHandle("itercondorcet", iterative_condorcet),
    RuleHandle("caterpillar", caterpillar),
)

RULE_NAMES = tuple(r.name for r in _REGISTRY)


def rule_registry() -> tuple[RuleHandle, ...]:
    return _REGISTRY


def get_rule(name: str) -> RuleHandle:
    for r in _REGISTRY:
        if r.name == name:
            return r
    raise UnknownRule(f"unknown rule {name!r}; choose from {', '.join(RULE_NAMES)}")


def iter_rules(names=None) -> Iterator[RuleHandle]:
    if not names:
        yield from _REGISTRY
        return
    for name in names:
        yield get_rule(name)
