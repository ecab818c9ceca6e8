"""Manipulation gains, exhaustive worst-case scans and lower-bound checks.

The gain of a coalition ``S`` moving from ``T`` to an ``S``-adjacent ``T'``
is ``sum_{i in S} r_i(T') - r_i(T)``.  A rule's alpha for coalitions of size
at most ``k`` is the largest such gain over every labeled tournament.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .brackets import rseb_counts_batch, padded_size
from .distribution import WinDistribution, format_fraction, parse_fraction
from .errors import (
    IndexOutOfRange,
    InvalidDistribution,
    InvalidParameters,
    LimitExceeded,
    ParseError,
)
from .rules import RuleHandle, get_rule, RULE_NAMES
from .tournament import (
    Coalition,
    MatchFlip,
    Tournament,
    adjacent_tournaments,
    flip_to,
    format_tournament,
    generate_witness,
    num_pairs,
    parse_tournament,
)

# largest n scanned exhaustively without an explicit override, by coalition size
SCAN_LIMITS = {2: 6, 3: 5}
DEFAULT_SCAN_LIMIT = 5
MONOTONE_LIMIT = 6
EXPAND_PAIR_LIMIT = 20


@dataclass(frozen=True)
class GainReport:
    rule: str
    coalition: Coalition
    base: Tournament
    manipulated: Tournament
    per_player_delta: tuple[Fraction, ...]
    total_gain: Fraction

    def __post_init__(self):
        if not -1 <= self.total_gain <= 1:
            raise InvalidParameters(f"gain {self.total_gain} outside [-1, 1]")
        if sum(self.per_player_delta) != self.total_gain:
            raise InvalidParameters("per-player deltas do not add up to the total gain")
        diff = self.base.bits ^ self.manipulated.bits
        if diff & ~_edge_mask(self.coalition, self.base.n):
            raise InvalidParameters("manipulated tournament changes matches outside the coalition")


def _edge_mask(s: Coalition, n: int) -> int:
    mask = 0
    for bit in s.edge_bits(n):
        mask |= 1 << bit
    return mask


def _report(rule: RuleHandle, s: Coalition, base: Tournament, manipulated: Tournament,
            before: WinDistribution | None = None, after: WinDistribution | None = None) -> GainReport:
    before = before if before is not None else rule(base)
    after = after if after is not None else rule(manipulated)
    deltas = tuple(after[p] - before[p] for p in s.members)
    return GainReport(rule.name, s, base, manipulated, deltas, sum(deltas, Fraction(0)))


def pair_gain(rule: RuleHandle, t: Tournament, i: int, j: int) -> GainReport:
    """Gain of ``{i, j}`` when ``j`` throws its match to ``i``."""
    if i == j:
        raise InvalidParameters("a pair needs two distinct players")
    for p in (i, j):
        if not 0 <= p < t.n:
            raise IndexOutOfRange(f"player {p} not in range(0, {t.n})")
    return _report(rule, Coalition((i, j)), t, flip_to(t, MatchFlip(i, j)))


def coalition_gain(rule: RuleHandle, t: Tournament, s: Coalition | Sequence[int]) -> GainReport:
    """Best manipulation available to ``s``; ties go to the earliest adjacent tournament."""
    s = s if isinstance(s, Coalition) else Coalition(tuple(s))
    candidates = adjacent_tournaments(t, s)
    before = rule(t)
    best = None
    for cand in candidates:
        rep = _report(rule, s, t, cand, before=before)
        if best is None or rep.total_gain > best.total_gain:
            best = rep
    return best


# -- exhaustive scans ------------------------------------------------------

def _evaluate_range(name: str, n: int, start: int, stop: int) -> list[tuple[Fraction, ...]]:
    rule = get_rule(name)
    return [rule(Tournament(n, bits)).real for bits in range(start, stop)]


def rule_table(rule: RuleHandle, n: int, jobs: int = 1) -> tuple[np.ndarray, int]:
    """Winning probabilities of the real players for every tournament on ``n``.

    Returns ``(numerators, denominator)`` with ``numerators[bits, p] /
    denominator == r_p(Tournament(n, bits))``.  Rows are ordered by bitmask;
    ``jobs > 1`` splits the bitmask range into contiguous chunks, which gives
    the same table.
    """
    total = 1 << num_pairs(n)
    if rule.name == "rseb" and rule is get_rule("rseb"):
        counts = rseb_counts_batch(n, np.arange(total, dtype=np.int64))
        return counts[:, :n].copy(), math.factorial(padded_size(n))
    if jobs > 1 and rule.name in RULE_NAMES and rule is get_rule(rule.name):
        step = math.ceil(total / jobs)
        bounds = [(s, min(s + step, total)) for s in range(0, total, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_evaluate_range, *zip(*[(rule.name, n, a, b) for a, b in bounds]))
            rows = [row for part in parts for row in part]
    else:
        rows = [rule(Tournament(n, bits)).real for bits in range(total)]
    denom = 1
    for row in rows:
        for x in row:
            denom = math.lcm(denom, x.denominator)
    dtype = np.int64 if denom < 1 << 40 else object
    nums = np.array([[x.numerator * (denom // x.denominator) for x in row] for row in rows], dtype=dtype)
    return nums, denom


@dataclass(frozen=True)
class ScanResult:
    alpha: Fraction
    witness: GainReport
    tournaments: int
    n: int
    k: int


def scan_limit(k: int) -> int:
    return SCAN_LIMITS.get(k, DEFAULT_SCAN_LIMIT)


def scan_alpha(rule: RuleHandle, n: int, k: int = 2, jobs: int = 1, limit: int | None = None) -> ScanResult:
    """Worst-case coalition gain over all labeled tournaments on ``n`` players.

    Ties are broken by the smallest base bitmask, then coalition (by size,
    then lexicographically), then the adjacent tournament's enumeration index,
    so the witness does not depend on ``jobs``.
    """
    if k < 2 or k > n:
        raise InvalidParameters(f"need 2 <= k <= n, got k={k}, n={n}")
    limit = scan_limit(k) if limit is None else limit
    if n > limit:
        raise LimitExceeded(f"exhaustive scan with n={n}, k={k} exceeds limit {limit}")
    nums, denom = rule_table(rule, n, jobs)
    total = nums.shape[0]
    everything = np.arange(total, dtype=np.int64)
    coalitions = [c for size in range(2, k + 1) for c in itertools.combinations(range(n), size)]
    best_gain = 0
    best_key = (0, coalitions[0], 0)
    for members in coalitions:
        edges = Coalition(members).edge_bits(n)
        mass = nums[:, list(members)].sum(axis=1)
        for sub in range(1, 1 << len(edges)):
            mask = 0
            for pos, bit in enumerate(edges):
                if (sub >> pos) & 1:
                    mask |= 1 << bit
            gains = mass[everything ^ mask] - mass
            top = gains.max()
            base = int(np.flatnonzero(gains == top)[0])
            key = (base, members, sub)
            if top > best_gain or (top == best_gain and key < best_key):
                best_gain, best_key = top, key
    base, members, _ = best_key
    witness = coalition_gain(rule, Tournament(n, base), Coalition(members))
    alpha = Fraction(int(best_gain), denom)
    if witness.total_gain != alpha:
        raise AssertionError(f"witness gain {witness.total_gain} disagrees with table alpha {alpha}")
    return ScanResult(alpha, witness, total, n, k)


def check_monotone(rule: RuleHandle, n: int, limit: int = MONOTONE_LIMIT):
    """First ``(tournament, flip)`` where losing a match helps the loser, else None."""
    if n > limit:
        raise LimitExceeded(f"monotonicity scan with n={n} exceeds limit {limit}")
    cache: dict[int, WinDistribution] = {}

    def value(t):
        d = cache.get(t.bits)
        if d is None:
            d = cache[t.bits] = rule(t)
        return d

    for bits in range(1 << num_pairs(n)):
        t = Tournament(n, bits)
        before = value(t)
        for i in range(n):
            for j in range(n):
                if i != j and t.beats(i, j):
                    flip = MatchFlip(j, i)
                    if value(flip_to(t, flip))[i] > before[i]:
                        return t, flip
    return None


# -- lower-bound witnesses -------------------------------------------------

@dataclass(frozen=True)
class LowerBoundCheck:
    report: GainReport
    bound: Fraction
    bound_name: str

    @property
    def holds(self) -> bool:
        return self.report.total_gain >= self.bound


def _throw_to(t: Tournament, target: int, helpers: Sequence[int]) -> Tournament:
    for h in helpers:
        t = flip_to(t, MatchFlip(target, h))
    return t


def check_lower_bound(rule: RuleHandle, family: str, n: int, k: int = 2,
                      witness_k: int | None = None) -> LowerBoundCheck:
    """Gain of the colluding sets used in the lower-bound constructions.

    three_cycle_padded
        each of the three pairs makes one member a Condorcet winner; the best
        of the three gains at least 1/3.
    cyclic_odd
        the ``2*witness_k - 1`` core players form coalitions
        ``{i, i-1, ..., i-k+1}`` that all throw to ``i``.  With
        ``witness_k == k`` the bound is ``(k-1)/(2k-1)``; with ``k == 2`` and a
        Copeland rule the pair ``{i-1, i}`` makes ``i`` the unique top scorer
        and the bound is ``1 - 2/core``.
    superman_kryptonite
        the last player throws to player 0, who becomes a Condorcet winner.
    """
    family = family.replace("-", "_")
    if family == "three_cycle_padded":
        if k != 2:
            raise InvalidParameters("three_cycle_padded is a pair construction (k=2)")
        t = generate_witness(family, n)
        before = rule(t)
        reports = [
            _report(rule, Coalition((a, b)), t, flip_to(t, MatchFlip(a, b)), before=before)
            for a, b in ((0, 2), (1, 0), (2, 1))
        ]
        best = max(reports, key=lambda r: r.total_gain)
        return LowerBoundCheck(best, Fraction(1, 3), "1/3")
    if family == "cyclic_odd":
        witness_k = k if witness_k is None else witness_k
        t = generate_witness(family, n, witness_k)
        core = 2 * witness_k - 1
        if k > core:
            raise InvalidParameters(f"coalition size {k} exceeds the {core}-player core")
        before = rule(t)
        reports = []
        for i in range(core):
            helpers = [(i - d) % core for d in range(1, k)]
            members = Coalition((i, *helpers))
            reports.append(_report(rule, members, t, _throw_to(t, i, helpers), before=before))
        best = max(reports, key=lambda r: r.total_gain)
        if witness_k == k:
            return LowerBoundCheck(best, Fraction(k - 1, 2 * k - 1), "(k-1)/(2k-1)")
        if k == 2 and rule.name.startswith("copeland"):
            return LowerBoundCheck(best, 1 - Fraction(2, core), "1 - 2/n")
        return LowerBoundCheck(best, Fraction(1, 3), "1/3")
    if family == "superman_kryptonite":
        if k != 2:
            raise InvalidParameters("superman_kryptonite is a pair construction (k=2)")
        t = generate_witness(family, n)
        report = pair_gain(rule, t, 0, n - 1)
        bound, name = superman_kryptonite_bound(rule.name, n)
        return LowerBoundCheck(report, bound, name)
    raise InvalidParameters(f"unknown witness family {family!r}")


def superman_kryptonite_bound(rule_name: str, n: int) -> tuple[Fraction, str]:
    if rule_name == "topcycle":
        return 1 - Fraction(2, n), "1 - 2/n"
    if rule_name == "itercondorcet":
        return Fraction(1, 2) - Fraction(1, n * (n - 1)), "1/2 - 1/(n(n-1))"
    if rule_name == "caterpillar":
        return Fraction(1, 2) - Fraction(n - 2, n * (n - 1)), "1/2 - (n-2)/(n(n-1))"
    return Fraction(0), "0"


def caterpillar_bound_variants(n: int) -> dict[str, Fraction]:
    """The two closed forms in circulation for the caterpillar lower bound."""
    return {
        "statement (n-3)": Fraction(1, 2) - Fraction(n - 3, n * (n - 1)),
        "proof (n-2)": Fraction(1, 2) - Fraction(n - 2, n * (n - 1)),
    }


# -- randomized tournaments ------------------------------------------------

@dataclass(frozen=True)
class RandomizedTournament:
    support: tuple[tuple[Tournament, Fraction], ...]

    def __post_init__(self):
        support = tuple((t, Fraction(w)) for t, w in self.support)
        object.__setattr__(self, "support", support)
        if not support:
            raise InvalidDistribution("empty support")
        if any(w <= 0 for _, w in support):
            raise InvalidDistribution("support weights must be positive")
        if sum(w for _, w in support) != 1:
            raise InvalidDistribution(f"weights sum to {sum(w for _, w in support)}, not 1")
        if len({t.n for t, _ in support}) != 1:
            raise InvalidDistribution("support tournaments have different player counts")

    @property
    def n(self) -> int:
        return self.support[0][0].n

    @classmethod
    def point_mass(cls, t: Tournament) -> "RandomizedTournament":
        return cls(((t, Fraction(1)),))


def _check_match_probabilities(p) -> int:
    n = len(p)
    for i in range(n):
        if len(p[i]) != n:
            raise InvalidDistribution("probability matrix is not square")
        for j in range(i + 1, n):
            a, b = Fraction(p[i][j]), Fraction(p[j][i])
            if not 0 <= a <= 1 or a + b != 1:
                raise InvalidDistribution(f"p[{i}][{j}] + p[{j}][{i}] must be 1 with both in [0, 1]")
    return n


def from_match_probabilities(p, expand_limit: int = EXPAND_PAIR_LIMIT) -> RandomizedTournament:
    """Product distribution where ``i`` beats ``j`` independently with ``p[i][j]``."""
    n = _check_match_probabilities(p)
    if num_pairs(n) > expand_limit:
        raise LimitExceeded(f"{num_pairs(n)} matches exceed the expansion limit {expand_limit}")
    pairs = list(itertools.combinations(range(n), 2))
    support = []
    for bits in range(1 << len(pairs)):
        w = Fraction(1)
        for pos, (i, j) in enumerate(pairs):
            w *= Fraction(p[i][j]) if (bits >> pos) & 1 else Fraction(p[j][i])
            if w == 0:
                break
        if w:
            support.append((Tournament(n, bits), w))
    return RandomizedTournament(tuple(support))


def randomized_pair_gain(rule: RuleHandle, rt: RandomizedTournament, i: int, j: int) -> Fraction:
    """Expected gain of ``{i, j}`` when ``j`` throws to ``i`` in every outcome."""
    return sum((w * pair_gain(rule, t, i, j).total_gain for t, w in rt.support), Fraction(0))


def sampled_pair_gain(rule: RuleHandle, p, i: int, j: int, samples: int, seed: int) -> float:
    """Monte Carlo estimate of :func:`randomized_pair_gain` for independent matches.

    Draws ``samples`` tournaments from the product distribution in chunks of
    4096, chunk ``c`` using the Philox stream keyed by ``(seed, c)``.
    """
    n = _check_match_probabilities(p)
    if samples < 1:
        raise InvalidParameters("samples must be >= 1")
    pairs = list(itertools.combinations(range(n), 2))
    probs = np.array([float(Fraction(p[a][b])) for a, b in pairs])
    weights = 1 << np.arange(len(pairs), dtype=object)
    cache: dict[int, Fraction] = {}
    total = Fraction(0)
    for chunk in range(math.ceil(samples / 4096)):
        m = min(4096, samples - chunk * 4096)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))
        wins = rng.random((m, len(pairs))) < probs
        for row in wins:
            bits = int((row.astype(object) * weights).sum())
            g = cache.get(bits)
            if g is None:
                g = cache[bits] = pair_gain(rule, Tournament(n, bits), i, j).total_gain
            total += g
    return float(total / samples)


# -- serialization ---------------------------------------------------------

def format_gain_report(r: GainReport) -> str:
    """``key=value`` lines followed by both tournaments in text format."""
    lines = [
        f"rule={r.rule}",
        f"coalition={','.join(str(p) for p in r.coalition.members)}",
        f"total_gain={format_fraction(r.total_gain)}",
    ]
    for p, d in zip(r.coalition.members, r.per_player_delta):
        lines.append(f"delta.{p}={format_fraction(d)}")
    lines.append("base:")
    lines.append(format_tournament(r.base).rstrip("\n"))
    lines.append("manipulated:")
    lines.append(format_tournament(r.manipulated).rstrip("\n"))
    return "\n".join(lines) + "\n"


def parse_gain_report(text: str) -> GainReport:
    fields: dict[str, str] = {}
    blocks: dict[str, list[str]] = {"base": [], "manipulated": []}
    current = None
    for line in text.splitlines():
        if line.strip() in ("base:", "manipulated:"):
            current = line.strip()[:-1]
            continue
        if current is not None:
            blocks[current].append(line)
        elif "=" in line:
            key, value = line.split("=", 1)
            fields[key.strip()] = value.strip()
    try:
        members = tuple(int(x) for x in fields["coalition"].split(","))
        deltas = tuple(parse_fraction(fields[f"delta.{p}"]) for p in members)
        return GainReport(
            fields["rule"],
            Coalition(members),
            parse_tournament("\n".join(blocks["base"])),
            parse_tournament("\n".join(blocks["manipulated"])),
            deltas,
            parse_fraction(fields["total_gain"]),
        )
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed gain report: {exc}") from None


def format_support(rt: RandomizedTournament) -> str:
    """One ``p/q`` weight line, then the tournament block, per support element."""
    return "".join(f"{format_fraction(w)}\n{format_tournament(t)}" for t, w in rt.support)


def parse_support(text: str) -> RandomizedTournament:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    support = []
    pos = 0
    while pos < len(lines):
        try:
            w = parse_fraction(lines[pos])
            n = int(lines[pos + 1])
        except (ValueError, ZeroDivisionError, IndexError):
            raise ParseError(f"expected a 'p/q' weight and a player count near line {pos + 1}") from None
        block = lines[pos + 1:pos + 2 + n]
        if len(block) != n + 1:
            raise ParseError("support file ends inside a tournament block")
        support.append((parse_tournament("\n".join(block)), w))
        pos += 2 + n
    return RandomizedTournament(tuple(support))


def parse_match_probabilities(text: str) -> list[list[Fraction]]:
    """Player count, then one row of ``p/q`` entries per player with ``-`` on the diagonal."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        n = int(lines[0][0])
        if len(lines) != n + 1:
            raise ParseError(f"expected {n} probability rows, got {len(lines) - 1}")
        p = [[Fraction(0) if i == j else parse_fraction(row[j]) for j in range(n)] for i, row in enumerate(lines[1:])]
    except (ValueError, ZeroDivisionError, IndexError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed probability matrix: {exc}") from None
    _check_match_probabilities(p)
    return p
