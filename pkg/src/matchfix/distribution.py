from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidDistribution


@dataclass(frozen=True)
class WinDistribution:
    """Exact winning probability of every player.

    Rules that pad the field (the random bracket) append their dummy players
    after the real ones; ``dummies`` counts them and they always get 0.
    """

    probs: tuple[Fraction, ...]
    dummies: int = 0

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if any(p < 0 or p > 1 for p in probs):
            raise InvalidDistribution(f"probability outside [0, 1]: {probs}")
        if sum(probs) != 1:
            raise InvalidDistribution(f"probabilities sum to {sum(probs)}, not 1")
        if not 0 <= self.dummies < len(probs) or any(probs[len(probs) - self.dummies:]):
            raise InvalidDistribution("dummy players must receive probability 0")

    @classmethod
    def point_mass(cls, n: int, winner: int, dummies: int = 0) -> "WinDistribution":
        probs = [Fraction(0)] * (n + dummies)
        probs[winner] = Fraction(1)
        return cls(tuple(probs), dummies)

    @classmethod
    def uniform_over(cls, n: int, support: Iterable[int]) -> "WinDistribution":
        support = sorted(set(support))
        share = Fraction(1, len(support))
        probs = [Fraction(0)] * n
        for p in support:
            probs[p] = share
        return cls(tuple(probs))

    @classmethod
    def from_counts(cls, counts: Sequence[int], dummies: int = 0) -> "WinDistribution":
        total = sum(int(c) for c in counts)
        return cls(tuple(Fraction(int(c), total) for c in counts), dummies)

    @property
    def n(self) -> int:
        """Number of real (non-dummy) players."""
        return len(self.probs) - self.dummies

    @property
    def real(self) -> tuple[Fraction, ...]:
        return self.probs[: self.n]

    def __getitem__(self, i: int) -> Fraction:
        return self.probs[i]

    def __len__(self):
        return len(self.probs)

    def mass(self, players: Iterable[int]) -> Fraction:
        return sum((self.probs[p] for p in players), Fraction(0))

    def is_point_mass_on(self, p: int) -> bool:
        return self.probs[p] == 1


def format_fraction(x: Fraction) -> str:
    """Always ``p/q``, including ``1/1`` and ``0/1``."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s: str) -> Fraction:
    return Fraction(s.strip())
