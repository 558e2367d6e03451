"""Seven-card hand evaluation.

:func:`evaluate_seven` works directly on rank counts and suit groups rather
than scanning the 21 five-card subsets; :func:`evaluate_five` is the plain
five-card classifier.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

from .cards import Card


class DuplicateCard(ValueError):
    pass


class Category(IntEnum):
    HighCard = 0
    Pair = 1
    TwoPair = 2
    Trips = 3
    Straight = 4
    Flush = 5
    FullHouse = 6
    Quads = 7
    StraightFlush = 8


@dataclass(frozen=True, order=True)
class HandValue:
    category: Category
    tiebreak: tuple[int, ...]

    def score(self) -> int:
        """Order-preserving integer: category then tiebreak ranks in base 16."""
        s = int(self.category)
        for i in range(5):
            s = s * 16 + (self.tiebreak[i] if i < len(self.tiebreak) else 0)
        return s

    def __str__(self) -> str:
        return f"{self.category.name}{list(self.tiebreak)}"


def _straight_high(ranks: set[int]) -> int:
    """Highest straight top card present in ``ranks`` (0 if none)."""
    if 14 in ranks:
        ranks = ranks | {1}
    for top in range(14, 4, -1):
        if all(r in ranks for r in range(top - 4, top + 1)):
            return top
    return 0


def evaluate_seven(cards: Sequence[Card]) -> HandValue:
    if len(cards) != 7:
        raise ValueError(f"expected 7 cards, got {len(cards)}")
    return evaluate_best(cards)


def evaluate_best(cards: Sequence[Card]) -> HandValue:
    """Best five-card value among 5 to 7 distinct cards."""
    if len(set(cards)) != len(cards):
        raise DuplicateCard(f"duplicate card in {[str(c) for c in cards]}")
    if not 5 <= len(cards) <= 7:
        raise ValueError(f"need 5-7 cards, got {len(cards)}")

    by_suit: dict[str, list[int]] = {}
    for c in cards:
        by_suit.setdefault(c.suit, []).append(c.rank)
    flush_ranks = next((rs for rs in by_suit.values() if len(rs) >= 5), None)
    if flush_ranks is not None:
        top = _straight_high(set(flush_ranks))
        if top:
            return HandValue(Category.StraightFlush, (top,))

    counts = Counter(c.rank for c in cards)
    # groups sorted by (multiplicity, rank) descending
    groups = sorted(counts.items(), key=lambda kv: (kv[1], kv[0]), reverse=True)
    quads = [r for r, n in groups if n == 4]
    trips = [r for r, n in groups if n == 3]
    pairs = [r for r, n in groups if n == 2]

    if quads:
        q = quads[0]
        kicker = max(r for r in counts if r != q)
        return HandValue(Category.Quads, (q, kicker))
    if trips and (len(trips) > 1 or pairs):
        t = trips[0]
        p = max([r for r in trips[1:]] + pairs)
        return HandValue(Category.FullHouse, (t, p))
    if flush_ranks is not None:
        return HandValue(Category.Flush, tuple(sorted(flush_ranks, reverse=True)[:5]))
    top = _straight_high(set(counts))
    if top:
        return HandValue(Category.Straight, (top,))
    singles = sorted((r for r, n in counts.items() if n == 1), reverse=True)
    if trips:
        return HandValue(Category.Trips, (trips[0], *singles[:2]))
    if len(pairs) >= 2:
        hi, lo = pairs[0], pairs[1]
        kicker = max(r for r in counts if r not in (hi, lo))
        return HandValue(Category.TwoPair, (hi, lo, kicker))
    if pairs:
        return HandValue(Category.Pair, (pairs[0], *singles[:3]))
    return HandValue(Category.HighCard, tuple(singles[:5]))


def evaluate_five(cards: Sequence[Card]) -> HandValue:
    if len(cards) != 5:
        raise ValueError(f"expected 5 cards, got {len(cards)}")
    return evaluate_best(cards)
