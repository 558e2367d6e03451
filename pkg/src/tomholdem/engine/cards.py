"""Cards, deck, and text encoding (``"As"``, ``"Td"``, ``"2c"``)."""

from __future__ import annotations

from typing import Iterable, NamedTuple

SUITS = ("c", "d", "h", "s")
SUIT_NAMES = {"c": "clubs", "d": "diamonds", "h": "hearts", "s": "spades"}
RANK_CHARS = "23456789TJQKA"
_UNICODE_SUITS = {"♣": "c", "♦": "d", "♥": "h", "♠": "s"}


class Card(NamedTuple):
    rank: int  # 2..14, 14 = ace
    suit: str  # one of SUITS

    def __str__(self) -> str:
        return RANK_CHARS[self.rank - 2] + self.suit

    @property
    def index(self) -> int:
        """Dense 0..51 index: ``(rank - 2) * 4 + suit``."""
        return (self.rank - 2) * 4 + SUITS.index(self.suit)

    @classmethod
    def from_index(cls, idx: int) -> "Card":
        return cls(idx // 4 + 2, SUITS[idx % 4])


def parse_card(token: str) -> Card:
    token = token.strip()
    if len(token) == 3 and token[:2] == "10":
        token = "T" + token[2:]
    if len(token) != 2:
        raise ValueError(f"bad card token {token!r}")
    rank_ch, suit_ch = token[0].upper(), _UNICODE_SUITS.get(token[1], token[1].lower())
    if rank_ch not in RANK_CHARS or suit_ch not in SUITS:
        raise ValueError(f"bad card token {token!r}")
    return Card(RANK_CHARS.index(rank_ch) + 2, suit_ch)


def parse_cards(text: str | Iterable[str]) -> list[Card]:
    """Parse ``"As Kd"``, ``"AsKd"``, ``"A♠K♦"`` or a list of tokens."""
    if isinstance(text, str):
        compact = text.replace(" ", "").replace(",", "")
        tokens, i = [], 0
        while i < len(compact):
            if compact.startswith("10", i):
                tokens.append(compact[i : i + 3])
                i += 3
            else:
                tokens.append(compact[i : i + 2])
                i += 2
        return [parse_card(t) for t in tokens]
    return [parse_card(t) for t in text]


def full_deck() -> list[Card]:
    return [Card.from_index(i) for i in range(52)]


def cards_str(cards: Iterable[Card]) -> list[str]:
    return [str(c) for c in cards]


def hand_class(hole: Iterable[Card]) -> str:
    """Canonical starting-hand class: ``"AA"``, ``"AKs"``, ``"72o"``."""
    a, b = sorted(hole, key=lambda c: c.rank, reverse=True)
    hi, lo = RANK_CHARS[a.rank - 2], RANK_CHARS[b.rank - 2]
    if a.rank == b.rank:
        return hi + lo
    return hi + lo + ("s" if a.suit == b.suit else "o")
