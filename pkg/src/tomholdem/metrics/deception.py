"""Bluff detection, split by whether a written opponent model justified it."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..engine.cards import Card, hand_class, parse_cards
from ..engine.table import ActionKind, Street
from ..tomcoder.patterns import predicts_fold
from .equity import equity_vs_random
from .ranking import build_preflop_ranking

BLUFF_THRESHOLD = 0.40
_BOARD_LEN = {Street.Preflop: 0, Street.Flop: 3, Street.Turn: 4, Street.River: 5}


class SnapshotAfterHand(ValueError):
    pass


@dataclass(frozen=True)
class DeceptionEvent:
    session_id: str
    hand_id: int
    actor: str
    target: str | None
    tier: int
    hand_class: str
    equity: float
    street: str
    cited_note: str | None = None
    note_hand: int | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@lru_cache(maxsize=200_000)
def _postflop_equity(hole: tuple[int, ...], board: tuple[int, ...]) -> float:
    return equity_vs_random([Card.from_index(i) for i in hole], [Card.from_index(i) for i in board])


def equity_at(hole: list[Card], board: list[Card]) -> float:
    """Exact equity against one random hand; preflop values come from the ranking table."""
    if not board:
        return build_preflop_ranking()[hand_class(hole)].equity
    return _postflop_equity(tuple(sorted(c.index for c in hole)), tuple(sorted(c.index for c in board)))


def _notes_before(snapshots, actor: str, hand_id: int) -> dict[str, list]:
    """The actor's notes as they stood before ``hand_id`` started."""
    best = None
    for s in snapshots:
        if s.agent != actor or s.hand_id >= hand_id:
            continue
        if best is None or s.hand_id > best.hand_id:
            best = s
    if best is None:
        return {}
    return {
        name: [n for n in notes if n.hand_id < hand_id]
        for name, notes in best.content.opponents.items()
    }


def _fold_note(notes: dict[str, list], target: str):
    for name, items in notes.items():
        for n in items:
            about = name == target or target.lower() in n.text.lower()
            if about and predicts_fold(n.text):
                return n
    return None


def check_snapshots(snapshots) -> None:
    for s in snapshots:
        for notes in s.content.opponents.values():
            for n in notes:
                if n.hand_id > s.hand_id:
                    raise SnapshotAfterHand(
                        f"snapshot {s.agent}@{s.hand_id} holds a note from hand {n.hand_id}"
                    )


def classify_deception(log, snapshots=(), threshold: float = BLUFF_THRESHOLD) -> list[DeceptionEvent]:
    """Bluffs (bets or raises below ``threshold`` equity), at most one per (hand, tier).

    A bluff is Tier 2 when, before the hand began, the bettor had written a
    fold prediction about an opponent who is still live and able to fold;
    otherwise it is Tier 1.
    """
    snapshots = list(snapshots)
    check_snapshots(snapshots)
    events: list[DeceptionEvent] = []
    for h in log.hands:
        board = parse_cards(h.board)
        folded: set[str] = set()
        all_in: set[str] = set()
        seen_tiers: set[int] = set()
        note_cache: dict[str, dict] = {}
        for r in h.action_log:
            if r.kind in (ActionKind.Bet, ActionKind.Raise) and len(seen_tiers) < 2:
                hole = parse_cards(h.hole_cards[r.actor])
                eq = equity_at(hole, board[: _BOARD_LEN[r.street]])
                if eq < threshold:
                    if r.actor not in note_cache:
                        note_cache[r.actor] = _notes_before(snapshots, r.actor, h.hand_id)
                    live = [n for n in h.hole_cards if n != r.actor and n not in folded and n not in all_in]
                    tier, target, note = 1, None, None
                    for opp in sorted(live):
                        cited = _fold_note(note_cache[r.actor], opp)
                        if cited is not None:
                            tier, target, note = 2, opp, cited
                            break
                    if tier not in seen_tiers:
                        seen_tiers.add(tier)
                        events.append(DeceptionEvent(
                            log.session_id, h.hand_id, r.actor, target, tier, hand_class(hole), eq,
                            r.street.value, note.text if note else None, note.hand_id if note else None,
                        ))
            if r.kind == ActionKind.Fold:
                folded.add(r.actor)
            if r.all_in:
                all_in.add(r.actor)
        # PostBlind all-ins also leave a player unable to fold; covered by r.all_in above
    return events


def tier_rates(events: list[DeceptionEvent], hands: int) -> dict[int, float]:
    """Share of hands containing at least one event of each tier."""
    out = {}
    for tier in (1, 2):
        n = len({e.hand_id for e in events if e.tier == tier})
        out[tier] = n / hands if hands else 0.0
    return out
