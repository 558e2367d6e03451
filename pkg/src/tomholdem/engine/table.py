"""No-limit hold'em table state machine for up to three seats.

The public functions (:func:`deal_hand`, :func:`legal_actions`,
:func:`apply_action`, :func:`settle_showdown`) never mutate their input
state; they return a fresh :class:`TableState`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, NamedTuple

from ..rng import SplitMix64
from .cards import Card, full_deck
from .evaluator import HandValue, evaluate_best


class EngineError(Exception):
    pass


class FewerThanTwoPlayers(EngineError):
    pass


class NotActorsTurn(EngineError):
    pass


class IllegalAction(EngineError):
    pass


class HandNotComplete(EngineError):
    pass


class Street(str, Enum):
    Preflop = "Preflop"
    Flop = "Flop"
    Turn = "Turn"
    River = "River"
    Showdown = "Showdown"


class Status(str, Enum):
    Active = "Active"
    Folded = "Folded"
    AllIn = "AllIn"
    Eliminated = "Eliminated"


class ActionKind(str, Enum):
    Fold = "Fold"
    Check = "Check"
    Call = "Call"
    Bet = "Bet"
    Raise = "Raise"
    PostBlind = "PostBlind"


BOARD_SIZE = {Street.Preflop: 0, Street.Flop: 3, Street.Turn: 4, Street.River: 5, Street.Showdown: 5}
_NEXT_STREET = {Street.Preflop: Street.Flop, Street.Flop: Street.Turn, Street.Turn: Street.River}


class Action(NamedTuple):
    """A move as submitted by a player.

    ``amount`` is the raise-to total for the street on Bet/Raise, the chips
    put in on Call (0 means "whatever the call costs"), and 0 otherwise.
    """

    kind: ActionKind
    amount: int = 0


class LegalAction(NamedTuple):
    kind: ActionKind
    min_amount: int
    max_amount: int


@dataclass
class PlayerSeat:
    name: str
    stack: int
    hole: list[Card] = field(default_factory=list)
    status: Status = Status.Active
    committed_this_street: int = 0
    contributed: int = 0  # total chips in the pot this hand


@dataclass(frozen=True)
class ActionRecord:
    """One logged action.

    ``amount`` is always the chips moved from the actor's stack by this
    action; for Bet/Raise ``raise_to`` carries the street total as well.
    """

    hand_id: int
    street: Street
    actor: str
    kind: ActionKind
    amount: int
    pot_before: int
    to_call_before: int
    raise_to: int = 0
    all_in: bool = False
    could_raise: bool = False

    def to_dict(self) -> dict:
        return {
            "hand_id": self.hand_id,
            "street": self.street.value,
            "actor": self.actor,
            "kind": self.kind.value,
            "amount": self.amount,
            "pot_before": self.pot_before,
            "to_call_before": self.to_call_before,
            "raise_to": self.raise_to,
            "all_in": self.all_in,
            "could_raise": self.could_raise,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActionRecord":
        return cls(
            hand_id=d["hand_id"],
            street=Street(d["street"]),
            actor=d["actor"],
            kind=ActionKind(d["kind"]),
            amount=d["amount"],
            pot_before=d["pot_before"],
            to_call_before=d["to_call_before"],
            raise_to=d.get("raise_to", 0),
            all_in=d.get("all_in", False),
            could_raise=d.get("could_raise", False),
        )


@dataclass(frozen=True)
class Pot:
    amount: int
    eligible: tuple[str, ...]


@dataclass
class TableState:
    players: list[PlayerSeat]
    small_blind: int = 50
    big_blind: int = 100
    hand_id: int = 0
    button: int = -1
    street: Street = Street.Preflop
    board: list[Card] = field(default_factory=list)
    deck: list[Card] = field(default_factory=list)
    action_log: list[ActionRecord] = field(default_factory=list)
    rng_seed: int = 0
    to_act: int | None = None
    current_bet: int = 0
    last_raise_inc: int = 0
    pending: set[str] = field(default_factory=set)
    raise_closed: set[str] = field(default_factory=set)
    sb_seat: int = -1
    bb_seat: int = -1
    hand_over: bool = True
    went_to_showdown: bool = False
    payouts: dict[str, int] = field(default_factory=dict)
    total_chips: int = 0

    # -- queries -------------------------------------------------------

    def seat_of(self, name: str) -> int:
        for i, p in enumerate(self.players):
            if p.name == name:
                return i
        raise KeyError(name)

    def player(self, name: str) -> PlayerSeat:
        return self.players[self.seat_of(name)]

    @property
    def actor(self) -> str | None:
        if self.hand_over or self.to_act is None:
            return None
        return self.players[self.to_act].name

    @property
    def pots(self) -> list[Pot]:
        return compute_pots(self.players)

    @property
    def pot_total(self) -> int:
        return sum(p.contributed for p in self.players)

    def chips_in_play(self) -> int:
        return sum(p.stack for p in self.players) + self.pot_total

    def live_seats(self) -> list[int]:
        return [i for i, p in enumerate(self.players) if p.status != Status.Eliminated]

    def in_hand(self) -> list[PlayerSeat]:
        """Seats dealt into the current hand that have not folded."""
        return [p for p in self.players if p.status in (Status.Active, Status.AllIn)]

    def to_call(self, name: str) -> int:
        p = self.player(name)
        return max(0, min(self.current_bet - p.committed_this_street, p.stack))

    def positions(self) -> dict[str, str]:
        """Seat roles for the current hand: BTN, SB, BB (heads-up: BTN and BB)."""
        roles: dict[str, str] = {}
        if self.sb_seat < 0:
            return roles
        roles[self.players[self.bb_seat].name] = "BB"
        if self.sb_seat != self.button:
            roles[self.players[self.sb_seat].name] = "SB"
        roles[self.players[self.button].name] = "BTN"
        return roles

    def clone(self) -> "TableState":
        return replace(
            self,
            players=[replace(p, hole=list(p.hole)) for p in self.players],
            board=list(self.board),
            deck=list(self.deck),
            action_log=list(self.action_log),
            pending=set(self.pending),
            raise_closed=set(self.raise_closed),
            payouts=dict(self.payouts),
        )


def new_table(names: Iterable[str], stack: int = 10_000, small_blind: int = 50, big_blind: int = 100) -> TableState:
    names = list(names)
    if len(set(names)) != len(names):
        raise ValueError("duplicate player names")
    players = [PlayerSeat(n, stack) for n in names]
    return TableState(
        players=players,
        small_blind=small_blind,
        big_blind=big_blind,
        button=len(players) - 1,
        total_chips=stack * len(players),
    )


def compute_pots(players: list[PlayerSeat]) -> list[Pot]:
    """Layer contributions into a main pot and nested side pots."""
    levels = sorted({p.contributed for p in players if p.contributed > 0})
    pots: list[Pot] = []
    prev = 0
    for level in levels:
        contributors = [p for p in players if p.contributed >= level]
        amount = (level - prev) * len(contributors)
        eligible = tuple(p.name for p in contributors if p.status in (Status.Active, Status.AllIn))
        if pots and (pots[-1].eligible == eligible or not eligible):
            pots[-1] = Pot(pots[-1].amount + amount, pots[-1].eligible)
        else:
            pots.append(Pot(amount, eligible))
        prev = level
    return pots


def _next_seat(state: TableState, seat: int, pred) -> int | None:
    n = len(state.players)
    for step in range(1, n + 1):
        i = (seat + step) % n
        if pred(state.players[i]):
            return i
    return None


def _not_eliminated(p: PlayerSeat) -> bool:
    return p.status != Status.Eliminated


def deal_hand(state: TableState, seed: int, *, button: int | None = None) -> TableState:
    """Start the next hand: move the button, shuffle, post blinds, deal.

    ``button`` overrides the usual one-seat advance (used for replays).
    """
    if not state.hand_over:
        raise EngineError("previous hand is not settled")
    s = state.clone()
    for p in s.players:
        p.hole = []
        p.committed_this_street = 0
        p.contributed = 0
        p.status = Status.Active if p.stack > 0 else Status.Eliminated
    live = s.live_seats()
    if len(live) < 2:
        raise FewerThanTwoPlayers(f"only {len(live)} player(s) with chips")

    s.hand_id += 1
    s.rng_seed = seed
    s.button = button if button is not None else _next_seat(s, s.button, _not_eliminated)
    if len(live) == 2:
        s.sb_seat = s.button
    else:
        s.sb_seat = _next_seat(s, s.button, _not_eliminated)
    s.bb_seat = _next_seat(s, s.sb_seat, _not_eliminated)

    deck = full_deck()
    SplitMix64(seed).shuffle(deck)
    order = [s.sb_seat]
    while len(order) < len(live):
        order.append(_next_seat(s, order[-1], _not_eliminated))
    for _ in range(2):
        for seat in order:
            s.players[seat].hole.append(deck.pop())
    s.deck = deck
    s.board = []
    s.street = Street.Preflop
    s.action_log = []
    s.payouts = {}
    s.hand_over = False
    s.went_to_showdown = False

    for seat, blind in ((s.sb_seat, s.small_blind), (s.bb_seat, s.big_blind)):
        p = s.players[seat]
        posted = min(blind, p.stack)
        pot_before = s.pot_total
        _commit(p, posted)
        s.action_log.append(
            ActionRecord(s.hand_id, Street.Preflop, p.name, ActionKind.PostBlind, posted, pot_before, 0,
                         all_in=p.status == Status.AllIn)
        )
    s.current_bet = max(s.players[s.sb_seat].committed_this_street, s.players[s.bb_seat].committed_this_street)
    s.last_raise_inc = s.big_blind
    s.pending = {p.name for p in s.players if p.status == Status.Active}
    s.raise_closed = set()
    s.to_act = None
    _progress(s, after_seat=s.bb_seat)
    return s


def _commit(p: PlayerSeat, chips: int) -> None:
    p.stack -= chips
    p.committed_this_street += chips
    p.contributed += chips
    if p.stack == 0:
        p.status = Status.AllIn


def legal_actions(state: TableState, actor: str) -> list[LegalAction]:
    if state.actor != actor:
        raise NotActorsTurn(f"{actor} does not hold the action (actor: {state.actor})")
    return player_options(state, state.player(actor))


def player_options(state: TableState, p: PlayerSeat) -> list[LegalAction]:
    if p.stack == 0 or p.status != Status.Active:
        return []
    to_call = max(0, state.current_bet - p.committed_this_street)
    out: list[LegalAction] = []
    if to_call > 0:
        out.append(LegalAction(ActionKind.Fold, 0, 0))
        call = min(to_call, p.stack)
        out.append(LegalAction(ActionKind.Call, call, call))
    else:
        out.append(LegalAction(ActionKind.Check, 0, 0))
    others_live = any(
        q is not p and q.status == Status.Active and q.stack > 0 for q in state.players
    )
    if p.stack > to_call and p.name not in state.raise_closed and others_live:
        max_to = p.committed_this_street + p.stack
        min_to = min(state.current_bet + state.last_raise_inc, max_to)
        kind = ActionKind.Bet if state.current_bet == 0 else ActionKind.Raise
        out.append(LegalAction(kind, min_to, max_to))
    return out


def apply_action(state: TableState, actor: str, action) -> TableState:
    """Apply ``action`` (anything with ``kind`` and ``amount``) for ``actor``."""
    legal = legal_actions(state, actor)
    kind = ActionKind(action.kind)
    amount = int(action.amount or 0)
    by_kind = {la.kind: la for la in legal}
    if kind not in by_kind:
        allowed = ", ".join(la.kind.value for la in legal)
        raise IllegalAction(f"{kind.value} not allowed; legal: {allowed}")
    la = by_kind[kind]
    if kind in (ActionKind.Fold, ActionKind.Check) and amount != 0:
        raise IllegalAction(f"{kind.value} takes no amount (got {amount})")
    if kind == ActionKind.Call and amount not in (0, la.min_amount):
        raise IllegalAction(f"call amount must be {la.min_amount} (got {amount})")
    if kind in (ActionKind.Bet, ActionKind.Raise) and not la.min_amount <= amount <= la.max_amount:
        raise IllegalAction(
            f"{kind.value} to {amount} outside [{la.min_amount}, {la.max_amount}]"
        )

    s = state.clone()
    seat = s.seat_of(actor)
    p = s.players[seat]
    to_call = max(0, s.current_bet - p.committed_this_street)
    pot_before = s.pot_total
    could_raise = any(x.kind in (ActionKind.Bet, ActionKind.Raise) for x in legal)
    raise_to = 0
    if kind == ActionKind.Fold:
        p.status = Status.Folded
        moved = 0
    elif kind == ActionKind.Check:
        moved = 0
    elif kind == ActionKind.Call:
        moved = la.min_amount
        _commit(p, moved)
    else:
        raise_to = amount
        moved = raise_to - p.committed_this_street
        increment = raise_to - s.current_bet
        _commit(p, moved)
        if increment >= s.last_raise_inc:
            s.last_raise_inc = increment
            s.raise_closed = set()
        s.current_bet = raise_to
        s.pending = {q.name for q in s.players if q.status == Status.Active and q.name != actor}
    s.pending.discard(actor)
    s.raise_closed.add(actor)
    s.action_log.append(
        ActionRecord(s.hand_id, s.street, actor, kind, moved, pot_before, to_call,
                     raise_to=raise_to, all_in=p.status == Status.AllIn and moved > 0,
                     could_raise=could_raise)
    )
    _progress(s, after_seat=seat)
    return s


def _progress(s: TableState, after_seat: int) -> None:
    """Pick the next actor, or close the street / hand."""
    while True:
        live = s.in_hand()
        if len(live) == 1:
            _return_uncalled(s)
            _finish(s, showdown=False)
            return
        active = [p for p in live if p.status == Status.Active]
        s.pending = {n for n in s.pending if s.player(n).status == Status.Active}
        for name in list(s.pending):
            p = s.player(name)
            others_active = any(q is not p for q in active)
            if p.committed_this_street >= s.current_bet and not others_active:
                s.pending.discard(name)
        if s.pending:
            s.to_act = _next_seat(s, after_seat, lambda q: q.name in s.pending)
            return
        _return_uncalled(s)
        active = [p for p in s.in_hand() if p.status == Status.Active]
        if s.street == Street.River or len(active) <= 1:
            while len(s.board) < 5:
                s.board.append(s.deck.pop())
            s.street = Street.Showdown
            _finish(s, showdown=True)
            return
        s.street = _NEXT_STREET[s.street]
        while len(s.board) < BOARD_SIZE[s.street]:
            s.board.append(s.deck.pop())
        for p in s.players:
            p.committed_this_street = 0
        s.current_bet = 0
        s.last_raise_inc = s.big_blind
        s.raise_closed = set()
        s.pending = {p.name for p in active}
        after_seat = s.button


def _return_uncalled(s: TableState) -> None:
    ranked = sorted(s.players, key=lambda p: p.contributed, reverse=True)
    top, second = ranked[0], ranked[1]
    excess = top.contributed - second.contributed
    if excess > 0:
        top.stack += excess
        top.contributed -= excess
        top.committed_this_street = max(0, top.committed_this_street - excess)
        if top.status == Status.AllIn:
            top.status = Status.Active


def _showdown_order(state: TableState) -> list[str]:
    """Names clockwise starting left of the button."""
    n = len(state.players)
    return [state.players[(state.button + k) % n].name for k in range(1, n + 1)]


def settle_showdown(state: TableState) -> dict[str, int]:
    """Chips each player wins from the pots (gross, not net of contributions)."""
    live = state.in_hand()
    if state.street != Street.Showdown and len(live) != 1:
        raise HandNotComplete("hand has neither reached showdown nor been folded out")
    payouts = {p.name: 0 for p in state.players}
    pots = compute_pots(state.players)
    if len(live) == 1:
        payouts[live[0].name] = sum(pot.amount for pot in pots)
        return payouts
    values: dict[str, HandValue] = {
        p.name: evaluate_best(p.hole + state.board) for p in live
    }
    order = _showdown_order(state)
    for pot in pots:
        best = max(values[n] for n in pot.eligible)
        winners = [n for n in order if n in pot.eligible and values[n] == best]
        share, odd = divmod(pot.amount, len(winners))
        for i, name in enumerate(winners):
            payouts[name] += share + (1 if i < odd else 0)
    return payouts


def _finish(s: TableState, showdown: bool) -> None:
    s.went_to_showdown = showdown
    payouts = settle_showdown(s)
    for p in s.players:
        p.stack += payouts[p.name]
        p.contributed = 0
        p.committed_this_street = 0
    for p in s.players:
        if p.stack == 0:
            p.status = Status.Eliminated
    s.payouts = payouts
    s.pending = set()
    s.to_act = None
    s.hand_over = True
