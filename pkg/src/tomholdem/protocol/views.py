"""Per-agent observations, action requests, and protocol errors."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

from ..engine.cards import Card, cards_str, parse_cards
from ..engine.table import ActionKind, ActionRecord, LegalAction, Status, TableState, player_options


class ErrorCode(str, Enum):
    NotYourTurn = "NotYourTurn"
    IllegalAction = "IllegalAction"
    StaleHand = "StaleHand"
    MalformedRequest = "MalformedRequest"
    UnknownAgent = "UnknownAgent"


class ProtocolError(Exception):
    def __init__(self, code: ErrorCode, detail: str = ""):
        super().__init__(f"{code.value}: {detail}")
        self.code = ErrorCode(code)
        self.detail = detail

    def to_dict(self) -> dict:
        return {"code": self.code.value, "detail": self.detail}


@dataclass(frozen=True)
class ActionRequest:
    hand_id: int
    kind: ActionKind
    amount: int = 0

    def to_dict(self) -> dict:
        return {"hand_id": self.hand_id, "kind": ActionKind(self.kind).value, "amount": self.amount}

    @classmethod
    def from_dict(cls, d) -> "ActionRequest":
        if not isinstance(d, dict):
            raise ProtocolError(ErrorCode.MalformedRequest, "payload must be an object")
        try:
            hand_id = d["hand_id"]
            kind = ActionKind(d["kind"])
            amount = d.get("amount", 0)
        except KeyError as exc:
            raise ProtocolError(ErrorCode.MalformedRequest, f"missing field {exc.args[0]!r}") from None
        except ValueError:
            raise ProtocolError(ErrorCode.MalformedRequest, f"unknown action kind {d.get('kind')!r}") from None
        if kind == ActionKind.PostBlind:
            raise ProtocolError(ErrorCode.MalformedRequest, "blinds are posted by the dealer")
        for key, val in (("hand_id", hand_id), ("amount", amount)):
            if isinstance(val, bool) or not isinstance(val, int) or val < 0:
                raise ProtocolError(ErrorCode.MalformedRequest, f"{key} must be a nonnegative integer")
        return cls(hand_id, kind, amount)


@dataclass
class StateView:
    hand_id: int
    your_name: str
    your_hole: list[Card]
    board: list[Card]
    street: str
    pot_total: int
    to_call: int
    min_raise_to: int
    stacks: dict[str, int]
    statuses: dict[str, str]
    action_history: list[ActionRecord]
    legal: list[LegalAction]
    is_your_turn: bool
    hands_played: int
    button: str = ""
    positions: dict[str, str] = field(default_factory=dict)
    committed: dict[str, int] = field(default_factory=dict)
    actor: str | None = None
    session_over: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["your_hole"] = cards_str(self.your_hole)
        d["board"] = cards_str(self.board)
        d["action_history"] = [r.to_dict() for r in self.action_history]
        d["legal"] = [{"kind": la.kind.value, "min": la.min_amount, "max": la.max_amount} for la in self.legal]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StateView":
        d = dict(d)
        d["your_hole"] = parse_cards(d["your_hole"])
        d["board"] = parse_cards(d["board"])
        d["action_history"] = [ActionRecord.from_dict(r) for r in d["action_history"]]
        d["legal"] = [LegalAction(ActionKind(x["kind"]), x["min"], x["max"]) for x in d["legal"]]
        return cls(**d)

    def legal_kinds(self) -> set[ActionKind]:
        return {la.kind for la in self.legal}

    def option(self, kind: ActionKind) -> LegalAction | None:
        for la in self.legal:
            if la.kind == kind:
                return la
        return None


def make_view(state: TableState, agent: str, hands_played: int, session_over: bool = False) -> StateView:
    """Redacted view: only ``agent``'s own hole cards are included."""
    me = state.player(agent)
    on_turn = state.actor == agent
    legal = player_options(state, me) if on_turn else []
    raise_opt = next((la for la in legal if la.kind in (ActionKind.Bet, ActionKind.Raise)), None)
    if raise_opt is not None:
        min_raise_to = raise_opt.min_amount
    elif state.hand_over:
        min_raise_to = 0
    else:
        min_raise_to = state.current_bet + state.last_raise_inc
    return StateView(
        hand_id=state.hand_id,
        your_name=agent,
        your_hole=list(me.hole),
        board=list(state.board),
        street=state.street.value,
        pot_total=state.pot_total,
        to_call=0 if state.hand_over or me.status != Status.Active else state.to_call(agent),
        min_raise_to=min_raise_to,
        stacks={p.name: p.stack for p in state.players},
        statuses={p.name: p.status.value for p in state.players},
        action_history=list(state.action_log),
        legal=legal,
        is_your_turn=on_turn,
        hands_played=hands_played,
        button=state.players[state.button].name if state.button >= 0 else "",
        positions=state.positions(),
        committed={p.name: p.committed_this_street for p in state.players},
        actor=state.actor,
        session_over=session_over,
    )
