"""A single table session that agents drive through get_state / submit_action."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from ..engine.table import (
    Action,
    ActionKind,
    FewerThanTwoPlayers,
    IllegalAction,
    NotActorsTurn,
    TableState,
    apply_action,
    deal_hand,
    new_table,
)
from ..rng import derive_seed
from .views import ActionRequest, ErrorCode, ProtocolError, StateView, make_view

DEFAULT_PORT = 3000
DEFAULT_AGENTS = ("Doyle", "Stu", "Vanessa")


class DuplicateAgentName(ValueError):
    pass


@dataclass
class SessionConfig:
    agents: list[str] = field(default_factory=lambda: list(DEFAULT_AGENTS))
    session_seed: int = 0
    hands: int = 100
    starting_stack: int = 10_000
    small_blind: int = 50
    big_blind: int = 100
    timeout_secs: float | None = 30.0
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT

    def __post_init__(self):
        if len(set(self.agents)) != len(self.agents):
            dupes = sorted({a for a in self.agents if self.agents.count(a) > 1})
            raise DuplicateAgentName(f"agent names registered twice: {dupes}")
        if len(self.agents) < 2:
            raise ValueError("need at least two agents")


def hand_seed(session_seed: int, hand_id: int) -> int:
    return derive_seed(session_seed, hand_id)


class GameSession:
    """Authoritative table plus turn bookkeeping.

    Every call takes the session lock, so concurrent callers are serialized
    and a rejected request never changes state.  ``on_hand_complete`` hooks
    receive the final :class:`TableState` of each finished hand.
    """

    def __init__(self, config: SessionConfig, clock: Callable[[], float] = time.monotonic):
        self.config = config
        self.clock = clock
        self._lock = threading.RLock()
        self.state: TableState = new_table(
            config.agents, config.starting_stack, config.small_blind, config.big_blind
        )
        self.hands_played = 0
        self.over = False
        self.on_hand_complete: list[Callable[[TableState], None]] = []
        self.turn_started = clock()
        self.timeouts = 0
        self._started = False

    # -- lifecycle -------------------------------------------------------

    def start(self) -> None:
        with self._lock:
            if not self._started:
                self._started = True
                self._next_hand()

    def _next_hand(self) -> None:
        if self.hands_played >= self.config.hands:
            self.over = True
            return
        try:
            self.state = deal_hand(self.state, hand_seed(self.config.session_seed, self.state.hand_id + 1))
        except FewerThanTwoPlayers:
            self.over = True
            return
        self.turn_started = self.clock()
        if self.state.hand_over:  # everyone all-in from the blinds
            self._hand_done()

    def _hand_done(self) -> None:
        self.hands_played += 1
        finished = self.state
        for hook in self.on_hand_complete:
            hook(finished)
        self._next_hand()

    # -- tools -----------------------------------------------------------

    def check_agent(self, agent) -> None:
        if not isinstance(agent, str) or agent not in self.config.agents:
            raise ProtocolError(ErrorCode.UnknownAgent, f"{agent!r} is not registered")

    def get_state(self, agent: str) -> StateView:
        with self._lock:
            self.check_agent(agent)
            self.tick()
            return make_view(self.state, agent, self.hands_played, self.over)

    def submit_action(self, agent: str, req: ActionRequest) -> StateView:
        with self._lock:
            self.check_agent(agent)
            self.tick()
            if self.over:
                raise ProtocolError(ErrorCode.StaleHand, "session is over")
            if req.hand_id != self.state.hand_id:
                raise ProtocolError(
                    ErrorCode.StaleHand, f"hand {req.hand_id} is not the current hand {self.state.hand_id}"
                )
            try:
                self.state = apply_action(self.state, agent, Action(req.kind, req.amount))
            except NotActorsTurn as exc:
                raise ProtocolError(ErrorCode.NotYourTurn, str(exc)) from None
            except IllegalAction as exc:
                raise ProtocolError(ErrorCode.IllegalAction, str(exc)) from None
            self.turn_started = self.clock()
            if self.state.hand_over:
                self._hand_done()
            return make_view(self.state, agent, self.hands_played, self.over)

    def tick(self) -> bool:
        """Auto-act for an actor whose turn has outlasted the timeout.

        Folds when facing a bet, checks otherwise.  Returns True if it acted.
        """
        with self._lock:
            limit = self.config.timeout_secs
            actor = self.state.actor
            if not limit or actor is None or self.over:
                return False
            if self.clock() - self.turn_started < limit:
                return False
            kind = ActionKind.Fold if self.state.to_call(actor) > 0 else ActionKind.Check
            self.state = apply_action(self.state, actor, Action(kind))
            self.timeouts += 1
            self.turn_started = self.clock()
            if self.state.hand_over:
                self._hand_done()
            return True
