"""Three-handed no-limit hold'em engine."""

from .cards import Card, full_deck, hand_class, parse_card, parse_cards
from .evaluator import Category, DuplicateCard, HandValue, evaluate_best, evaluate_five, evaluate_seven
from .table import (
    Action,
    ActionKind,
    ActionRecord,
    EngineError,
    FewerThanTwoPlayers,
    HandNotComplete,
    IllegalAction,
    LegalAction,
    NotActorsTurn,
    PlayerSeat,
    Pot,
    Status,
    Street,
    TableState,
    apply_action,
    compute_pots,
    deal_hand,
    legal_actions,
    new_table,
    settle_showdown,
)
