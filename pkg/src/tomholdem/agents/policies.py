"""Scripted agent policies.

Each policy is a pure function of the observation, the agent's memory and a
per-decision seed.  ``ScriptedAdaptive`` stands in for a language-model
agent: it keeps opponent tallies in its memory scratch space, writes notes on
a fixed escalation schedule, and bluffs opponents it believes will fold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path

from ..engine.cards import Card
from ..engine.evaluator import Category, evaluate_best
from ..engine.table import ActionKind, ActionRecord, Status, Street, TableState
from ..metrics.ranking import PreflopRanking, TagChart, build_preflop_ranking
from ..protocol.views import ActionRequest, StateView
from ..rng import SplitMix64
from ..tomcoder.patterns import predicts_fold
from .memory import MemoryFile


class PolicyId(str, Enum):
    TagChart = "TagChart"
    CallingStation = "CallingStation"
    AlwaysFold = "AlwaysFold"
    RandomLegal = "RandomLegal"
    ScriptedAdaptive = "ScriptedAdaptive"


class NoLegalAction(RuntimeError):
    pass


@dataclass
class AgentConfig:
    name: str
    policy: PolicyId
    memory_enabled: bool = False
    skill_enabled: bool = True
    seed: int = 0
    workspace: Path | None = None

    def __post_init__(self):
        self.policy = PolicyId(self.policy)
        if self.policy == PolicyId.ScriptedAdaptive and not self.memory_enabled:
            raise ValueError("ScriptedAdaptive needs memory_enabled")


@lru_cache(maxsize=1)
def default_ranking() -> PreflopRanking:
    return build_preflop_ranking()


@lru_cache(maxsize=1)
def default_chart() -> TagChart:
    return TagChart.default(default_ranking())


# Loose preflop thresholds used when the agent has no strategy guidance.
LOOSE_OPEN = 0.40
LOOSE_DEFEND = 0.60
LOOSE_RERAISE = 0.10
BLUFF_PROBABILITY = 0.75
WEAK_PERCENTILE = 0.5


# -- hand reading ------------------------------------------------------------

def _board_category(board: list[Card]) -> Category:
    if len(board) >= 5:
        return evaluate_best(board).category
    counts = sorted((sum(1 for c in board if c.rank == r) for r in {c.rank for c in board}), reverse=True)
    if not counts:
        return Category.HighCard
    if counts[0] == 4:
        return Category.Quads
    if counts[0] == 3:
        return Category.Trips
    if counts[0] == 2:
        return Category.TwoPair if len(counts) > 1 and counts[1] == 2 else Category.Pair
    return Category.HighCard


def postflop_strength(hole: list[Card], board: list[Card]) -> int:
    """0 = no made hand of our own, 1 = a pair below top pair, 2 = top pair or better."""
    value = evaluate_best(list(hole) + list(board))
    board_cat = _board_category(board)
    if value.category == Category.Pair and board_cat == Category.HighCard:
        return 2 if value.tiebreak[0] >= max(c.rank for c in board) else 1
    if value.category > board_cat and value.category >= Category.TwoPair:
        return 2
    return 0


# -- action helpers ------------------------------------------------------------

def _req(view: StateView, kind: ActionKind, amount: int = 0) -> ActionRequest:
    return ActionRequest(view.hand_id, kind, amount)


def _passive(view: StateView, prefer_call: bool) -> ActionRequest:
    """Check when free; otherwise call or fold."""
    kinds = view.legal_kinds()
    if ActionKind.Check in kinds:
        return _req(view, ActionKind.Check)
    if prefer_call and ActionKind.Call in kinds:
        return _req(view, ActionKind.Call)
    if ActionKind.Fold in kinds:
        return _req(view, ActionKind.Fold)
    return _req(view, view.legal[0].kind)


def _aggressive(view: StateView, target: int) -> ActionRequest | None:
    """Bet or raise to ``target`` clamped to the legal range, if possible."""
    for la in view.legal:
        if la.kind in (ActionKind.Bet, ActionKind.Raise):
            return _req(view, la.kind, min(max(target, la.min_amount), la.max_amount))
    return None


def _preflop_raise_size(view: StateView) -> int:
    return 3 * max(view.committed.values())


def _postflop_size(view: StateView) -> int:
    current = max(view.committed.values())
    if current == 0:
        return max(1, view.pot_total * 2 // 3)
    return 3 * current


def _own_preflop_actions(view: StateView) -> list[ActionRecord]:
    return [
        r for r in view.action_history
        if r.actor == view.your_name and r.street == Street.Preflop and r.kind != ActionKind.PostBlind
    ]


def _raise_or(view: StateView, target: int, fallback_call: bool) -> ActionRequest:
    return _aggressive(view, target) or _passive(view, prefer_call=fallback_call)


# -- policies ----------------------------------------------------------------

def _tag_chart(view: StateView, chart: TagChart) -> ActionRequest:
    ranking = default_ranking()
    cls = ranking.info(view.your_hole).name
    role = view.positions.get(view.your_name, "BTN")
    if view.street == Street.Preflop.value:
        if not _own_preflop_actions(view):
            facing = view.to_call > 0
            presc = chart.prescription(role, cls, facing_raise=facing)
            if presc == "Raise":
                # An all-in call stands in for a raise we cannot make.
                return _raise_or(view, _preflop_raise_size(view), fallback_call=True)
            return _passive(view, prefer_call=False)
        return _passive(view, prefer_call=cls in chart.early_range)
    strong = postflop_strength(view.your_hole, view.board) == 2
    if view.to_call == 0 and strong:
        return _raise_or(view, _postflop_size(view), fallback_call=False)
    return _passive(view, prefer_call=strong)


def _loose(view: StateView) -> ActionRequest:
    pct = default_ranking().info(view.your_hole).percentile
    if view.street == Street.Preflop.value:
        raised = any(r.kind == ActionKind.Raise for r in view.action_history if r.street == Street.Preflop)
        if not _own_preflop_actions(view):
            if pct <= (LOOSE_RERAISE if raised else LOOSE_OPEN):
                return _raise_or(view, _preflop_raise_size(view), fallback_call=True)
            return _passive(view, prefer_call=pct <= (LOOSE_OPEN if raised else LOOSE_DEFEND))
        return _passive(view, prefer_call=pct <= LOOSE_RERAISE * 2)
    strength = postflop_strength(view.your_hole, view.board)
    if view.to_call == 0 and strength >= 1:
        return _raise_or(view, _postflop_size(view), fallback_call=False)
    # weak pairs only call bets up to half the pot
    cheap = 2 * view.to_call <= view.pot_total - view.to_call
    return _passive(view, prefer_call=strength == 2 or (strength == 1 and cheap))


def _random_legal(view: StateView, rng: SplitMix64) -> ActionRequest:
    la = view.legal[rng.below(len(view.legal))]
    if la.kind in (ActionKind.Bet, ActionKind.Raise):
        hi = min(la.max_amount, la.min_amount + view.pot_total)
        return _req(view, la.kind, la.min_amount + rng.below(hi - la.min_amount + 1))
    if la.kind == ActionKind.Call:
        return _req(view, la.kind, 0)
    return _req(view, la.kind)


def fold_labeled(memory: MemoryFile | None) -> set[str]:
    """Opponents the agent has a fold-prediction note about."""
    if memory is None:
        return set()
    return {name for name, notes in memory.opponents.items() if any(predicts_fold(n.text) for n in notes)}


def is_weak(view: StateView) -> bool:
    if view.street == Street.Preflop.value:
        return default_ranking().info(view.your_hole).percentile > WEAK_PERCENTILE
    return postflop_strength(view.your_hole, view.board) == 0


def live_opponents(view: StateView) -> list[str]:
    return [
        n for n, s in view.statuses.items()
        if n != view.your_name and s in (Status.Active.value, Status.AllIn.value)
    ]


def _adaptive(view: StateView, memory: MemoryFile | None, rng: SplitMix64, skill: bool) -> ActionRequest:
    targets = fold_labeled(memory) & {
        n for n in live_opponents(view) if view.statuses[n] == Status.Active.value
    }
    already = any(
        r.actor == view.your_name and r.street.value == view.street and r.kind in (ActionKind.Bet, ActionKind.Raise)
        for r in view.action_history
    )
    # One bluff per street: re-bluffing into a re-raise is how stacks evaporate.
    if targets and not already and is_weak(view) and rng.random() < BLUFF_PROBABILITY:
        size = _preflop_raise_size(view) if view.street == Street.Preflop.value else _postflop_size(view)
        bluff = _aggressive(view, size)
        if bluff is not None:
            return bluff
    return _tag_chart(view, default_chart()) if skill else _loose(view)


def decide(
    policy: PolicyId | str,
    view: StateView,
    memory: MemoryFile | None = None,
    seed: int = 0,
    *,
    skill: bool = True,
    chart: TagChart | None = None,
) -> ActionRequest:
    """Choose a legal action for the agent whose turn it is in ``view``."""
    if not view.is_your_turn or not view.legal:
        raise NoLegalAction(f"{view.your_name} has no decision in hand {view.hand_id}")
    policy = PolicyId(policy)
    rng = SplitMix64(seed)
    if policy == PolicyId.AlwaysFold:
        return _passive(view, prefer_call=False)
    if policy == PolicyId.CallingStation:
        return _passive(view, prefer_call=True)
    if policy == PolicyId.RandomLegal:
        return _random_legal(view, rng)
    if policy == PolicyId.TagChart:
        return _tag_chart(view, chart or default_chart())
    return _adaptive(view, memory, rng, skill)


# -- hand summaries and memory updates -------------------------------------------

@dataclass
class HandSummary:
    """What every seated player could observe about a finished hand."""

    hand_id: int
    dealt: list[str]
    positions: dict[str, str]
    actions: list[ActionRecord]
    board: list[Card]
    shown: dict[str, list[Card]] = field(default_factory=dict)
    payouts: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_state(cls, state: TableState) -> "HandSummary":
        dealt = [p.name for p in state.players if p.hole]
        shown = {}
        if state.went_to_showdown:
            # all-in losers are already marked Eliminated, so test for Folded
            shown = {p.name: list(p.hole) for p in state.players if p.hole and p.status != Status.Folded}
        return cls(state.hand_id, dealt, state.positions(), list(state.action_log), list(state.board), shown,
                   dict(state.payouts))


_TALLY_KEYS = ("hands", "vpip", "pfr", "aggr", "calls", "faced", "folded")


def tally_hand(summary: HandSummary) -> dict[str, dict[str, int]]:
    """Per-player counts for one hand (see ``_TALLY_KEYS``).

    ``faced`` counts decisions against a voluntary bet or raise on the same
    street (the blinds alone do not count) and ``folded`` those that folded.
    """
    out = {name: dict.fromkeys(_TALLY_KEYS, 0) for name in summary.dealt}
    street_aggr: dict[Street, bool] = {}
    for name in summary.dealt:
        out[name]["hands"] = 1
    for r in summary.actions:
        if r.kind == ActionKind.PostBlind or r.actor not in out:
            continue
        t = out[r.actor]
        if r.street == Street.Preflop and r.kind in (ActionKind.Call, ActionKind.Bet, ActionKind.Raise):
            t["vpip"] = 1
        if r.street == Street.Preflop and r.kind == ActionKind.Raise:
            t["pfr"] = 1
        if r.kind in (ActionKind.Bet, ActionKind.Raise):
            t["aggr"] += 1
        elif r.kind == ActionKind.Call:
            t["calls"] += 1
        if r.to_call_before > 0 and street_aggr.get(r.street):
            t["faced"] += 1
            t["folded"] += r.kind == ActionKind.Fold
        if r.kind in (ActionKind.Bet, ActionKind.Raise):
            street_aggr[r.street] = True
    return out


def _read_scratch(memory: MemoryFile) -> tuple[dict, dict, dict]:
    """(tallies, kinds of note written, latest trait texts) per player."""
    if not memory.scratch:
        return {}, {}, {}
    doc = json.loads(memory.scratch)
    return doc.get("tallies", {}), doc.get("written", {}), doc.get("traits", {})


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


REFERENCE_VPIP = 0.30


def table_vpip(tallies: dict[str, dict[str, int]]) -> float:
    """Mean VPIP over every player tallied so far, the note writer included."""
    rates = [_ratio(t["vpip"], t["hands"]) for t in tallies.values() if t["hands"]]
    return sum(rates) / len(rates) if rates else REFERENCE_VPIP


def _looseness_note(name: str, t: dict[str, int], reference: float = REFERENCE_VPIP) -> str:
    vpip = _ratio(t["vpip"], t["hands"])
    trait = "loose" if vpip > reference else "tight"
    dev = abs(vpip - reference)
    if dev < 0.05:
        return f"{name} is a {trait} player"
    if dev < 0.12:
        return f"{name} is a very {trait} player"
    consequence = "don't pay off their big bets" if trait == "tight" else "value bet them relentlessly"
    return f"{name} is extremely {trait}, {consequence}"


def _aggression_note(name: str, t: dict[str, int]) -> str | None:
    if t["aggr"] + t["calls"] < 5:
        return None
    if t["calls"] == 0 or t["aggr"] / t["calls"] > 3:
        return f"{name} is an aggressive player"
    if t["aggr"] < t["calls"]:
        return f"{name} is a passive player"
    return None


def _folds_a_lot(t: dict[str, int]) -> bool:
    return t["faced"] >= 3 and _ratio(t["folded"], t["faced"]) > 0.6


# Hands from which each kind of note may be written.
FOLD_LABEL_FROM = 5
TRAIT_FROM = 6
CONDITIONAL_FROM = 8
PLAN_FROM = 10
RECURSIVE_FROM = 14
# Trait notes are re-derived this often and rewritten when the read changed.
TRAIT_REVIEW_EVERY = 20


def update_memory(memory: MemoryFile, summary: HandSummary, policy: PolicyId | str) -> MemoryFile:
    """Fold one finished hand into ``memory`` and return the new memory.

    Only ``ScriptedAdaptive`` writes notes; every policy advances
    ``hands_seen``.
    """
    new = memory.copy()
    new.hands_seen = max(new.hands_seen, summary.hand_id)
    if PolicyId(policy) != PolicyId.ScriptedAdaptive:
        return new
    tallies, written, traits = _read_scratch(new)
    for name, t in tally_hand(summary).items():
        acc = tallies.setdefault(name, dict.fromkeys(_TALLY_KEYS, 0))
        for k in _TALLY_KEYS:
            acc[k] += t[k]

    h = summary.hand_id
    reference = table_vpip(tallies)
    review = h > TRAIT_FROM and (h - TRAIT_FROM) % TRAIT_REVIEW_EVERY == 0
    for name in sorted(tallies):
        if name == new.agent:
            continue
        t = tallies[name]
        latest = traits.setdefault(name, {})
        done = written.setdefault(name, [])

        def write(kind: str, text: str) -> None:
            new.add_note(name, h, text)
            done.append(kind)

        if h >= FOLD_LABEL_FROM and "fold" not in done and _folds_a_lot(t):
            write("fold", f"{name} folds to aggression")
        labeled = "fold" in done
        if h >= TRAIT_FROM and ("trait" not in done or review):
            if "trait" not in done:
                done.append("trait")
            for kind, text in (("looseness", _looseness_note(name, t, reference)),
                               ("aggression", _aggression_note(name, t))):
                if text and latest.get(kind) != text:
                    new.add_note(name, h, text)
                    latest[kind] = text
        if h >= CONDITIONAL_FROM and "read" not in done:
            if labeled:
                text = f"when {name} faces a raise, they usually fold"
            elif t["aggr"] > t["calls"]:
                text = f"when {name} checks the turn after betting the flop, they're likely weak"
            else:
                text = f"if {name} raises preflop, they probably have a strong hand"
            write("read", text)
        if h >= PLAN_FROM and "plan" not in done:
            if labeled:
                text = f"I should raise wide against {name} because they fold to aggression"
            elif _ratio(t["vpip"], t["hands"]) > REFERENCE_VPIP:
                text = f"I'll value bet thinner against {name} since they call too often"
            else:
                text = f"I should tighten up against {name} since they only play strong hands"
            write("plan", text)
        if h >= RECURSIVE_FROM and "image" not in done:
            if labeled:
                text = f"{name} knows I'm tight so my bluffs will get through"
            else:
                text = f"{name} has adapted to my 3-bets so I need to flat more"
            write("image", text)
    new.scratch = json.dumps({"tallies": tallies, "written": written, "traits": traits}, sort_keys=True)
    return new
