"""Per-player poker statistics and chart adherence from session logs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..engine.cards import hand_class, parse_cards
from ..engine.table import ActionKind, ActionRecord, Street
from .ranking import TagChart

AF_UNDEFINED = math.inf  # aggression factor when a player never called


class NoPreflopDecisions(ValueError):
    pass


@dataclass
class PlayerStats:
    vpip: float
    pfr: float
    af: float
    tag_adherence: float | None
    chip_delta: int
    hands: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


VOLUNTARY = (ActionKind.Call, ActionKind.Bet, ActionKind.Raise)
AGGRESSIVE = (ActionKind.Bet, ActionKind.Raise)


def _dealt_hands(log, agent):
    return [h for h in log.hands if agent in h.hole_cards]


def first_preflop_decision(hist, agent) -> ActionRecord | None:
    for r in hist.action_log:
        if r.actor == agent and r.street == Street.Preflop and r.kind != ActionKind.PostBlind:
            return r
    return None


def compute_player_stats(log, agent: str, chart: TagChart | None = None) -> PlayerStats:
    hands = _dealt_hands(log, agent)
    vpip = pfr = aggr = calls = 0
    for h in hands:
        pre = [r for r in h.action_log if r.actor == agent and r.street == Street.Preflop]
        vpip += any(r.kind in VOLUNTARY for r in pre)
        pfr += any(r.kind in AGGRESSIVE for r in pre)
        for r in h.action_log:
            if r.actor == agent:
                aggr += r.kind in AGGRESSIVE
                calls += r.kind == ActionKind.Call
    n = len(hands)
    try:
        adherence = tag_adherence(log, chart, agent) if chart is not None else None
    except NoPreflopDecisions:
        adherence = None
    return PlayerStats(
        vpip=vpip / n if n else 0.0,
        pfr=pfr / n if n else 0.0,
        af=aggr / calls if calls else AF_UNDEFINED,
        tag_adherence=adherence,
        chip_delta=log.final_stacks[agent] - log.starting_stack,
        hands=n,
    )


def chart_match(prescription: str, rec: ActionRecord) -> bool:
    """Whether a first preflop action follows the chart's prescription.

    A call counts as the prescribed raise when raising was not possible
    (all-in for less), and a check counts as the prescribed fold when there
    was nothing to call.
    """
    if prescription == "Raise":
        return rec.kind in AGGRESSIVE or (rec.kind == ActionKind.Call and not rec.could_raise)
    if prescription == "Fold":
        return rec.kind == ActionKind.Fold or (rec.kind == ActionKind.Check and rec.to_call_before == 0)
    return rec.kind == ActionKind.Check


def tag_adherence(log, chart: TagChart, agent: str) -> float:
    """Share of the agent's first preflop decisions that follow the chart."""
    matches = decisions = 0
    for h in _dealt_hands(log, agent):
        rec = first_preflop_decision(h, agent)
        if rec is None:
            continue
        role = h.positions.get(agent, "BTN")
        cls = hand_class(parse_cards(h.hole_cards[agent]))
        presc = chart.prescription(role, cls, facing_raise=rec.to_call_before > 0)
        decisions += 1
        matches += chart_match(presc, rec)
    if not decisions:
        raise NoPreflopDecisions(f"{agent} made no preflop decisions in {log.session_id}")
    return matches / decisions


def chip_spread(log) -> int:
    stacks = list(log.final_stacks.values())
    return max(stacks) - min(stacks)
