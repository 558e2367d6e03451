import math
import random

import numpy as np
import pytest
from oracles import best_of_seven_numpy

from tomholdem.agents import MemoryFile
from tomholdem.agents.policies import default_chart
from tomholdem.engine import ActionKind, Street
from tomholdem.engine.cards import cards_str, parse_cards
from tomholdem.engine.table import ActionRecord
from tomholdem.experiment import Condition, ExperimentConfig, HandHistory, MemorySnapshot, SessionLog, Termination
from tomholdem.experiment import run_session
from tomholdem.agents import PolicyId
from tomholdem.metrics import (
    AF_UNDEFINED,
    BLUFF_THRESHOLD,
    InsufficientData,
    NoLabeledPairs,
    NoPreflopDecisions,
    SnapshotAfterHand,
    TagChart,
    UnmappableLabel,
    adaptation_score,
    before_after_shift,
    build_preflop_ranking,
    chart_match,
    chip_spread,
    classify_deception,
    compute_player_stats,
    equity_vs_random,
    label_accuracy,
    label_intensity,
    map_label,
    null_simulations,
    tag_adherence,
    tier_rates,
)
from tomholdem.metrics.deception import equity_at
from tomholdem.metrics.equity import _equity_direct
from tomholdem.metrics.validation import ScoredLabel, agent_adaptation, intensity_correlation
from tomholdem.rng import SplitMix64

NAMES = ["Doyle", "Stu", "Vanessa"]


# -- synthetic logs --------------------------------------------------------------------


def rec(hand_id, street, actor, kind, amount=0, pot=150, to_call=0, raise_to=0):
    return ActionRecord(hand_id, street, actor, kind, amount, pot, to_call, raise_to, False,
                        kind in (ActionKind.Bet, ActionKind.Raise))


def hand(hand_id, holes, board, actions, positions=None):
    return HandHistory(
        hand_id=hand_id, seed=0, button=0, stacks_before={n: 10_000 for n in NAMES},
        hole_cards={n: cards_str(parse_cards(h)) for n, h in holes.items()}, board=cards_str(parse_cards(board)),
        action_log=actions, payouts={}, stacks_after={n: 10_000 for n in NAMES},
        positions=positions or {"Doyle": "BTN", "Stu": "SB", "Vanessa": "BB"},
    )


def session(hands, final=None, sid="Full-0", condition=Condition.Full):
    return SessionLog(sid, condition, 0, hands, final or {n: 10_000 for n in NAMES}, Termination.Completed,
                      agents=[{"name": n, "policy": "ScriptedAdaptive", "memory": True, "skill": True} for n in NAMES])


def snapshot(agent, hand_id, notes, sid="Full-0"):
    mem = MemoryFile(agent, hand_id)
    for opp, h, text in notes:
        mem.add_note(opp, h, text)
    return MemorySnapshot(sid, hand_id, agent, mem)


HOLES = {"Doyle": "9h 6s", "Stu": "2c 2d", "Vanessa": "Jc Td"}


def bluff_hand(hand_id=3):
    """Doyle raises preflop, then bets a missed A-K-Q flop with 9-6 offsuit."""
    pf = Street.Preflop
    actions = [
        rec(hand_id, pf, "Stu", ActionKind.PostBlind, 50),
        rec(hand_id, pf, "Vanessa", ActionKind.PostBlind, 100),
        rec(hand_id, Street.Flop, "Stu", ActionKind.Check, pot=300),
        rec(hand_id, Street.Flop, "Vanessa", ActionKind.Check, pot=300),
        rec(hand_id, Street.Flop, "Doyle", ActionKind.Bet, 200, pot=300, raise_to=200),
        rec(hand_id, Street.Flop, "Stu", ActionKind.Fold, pot=500, to_call=200),
        rec(hand_id, Street.Flop, "Vanessa", ActionKind.Fold, pot=500, to_call=200),
    ]
    return hand(hand_id, HOLES, "Ac Kd Qs", actions)


# -- equity and ranking ------------------------------------------------------------------


def oracle_equity(hole, board):
    """Exact equity by full enumeration with the numpy hand oracle (turn and river only)."""
    used = {c.index for c in hole + board}
    rest = [c for c in range(52) if c not in used]
    rows_h, rows_o = [], []
    runouts = [()] if len(board) == 5 else [(c,) for c in rest]
    for run in runouts:
        b = [c.index for c in board] + list(run)
        left = [c for c in rest if c not in run]
        for i in range(len(left)):
            for j in range(i + 1, len(left)):
                rows_h.append([hole[0].index, hole[1].index] + b)
                rows_o.append([left[i], left[j]] + b)
    hs = best_of_seven_numpy(np.array(rows_h))
    os_ = best_of_seven_numpy(np.array(rows_o))
    return float(((hs > os_) + 0.5 * (hs == os_)).mean())


@pytest.mark.parametrize("hole,board", [
    ("9h 6s", "Ac Kd Qs 2h 3c"),
    ("As Ad", "Kc Kd 7s 2h 9c"),
    ("9h 6s", "Ac Kd Qs 2h"),
    ("Th Jh", "2h 5h Kc 9d"),
])
def test_fast_equity_matches_numpy_enumeration(hole, board):
    h, b = parse_cards(hole), parse_cards(board)
    assert equity_vs_random(h, b) == pytest.approx(oracle_equity(h, b), abs=1e-12)


def test_fast_equity_matches_direct_enumeration_on_flops():
    rng = SplitMix64(31)
    for _ in range(6):
        deck = list(range(52))
        rng.shuffle(deck)
        hero = np.array(deck[:2], dtype=np.int64)
        board = np.zeros(5, dtype=np.int64)
        board[:3] = deck[2:5]
        win2, total = _equity_direct(hero, board, 3)
        from tomholdem.engine.cards import Card

        fast = equity_vs_random([Card.from_index(int(c)) for c in hero], [Card.from_index(int(c)) for c in deck[2:5]])
        assert fast == pytest.approx(win2 / total, abs=1e-12)


def test_preflop_ranking_shape():
    r = build_preflop_ranking()
    assert len(r.classes) == 169
    assert r.total_weight == 1326
    assert r.rank("AA") == 1
    assert r.rank("32o") >= 165
    pct = [c.percentile for c in r.classes]
    assert all(a < b for a, b in zip(pct, pct[1:])) and pct[-1] == pytest.approx(1.0)
    eq = [c.equity for c in r.classes]
    assert eq == sorted(eq, reverse=True)


def test_preflop_aces_equity_by_sampling_oracle():
    # about 85.2% against a random hand; a 40k-deal Monte Carlo with the numpy oracle
    rng = random.Random(5)
    hole = [c.index for c in parse_cards("As Ad")]
    rest = [c for c in range(52) if c not in hole]
    rows_h, rows_o = [], []
    for _ in range(40_000):
        s = rng.sample(rest, 7)
        rows_h.append(hole + s[2:])
        rows_o.append(s[:2] + s[2:])
    hs, os_ = best_of_seven_numpy(np.array(rows_h)), best_of_seven_numpy(np.array(rows_o))
    mc = float(((hs > os_) + 0.5 * (hs == os_)).mean())
    assert build_preflop_ranking()["AA"].equity == pytest.approx(mc, abs=0.01)


def test_chart_ranges():
    chart = TagChart.default()
    assert chart.early_range < chart.late_range
    assert "AA" in chart.early_range and "72o" not in chart.late_range
    assert chart.prescription("BTN", "72o", facing_raise=False) == "Fold"
    assert chart.prescription("BB", "72o", facing_raise=False) == "Check"
    assert chart.prescription("BB", "AA", facing_raise=True) == "Raise"


def test_bluff_threshold_examples():
    assert equity_at(parse_cards("9h 6s"), parse_cards("Ac Kd Qs")) < BLUFF_THRESHOLD
    assert equity_at(parse_cards("Ah 6s"), parse_cards("Ac Kd 7s")) > BLUFF_THRESHOLD  # top pair
    assert equity_at(parse_cards("As Ad"), []) > BLUFF_THRESHOLD


# -- player statistics ------------------------------------------------------------------


def test_aggression_factor_definition():
    actions = []
    for i in range(10):
        actions.append(rec(1, Street.Flop, "Doyle", ActionKind.Bet, 100, raise_to=100))
    for i in range(5):
        actions.append(rec(1, Street.Turn, "Doyle", ActionKind.Call, 100, to_call=100))
    log = session([hand(1, HOLES, "Ac Kd Qs 2h 3c", actions)])
    assert compute_player_stats(log, "Doyle").af == 2.0
    assert compute_player_stats(log, "Stu").af == AF_UNDEFINED


def test_always_fold_player_stats(tmp_path):
    cfg = ExperimentConfig(Condition.NoMemory, output_dir=tmp_path, hands_per_session=30,
                           policies=(PolicyId.AlwaysFold, PolicyId.CallingStation, PolicyId.TagChart))
    log = run_session(cfg, 0)
    folder = compute_player_stats(log, log.names[0])
    assert folder.vpip == 0 and folder.pfr == 0
    station = compute_player_stats(log, log.names[1])
    assert station.pfr == 0 and station.vpip > 0
    assert tag_adherence(log, default_chart(), log.names[2]) == 1.0


def test_pfr_never_exceeds_vpip(loaded_run):
    for log, _ in loaded_run:
        for name in log.names:
            s = compute_player_stats(log, name)
            assert 0 <= s.pfr <= s.vpip <= 1


def test_tag_chart_agents_adhere_exactly(loaded_run):
    chart = default_chart()
    n = 0
    for log, _ in loaded_run:
        for a in log.agents:
            if a["policy"] == "TagChart":
                assert tag_adherence(log, chart, a["name"]) == 1.0
                n += 1
    assert n >= 15


def test_raise_everything_adherence_equals_range_share():
    chart = TagChart.default()
    ranking = build_preflop_ranking()
    rng = random.Random(1)
    hands = []
    from tomholdem.engine.cards import full_deck

    cards = [str(c) for c in full_deck()]
    for i in range(4000):
        pick = rng.sample(cards, 2)
        actions = [rec(i + 1, Street.Preflop, "Doyle", ActionKind.Raise, 300, to_call=100, raise_to=300)]
        hands.append(hand(i + 1, {"Doyle": " ".join(pick), "Stu": "", "Vanessa": ""}, "", actions))
    log = session(hands)
    share = sum(c.weight for c in ranking.classes if c.name in chart.late_range) / 1326
    assert tag_adherence(log, chart, "Doyle") == pytest.approx(share, abs=0.02)
    assert share == pytest.approx(0.25, abs=0.02)


def test_seventy_two_offsuit_raise_is_a_deviation():
    r = rec(1, Street.Preflop, "Doyle", ActionKind.Raise, 300, to_call=100, raise_to=300)
    presc = TagChart.default().prescription("BTN", "72o", facing_raise=False)
    assert presc == "Fold" and not chart_match(presc, r)


def test_no_preflop_decisions():
    log = session([hand(1, HOLES, "", [rec(1, Street.Preflop, "Stu", ActionKind.PostBlind, 50)])])
    with pytest.raises(NoPreflopDecisions):
        tag_adherence(log, TagChart.default(), "Doyle")


@pytest.mark.parametrize("stacks,spread", [
    ((10_000, 10_000, 10_000), 0), ((30_000, 0, 0), 30_000), ((18_000, 7_000, 5_000), 13_000)])
def test_chip_spread(stacks, spread):
    assert chip_spread(session([], dict(zip(NAMES, stacks)))) == spread


# -- deception ---------------------------------------------------------------------------


def test_nine_six_bluff_after_fold_note_is_tier_two():
    log = session([bluff_hand(3)])
    snaps = [snapshot("Doyle", 2, [("Stu", 2, "Stu folds to aggression")])]
    events = classify_deception(log, snaps)
    assert [(e.tier, e.target, e.hand_class) for e in events] == [(2, "Stu", "96o")]
    assert events[0].cited_note == "Stu folds to aggression" and events[0].note_hand == 2


def test_same_bluff_without_notes_is_tier_one():
    events = classify_deception(session([bluff_hand(3)]), [])
    assert [(e.tier, e.target) for e in events] == [(1, None)]


def test_aces_raise_is_not_a_bluff():
    actions = [rec(1, Street.Preflop, "Doyle", ActionKind.Raise, 300, to_call=100, raise_to=300)]
    log = session([hand(1, {**HOLES, "Doyle": "As Ad"}, "", actions)])
    assert classify_deception(log, []) == []


def test_notes_written_later_do_not_count():
    log = session([bluff_hand(3)])
    later = [snapshot("Doyle", 3, [("Stu", 3, "Stu folds to aggression")]),
             snapshot("Doyle", 9, [("Stu", 3, "Stu folds to aggression")])]
    assert [e.tier for e in classify_deception(log, later)] == [1]


def test_snapshot_with_future_note_is_rejected():
    bad = [snapshot("Doyle", 2, [("Stu", 4, "Stu folds to aggression")])]
    with pytest.raises(SnapshotAfterHand):
        classify_deception(session([bluff_hand(3)]), bad)


def test_fold_note_about_a_folded_player_does_not_count():
    # Vanessa folded preflop here, so a note about her cannot justify the flop bluff.
    h = bluff_hand(3)
    h.action_log.insert(2, rec(3, Street.Preflop, "Vanessa", ActionKind.Fold, to_call=0))
    h.action_log = [r for r in h.action_log if not (r.actor == "Vanessa" and r.street == Street.Flop)]
    snaps = [snapshot("Doyle", 2, [("Vanessa", 2, "Vanessa folds to aggression")])]
    assert [e.tier for e in classify_deception(session([h]), snaps)] == [1]


def test_memoryless_runs_have_no_tier_two(loaded_run):
    for log, snaps in loaded_run:
        if not log.condition.memory:
            assert tier_rates(classify_deception(log, snaps), len(log.hands))[2] == 0.0


def test_deception_ignores_snapshot_order(loaded_run):
    log, snaps = next((lg, s) for lg, s in loaded_run if lg.session_id == "Full-0")
    shuffled = list(snaps)
    random.Random(3).shuffle(shuffled)
    assert classify_deception(log, snaps) == classify_deception(log, shuffled)


def test_deception_ignores_notes_from_the_future(loaded_run):
    log, snaps = next((lg, s) for lg, s in loaded_run if lg.session_id == "Full-1")
    cut = 40
    early_log = session(log.hands[:cut], sid=log.session_id)
    baseline = classify_deception(early_log, snaps)
    assert baseline == classify_deception(early_log, [s for s in snaps if s.hand_id < cut])


def test_tier_rates_count_hands_once():
    log = session([bluff_hand(3)])
    events = classify_deception(log, [])
    assert tier_rates(events + events, 10) == {1: 0.1, 2: 0.0}


# -- validation ------------------------------------------------------------------------


def test_adaptation_identical_groups_is_zero(loaded_run):
    logs = [lg for lg, _ in loaded_run if lg.condition == Condition.Full]
    r = adaptation_score(logs, logs, resamples=200)
    assert r.d == 0.0


def test_adaptation_needs_two_sessions(loaded_run):
    logs = [lg for lg, _ in loaded_run]
    with pytest.raises(InsufficientData):
        adaptation_score(logs[:1], logs)


def test_agent_with_equal_rates_scores_zero():
    hands = [hand(i, HOLES, "", [rec(i, Street.Preflop, "Doyle", ActionKind.Raise, 300, to_call=100, raise_to=300)])
             for i in range(1, 5)]
    assert agent_adaptation(session(hands), "Doyle") == 0.0


def test_adaptive_agents_adapt_more(loaded_run):
    mem = [lg for lg, _ in loaded_run if lg.condition.memory]
    ctl = [lg for lg, _ in loaded_run if not lg.condition.memory]
    assert adaptation_score(mem, ctl, resamples=500).d > 0


def test_shift_requires_labeled_pairs(loaded_run):
    logs = [lg for lg, _ in loaded_run]
    with pytest.raises(NoLabeledPairs):
        before_after_shift(logs, [], logs)


def test_identical_behaviour_has_zero_shift():
    # the same raise every hand: no metric changes across any split
    hands = [hand(i, HOLES, "", [rec(i, Street.Preflop, "Doyle", ActionKind.Raise, 300, pot=150, to_call=100,
                                     raise_to=300)]) for i in range(1, 31)]
    log = session(hands)
    from tomholdem.tomcoder import CodedSnapshot, TomLevel

    coded = [CodedSnapshot("Full-0", 10, "Doyle", {"Stu": TomLevel.Behavioral}, TomLevel.Behavioral)]
    r = before_after_shift([log], coded, [])
    assert r.composite_memory == 0.0


@pytest.mark.parametrize("text,level", [
    ("Stu is a tight player", 1),
    ("Stu is a very tight player", 2),
    ("Stu is extremely tight, don't pay off their big bets", 3),
    ("Vanessa is a calling station, never bluff her", 3),
])
def test_label_intensity(text, level):
    assert label_intensity(text) == level


def test_trait_map():
    assert map_label("Stu folds to aggression").metric == "fold_to_raise"
    assert map_label("Stu is a calling station").direction == "below"
    assert map_label("Vanessa is a maniac").metric == "af"
    with pytest.raises(UnmappableLabel):
        map_label("Stu tilts")


def _label(dev, intensity, metric="vpip", direction="above"):
    return ScoredLabel("s", "a", "t", "loose", metric, direction, intensity, dev,
                       dev > 0 if direction == "above" else dev < 0)


def test_constant_intensity_correlation_is_undefined():
    rho, note = intensity_correlation([_label(0.1 * i, 2) for i in range(1, 8)])
    assert rho is None and "undefined" in note


def test_aggressive_label_on_max_af_opponent_is_correct():
    labels = [_label(0.5, 1, metric="af")]
    assert labels[0].correct


def test_label_accuracy_needs_ten_labels(loaded_run):
    logs = [lg for lg, _ in loaded_run if lg.condition.memory]
    snaps = [s for _, ss in loaded_run for s in ss]
    with pytest.raises(InsufficientData):
        label_accuracy(logs, snaps, min_labels=10_000)


def test_null_simulations_sit_at_chance():
    rng = np.random.default_rng(0)
    mem, ctl = list(rng.normal(size=30)), list(rng.normal(size=30))
    scored = [_label(float(d), int(i)) for d, i in zip(rng.normal(size=60), rng.integers(1, 4, size=60))]
    nulls = null_simulations(mem, ctl, scored, permutations=1000)
    assert abs(nulls.mean_d) < 0.15
    assert abs(nulls.mean_accuracy - 0.5) < 0.05
    assert abs(nulls.mean_rho) < 0.1
    assert math.isfinite(nulls.mean_rho)
