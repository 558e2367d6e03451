"""Reading run directories back, and replaying hands through the engine."""

from __future__ import annotations

import json
from pathlib import Path

from ..engine.table import Action, ActionKind, PlayerSeat, Status, TableState, apply_action, deal_hand
from .runner import Condition, HandHistory, MemorySnapshot, SessionLog, Termination


class MissingLog(FileNotFoundError):
    pass


class ReplayMismatch(AssertionError):
    pass


def session_dirs(run_dir: Path | str) -> list[Path]:
    """Session directories of a run, or ``run_dir`` itself if it is one."""
    root = Path(run_dir)
    if (root / "session.json").exists() or (root / "log.jsonl").exists():
        return [root]
    sessions = root / "sessions"
    if not sessions.is_dir():
        return []
    return sorted(p for p in sessions.iterdir() if p.is_dir())


def load_session(sdir: Path | str) -> SessionLog:
    sdir = Path(sdir)
    meta_path, log_path = sdir / "session.json", sdir / "log.jsonl"
    if not meta_path.exists() or not log_path.exists():
        raise MissingLog(f"{sdir} lacks session.json or log.jsonl")
    meta = json.loads(meta_path.read_text())
    hands = [HandHistory.from_dict(json.loads(line)) for line in log_path.read_text().splitlines() if line]
    return SessionLog(
        session_id=meta["session_id"],
        condition=Condition(meta["condition"]),
        seed=meta["seed"],
        hands=hands,
        final_stacks=meta["final_stacks"],
        termination=Termination(meta["termination"]),
        target_hands=meta["target_hands"],
        agents=meta["agents"],
        starting_stack=meta["starting_stack"],
        small_blind=meta["small_blind"],
        big_blind=meta["big_blind"],
    )


def load_snapshots(sdir: Path | str) -> list[MemorySnapshot]:
    """All snapshots of a session sorted by (hand, agent)."""
    snap_dir = Path(sdir) / "snapshots"
    if not snap_dir.is_dir():
        return []
    snaps = [MemorySnapshot.from_dict(json.loads(p.read_text())) for p in snap_dir.glob("*.json")]
    return sorted(snaps, key=lambda s: (s.hand_id, s.agent))


def load_run(run_dir: Path | str) -> list[tuple[SessionLog, list[MemorySnapshot]]]:
    out = [(load_session(d), load_snapshots(d)) for d in session_dirs(run_dir)]
    if not out:
        raise MissingLog(f"no sessions under {run_dir}")
    return out


def replay_hand(hist: HandHistory, log: SessionLog) -> TableState:
    """Re-deal a logged hand from its seed and feed its actions back in."""
    players = []
    for name in log.names:
        stack = hist.stacks_before[name]
        players.append(PlayerSeat(name, stack, status=Status.Active if stack > 0 else Status.Eliminated))
    state = TableState(players=players, small_blind=log.small_blind, big_blind=log.big_blind,
                       hand_id=hist.hand_id - 1, total_chips=sum(hist.stacks_before.values()))
    state = deal_hand(state, hist.seed, button=hist.button)
    for rec in hist.action_log:
        if rec.kind == ActionKind.PostBlind:
            continue
        amount = rec.raise_to if rec.kind in (ActionKind.Bet, ActionKind.Raise) else 0
        state = apply_action(state, rec.actor, Action(rec.kind, amount))
    return state


def verify_replay(log: SessionLog) -> int:
    """Replay every hand; raise ReplayMismatch on the first difference.  Returns hands checked."""
    for hist in log.hands:
        state = replay_hand(hist, log)
        stacks = {p.name: p.stack for p in state.players}
        if not state.hand_over or state.payouts != hist.payouts or stacks != hist.stacks_after:
            raise ReplayMismatch(f"{log.session_id} hand {hist.hand_id} does not replay")
        if state.action_log != hist.action_log:
            raise ReplayMismatch(f"{log.session_id} hand {hist.hand_id}: action log differs on replay")
    return len(log.hands)
