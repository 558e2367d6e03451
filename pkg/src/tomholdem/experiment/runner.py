"""Session runner for the memory × skill factorial.

Directory layout under ``output_dir``::

    manifest.json
    audit.json
    sessions/<Condition>-<rep>/
        log.jsonl              one HandHistory per line
        session.json           SessionLog without the hands
        snapshots/<agent>-<hand>.json
        workspace/<agent>/     the agent's working directory
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from ..agents.memory import MemoryFile, load_memory, save_memory
from ..agents.policies import AgentConfig, HandSummary, PolicyId, decide, update_memory
from ..engine.cards import cards_str, parse_cards
from ..engine.table import ActionKind, ActionRecord, TableState
from ..protocol.session import DEFAULT_AGENTS, GameSession, SessionConfig, hand_seed
from ..rng import derive_seed


class WorkspaceNotClean(RuntimeError):
    pass


class EngineFault(RuntimeError):
    pass


class PermissionDenied(PermissionError):
    pass


class Condition(str, Enum):
    Full = "Full"
    NoSkill = "NoSkill"
    NoMemory = "NoMemory"
    Baseline = "Baseline"

    @property
    def memory(self) -> bool:
        return self in (Condition.Full, Condition.NoSkill)

    @property
    def skill(self) -> bool:
        return self in (Condition.Full, Condition.NoMemory)

    @classmethod
    def parse(cls, text: str) -> "Condition":
        key = text.replace("-", "").replace("_", "").lower()
        for c in cls:
            if c.value.lower() == key:
                return c
        raise ValueError(f"unknown condition {text!r}; expected one of {[c.value for c in cls]}")


def lineup(condition: Condition) -> list[PolicyId]:
    """Policies seated in each condition, in seat order.

    Memory conditions seat three adaptive agents (with or without strategy
    guidance).  Without memory, the skilled table is three chart players and
    the unguided table mixes a random, a calling and a chart player.
    """
    if condition.memory:
        return [PolicyId.ScriptedAdaptive] * 3
    if condition.skill:
        return [PolicyId.TagChart] * 3
    return [PolicyId.RandomLegal, PolicyId.CallingStation, PolicyId.TagChart]


class Termination(str, Enum):
    Completed = "Completed"
    EarlyElimination = "EarlyElimination"


@dataclass
class ExperimentConfig:
    condition: Condition = Condition.Full
    replications: int = 5
    hands_per_session: int = 100
    small_blind: int = 50
    big_blind: int = 100
    starting_stack: int = 10_000
    master_seed: int = 0
    output_dir: Path = Path("runs")
    agents: tuple[str, ...] = DEFAULT_AGENTS
    policies: tuple[PolicyId, ...] | None = None  # overrides the condition lineup

    def __post_init__(self):
        self.condition = Condition(self.condition)
        self.output_dir = Path(self.output_dir)
        if self.replications < 1 or self.hands_per_session < 1:
            raise ValueError("replications and hands_per_session must be positive")

    def lineup(self) -> list[PolicyId]:
        return [PolicyId(p) for p in self.policies] if self.policies else lineup(self.condition)


@dataclass
class HandHistory:
    hand_id: int
    seed: int
    button: int
    stacks_before: dict[str, int]
    hole_cards: dict[str, list[str]]
    board: list[str]
    action_log: list[ActionRecord]
    payouts: dict[str, int]
    stacks_after: dict[str, int]
    positions: dict[str, str] = field(default_factory=dict)
    showdown: bool = False

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["action_log"] = [r.to_dict() for r in self.action_log]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HandHistory":
        d = dict(d)
        d["action_log"] = [ActionRecord.from_dict(r) for r in d["action_log"]]
        return cls(**d)

    def summary(self, names: list[str]) -> HandSummary:
        """What the table saw: cards are only revealed at showdown."""
        shown = {}
        if self.showdown:
            folded = {r.actor for r in self.action_log if r.kind == ActionKind.Fold}
            shown = {n: parse_cards(c) for n, c in self.hole_cards.items() if n not in folded}
        dealt = [n for n in names if n in self.hole_cards]
        return HandSummary(self.hand_id, dealt, dict(self.positions), list(self.action_log),
                           parse_cards(self.board), shown, dict(self.payouts))


@dataclass
class SessionLog:
    session_id: str
    condition: Condition
    seed: int
    hands: list[HandHistory]
    final_stacks: dict[str, int]
    termination: Termination
    target_hands: int = 100
    agents: list[dict] = field(default_factory=list)
    starting_stack: int = 10_000
    small_blind: int = 50
    big_blind: int = 100

    @property
    def names(self) -> list[str]:
        return [a["name"] for a in self.agents]

    def policy_of(self, name: str) -> PolicyId:
        return PolicyId(next(a["policy"] for a in self.agents if a["name"] == name))

    def meta(self) -> dict:
        return {
            "session_id": self.session_id,
            "condition": self.condition.value,
            "seed": self.seed,
            "hands_played": len(self.hands),
            "target_hands": self.target_hands,
            "final_stacks": self.final_stacks,
            "termination": self.termination.value,
            "agents": self.agents,
            "starting_stack": self.starting_stack,
            "small_blind": self.small_blind,
            "big_blind": self.big_blind,
        }


@dataclass
class MemorySnapshot:
    session_id: str
    hand_id: int
    agent: str
    content: MemoryFile

    def to_dict(self) -> dict:
        return {"session_id": self.session_id, "hand_id": self.hand_id, "agent": self.agent,
                "content": self.content.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "MemorySnapshot":
        return cls(d["session_id"], int(d["hand_id"]), d["agent"], MemoryFile.from_dict(d["content"]))


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def session_id(condition: Condition, rep: int) -> str:
    return f"{condition.value}-{rep}"


def session_seed(master_seed: int, condition: Condition, rep: int) -> int:
    return derive_seed(master_seed, condition.value, rep)


def session_dir(output_dir: Path, sid: str) -> Path:
    return Path(output_dir) / "sessions" / sid


def _check_clean(sdir: Path) -> None:
    if sdir.exists() and any(sdir.iterdir()):
        raise WorkspaceNotClean(f"{sdir} already has content; run clean_workspace first")


def _check_chips(state: TableState, sid: str) -> None:
    if state.chips_in_play() != state.total_chips or any(p.stack < 0 for p in state.players):
        raise EngineFault(f"{sid} hand {state.hand_id}: chip conservation violated")


def run_session(config: ExperimentConfig, replication_index: int) -> SessionLog:
    """Play one session with scripted agents and write its artifacts."""
    cond = config.condition
    sid = session_id(cond, replication_index)
    seed = session_seed(config.master_seed, cond, replication_index)
    sdir = session_dir(config.output_dir, sid)
    _check_clean(sdir)
    snap_dir = sdir / "snapshots"
    sdir.mkdir(parents=True, exist_ok=True)

    agents = [
        AgentConfig(name, policy, memory_enabled=cond.memory, skill_enabled=cond.skill,
                    seed=derive_seed(seed, "agent", name), workspace=sdir / "workspace" / name)
        for name, policy in zip(config.agents, config.lineup())
    ]
    by_name = {a.name: a for a in agents}
    memories: dict[str, MemoryFile] = {}
    for a in agents:
        a.workspace.mkdir(parents=True, exist_ok=True)
        if a.memory_enabled:
            memories[a.name] = load_memory(a.workspace, a.name)
            snap_dir.mkdir(exist_ok=True)

    session = GameSession(SessionConfig(
        agents=list(config.agents), session_seed=seed, hands=config.hands_per_session,
        starting_stack=config.starting_stack, small_blind=config.small_blind, big_blind=config.big_blind,
        timeout_secs=None,
    ))
    hands: list[HandHistory] = []
    stacks = {n: config.starting_stack for n in config.agents}
    log_fh = open(sdir / "log.jsonl", "w", encoding="utf-8")

    def on_hand(state: TableState) -> None:
        nonlocal stacks
        _check_chips(state, sid)
        after = {p.name: p.stack for p in state.players}
        hist = HandHistory(
            hand_id=state.hand_id,
            seed=state.rng_seed,
            button=state.button,
            stacks_before=stacks,
            hole_cards={p.name: cards_str(p.hole) for p in state.players if p.hole},
            board=cards_str(state.board),
            action_log=list(state.action_log),
            payouts=dict(state.payouts),
            stacks_after=after,
            positions=state.positions(),
            showdown=state.went_to_showdown,
        )
        stacks = after
        hands.append(hist)
        log_fh.write(_dumps(hist.to_dict()) + "\n")
        summary = HandSummary.from_state(state)
        for name in sorted(memories):
            mem = update_memory(memories[name], summary, by_name[name].policy)
            save_memory(by_name[name].workspace, mem)
            memories[name] = mem
            snap = MemorySnapshot(sid, state.hand_id, name, mem)
            (snap_dir / f"{name}-{state.hand_id}.json").write_text(_dumps(snap.to_dict()) + "\n")

    session.on_hand_complete.append(on_hand)
    try:
        session.start()
        while not session.over:
            actor = session.state.actor
            if actor is None:
                raise EngineFault(f"{sid} hand {session.state.hand_id}: no actor in an open hand")
            view = session.get_state(actor)
            agent = by_name[actor]
            step_seed = derive_seed(agent.seed, view.hand_id, len(view.action_history))
            req = decide(agent.policy, view, memories.get(actor), step_seed, skill=agent.skill_enabled)
            session.submit_action(actor, req)
            _check_chips(session.state, sid)
    finally:
        log_fh.close()

    term = Termination.Completed if len(hands) >= config.hands_per_session else Termination.EarlyElimination
    log = SessionLog(
        session_id=sid, condition=cond, seed=seed, hands=hands, final_stacks=dict(stacks), termination=term,
        target_hands=config.hands_per_session,
        agents=[{"name": a.name, "policy": a.policy.value, "memory": a.memory_enabled, "skill": a.skill_enabled}
                for a in agents],
        starting_stack=config.starting_stack, small_blind=config.small_blind, big_blind=config.big_blind,
    )
    (sdir / "session.json").write_text(json.dumps(log.meta(), sort_keys=True, indent=1) + "\n")
    return log


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(output_dir: Path, config: ExperimentConfig, logs: list[SessionLog]) -> Path:
    doc = {
        "master_seed": config.master_seed,
        "replications": config.replications,
        "hands_per_session": config.hands_per_session,
        "blinds": [config.small_blind, config.big_blind],
        "starting_stack": config.starting_stack,
        "sessions": [
            {
                **{k: v for k, v in log.meta().items() if k != "agents"},
                "log_sha256": _sha256(session_dir(output_dir, log.session_id) / "log.jsonl"),
            }
            for log in logs
        ],
    }
    path = Path(output_dir) / "manifest.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return path


def run_factorial(base: ExperimentConfig, conditions: list[Condition] | None = None) -> list[SessionLog]:
    """Every condition × replication, then a manifest and an audit file."""
    from .audit import audit_run, write_audit

    logs = []
    for cond in conditions or list(Condition):
        cfg = replace(base, condition=cond)
        for rep in range(base.replications):
            logs.append(run_session(cfg, rep))
    write_manifest(base.output_dir, base, logs)
    write_audit(base.output_dir, audit_run(base.output_dir))
    return logs


def clean_workspace(directory: Path | str) -> None:
    """Remove memory files, logs, snapshots and run summaries under ``directory``."""
    root = Path(directory)
    if not root.exists():
        return
    try:
        for stray in sorted(root.rglob("poker-memory-*.json")):
            stray.unlink()
        sessions = root / "sessions"
        if sessions.exists():
            shutil.rmtree(sessions)
        for name in ("manifest.json", "audit.json", "log.jsonl", "session.json"):
            (root / name).unlink(missing_ok=True)
        if (root / "snapshots").exists():
            shutil.rmtree(root / "snapshots")
    except PermissionError as exc:
        raise PermissionDenied(str(exc)) from exc
