"""Keyword/regex coding of memory notes into theory-of-mind levels."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from importlib import resources
from pathlib import Path

import yaml

from ..agents.memory import CorruptMemoryFile, MemoryFile


class TomLevel(IntEnum):
    None_ = 0
    Statistical = 1
    Behavioral = 2
    Predictive = 3
    Strategic = 4
    Recursive = 5


class UnparseableSnapshot(ValueError):
    pass


@dataclass(frozen=True)
class RubricPattern:
    level: TomLevel
    pattern_id: str
    matcher: re.Pattern
    guard: re.Pattern | None = None
    positive: tuple[str, ...] = ()
    negative: tuple[str, ...] = ()

    def search(self, sentence: str) -> re.Match | None:
        if self.guard is not None and self.guard.search(sentence):
            return None
        return self.matcher.search(sentence)


def _compile(pattern: str) -> re.Pattern:
    # A literal space in a rule means "some whitespace", so doubled spaces or
    # line wraps inside a note still match.  Rules keep spaces out of [...].
    return re.compile(pattern.replace(" ", r"\s+"), re.IGNORECASE)


def load_rules(path: Path | str | None = None) -> tuple[RubricPattern, ...]:
    if path is None:
        text = resources.files(__package__).joinpath("data", "rules.yaml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    rules = []
    for r in yaml.safe_load(text)["rules"]:
        guard = _compile(r["guard"]) if r.get("guard") else None
        rules.append(RubricPattern(
            TomLevel(r["level"]), r["id"], _compile(r["pattern"]), guard,
            tuple(r.get("positive", ())), tuple(r.get("negative", ())),
        ))
    return tuple(rules)


@lru_cache(maxsize=1)
def default_rules() -> tuple[RubricPattern, ...]:
    return load_rules()


_SENTENCE_END = re.compile(r"(?<=[.!?;])\s+|\n+")


def sentences(text: str) -> list[tuple[int, str]]:
    """Split into (offset, sentence) pieces; offsets index into ``text``."""
    out, start = [], 0
    for m in _SENTENCE_END.finditer(text):
        if m.start() > start:
            out.append((start, text[start:m.start()]))
        start = m.end()
    if start < len(text):
        out.append((start, text[start:]))
    return out


Match = tuple[int, str, str]  # (level, pattern_id, matched_text)


def code_text(text: str, rules: tuple[RubricPattern, ...] | None = None) -> tuple[TomLevel, list[Match]]:
    """Highest rubric level fired by any sentence of ``text``, with the evidence."""
    rules = rules or default_rules()
    level, found = TomLevel.None_, []
    for _, sent in sentences(text):
        for rule in rules:
            m = rule.search(sent)
            if m:
                found.append((int(rule.level), rule.pattern_id, m.group(0)))
                level = max(level, rule.level)
    return TomLevel(level), found


@dataclass
class CodedSnapshot:
    session_id: str
    hand_id: int
    agent: str
    per_opponent: dict[str, TomLevel]
    overall: TomLevel
    matched_patterns: list[Match] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "hand_id": self.hand_id,
            "agent": self.agent,
            "per_opponent": {k: int(v) for k, v in self.per_opponent.items()},
            "overall": int(self.overall),
            "matched_patterns": [list(m) for m in self.matched_patterns],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CodedSnapshot":
        return cls(d["session_id"], d["hand_id"], d["agent"],
                   {k: TomLevel(v) for k, v in d["per_opponent"].items()}, TomLevel(d["overall"]),
                   [tuple(m) for m in d["matched_patterns"]])


def _as_memory(snapshot) -> tuple[str, int, str, MemoryFile]:
    if hasattr(snapshot, "content"):
        return snapshot.session_id, snapshot.hand_id, snapshot.agent, snapshot.content
    if isinstance(snapshot, dict):
        try:
            mem = MemoryFile.from_dict(snapshot["content"])
            return snapshot["session_id"], int(snapshot["hand_id"]), snapshot["agent"], mem
        except (KeyError, TypeError, ValueError, CorruptMemoryFile) as exc:
            raise UnparseableSnapshot(str(exc)) from exc
    raise UnparseableSnapshot(f"cannot read a snapshot from {type(snapshot).__name__}")


def code_snapshot(snapshot, rules: tuple[RubricPattern, ...] | None = None) -> CodedSnapshot:
    """Code every opponent's notes; ``overall`` is the max across opponents.

    Notes filed under an opponent are attributed to that opponent.  The
    free-text scratch space is not attributed to anyone and so never raises
    a level above 0.
    """
    sid, hand_id, agent, mem = _as_memory(snapshot)
    per_opp: dict[str, TomLevel] = {}
    evidence: list[Match] = []
    for name in sorted(mem.opponents):
        if name == agent:
            continue
        level = TomLevel.None_
        for note in mem.opponents[name]:
            lv, found = code_text(note.text, rules)
            level = max(level, lv)
            evidence.extend(found)
        per_opp[name] = TomLevel(level)
    overall = TomLevel(max(per_opp.values(), default=0))
    return CodedSnapshot(sid, hand_id, agent, per_opp, overall, evidence)


@dataclass
class Trajectory:
    bin_width: int
    bins: list[tuple[int, int, int]]  # (first_hand, last_hand, max level across agents)
    session_max: int
    per_agent_max: dict[str, int]
    mean_level: float  # over all snapshots
    mean_level_nonzero: float  # over snapshots with a level above 0

    def to_dict(self) -> dict:
        return {
            "bin_width": self.bin_width,
            "bins": [list(b) for b in self.bins],
            "session_max": self.session_max,
            "per_agent_max": self.per_agent_max,
            "mean_level": self.mean_level,
            "mean_level_nonzero": self.mean_level_nonzero,
        }


def code_run(coded: list[CodedSnapshot], hands: int = 100, bin_width: int = 5) -> Trajectory:
    """Per-bin maximum level across agents.

    A bin holds hands ``[k*w + 1, (k+1)*w]``.  Bins after the last snapshot
    (a session that ended early) repeat the last level reached, since the
    notes persist.
    """
    if bin_width < 1:
        raise ValueError("bin_width must be positive")
    n_bins = max(1, -(-hands // bin_width))
    last_hand = max((c.hand_id for c in coded), default=0)
    n_bins = max(n_bins, -(-last_hand // bin_width))
    levels = [None] * n_bins
    per_agent: dict[str, int] = {}
    for c in coded:
        b = (c.hand_id - 1) // bin_width
        levels[b] = max(levels[b] or 0, int(c.overall))
        per_agent[c.agent] = max(per_agent.get(c.agent, 0), int(c.overall))
    bins, carry = [], 0
    for i, lv in enumerate(levels):
        if lv is not None:
            carry = lv
        bins.append((i * bin_width + 1, (i + 1) * bin_width, carry))
    overall = [int(c.overall) for c in coded]
    nonzero = [x for x in overall if x > 0]
    return Trajectory(
        bin_width=bin_width,
        bins=bins,
        session_max=max(overall, default=0),
        per_agent_max=dict(sorted(per_agent.items())),
        mean_level=sum(overall) / len(overall) if overall else 0.0,
        mean_level_nonzero=sum(nonzero) / len(nonzero) if nonzero else 0.0,
    )
