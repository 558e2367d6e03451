"""Persistent per-agent opponent notes (``poker-memory-{name}.json``)."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


class CorruptMemoryFile(ValueError):
    pass


class WorkspaceWriteFailure(OSError):
    pass


@dataclass(frozen=True)
class Note:
    hand_id: int
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("note text must be non-empty")


@dataclass
class MemoryFile:
    agent: str
    hands_seen: int = 0
    opponents: dict[str, list[Note]] = field(default_factory=dict)
    scratch: str = ""

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "hands_seen": self.hands_seen,
            "opponents": {
                name: [{"hand_id": n.hand_id, "text": n.text} for n in notes]
                for name, notes in self.opponents.items()
            },
            "scratch": self.scratch,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MemoryFile":
        try:
            opponents = {
                str(name): [Note(int(n["hand_id"]), str(n["text"])) for n in notes]
                for name, notes in d["opponents"].items()
            }
            return cls(str(d["agent"]), int(d["hands_seen"]), opponents, str(d.get("scratch", "")))
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise CorruptMemoryFile(f"memory document does not match schema: {exc}") from exc

    def copy(self) -> "MemoryFile":
        return MemoryFile(self.agent, self.hands_seen, {k: list(v) for k, v in self.opponents.items()}, self.scratch)

    def add_note(self, opponent: str, hand_id: int, text: str) -> None:
        self.opponents.setdefault(opponent, []).append(Note(hand_id, text))

    def notes_about(self, opponent: str) -> list[Note]:
        return self.opponents.get(opponent, [])


def memory_path(workspace: Path | str, agent: str) -> Path:
    return Path(workspace) / f"poker-memory-{agent}.json"


def load_memory(workspace: Path | str, agent: str) -> MemoryFile:
    """Parse the agent's memory file; a missing file gives an empty memory."""
    path = memory_path(workspace, agent)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return MemoryFile(agent)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptMemoryFile(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptMemoryFile(f"{path}: top level is not an object")
    return MemoryFile.from_dict(doc)


def dump_memory(memory: MemoryFile) -> str:
    return json.dumps(memory.to_dict(), indent=2, sort_keys=True) + "\n"


def save_memory(workspace: Path | str, memory: MemoryFile) -> Path:
    """Write atomically: temp file in the same directory, then rename."""
    path = memory_path(workspace, memory.agent)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".json", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(dump_memory(memory))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise WorkspaceWriteFailure(f"cannot write {path}: {exc}") from exc
    return path
