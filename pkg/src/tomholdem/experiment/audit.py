"""Post-hoc contamination and completeness audit of run directories."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .io import MissingLog, session_dirs
from .runner import Condition


@dataclass
class AuditReport:
    session_id: str
    memory_artifacts_found: bool
    hands_completed: int
    target_hands: int
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def memory_artifacts(sdir: Path) -> list[Path]:
    found = list(sdir.rglob("poker-memory-*.json"))
    snaps = sdir / "snapshots"
    if snaps.is_dir():
        found.extend(snaps.iterdir())
    return sorted(found)


def audit(sdir: Path | str) -> AuditReport:
    """Check one session directory.  Never writes anything."""
    sdir = Path(sdir)
    meta_path, log_path = sdir / "session.json", sdir / "log.jsonl"
    if not meta_path.exists() or not log_path.exists():
        raise MissingLog(f"{sdir} lacks session.json or log.jsonl")
    meta = json.loads(meta_path.read_text())
    lines = [json.loads(line) for line in log_path.read_text().splitlines() if line.strip()]
    target = int(meta["target_hands"])
    forbidden = not Condition(meta["condition"]).memory
    artifacts = memory_artifacts(sdir) if forbidden else []

    problems = []
    if artifacts:
        problems.append("memory artifacts in a memory-free session: " + ", ".join(p.name for p in artifacts))
    complete = len(lines) == target
    if not complete:
        last = lines[-1]["stacks_after"] if lines else {}
        total = sum(last.values())
        eliminated = total > 0 and max(last.values()) == total
        if not eliminated:
            problems.append(f"{len(lines)}/{target} hands without an elimination finish")
    return AuditReport(
        session_id=meta["session_id"],
        memory_artifacts_found=bool(artifacts),
        hands_completed=len(lines),
        target_hands=target,
        passed=not problems,
        detail="; ".join(problems),
    )


def audit_run(run_dir: Path | str) -> list[AuditReport]:
    dirs = session_dirs(run_dir)
    if not dirs:
        raise MissingLog(f"no sessions under {run_dir}")
    return [audit(d) for d in dirs]


def write_audit(run_dir: Path | str, reports: list[AuditReport]) -> Path:
    path = Path(run_dir) / "audit.json"
    doc = {"all_pass": all(r.passed for r in reports), "sessions": [r.to_dict() for r in reports]}
    path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return path
