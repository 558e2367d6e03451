from .audit import AuditReport, audit, audit_run, write_audit
from .io import MissingLog, ReplayMismatch, load_run, load_session, load_snapshots, replay_hand, session_dirs, verify_replay
from .runner import (
    Condition,
    EngineFault,
    ExperimentConfig,
    HandHistory,
    MemorySnapshot,
    PermissionDenied,
    SessionLog,
    Termination,
    WorkspaceNotClean,
    clean_workspace,
    lineup,
    run_factorial,
    run_session,
    session_seed,
)
