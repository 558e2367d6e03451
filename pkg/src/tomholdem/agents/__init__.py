from .memory import (
    CorruptMemoryFile,
    MemoryFile,
    Note,
    WorkspaceWriteFailure,
    dump_memory,
    load_memory,
    memory_path,
    save_memory,
)
from .policies import (
    AgentConfig,
    HandSummary,
    NoLegalAction,
    PolicyId,
    decide,
    fold_labeled,
    postflop_strength,
    tally_hand,
    update_memory,
)
