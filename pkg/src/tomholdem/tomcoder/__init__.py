from .coder import (
    CodedSnapshot,
    RubricPattern,
    TomLevel,
    Trajectory,
    UnparseableSnapshot,
    code_run,
    code_snapshot,
    code_text,
    default_rules,
    load_rules,
)
from .patterns import FOLD_PREDICTION, predicts_fold
