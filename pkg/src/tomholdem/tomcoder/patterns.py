"""Text patterns shared by the agents and the deception analysis."""

import re

# A note predicting that its subject can be pushed off a hand.
FOLD_PREDICTION = re.compile(r"\bfold|\bgives? up\b|\bcan'?t call\b|\bwon'?t call\b|\bbluffable\b", re.IGNORECASE)


def predicts_fold(text: str) -> bool:
    return FOLD_PREDICTION.search(text) is not None
