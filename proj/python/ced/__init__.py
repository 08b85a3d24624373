"""Complex event detection toolkit: python surface over the C++ core."""

import json as _json

from ced._core import (
    CedError,
    Detector,
    builtin_rules_text,
    corrupt,
    default_vocabulary,
    generate,
    oracle_labels,
    validate_rules,
    __version__,
)
from ced._core import evaluate as _evaluate_json


def evaluate(preds, truths):
    """Score predictions against truth; both are (id, labels) pairs where
    labels is a list of per-window event-token lists. Returns a dict with
    length_accuracy, conditional_f1, and coarse_f1 (None = undefined)."""
    preds = [(i, list(ls)) for i, ls in preds]
    truths = [(i, list(ls)) for i, ls in truths]
    return _json.loads(_evaluate_json(preds, truths))


__all__ = [
    "CedError",
    "Detector",
    "builtin_rules_text",
    "corrupt",
    "default_vocabulary",
    "evaluate",
    "generate",
    "oracle_labels",
    "validate_rules",
    "__version__",
]
