"""conchk: consistency-model checking for single-object storage histories.

Decide which consistency models a recorded operation history satisfies by
searching for a witnessing visibility/arbitration assignment; audit the
implication hierarchy between models; generate histories from simulated
replicated stores.
"""

from .history import (
    BOTTOM,
    PLACEHOLDER,
    AbstractExecution,
    History,
    HistoryError,
    Operation,
    Relation,
    build_history,
    concur_writes,
    execution,
    happens_before,
    per_object_happens_before,
    read,
    write,
)
from .predicates import (
    ModelDefinition,
    UnknownModelError,
    Verdict,
    custom_model,
    evaluate_model,
    list_models,
    resolve_model,
)
from .rdt import Context, RdtSpec, context_of, prec, rdt_spec, rval_set

__all__ = [
    "BOTTOM",
    "PLACEHOLDER",
    "AbstractExecution",
    "History",
    "HistoryError",
    "Operation",
    "Relation",
    "build_history",
    "concur_writes",
    "execution",
    "happens_before",
    "per_object_happens_before",
    "read",
    "write",
    "ModelDefinition",
    "UnknownModelError",
    "Verdict",
    "custom_model",
    "evaluate_model",
    "list_models",
    "resolve_model",
    "Context",
    "RdtSpec",
    "context_of",
    "prec",
    "rdt_spec",
    "rval_set",
]

__version__ = "0.1.0"
