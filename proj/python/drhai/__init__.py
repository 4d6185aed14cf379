"""Dialectical reconciliation between an explainer and an explainee.

Formulas are passed as strings in the usual syntax (``!``, ``&``, ``|``,
``->``, ``<->``); knowledge bases are lists of such strings.
"""

from ._core import (
    BudgetExceeded,
    Dialogue,
    Error,
    ParseError,
    PreconditionError,
    ProtocolError,
    arguments_for,
    complement,
    counterarguments_for,
    csv_header,
    entails,
    enumerate_mus,
    find_mcs,
    generate_pair,
    is_satisfiable,
    normalize,
    run_dialogue,
    run_experiment,
    similarity,
    single_shot_explanation,
    success_procedure,
)

__all__ = [
    "BudgetExceeded",
    "Dialogue",
    "Error",
    "ParseError",
    "PreconditionError",
    "ProtocolError",
    "arguments_for",
    "complement",
    "counterarguments_for",
    "csv_header",
    "entails",
    "enumerate_mus",
    "find_mcs",
    "generate_pair",
    "is_satisfiable",
    "normalize",
    "run_dialogue",
    "run_experiment",
    "similarity",
    "single_shot_explanation",
    "success_procedure",
]
