"""SHIQ tableau reasoner: knowledge-base consistency, concept satisfiability
and subsumption."""

from ._shiq import (
    BudgetError,
    Error,
    KnowledgeBase,
    Outcome,
    ParseError,
    SignatureError,
    UnsupportedError,
    ValidationError,
    consistent,
    find_model,
    normalize,
    parse_kb,
    satisfiable,
    subsumes,
)


def load_kb(path):
    with open(path, encoding="utf-8") as f:
        return parse_kb(f.read())


__all__ = [
    "BudgetError",
    "Error",
    "KnowledgeBase",
    "Outcome",
    "ParseError",
    "SignatureError",
    "UnsupportedError",
    "ValidationError",
    "consistent",
    "find_model",
    "load_kb",
    "normalize",
    "parse_kb",
    "satisfiable",
    "subsumes",
]
