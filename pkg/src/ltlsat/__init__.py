"""SAT-based explicit-state LTL satisfiability checking."""
from __future__ import annotations

from .checker import CheckOptions, CheckTimeout, LassoWitness, Verdict, check
from .formula import Formula, to_nnf, to_str, to_xnf, xnf
from .parser import LtlSyntaxError, parse

__all__ = [
    "CheckOptions",
    "CheckTimeout",
    "Formula",
    "LassoWitness",
    "LtlSyntaxError",
    "Verdict",
    "check",
    "parse",
    "to_nnf",
    "to_str",
    "to_xnf",
    "xnf",
]
