"""Deletion-based minimal unsatisfiable cores over formula conjuncts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import formula as fm
from .formula import Formula
from .satkernel import QueryEngine
from .transys import TransitionSystem


class SatisfiableQuery(ValueError):
    """The full conjunction is satisfiable with the constraint: no core exists."""


@dataclass(frozen=True)
class CoreQuery:
    conjuncts: tuple[Formula, ...]
    constraint: Formula = fm.TT


def minimal_core(q: CoreQuery, system: TransitionSystem | None = None) -> frozenset[Formula]:
    """A set-inclusion-minimal S ⊆ conjuncts with xnf(⋀S) ∧ constraint unsat.

    Each conjunct's XNF is guarded by the literal of its own root; solving
    under a subset of those roots as assumptions is the same as solving for
    the conjunction of that subset.
    """
    conj = sorted(set(q.conjuncts))
    if system is None:
        system = TransitionSystem(fm.conj(conj, q.constraint))
    system.stats.mus_calls += 1
    parts = [fm.xnf(c) for c in conj]
    eng = system.engine_for(q.constraint, scope=parts)
    try:
        sel = {eng.ensure(p): c for p, c in zip(parts, conj)}
        by_conj = {c: l for l, c in sel.items()}
        if eng.solve(list(sel)):
            raise SatisfiableQuery("query is satisfiable")
        core = {sel[l] for l in eng.core() if l in sel}
        for c in sorted(core, key=lambda f: -f.id):
            if c not in core:
                continue
            trial = [by_conj[d] for d in sorted(core) if d is not c]
            if not eng.solve(trial):
                core = {sel[l] for l in eng.core() if l in sel} & (core - {c})
        return frozenset(core)
    finally:
        eng.close()


def all_cores_for(
    queries: Sequence[CoreQuery], system: TransitionSystem | None = None
) -> list[frozenset[Formula]]:
    """One minimal core per query, deduplicated, in first-seen order."""
    out: list[frozenset[Formula]] = []
    for q in queries:
        c = minimal_core(q, system)
        if c not in out:
            out.append(c)
    return out


def is_minimal(q: CoreQuery, core: frozenset[Formula], system: TransitionSystem | None = None) -> bool:
    """Post-hoc check: unsat as given, satisfiable after dropping any element."""
    system = system or TransitionSystem(fm.conj(q.conjuncts, q.constraint))

    def unsat(items) -> bool:
        eng = system.engine_for(q.constraint, scope=[fm.xnf(c) for c in q.conjuncts])
        try:
            return not eng.solve([fm.conj(fm.xnf(c) for c in items)])
        finally:
            eng.close()

    return unsat(core) and all(not unsat(core - {c}) for c in core)
