"""Propositional encoding of XNF formulas and the SAT-engine contract.

Propositional atoms (atoms, tags, Next/Until/Release nodes) map to stable
variables; And/Or nodes get a definition variable with a full equivalence, so
any encoded node can be used positively or negatively as an assumption.
The engine itself is minisat via ``pysat``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from pysat.solvers import Solver

from . import formula as fm
from .formula import Formula, Kind, XnfFormula

DEFAULT_CONFLICT_BUDGET = 10**6
SOLVER_NAME = "minisat22"


class ResourceLimit(RuntimeError):
    """The conflict budget of a single SAT query was exhausted."""


@dataclass
class Stats:
    sat_calls: int = 0
    states: int = 0
    mus_calls: int = 0
    harvested: int = 0


class Encoder:
    """Variable map and Tseitin definitions shared by every query of one run."""

    def __init__(self):
        self.nvars = 0
        self.var_of: dict[int, int] = {}
        self.atom_of: dict[int, Formula] = {}
        self._defs: dict[int, list[list[int]]] = {}
        self.true_var = self.new_var()

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def var(self, f: Formula) -> int:
        """PropVar of a propositional atom (or the definition variable of an And/Or)."""
        v = self.var_of.get(f.id)
        if v is None:
            v = self.var_of[f.id] = self.new_var()
            if f.kind in fm.PROP_ATOM_KINDS:
                self.atom_of[v] = f
        return v

    def lit(self, f: Formula) -> int:
        """Literal whose truth value equals the propositional reading of ``f``.

        And/Or nodes only receive a variable here; their defining clauses are
        produced by ``clauses_below``.
        """
        k = f.kind
        if k == Kind.TRUE:
            return self.true_var
        if k == Kind.FALSE:
            return -self.true_var
        if k == Kind.NOT:
            return -self.lit(f.child)
        return self.var(f)

    def _define(self, f: Formula) -> list[list[int]]:
        cls = self._defs.get(f.id)
        if cls is None:
            d = self.var(f)
            kids = [self.lit(c) for c in f.children]
            if f.kind == Kind.AND:
                cls = [[-d, c] for c in kids] + [[d] + [-c for c in kids]]
            else:
                cls = [[d, -c] for c in kids] + [[-d] + kids]
            self._defs[f.id] = cls
        return cls

    def clauses_below(self, f: Formula, done: set[int]) -> tuple[list[list[int]], list[Formula]]:
        """Definition clauses for the nodes under ``f`` not yet in ``done``.

        Also returns the propositional atoms first reached, so callers can pin
        atoms that do not belong to their query.  The walk stops at nodes
        already in ``done``.
        """
        clauses: list[list[int]] = []
        leaves: list[Formula] = []
        stack = [f]
        while stack:
            g = stack.pop()
            if g.id in done:
                continue
            done.add(g.id)
            k = g.kind
            if k in fm.PROP_ATOM_KINDS:
                self.var(g)
                leaves.append(g)
            elif k == Kind.AND or k == Kind.OR:
                clauses.extend(self._define(g))
                stack.extend(g.children)
            elif k == Kind.NOT:
                stack.append(g.child)
        leaves.sort()
        return clauses, leaves


@dataclass(frozen=True)
class CnfProblem:
    clauses: tuple[tuple[int, ...], ...]
    num_aux: int
    root: int
    encoder: Encoder = field(compare=False, repr=False)
    source: Formula | None = field(default=None, compare=False)

    @property
    def nvars(self) -> int:
        return max((abs(l) for c in self.clauses for l in c), default=0)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.nvars} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def encode(x: XnfFormula | Formula, encoder: Encoder | None = None) -> CnfProblem:
    f = x.formula if isinstance(x, XnfFormula) else x
    enc = encoder or Encoder()
    clauses, _ = enc.clauses_below(f, set())
    root = enc.lit(f)
    allc = [[enc.true_var]] + clauses + [[root]]
    aux = sum(1 for g in fm.subformulas(f) if g.kind in (Kind.AND, Kind.OR))
    return CnfProblem(tuple(tuple(c) for c in allc), aux, root, enc, f)


@dataclass(frozen=True)
class Model:
    true_vars: frozenset[int]

    def __getitem__(self, var: int) -> bool:
        return var in self.true_vars


@dataclass(frozen=True)
class Unsat:
    core: tuple[int, ...]


SatOutcome = Model | Unsat


def _new_solver(clauses: Iterable[Sequence[int]] = ()) -> Solver:
    s = Solver(name=SOLVER_NAME)
    for c in clauses:
        s.add_clause(c)
    return s


def _run(solver: Solver, assumptions: Sequence[int], budget: int | None) -> bool:
    if budget is None:
        return solver.solve(assumptions=assumptions)
    solver.conf_budget(budget)
    res = solver.solve_limited(assumptions=assumptions)
    if res is None:
        raise ResourceLimit(f"conflict budget of {budget} exhausted")
    return res


def solve(
    p: CnfProblem,
    assumptions: Sequence[int] = (),
    blocking: Iterable[Sequence[int]] = (),
    budget: int | None = DEFAULT_CONFLICT_BUDGET,
) -> SatOutcome:
    with _new_solver(p.clauses) as s:
        for c in blocking:
            s.add_clause(c)
        if _run(s, list(assumptions), budget):
            return Model(frozenset(l for l in s.get_model() if l > 0))
        return Unsat(tuple(s.get_core() or ()))


@dataclass(frozen=True)
class StateAssignment:
    """A decoded model: literal row, immediate-satisfaction tags and X(P)."""

    literals: tuple[tuple[str, bool], ...]
    tags: frozenset[Formula]
    nexts: frozenset[Formula]
    source: Formula
    values: frozenset[int] = field(compare=False, default=frozenset())

    def blocking_clause(self) -> list[int]:
        return [-l for l in sorted(self.values, key=abs)]

    def satisfies_tag(self, until: Formula) -> bool:
        return until in self.tags

    def trace(self) -> dict[str, bool]:
        return dict(self.literals)

    def trace_str(self) -> str:
        return "{" + ", ".join(n if v else "!" + n for n, v in self.literals) + "}"


def decode_values(
    atoms: Iterable[Formula],
    value,
    props: Sequence[str],
    source: Formula,
    encoder: Encoder,
) -> StateAssignment:
    """Project a model (``value(var) -> bool``) onto the atoms of a query."""
    tags, nexts, signed = set(), set(), set()
    row = dict.fromkeys(props, False)
    for a in atoms:
        v = encoder.var(a)
        b = value(v)
        signed.add(v if b else -v)
        if a.kind == Kind.ATOM:
            if a.name in row:
                row[a.name] = b
        elif b and a.kind == Kind.TAG:
            tags.add(a.child)
        elif b and a.kind == Kind.NEXT:
            nexts.add(a.child)
    return StateAssignment(
        tuple(sorted(row.items())), frozenset(tags), frozenset(nexts), source, frozenset(signed)
    )


def decode(m: Model, x: XnfFormula | CnfProblem, props: Sequence[str] | None = None) -> StateAssignment:
    if isinstance(x, CnfProblem):
        f, enc = x.source, x.encoder
    else:
        raise TypeError("decode needs the CnfProblem produced by encode()")
    if props is None:
        props = fm.atomic_props(f)
    return decode_values(fm.prop_atoms(f), m.__getitem__, props, f, enc)


class QueryEngine:
    """An incremental minisat instance answering queries about one base formula.

    Next/tag atoms that occur neither in the base formula nor in ``scope`` are
    pinned to false: a model may only claim successors the base formula can
    actually produce.
    """

    def __init__(
        self,
        encoder: Encoder,
        base: Formula,
        stats: Stats | None = None,
        budget: int | None = DEFAULT_CONFLICT_BUDGET,
        dimacs_dir: str | None = None,
        scope: Iterable[Formula] = (),
    ):
        self.encoder = encoder
        self.base = base
        self.stats = stats if stats is not None else Stats()
        self.budget = budget
        self.solver = _new_solver([[encoder.true_var]])
        self._done: set[int] = set()
        self._model: frozenset[int] = frozenset()
        clauses, leaves = encoder.clauses_below(fm.conj(base, *scope) if scope else base, self._done)
        self.atoms = tuple(leaves)
        self._atom_ids = {a.id for a in self.atoms}
        for c in clauses:
            self.solver.add_clause(c)
        root = self.ensure(base)
        self.solver.add_clause([root])
        if dimacs_dir:
            self._dump(dimacs_dir, root)

    def _dump(self, directory: str, root: int):
        os.makedirs(directory, exist_ok=True)
        p = encode(self.base, self.encoder)
        with open(os.path.join(directory, f"state_{self.base.id}.cnf"), "w") as fh:
            fh.write(f"c {fm.to_str(self.base)}\n")
            fh.write(p.to_dimacs())

    def ensure(self, f: Formula) -> int:
        clauses, leaves = self.encoder.clauses_below(f, self._done)
        for c in clauses:
            self.solver.add_clause(c)
        for a in leaves:
            if a.kind != Kind.ATOM and a.id not in self._atom_ids:
                self.solver.add_clause([-self.encoder.var(a)])
        return self.encoder.lit(f)

    def add_clause(self, lits: Sequence[int]):
        self.solver.add_clause(list(lits))

    def add_constraint(self, f: Formula):
        self.solver.add_clause([self.ensure(f)])

    def solve(self, assumptions: Sequence[Formula | int] = ()) -> bool:
        lits = [a if isinstance(a, int) else self.ensure(a) for a in assumptions]
        self.stats.sat_calls += 1
        ok = _run(self.solver, lits, self.budget)
        if ok:
            self._model = frozenset(l for l in self.solver.get_model() if l > 0)
        return ok

    def core(self) -> list[int]:
        return list(self.solver.get_core() or ())

    def value(self, var: int) -> bool:
        return var in self._model

    def assignment(self, props: Sequence[str]) -> StateAssignment:
        return decode_values(self.atoms, self.value, props, self.base, self.encoder)

    def close(self):
        self.solver.delete()
