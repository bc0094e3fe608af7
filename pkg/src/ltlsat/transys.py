"""States and successors of the temporal transition system of a formula.

A state is named by its representative formula: the canonical conjunction of
the Next obligations of the assignment that produced it.  Successors are the
satisfying assignments of the state's XNF encoding, enumerated with
per-state history blocking.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import formula as fm
from .formula import Formula, Kind
from .satkernel import (
    DEFAULT_CONFLICT_BUDGET,
    Encoder,
    QueryEngine,
    StateAssignment,
    Stats,
)

DEFAULT_GRAPH_CAP = 10**5


class CapExceeded(RuntimeError):
    def __init__(self, graph: "SystemGraph"):
        super().__init__(f"state cap {graph.cap} exceeded")
        self.graph = graph


def successor_formula(p: StateAssignment) -> Formula:
    """Representative formula of the successor named by ``X(P)``."""
    return fm.conj(sorted(p.nexts))


class TransitionState:
    def __init__(self, system: "TransitionSystem", rep: Formula):
        self.system = system
        self.rep = rep
        self.xnf = fm.to_xnf(rep)
        self.conjuncts = fm.conjuncts(rep)
        self.obligations = frozenset(c for c in self.conjuncts if c.kind == Kind.UNTIL)
        self.history: list[StateAssignment] = []
        self._engine: QueryEngine | None = None
        self._explored_seen = 0
        self._next_atoms: list[Formula] | None = None

    @property
    def id(self) -> int:
        return self.rep.id

    @property
    def engine(self) -> QueryEngine:
        if self._engine is None:
            s = self.system
            self._engine = QueryEngine(
                s.encoder, self.xnf.formula, s.stats, s.budget, s.dimacs_dir
            )
        return self._engine

    @property
    def next_atoms(self) -> list[Formula]:
        if self._next_atoms is None:
            self._next_atoms = [
                a.child for a in fm.prop_atoms(self.xnf.formula) if a.kind == Kind.NEXT
            ]
        return self._next_atoms

    def __repr__(self):
        return f"TransitionState({fm.to_str(self.rep)})"

    # -- successor conditions over this state's Next atoms ---------------
    def covers(self, targets: Iterable[Formula]) -> Formula:
        """Propositional condition: the successor has every target as conjunct."""
        return successor_covers(self.next_atoms, targets)

    def exactly(self, target: Formula) -> Formula:
        """Propositional condition: the successor's representative is ``target``."""
        want = set(fm.conjuncts(target))
        extra = [
            fm.neg(fm.nxt(t)) for t in self.next_atoms if not set(fm.conjuncts(t)) <= want
        ]
        return fm.conj(self.covers(want), fm.conj(extra))

    def sync_explored(self, explored: Sequence[Formula]):
        eng = self.engine
        for psi in explored[self._explored_seen:]:
            cond = self.covers(fm.conjuncts(psi))
            if cond is not fm.FF:
                eng.add_constraint(fm.neg(cond))
        self._explored_seen = len(explored)

    def get_state(
        self,
        explored: Sequence[Formula] = (),
        extra: Formula | None = None,
        assumptions: Sequence[int] = (),
    ) -> StateAssignment | None:
        """A fresh assignment of xnf(rep) ∧ extra avoiding explored successors."""
        if self.rep is fm.FF:
            return None
        eng = self.engine
        self.sync_explored(explored)
        assume: list = list(assumptions)
        if extra is not None:
            assume.append(extra)
        if not eng.solve(assume):
            return None
        p = eng.assignment(self.system.props)
        self.history.append(p)
        eng.add_clause(p.blocking_clause())
        return p

    def release(self):
        if self._engine is not None:
            self._engine.close()
            self._engine = None


def successor_covers(next_atoms: Iterable[Formula], targets: Iterable[Formula]) -> Formula:
    atoms = list(next_atoms)
    parts = []
    for c in targets:
        parts.append(fm.disj(fm.nxt(t) for t in atoms if c in fm.conjuncts(t)))
    return fm.conj(parts)


class TransitionSystem:
    """Owns the encoder and bookkeeping shared by all states of one run."""

    def __init__(
        self,
        root: Formula,
        *,
        budget: int | None = DEFAULT_CONFLICT_BUDGET,
        dimacs_dir: str | None = None,
        props: Sequence[str] | None = None,
    ):
        self.root = root
        self.props = list(props) if props is not None else fm.atomic_props(root)
        self.encoder = Encoder()
        self.stats = Stats()
        self.budget = budget
        self.dimacs_dir = dimacs_dir

    def make_state(self, f: Formula) -> TransitionState:
        return TransitionState(self, fm.canonicalize(f))

    def engine_for(self, base: Formula, scope: Sequence[Formula] = ()) -> QueryEngine:
        return QueryEngine(self.encoder, base, self.stats, self.budget, scope=scope)


def make_state(f: Formula) -> TransitionState:
    f = fm.canonicalize(f)
    return TransitionSystem(f).make_state(f)


# ---------------------------------------------------------------------------
# Full construction, for export and cross-checking


@dataclass
class SystemGraph:
    initial: int
    cap: int
    states: dict[int, Formula] = field(default_factory=dict)
    edges: dict[int, list[tuple[StateAssignment, int]]] = field(default_factory=dict)
    complete: bool = True

    def edge_count(self) -> int:
        return sum(len(v) for v in self.edges.values())


def build_graph(
    f: Formula, cap: int = DEFAULT_GRAPH_CAP, system: TransitionSystem | None = None
) -> SystemGraph:
    f = fm.canonicalize(f)
    system = system or TransitionSystem(f)
    g = SystemGraph(initial=f.id, cap=cap)
    g.states[f.id] = f
    queue = deque([f])
    while queue:
        rep = queue.popleft()
        st = system.make_state(rep)
        out = g.edges.setdefault(rep.id, [])
        while (p := st.get_state()) is not None:
            succ = successor_formula(p)
            out.append((p, succ.id))
            if succ.id not in g.states:
                if len(g.states) >= cap:
                    st.release()
                    g.complete = False
                    raise CapExceeded(g)
                g.states[succ.id] = succ
                queue.append(succ)
        st.release()
    return g


def to_dot(g: SystemGraph) -> str:
    def q(s: str) -> str:
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = ["digraph T {", "  rankdir=LR;"]
    for sid, rep in sorted(g.states.items()):
        shape = "doublecircle" if sid == g.initial else "circle"
        lines.append(f"  s{sid} [shape={shape}, label={q(fm.to_str(rep))}];")
    for sid in sorted(g.edges):
        for p, tid in g.edges[sid]:
            label = p.trace_str()
            if p.tags:
                label += " v(" + ", ".join(fm.to_str(t) for t in sorted(p.tags)) + ")"
            lines.append(f"  s{sid} -> s{tid} [label={q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
