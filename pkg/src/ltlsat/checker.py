"""Depth-first lasso search over the transition system of a formula.

The search is an explicit-stack DFS.  Each stack level owns a
``TransitionState`` whose SAT engine hands out successor assignments one at a
time.  Closing a cycle onto the stack is accepted when every Until conjunct of
the loop head is immediately satisfied somewhere on the loop.

Cycles are also accumulated per strongly connected component (in the style of
Couvreur's emptiness check): an edge records the Untils it leaves pending, and
a component whose edges leave no Until pending everywhere contains an
accepting lasso even when no single simple cycle does.  States are marked
explored only when their whole component has been searched.  Passing
``simple_cycles=True`` disables the component bookkeeping, so only simple
cycles through the stack are recognised and every popped state is marked
explored.

Guided state generation (``heuristics=True``) layers three modes on top of
plain enumeration:

* elimination asks for assignments that immediately satisfy pending Untils;
* sat pursuing, once the pending set empties, asks for a successor equal to
  an earlier stack state;
* conflict analysis, when an Until is postponed by every assignment, builds
  a sequence of minimal unsat cores and either finds a path that satisfies
  the Until or proves that it is postponed forever (an invariant core).
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from . import formula as fm
from .formula import Formula, Kind
from .muscore import CoreQuery, SatisfiableQuery, minimal_core
from .satkernel import DEFAULT_CONFLICT_BUDGET, QueryEngine, StateAssignment, Stats
from .transys import TransitionState, TransitionSystem, successor_covers, successor_formula

HARVEST_K = 16
HARVEST_DEPTH = 2
MUS_BUDGET = 64

Row = tuple[tuple[str, bool], ...]


class CheckTimeout(TimeoutError):
    """The wall-clock limit of a check elapsed."""


class Mode(Enum):
    ELIMINATION = "elimination"
    SAT_PURSUING = "sat-pursuing"
    CONFLICT_ANALYZE = "conflict-analyze"


@dataclass(frozen=True)
class CheckOptions:
    heuristics: bool = True
    timeout_ms: int | None = None
    witness: bool = True
    budget: int | None = DEFAULT_CONFLICT_BUDGET
    dimacs_dir: str | None = None
    simple_cycles: bool = False
    harvest_k: int = HARVEST_K
    harvest_depth: int = HARVEST_DEPTH
    mus_budget: int = MUS_BUDGET


@dataclass(frozen=True)
class LassoWitness:
    prefix: tuple[Row, ...]
    loop: tuple[Row, ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("a lasso needs a non-empty loop")

    @staticmethod
    def row_str(row: Row) -> str:
        return "{" + ", ".join(n if v else "!" + n for n, v in row) + "}"

    def lines(self) -> list[str]:
        out = ["prefix:"] + ["  " + self.row_str(r) for r in self.prefix]
        out += ["loop:"] + ["  " + self.row_str(r) for r in self.loop]
        return out


@dataclass(frozen=True)
class Exhausted:
    """Every successor of the initial state was searched without success."""


Layer = frozenset[frozenset[Formula]]


@dataclass(frozen=True)
class InvariantCore:
    """θ = ⋀_j ⋁_{S∈Q_j} ⋀S, an invariant that postpones ``pending`` forever."""

    theta: Formula
    pending: Formula
    layers: tuple[Layer, ...]


@dataclass(frozen=True)
class FinitePath:
    """Assignments leading from the analysed state to one that satisfies the Until."""

    steps: tuple[StateAssignment, ...]


@dataclass
class Verdict:
    sat: bool
    witness: LassoWitness | None = None
    certificate: Exhausted | InvariantCore | None = None
    stats: Stats = field(default_factory=Stats)

    @property
    def label(self) -> str:
        return "sat" if self.sat else "unsat"


# ---------------------------------------------------------------------------
# Avoidable sequences of minimal unsat cores


@dataclass
class AvoidableSequence:
    pending: Formula
    rho: list[list[frozenset[Formula]]]
    pos: int = 0

    @classmethod
    def start(cls, pending: Formula) -> "AvoidableSequence":
        return cls(pending, [[frozenset([pending])]])

    def layers(self, upto: int | None = None) -> tuple[Layer, ...]:
        upto = self.pos if upto is None else upto
        return tuple(frozenset(q) for q in self.rho[: upto + 1])

    def extend(self, level: int, cores: Sequence[frozenset[Formula]]) -> bool:
        """Add cores to Q_level, dropping the now stale deeper layers."""
        if level < len(self.rho):
            del self.rho[level + 1:]
            q = self.rho[level]
        else:
            q = []
            self.rho.append(q)
        fresh = [c for c in cores if c not in q]
        q.extend(fresh)
        return bool(fresh)


def theta_formula(layers: Sequence[Layer]) -> Formula:
    return fm.conj(fm.disj(fm.conj(sorted(s)) for s in _sorted_layer(q)) for q in layers)


def theta_xnf(layers: Sequence[Layer]) -> Formula:
    return fm.conj(
        fm.disj(fm.conj(fm.xnf(c) for c in sorted(s)) for s in _sorted_layer(q)) for q in layers
    )


def theta_next(next_atoms: Sequence[Formula], layers: Sequence[Layer]) -> Formula:
    """Propositional condition: the successor is represented by θ."""
    return fm.conj(
        fm.disj(successor_covers(next_atoms, sorted(s)) for s in _sorted_layer(q)) for q in layers
    )


def _sorted_layer(q) -> list[frozenset[Formula]]:
    return sorted(q, key=lambda s: sorted(c.id for c in s))


def _next_atoms_of(f: Formula) -> list[Formula]:
    return [a.child for a in fm.prop_atoms(f) if a.kind == Kind.NEXT]


def represents(conjuncts: Sequence[Formula], layers: Sequence[Layer]) -> bool:
    cf = set(conjuncts)
    return all(any(s <= cf for s in q) for q in layers)


def verify_core(
    core: InvariantCore, system: TransitionSystem | None = None
) -> tuple[bool, bool]:
    """The two propositional checks an invariant core must pass.

    Returns (xnf(θ) ∧ ¬Xθ unsat, xnf(θ) ∧ v(pending) unsat).
    """
    x = theta_xnf(core.layers)
    system = system or TransitionSystem(x)
    eng = system.engine_for(x)
    try:
        inv = not eng.solve([fm.neg(theta_next(_next_atoms_of(x), core.layers))])
        stuck = not eng.solve([fm.tag(core.pending)])
    finally:
        eng.close()
    return inv, stuck


# ---------------------------------------------------------------------------
# Search state


@dataclass
class _Level:
    state: TransitionState
    num: int
    u_entry: frozenset[Formula]
    pursued: bool = False
    analyzed: bool = False
    plan: tuple[StateAssignment, ...] = ()


@dataclass
class _Root:
    num: int
    acc: frozenset[Formula] | None
    in_missing: frozenset[Formula] | None


class SearchFrame:
    """All bookkeeping of one search: stacks, explored set, obligations, mode."""

    def __init__(self, root: Formula, system: TransitionSystem, opts: CheckOptions):
        self.root = root
        self.system = system
        self.opts = opts
        self.visited_S: list[TransitionState] = []
        self.visited_P: list[StateAssignment] = []
        self.index: dict[int, int] = {}
        self.levels: list[_Level] = []
        self.explored: list[Formula] = []
        self.explored_ids: set[int] = set()
        self.U: set[Formula] = set()
        self.empty_positions: list[int] = []
        self.mode = Mode.ELIMINATION
        self.deadline = (
            time.monotonic() + opts.timeout_ms / 1000.0 if opts.timeout_ms is not None else None
        )
        # component bookkeeping
        self.counter = 0
        self.active: dict[int, int] = {}
        self.active_order: list[Formula] = []
        self.roots: list[_Root] = []
        self.edges: dict[int, list[tuple[StateAssignment, int]]] = {}
        self.obligations_of: dict[int, frozenset[Formula]] = {}
        self.pending_plan: tuple[StateAssignment, ...] = ()

    # -- small helpers ------------------------------------------------------
    def tick(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise CheckTimeout(f"timeout after {self.opts.timeout_ms} ms")

    @property
    def top(self) -> TransitionState:
        return self.visited_S[-1]

    def mark_explored(self, rep: Formula):
        if rep.id not in self.explored_ids:
            self.explored_ids.add(rep.id)
            self.explored.append(rep)

    def push(self, rep: Formula, u: frozenset[Formula], plan=(), in_missing=None):
        s = self.system.make_state(rep)
        pos = len(self.visited_S)
        self.visited_S.append(s)
        self.index[s.id] = pos
        num = self.counter
        self.counter += 1
        self.levels.append(_Level(s, num, u, plan=tuple(plan)))
        self.system.stats.states += 1
        self.active[s.id] = num
        self.active_order.append(s.rep)
        self.obligations_of[s.id] = s.obligations
        self.roots.append(_Root(num, None, in_missing))
        if not u and self.opts.heuristics:
            self.empty_positions.append(pos)

    def pop(self, dead: bool):
        lvl = self.levels.pop()
        s = self.visited_S.pop()
        del self.index[s.id]
        while len(self.visited_P) > max(len(self.visited_S) - 1, 0):
            self.visited_P.pop()
        while self.empty_positions and self.empty_positions[-1] >= len(self.visited_S):
            self.empty_positions.pop()
        s.release()
        if self.opts.simple_cycles:
            self.mark_explored(s.rep)
            return
        if self.roots and self.roots[-1].num == lvl.num:
            self.roots.pop()
            while self.active_order and self.active[self.active_order[-1].id] >= lvl.num:
                rep = self.active_order.pop()
                del self.active[rep.id]
                self.edges.pop(rep.id, None)
                self.mark_explored(rep)
        elif dead:
            self.mark_explored(s.rep)

    # -- component acceptance ----------------------------------------------
    def missing(self, src: TransitionState, p: StateAssignment) -> frozenset[Formula]:
        return frozenset(u for u in src.obligations if u not in p.tags)

    def merge(self, target_num: int, m: frozenset[Formula]) -> bool:
        while self.roots[-1].num > target_num:
            r = self.roots.pop()
            if r.acc is not None:
                m = m & r.acc
            if r.in_missing is not None:
                m = m & r.in_missing
        top = self.roots[-1]
        top.acc = m if top.acc is None else top.acc & m
        return not top.acc

    def component_witness(self) -> LassoWitness:
        r = self.roots[-1]
        members = {fid for fid, n in self.active.items() if n >= r.num}
        head = next(s for s in self.visited_S if self.active.get(s.id) == r.num)
        head_pos = self.index[head.id]
        inner = [
            (src, p, dst)
            for src in sorted(members)
            for p, dst in self.edges.get(src, ())
            if dst in members
        ]
        pending: set[Formula] = set()
        for src, p, _ in inner:
            pending |= self.obligations_of[src] - p.tags
        # one edge discharging each pending Until; together they leave nothing stuck
        chosen: list[tuple[int, StateAssignment, int]] = []
        for u in sorted(pending):
            e = next(x for x in inner if u not in self.obligations_of[x[0]] - x[1].tags)
            if e not in chosen:
                chosen.append(e)
        if not chosen:
            chosen.append(inner[0])
        loop: list[StateAssignment] = []
        cur = head.id
        for src, p, dst in chosen:
            loop += self._path(cur, src, inner)
            loop.append(p)
            cur = dst
        loop += self._path(cur, head.id, inner)
        prefix = [p.literals for p in self.visited_P[:head_pos]]
        return LassoWitness(tuple(prefix), tuple(p.literals for p in loop))

    @staticmethod
    def _path(a: int, b: int, inner) -> list[StateAssignment]:
        if a == b:
            return []
        prev: dict[int, tuple[int, StateAssignment]] = {}
        queue = deque([a])
        seen = {a}
        while queue:
            x = queue.popleft()
            for src, p, dst in inner:
                if src == x and dst not in seen:
                    seen.add(dst)
                    prev[dst] = (src, p)
                    if dst == b:
                        out = []
                        while dst != a:
                            src, p = prev[dst]
                            out.append(p)
                            dst = src
                        return out[::-1]
                    queue.append(dst)
        raise AssertionError("component is not strongly connected")


# ---------------------------------------------------------------------------
# Operations on a search frame


def is_accepting_loop(frame: SearchFrame, pos: int) -> bool:
    """Every Until of visited_S[pos] is satisfied by some assignment on the loop."""
    needed = frame.visited_S[pos].obligations
    got: set[Formula] = set()
    for p in frame.visited_P[pos:]:
        got |= p.tags
    return needed <= got


def elimination_step(frame: SearchFrame, s: TransitionState) -> StateAssignment | Mode:
    frame.mode = Mode.ELIMINATION
    if not frame.U:
        frame.mode = Mode.SAT_PURSUING
        return frame.mode
    want = [u for u in sorted(frame.U) if u in s.obligations]
    p = s.get_state(frame.explored, extra=fm.disj(fm.tag(u) for u in want)) if want else None
    if p is None:
        frame.mode = Mode.CONFLICT_ANALYZE
        return frame.mode
    frame.U -= p.tags
    return p


def pursuit_targets(frame: SearchFrame) -> list[Formula]:
    here = len(frame.visited_S) - 1
    earlier = [i for i in frame.empty_positions if i < here]
    if not earlier:
        return [frame.visited_S[0].rep]
    return [frame.visited_S[i].rep for i in range(earlier[-1] + 1)]


def sat_pursuing_step(frame: SearchFrame, s: TransitionState) -> StateAssignment | Mode:
    frame.mode = Mode.SAT_PURSUING
    cond = fm.disj(s.exactly(t) for t in pursuit_targets(frame))
    p = s.get_state(frame.explored, extra=cond) if cond is not fm.FF else None
    if p is None:
        frame.mode = Mode.ELIMINATION
        return frame.mode
    return p


def harvest(
    frame: SearchFrame, s: TransitionState, k: int, depth: int
) -> list[tuple[Formula, tuple[StateAssignment, ...]]]:
    """Up to k states reachable from s within ``depth`` steps, with the paths to them."""
    system = frame.system
    out = [(s.rep, ())]
    seen = {s.id}
    queue = deque([(s.rep, (), 0)])
    while queue and len(out) < k:
        rep, path, d = queue.popleft()
        if d >= depth:
            continue
        x = fm.xnf(rep)
        eng = system.engine_for(x)
        try:
            for psi in frame.explored:
                cond = successor_covers(_next_atoms_of(x), fm.conjuncts(psi))
                if cond is not fm.FF:
                    eng.add_constraint(fm.neg(cond))
            while len(out) < k and eng.solve():
                frame.tick()
                p = eng.assignment(system.props)
                eng.add_clause(
                    [-l for l in sorted(p.values, key=abs)
                     if system.encoder.atom_of.get(abs(l)) is not None
                     and system.encoder.atom_of[abs(l)].kind == Kind.NEXT]
                    or [-system.encoder.true_var]
                )
                succ = successor_formula(p)
                if succ.id in seen or succ is fm.TT:
                    continue
                seen.add(succ.id)
                system.stats.harvested += 1
                out.append((succ, path + (p,)))
                queue.append((succ, path + (p,), d + 1))
        finally:
            eng.close()
    return out


def _invariant(system: TransitionSystem, seq: AvoidableSequence, conjuncts) -> InvariantCore | None:
    layers = seq.layers()
    if not represents(conjuncts, layers):
        return None
    core = InvariantCore(theta_formula(layers), seq.pending, layers)
    inv, stuck = verify_core(core, system)
    return core if inv and stuck else None


def conflict_analyze(
    frame: SearchFrame, s: TransitionState, pending: Formula
) -> FinitePath | InvariantCore | None:
    """Either a path on which ``pending`` is satisfied, or a proof that it never is.

    Returns None when the analysis does not apply (the postponement is caused
    by history blocking) or when the core budget runs out.
    """
    frame.mode = Mode.CONFLICT_ANALYZE
    system = frame.system
    opts = frame.opts
    probe = system.engine_for(s.xnf.formula)
    try:
        if probe.solve([fm.tag(pending)]):
            return None
    finally:
        probe.close()

    sts = harvest(frame, s, opts.harvest_k, opts.harvest_depth)
    engines: dict[int, QueryEngine] = {}
    seq = AvoidableSequence.start(pending)
    mus_calls = 0
    try:
        hit = _invariant(system, seq, s.conjuncts)
        if hit is not None:
            return hit
        while True:
            frame.tick()
            layers = seq.layers()
            found = None
            for rep, path in sts:
                eng = engines.get(rep.id)
                if eng is None:
                    eng = engines[rep.id] = system.engine_for(fm.xnf(rep))
                cond = theta_next(_next_atoms_of(fm.xnf(rep)), layers)
                if eng.solve([fm.neg(cond)]):
                    found = (path, eng.assignment(system.props))
                    break
            if found is not None:
                path, p = found
                if seq.pos == 0:
                    return FinitePath(path + (p,))
                succ = successor_formula(p)
                if succ is fm.TT:
                    return FinitePath(path + (p,))
                if all(r.id != succ.id for r, _ in sts):
                    sts.append((succ, path + (p,)))
                seq.pos -= 1
                continue
            # every collected state is forced back into θ_pos: extend the sequence
            cores = []
            tx = theta_xnf(layers)
            for rep, _ in sts:
                if mus_calls >= opts.mus_budget:
                    return None
                nexts = _next_atoms_of(fm.conj(fm.xnf(rep), tx))
                constraint = fm.conj(tx, fm.neg(theta_next(nexts, layers)))
                try:
                    mus_calls += 1
                    core = minimal_core(CoreQuery(fm.conjuncts(rep), constraint), system)
                except SatisfiableQuery:
                    continue
                if core not in cores:
                    cores.append(core)
            if not cores:
                return None
            seq.extend(seq.pos + 1, cores)
            seq.pos += 1
            hit = _invariant(system, seq, s.conjuncts)
            if hit is not None:
                return hit
            if mus_calls >= opts.mus_budget:
                return None
    finally:
        for eng in engines.values():
            eng.close()


# ---------------------------------------------------------------------------
# Driver


def _guided(frame: SearchFrame, lvl: _Level) -> StateAssignment | InvariantCore | None:
    s = lvl.state
    frame.U = set(lvl.u_entry)
    if not frame.U:
        if not lvl.pursued:
            lvl.pursued = True
            res = sat_pursuing_step(frame, s)
            if isinstance(res, StateAssignment):
                return res
        frame.U = set(s.obligations)
    if frame.U:
        res = elimination_step(frame, s)
        if isinstance(res, StateAssignment):
            return res
        if res is Mode.CONFLICT_ANALYZE and not lvl.analyzed:
            lvl.analyzed = True
            pending = min(frame.U & s.obligations, key=lambda f: f.id, default=None)
            out = conflict_analyze(frame, s, pending) if pending is not None else None
            if isinstance(out, InvariantCore):
                return out
            if isinstance(out, FinitePath):
                lvl.plan = out.steps
                p = _follow_plan(frame, lvl)
                if p is not None:
                    return p
    frame.mode = Mode.ELIMINATION
    p = s.get_state(frame.explored)
    if p is not None:
        frame.U -= p.tags
    return p


def _follow_plan(frame: SearchFrame, lvl: _Level) -> StateAssignment | None:
    step, rest = lvl.plan[0], lvl.plan[1:]
    lvl.plan = ()
    p = lvl.state.get_state(frame.explored, assumptions=sorted(step.values, key=abs))
    if p is None:
        return None
    frame.U -= p.tags
    frame.pending_plan = rest
    return p


def _next(frame: SearchFrame, lvl: _Level) -> StateAssignment | InvariantCore | None:
    frame.pending_plan = ()
    if lvl.plan:
        frame.U = set(lvl.u_entry)
        p = _follow_plan(frame, lvl)
        if p is not None:
            return p
    if not frame.opts.heuristics:
        return lvl.state.get_state(frame.explored)
    return _guided(frame, lvl)


def _row_false(props: Sequence[str]) -> Row:
    return tuple((n, False) for n in sorted(props))


def check(f: Formula, options: CheckOptions | None = None) -> Verdict:
    """Decide satisfiability of ``f``; raises CheckTimeout or ResourceLimit."""
    opts = options or CheckOptions()
    root = fm.canonicalize(fm.to_nnf(f))
    system = TransitionSystem(root, budget=opts.budget, dimacs_dir=opts.dimacs_dir)
    if root is fm.TT:
        return Verdict(True, LassoWitness((), (_row_false(system.props),)), None, system.stats)
    if root is fm.FF:
        return Verdict(False, None, Exhausted(), system.stats)
    frame = SearchFrame(root, system, opts)
    frame.push(root, root_obligations(root) if opts.heuristics else frozenset())
    try:
        return _search(frame)
    finally:
        for s in frame.visited_S:
            s.release()


def root_obligations(root: Formula) -> frozenset[Formula]:
    return frozenset(c for c in fm.conjuncts(root) if c.kind == Kind.UNTIL)


def _search(frame: SearchFrame) -> Verdict:
    system = frame.system
    strict = frame.opts.simple_cycles
    while frame.visited_S:
        frame.tick()
        lvl = frame.levels[-1]
        s = lvl.state
        p = _next(frame, lvl)
        if isinstance(p, InvariantCore):
            if len(frame.visited_S) == 1:
                return Verdict(False, None, p, system.stats)
            frame.pop(dead=True)
            continue
        if p is None:
            frame.pop(dead=False)
            continue
        succ = successor_formula(p)
        if succ is fm.TT:
            prefix = [q.literals for q in frame.visited_P] + [p.literals]
            loop = (_row_false(system.props),)
            return Verdict(True, LassoWitness(tuple(prefix), loop), None, system.stats)
        if succ.id in frame.explored_ids:
            continue
        if succ.id in frame.index:
            pos = frame.index[succ.id]
            frame.visited_P.append(p)
            if is_accepting_loop(frame, pos):
                prefix = tuple(q.literals for q in frame.visited_P[:pos])
                loop = tuple(q.literals for q in frame.visited_P[pos:])
                return Verdict(True, LassoWitness(prefix, loop), None, system.stats)
            frame.visited_P.pop()
        if not strict and succ.id in frame.active:
            frame.edges.setdefault(s.id, []).append((p, succ.id))
            if frame.merge(frame.active[succ.id], frame.missing(s, p)):
                frame.visited_P.append(p)
                w = frame.component_witness()
                return Verdict(True, w, None, system.stats)
            continue
        if succ.id in frame.index:
            continue
        if not strict:
            frame.edges.setdefault(s.id, []).append((p, succ.id))
        frame.visited_P.append(p)
        frame.push(
            succ,
            frozenset(frame.U) if frame.opts.heuristics else frozenset(),
            plan=frame.pending_plan,
            in_missing=frame.missing(s, p),
        )
    return Verdict(False, None, Exhausted(), system.stats)
