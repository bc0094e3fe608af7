"""Brute-force reference semantics, independent of the SAT-based solver.

Only the formula module is shared with the solver.  Three tools live here:

* ``eval_lasso`` computes the exact truth value of a formula on an
  ultimately periodic word by fixpoint iteration over its positions;
* ``enumerate_assignments`` lists every propositional assignment of a
  formula (subsets of its closure plus a literal row);
* ``oracle_check`` decides satisfiability by building a state graph and
  looking for a reachable strongly connected component in which no Until
  stays pending on every edge.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx

from . import formula as fm
from .formula import Formula, Kind

DEFAULT_BOUND = 16

Row = tuple[tuple[str, bool], ...]


class OracleBoundExceeded(ValueError):
    """The closure of the formula is larger than the configured bound."""


def _row(r) -> dict[str, bool]:
    if isinstance(r, Mapping):
        return dict(r)
    return dict(r)


@dataclass(frozen=True)
class UltimatelyPeriodicWord:
    prefix: tuple[Row, ...]
    loop: tuple[Row, ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("loop must be non-empty")

    @classmethod
    def of(cls, prefix: Iterable, loop: Iterable) -> "UltimatelyPeriodicWord":
        def norm(r) -> Row:
            return tuple(sorted(_row(r).items()))

        return cls(tuple(norm(r) for r in prefix), tuple(norm(r) for r in loop))

    @property
    def positions(self) -> list[dict[str, bool]]:
        return [_row(r) for r in self.prefix + self.loop]


# ---------------------------------------------------------------------------
# Semantics on lassos


def eval_lasso(w, f: Formula) -> bool:
    """Truth of ``f`` at position 0 of prefix·loop^ω.

    ``w`` is anything with ``prefix`` and ``loop`` sequences of rows, where a
    row is a mapping or a sequence of (name, value) pairs.  Atoms missing
    from a row read as false.
    """
    rows = [_row(r) for r in list(w.prefix) + list(w.loop)]
    n = len(rows)
    back = len(w.prefix)
    succ = [i + 1 if i + 1 < n else back for i in range(n)]
    val: dict[int, list[bool]] = {}

    def get(g: Formula) -> list[bool]:
        return val[g.id]

    for g in fm.subformulas(f):  # children have smaller ids than parents
        k = g.kind
        if k == Kind.TRUE:
            v = [True] * n
        elif k == Kind.FALSE:
            v = [False] * n
        elif k == Kind.ATOM:
            v = [bool(r.get(g.name, False)) for r in rows]
        elif k == Kind.NOT:
            v = [not x for x in get(g.child)]
        elif k == Kind.AND:
            kids = [get(c) for c in g.children]
            v = [all(c[i] for c in kids) for i in range(n)]
        elif k == Kind.OR:
            kids = [get(c) for c in g.children]
            v = [any(c[i] for c in kids) for i in range(n)]
        elif k == Kind.NEXT:
            c = get(g.child)
            v = [c[succ[i]] for i in range(n)]
        elif k == Kind.UNTIL:
            l, r = get(g.lhs), get(g.rhs)
            v = [False] * n
            for _ in range(n + 1):
                v = [r[i] or (l[i] and v[succ[i]]) for i in range(n)]
        elif k == Kind.RELEASE:
            l, r = get(g.lhs), get(g.rhs)
            v = [True] * n
            for _ in range(n + 1):
                v = [r[i] and (l[i] or v[succ[i]]) for i in range(n)]
        else:
            raise ValueError(f"cannot evaluate {k.name} on a word")
        val[g.id] = v
    return val[f.id][0]


# ---------------------------------------------------------------------------
# Propositional assignments


def literal_set(props: Sequence[str]) -> list[Formula]:
    out = []
    for p in props:
        a = fm.atom(p)
        out += [a, fm.neg(a)]
    return out


def is_assignment(a: frozenset[Formula], props: Sequence[str]) -> bool:
    """The local consistency rules for a subset of closure ∪ literals."""
    for p in props:
        x = fm.atom(p)
        if (x in a) == (fm.neg(x) in a):
            return False
    for g in a:
        k = g.kind
        if k == Kind.FALSE:
            return False
        if k == Kind.AND and not all(c in a for c in g.children):
            return False
        if k == Kind.OR and not any(c in a for c in g.children):
            return False
        if k == Kind.UNTIL and not (g.rhs in a or (g.lhs in a and fm.nxt(g) in a)):
            return False
        if k == Kind.RELEASE and not (g.rhs in a and (g.lhs in a or fm.nxt(g) in a)):
            return False
    return True


def _universe(f: Formula, bound: int) -> tuple[list[Formula], list[str]]:
    cl = fm.closure(f)
    if len(cl) > bound:
        raise OracleBoundExceeded(f"|cl| = {len(cl)} exceeds bound {bound}")
    props = fm.atomic_props(f)
    lits = set(literal_set(props))
    free = [g for g in cl if g not in lits and g.kind != Kind.TRUE]
    return free, props


def all_assignments(f: Formula, bound: int = DEFAULT_BOUND) -> list[frozenset[Formula]]:
    """Every propositional assignment over cl(f) and the literal rows of f's atoms."""
    free, props = _universe(f, bound)
    const = {fm.TT} if fm.TT in fm.closure(f) else set()
    out = []
    for row in itertools.product((True, False), repeat=len(props)):
        base = {fm.atom(p) if v else fm.neg(fm.atom(p)) for p, v in zip(props, row)}
        for bits in itertools.product((False, True), repeat=len(free)):
            a = frozenset(base | const | {g for g, b in zip(free, bits) if b})
            if is_assignment(a, props):
                out.append(a)
    return out


def enumerate_assignments(f: Formula, bound: int = DEFAULT_BOUND) -> set[frozenset[Formula]]:
    """All assignments that propositionally satisfy f (every conjunct of f is a member)."""
    f = fm.to_nnf(f)
    need = set(fm.conjuncts(f))
    return {a for a in all_assignments(f, bound) if need <= a}


def immediate(a: frozenset[Formula]) -> frozenset[Formula]:
    """Untils and Releases of ``a`` satisfied immediately rather than postponed."""
    out = set()
    for g in a:
        if g.kind == Kind.UNTIL and g.rhs in a:
            out.add(g)
        elif g.kind == Kind.RELEASE and g.lhs in a:
            out.add(g)
    return frozenset(out)


def postponed_untils(a: frozenset[Formula]) -> frozenset[Formula]:
    return frozenset(g for g in a if g.kind == Kind.UNTIL and g.rhs not in a)


# ---------------------------------------------------------------------------
# Satisfiability


@dataclass
class OracleVerdict:
    sat: bool
    word: UltimatelyPeriodicWord | None = None
    states: int = 0

    @property
    def label(self) -> str:
        return "sat" if self.sat else "unsat"


@dataclass
class _Graph:
    init: object
    edges: dict = field(default_factory=dict)  # node -> list of (row, missing, node)


def _expansions(obligations: frozenset[Formula]) -> list[tuple[Row, frozenset[Formula], frozenset[Formula]]]:
    """Minimal tableau expansions of a set of formulas that must hold now.

    Each result is (literal row, formulas asserted now, formulas required next).
    """
    out = []
    seen = set()

    def go(todo: list[Formula], now: frozenset, row: dict, nexts: frozenset):
        while todo:
            g = todo.pop()
            if g in now:
                continue
            now = now | {g}
            k = g.kind
            if k == Kind.TRUE:
                continue
            if k == Kind.FALSE:
                return
            if k == Kind.ATOM or (k == Kind.NOT and g.child.kind == Kind.ATOM):
                name = g.name if k == Kind.ATOM else g.child.name
                want = k == Kind.ATOM
                if row.get(name, want) != want:
                    return
                row = {**row, name: want}
            elif k == Kind.AND:
                todo.extend(g.children)
            elif k == Kind.NEXT:
                nexts = nexts | {g.child}
            elif k == Kind.OR:
                for c in g.children:
                    go(todo + [c], now, row, nexts)
                return
            elif k == Kind.UNTIL:
                go(todo + [g.rhs], now, row, nexts)
                go(todo + [g.lhs, fm.nxt(g)], now, row, nexts)
                return
            elif k == Kind.RELEASE:
                go(todo + [g.rhs, g.lhs], now, row, nexts)
                go(todo + [g.rhs, fm.nxt(g)], now, row, nexts)
                return
            else:
                raise ValueError(f"formula not in negation normal form: {fm.to_str(g)}")
        key = (tuple(sorted(row.items())), now, nexts)
        if key not in seen:
            seen.add(key)
            out.append((key[0], now, nexts))

    go(sorted(obligations), frozenset(), {}, frozenset())
    return out


def _reduced_graph(f: Formula) -> _Graph:
    init = frozenset([f])
    g = _Graph(init)
    queue = deque([init])
    g.edges[init] = []
    while queue:
        node = queue.popleft()
        for row, now, nexts in _expansions(node):
            missing = postponed_untils(now)
            g.edges[node].append((row, missing, nexts))
            if nexts not in g.edges:
                g.edges[nexts] = []
                queue.append(nexts)
    return g


def _full_graph(f: Formula, bound: int) -> _Graph:
    states = all_assignments(f, bound)
    props = fm.atomic_props(f)
    need = set(fm.conjuncts(f))
    g = _Graph("init")
    g.edges["init"] = []
    nexts_of = {s: {x.child for x in s if x.kind == Kind.NEXT} for s in states}
    for s in states:
        g.edges[s] = []
    for s in states:
        row = tuple((p, fm.atom(p) in s) for p in props)
        missing = postponed_untils(s)
        for t in states:
            if nexts_of[s] <= t:
                g.edges[s].append((row, missing, t))
    # a virtual initial node with an edge into every initial state
    for s in states:
        if need <= s:
            g.edges["init"].append(((), frozenset(), s))
    return g


def _accepting_component(g: _Graph):
    dg = nx.DiGraph()
    dg.add_nodes_from(g.edges)
    for u, es in g.edges.items():
        for _, _, v in es:
            dg.add_edge(u, v)
    dg = dg.subgraph(nx.descendants(dg, g.init) | {g.init})
    for comp in nx.strongly_connected_components(dg):
        inner = [
            (u, row, missing, v)
            for u in comp
            for row, missing, v in g.edges[u]
            if v in comp and u != "init"
        ]
        if not inner:
            continue
        stuck = None
        for _, _, missing, _ in inner:
            stuck = set(missing) if stuck is None else stuck & missing
            if not stuck:
                break
        if not stuck:
            return comp, inner
    return None


def _bfs_path(g: _Graph, start, goal, allowed=None) -> list[Row]:
    if start == goal:
        return []
    prev = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for row, _, v in g.edges[u]:
            if v in prev or (allowed is not None and v not in allowed):
                continue
            prev[v] = (u, row)
            if v == goal:
                out = []
                while prev[v] is not None:
                    u, row = prev[v]
                    out.append(row)
                    v = u
                return out[::-1]
            queue.append(v)
    raise AssertionError("goal not reachable")


def oracle_check(f: Formula, bound: int = DEFAULT_BOUND, mode: str = "reduced") -> OracleVerdict:
    """Decide satisfiability of ``f`` by explicit state-graph search.

    ``mode="reduced"`` builds states from minimal tableau expansions (fast);
    ``mode="full"`` builds every propositional assignment and every
    transition between them (exponential, for tiny formulas only).
    """
    f = fm.canonicalize(fm.to_nnf(f))
    if len(fm.closure(f)) > bound:
        raise OracleBoundExceeded(f"|cl| = {len(fm.closure(f))} exceeds bound {bound}")
    g = _reduced_graph(f) if mode == "reduced" else _full_graph(f, bound)
    found = _accepting_component(g)
    nstates = len(g.edges) - (mode == "full")
    if found is None:
        return OracleVerdict(False, None, nstates)
    comp, inner = found
    head = inner[0][0]
    pending = set().union(*(m for _, _, m, _ in inner))
    chosen = []
    for u in sorted(pending, key=lambda x: x.id):
        e = next(e for e in inner if u not in e[2])
        if e not in chosen:
            chosen.append(e)
    if not chosen:
        chosen.append(inner[0])
    prefix = _bfs_path(g, g.init, head)
    loop: list[Row] = []
    cur = head
    for u, row, _, v in chosen:
        loop += _bfs_path(g, cur, u, comp)
        loop.append(row)
        cur = v
    loop += _bfs_path(g, cur, head, comp)
    if mode == "full":
        prefix = prefix[1:]  # drop the virtual initial edge
    props = fm.atomic_props(f)

    def fill(r: Row) -> dict[str, bool]:
        d = dict.fromkeys(props, False)
        d.update(dict(r))
        return d

    word = UltimatelyPeriodicWord.of([fill(r) for r in prefix], [fill(r) for r in loop])
    return OracleVerdict(True, word, nstates)
