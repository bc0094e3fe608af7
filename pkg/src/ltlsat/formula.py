"""Hash-consed LTL syntax trees.

Every formula is interned in a process-wide table, so structural equality is
object identity and each node carries a stable integer id.  ``And``/``Or``
nodes are n-ary with children sorted by id, deduplicated and free of the
boolean constants.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable


class Kind(IntEnum):
    TRUE = 0
    FALSE = 1
    ATOM = 2
    TAG = 3  # v(psi): immediate-satisfaction marker of an Until
    NOT = 4
    AND = 5
    OR = 6
    NEXT = 7
    UNTIL = 8
    RELEASE = 9


class Formula:
    __slots__ = ("id", "kind", "name", "children", "__weakref__")

    def __init__(self, id: int, kind: Kind, name: str | None, children: tuple):
        self.id = id
        self.kind = kind
        self.name = name
        self.children = children

    def __hash__(self):
        return self.id

    def __eq__(self, other):
        return self is other

    def __lt__(self, other: "Formula"):
        return self.id < other.id

    def __repr__(self):
        return f"<{self.id}: {to_str(self)}>"

    def __str__(self):
        return to_str(self)

    # -- convenience accessors -------------------------------------------
    @property
    def child(self) -> "Formula":
        return self.children[0]

    @property
    def lhs(self) -> "Formula":
        return self.children[0]

    @property
    def rhs(self) -> "Formula":
        return self.children[1]

    @property
    def is_literal(self) -> bool:
        return self.kind == Kind.ATOM or (
            self.kind == Kind.NOT and self.child.kind == Kind.ATOM
        )

    @property
    def is_temporal(self) -> bool:
        return self.kind in (Kind.NEXT, Kind.UNTIL, Kind.RELEASE)


_table: dict[tuple, Formula] = {}
_nodes: list[Formula] = []
_lock = threading.Lock()


def _intern(kind: Kind, name: str | None = None, children: tuple = ()) -> Formula:
    key = (kind, name, tuple(c.id for c in children))
    f = _table.get(key)
    if f is not None:
        return f
    with _lock:
        f = _table.get(key)
        if f is None:
            f = Formula(len(_nodes), kind, name, children)
            _nodes.append(f)
            _table[key] = f
    return f


def by_id(i: int) -> Formula:
    return _nodes[i]


TT = _intern(Kind.TRUE)
FF = _intern(Kind.FALSE)


def atom(name: str) -> Formula:
    return _intern(Kind.ATOM, name)


def tag(until: Formula) -> Formula:
    assert until.kind == Kind.UNTIL
    return _intern(Kind.TAG, None, (until,))


def neg(f: Formula) -> Formula:
    """Raw negation node; ``to_nnf`` pushes it down to the atoms."""
    if f is TT:
        return FF
    if f is FF:
        return TT
    return _intern(Kind.NOT, None, (f,))


def _nary(kind: Kind, items: Iterable[Formula]) -> Formula:
    unit, zero = (TT, FF) if kind == Kind.AND else (FF, TT)
    seen: dict[int, Formula] = {}
    for f in items:
        if f.kind == kind:
            for c in f.children:
                seen[c.id] = c
        elif f is zero:
            return zero
        elif f is not unit:
            seen[f.id] = f
    if not seen:
        return unit
    if len(seen) == 1:
        return next(iter(seen.values()))
    return _intern(kind, None, tuple(seen[i] for i in sorted(seen)))


def conj(*items: Formula | Iterable[Formula]) -> Formula:
    return _nary(Kind.AND, _flat_args(items))


def disj(*items: Formula | Iterable[Formula]) -> Formula:
    return _nary(Kind.OR, _flat_args(items))


def _flat_args(items):
    for it in items:
        if isinstance(it, Formula):
            yield it
        else:
            yield from it


def nxt(f: Formula) -> Formula:
    return _intern(Kind.NEXT, None, (f,))


def until(lhs: Formula, rhs: Formula) -> Formula:
    return _intern(Kind.UNTIL, None, (lhs, rhs))


def release(lhs: Formula, rhs: Formula) -> Formula:
    return _intern(Kind.RELEASE, None, (lhs, rhs))


def eventually(f: Formula) -> Formula:
    return until(TT, f)


def always(f: Formula) -> Formula:
    return release(FF, f)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(disj(neg(a), b), disj(a, neg(b)))


def conjuncts(f: Formula) -> tuple[Formula, ...]:
    """CF(f): the top-level conjuncts (``tt`` has none)."""
    if f.kind == Kind.AND:
        return f.children
    if f is TT:
        return ()
    return (f,)


# ---------------------------------------------------------------------------
# Normal forms


def to_nnf(f: Formula) -> Formula:
    memo: dict[tuple[int, bool], Formula] = {}

    def go(g: Formula, pos: bool) -> Formula:
        key = (g.id, pos)
        r = memo.get(key)
        if r is not None:
            return r
        k = g.kind
        if k == Kind.TRUE:
            r = TT if pos else FF
        elif k == Kind.FALSE:
            r = FF if pos else TT
        elif k in (Kind.ATOM, Kind.TAG):
            r = g if pos else _intern(Kind.NOT, None, (g,))
        elif k == Kind.NOT:
            r = go(g.child, not pos)
        elif k == Kind.AND:
            parts = [go(c, pos) for c in g.children]
            r = conj(parts) if pos else disj(parts)
        elif k == Kind.OR:
            parts = [go(c, pos) for c in g.children]
            r = disj(parts) if pos else conj(parts)
        elif k == Kind.NEXT:
            r = nxt(go(g.child, pos))
        elif k == Kind.UNTIL:
            l, rr = go(g.lhs, pos), go(g.rhs, pos)
            r = until(l, rr) if pos else release(l, rr)
        else:
            l, rr = go(g.lhs, pos), go(g.rhs, pos)
            r = release(l, rr) if pos else until(l, rr)
        memo[key] = r
        return r

    return go(f, True)


def is_nnf(f: Formula) -> bool:
    return all(
        g.kind != Kind.NOT or g.child.kind in (Kind.ATOM, Kind.TAG)
        for g in subformulas(f)
    )


def canonicalize(f: Formula) -> Formula:
    """Rebuild ``f`` through the smart constructors.

    Flattens nested And/Or, sorts and dedupes children and absorbs the
    constants.  The constructors already keep every interned node in this
    shape, so this is a fixpoint on anything built through the module API.
    """
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g.id)
        if r is not None:
            return r
        k = g.kind
        if k == Kind.AND:
            r = conj(go(c) for c in g.children)
        elif k == Kind.OR:
            r = disj(go(c) for c in g.children)
        elif k == Kind.NOT:
            r = neg(go(g.child))
        elif k == Kind.NEXT:
            r = nxt(go(g.child))
        elif k == Kind.UNTIL:
            r = until(go(g.lhs), go(g.rhs))
        elif k == Kind.RELEASE:
            r = release(go(g.lhs), go(g.rhs))
        else:
            r = g
        memo[g.id] = r
        return r

    return go(f)


# ---------------------------------------------------------------------------
# Structural queries


def subformulas(f: Formula) -> list[Formula]:
    """All distinct nodes of the DAG below ``f`` (including ``f``)."""
    seen: set[int] = set()
    out: list[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if g.id in seen:
            continue
        seen.add(g.id)
        out.append(g)
        stack.extend(g.children)
    out.sort()
    return out


def atomic_props(f: Formula) -> list[str]:
    return sorted({g.name for g in subformulas(f) if g.kind == Kind.ATOM})


def size(f: Formula) -> int:
    """Tree size with literals counted as one node."""
    if f.is_literal or not f.children:
        return 1
    return 1 + sum(size(c) for c in f.children)


def closure(f: Formula) -> tuple[Formula, ...]:
    """cl(f): subformulas plus ``X psi`` for every Until/Release ``psi``."""
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        stack.extend(g.children)
        if g.kind in (Kind.UNTIL, Kind.RELEASE):
            stack.append(nxt(g))
    return tuple(sorted(out))


PROP_ATOM_KINDS = frozenset((Kind.ATOM, Kind.TAG, Kind.NEXT, Kind.UNTIL, Kind.RELEASE))


def prop_atoms(f: Formula) -> tuple[Formula, ...]:
    """The propositional atoms of ``f``: its maximal non-boolean subformulas."""
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind in PROP_ATOM_KINDS:
            out.add(g)
        elif g.kind in (Kind.NOT, Kind.AND, Kind.OR):
            stack.extend(g.children)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# neXt normal form


@dataclass(frozen=True)
class XnfFormula:
    formula: Formula
    tags: dict[Formula, Formula] = field(default_factory=dict)  # until -> v(until)


_xnf_memo: dict[int, Formula] = {}


def _xnf(f: Formula) -> Formula:
    r = _xnf_memo.get(f.id)
    if r is not None:
        return r
    k = f.kind
    if k == Kind.AND:
        r = conj(_xnf(c) for c in f.children)
    elif k == Kind.OR:
        r = disj(_xnf(c) for c in f.children)
    elif k == Kind.UNTIL:
        v = tag(f)
        r = disj(
            conj(v, _xnf(f.rhs)),
            conj(_intern(Kind.NOT, None, (v,)), _xnf(f.lhs), nxt(f)),
        )
    elif k == Kind.RELEASE:
        r = conj(_xnf(f.rhs), disj(_xnf(f.lhs), nxt(f)))
    else:
        # constants, literals and Next formulas are already in XNF
        r = f
    _xnf_memo[f.id] = r
    return r


def to_xnf(f: Formula) -> XnfFormula:
    g = _xnf(f)
    tags = {t.child: t for t in subformulas(g) if t.kind == Kind.TAG}
    return XnfFormula(g, tags)


def xnf(f: Formula) -> Formula:
    return _xnf(f)


def strip_tags(f: Formula | XnfFormula) -> Formula:
    """Replace every v(psi) literal by ``tt`` (the untagged expansion)."""
    if isinstance(f, XnfFormula):
        f = f.formula
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g.id)
        if r is not None:
            return r
        k = g.kind
        if k == Kind.TAG or (k == Kind.NOT and g.child.kind == Kind.TAG):
            r = TT
        elif k == Kind.AND:
            r = conj(go(c) for c in g.children)
        elif k == Kind.OR:
            r = disj(go(c) for c in g.children)
        else:
            r = g  # Next bodies never contain tags
        memo[g.id] = r
        return r

    return go(f)


def xnf_size(f: Formula) -> int:
    """Tree size of a propositional skeleton: Next and literals count one,
    tag literals count zero."""
    k = f.kind
    if k == Kind.TAG or (k == Kind.NOT and f.child.kind == Kind.TAG):
        return 0
    if f.is_literal or not f.children or f.kind == Kind.NEXT:
        return 1
    return 1 + sum(xnf_size(c) for c in f.children)


def expanded_untils(f: Formula) -> int:
    """Number of Until occurrences outside the scope of Next."""
    if f.kind == Kind.NEXT or not f.children:
        return 0
    own = 1 if f.kind == Kind.UNTIL else 0
    return own + sum(expanded_untils(c) for c in f.children)


# ---------------------------------------------------------------------------
# Printing


def _simple(f: Formula) -> bool:
    return not f.children or f.is_literal or f.kind == Kind.TAG


def to_str(f: Formula) -> str:
    k = f.kind
    if k == Kind.TRUE:
        return "true"
    if k == Kind.FALSE:
        return "false"
    if k == Kind.ATOM:
        return f.name
    if k == Kind.TAG:
        return f"v[{to_str(f.child)}]"
    if k == Kind.NOT:
        return "!" + _wrap(f.child)
    if k == Kind.NEXT:
        return "X " + _wrap(f.child)
    if k == Kind.UNTIL and f.lhs is TT:
        return "F " + _wrap(f.rhs)
    if k == Kind.RELEASE and f.lhs is FF:
        return "G " + _wrap(f.rhs)
    op = {Kind.AND: " & ", Kind.OR: " | ", Kind.UNTIL: " U ", Kind.RELEASE: " R "}[k]
    return op.join(_wrap(c) for c in f.children)


def _wrap(f: Formula) -> str:
    s = to_str(f)
    return s if _simple(f) else f"({s})"
