from __future__ import annotations

import itertools

import pytest

from ltlsat import formula as fm
from ltlsat.formula import Formula, Kind


def prop_eval(f: Formula, val: dict[Formula, bool]) -> bool:
    """Truth of a propositional skeleton; leaves (atoms, tags, Next, Until, Release) read from val."""
    k = f.kind
    if k == Kind.TRUE:
        return True
    if k == Kind.FALSE:
        return False
    if k == Kind.NOT:
        return not prop_eval(f.child, val)
    if k == Kind.AND:
        return all(prop_eval(c, val) for c in f.children)
    if k == Kind.OR:
        return any(prop_eval(c, val) for c in f.children)
    return val[f]


def leaves(f: Formula) -> list[Formula]:
    out: set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind in fm.PROP_ATOM_KINDS:
            out.add(g)
        elif g.kind in (Kind.AND, Kind.OR, Kind.NOT):
            stack.extend(g.children)
    return sorted(out)


def truth_table(f: Formula) -> set[frozenset[tuple[Formula, bool]]]:
    """All satisfying rows of f over its own propositional leaves."""
    ls = leaves(f)
    out = set()
    for bits in itertools.product((False, True), repeat=len(ls)):
        val = dict(zip(ls, bits))
        if prop_eval(f, val):
            out.add(frozenset(val.items()))
    return out


@pytest.fixture
def ab():
    return fm.atom("a"), fm.atom("b")


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
