from __future__ import annotations

import itertools
import random

import pytest

from conftest import leaves, prop_eval, truth_table
from ltlsat import formula as fm
from ltlsat.bench import random_formula
from ltlsat.formula import Kind
from ltlsat.oracle import is_assignment
from ltlsat.parser import parse
from ltlsat.satkernel import (
    CnfProblem,
    Encoder,
    Model,
    QueryEngine,
    ResourceLimit,
    Unsat,
    decode,
    encode,
    solve,
)


def all_models(p: CnfProblem, over: list[int]) -> set[frozenset[int]]:
    """Project every model of p onto ``over`` by blocking-clause enumeration."""
    seen: set[frozenset[int]] = set()
    blocking: list[list[int]] = []
    while True:
        out = solve(p, blocking=blocking)
        if isinstance(out, Unsat):
            return seen
        signed = frozenset(v if out[v] else -v for v in over)
        assert signed not in seen
        seen.add(signed)
        blocking.append([-l for l in signed])


def as_signed(p: CnfProblem, rows) -> set[frozenset[int]]:
    enc = p.encoder
    return {frozenset(enc.var(f) if b else -enc.var(f) for f, b in row) for row in rows}


class TestEncode:
    def test_atom_is_unit(self):
        p = encode(parse("a"))
        enc = p.encoder
        assert (enc.var(fm.atom("a")),) in p.clauses
        assert p.num_aux == 0

    def test_conjunction_uses_one_definition(self):
        p = encode(parse("a & b"))
        assert p.num_aux == 1
        out = solve(p)
        a, b = (p.encoder.var(fm.atom(x)) for x in "ab")
        assert isinstance(out, Model) and out[a] and out[b]

    def test_tagged_until_truth_table(self):
        x = fm.to_xnf(parse("a U b"))
        p = encode(x)
        ls = leaves(x.formula)
        assert len(ls) == 4  # v, a, b, X(a U b)
        want = as_signed(p, truth_table(x.formula))
        got = all_models(p, [p.encoder.var(f) for f in ls])
        assert got == want

    def test_dimacs_header(self):
        text = encode(parse("a | b")).to_dimacs()
        head, *body = text.strip().split("\n")
        assert head.startswith("p cnf ")
        assert int(head.split()[3]) == len(body)
        assert all(line.endswith(" 0") for line in body)

    def test_random_formulas_match_truth_table(self):
        rng = random.Random(3)
        for _ in range(60):
            x = fm.xnf(random_formula(rng, ("a", "b"), 3))
            if x.kind in (Kind.TRUE, Kind.FALSE):
                continue
            ls = leaves(x)
            if len(ls) > 10:
                continue
            p = encode(x)
            assert all_models(p, [p.encoder.var(f) for f in ls]) == as_signed(p, truth_table(x))


class TestSolve:
    def test_contradiction(self):
        assert isinstance(solve(encode(parse("a & !a"))), Unsat)

    def test_assumption(self):
        p = encode(parse("a | b"))
        a, b = (p.encoder.var(fm.atom(x)) for x in "ab")
        out = solve(p, [-a])
        assert isinstance(out, Model) and out[b]

    def test_failed_assumptions_are_sufficient(self):
        p = encode(parse("a | b"))
        a, b = (p.encoder.var(fm.atom(x)) for x in "ab")
        c = p.encoder.var(fm.atom("c"))
        out = solve(p, [-a, c, -b])
        assert isinstance(out, Unsat)
        assert set(out.core) <= {-a, c, -b}
        assert isinstance(solve(p, list(out.core)), Unsat)

    def test_always_eventually_pair_admits_expected_model(self):
        phi = parse("G(F b & F c)")
        p = encode(fm.to_xnf(phi))
        enc = p.encoder
        fb, fc = parse("F b"), parse("F c")
        want = [
            enc.var(fm.tag(fb)), -enc.var(fm.tag(fc)), enc.var(fm.atom("b")), -enc.var(fm.atom("c")),
            -enc.var(fm.nxt(fb)), enc.var(fm.nxt(fc)), enc.var(fm.nxt(phi)),
        ]
        out = solve(p, want)
        assert isinstance(out, Model)
        d = decode(out, p)
        assert d.nexts == {fc, phi}
        assert d.tags == {fb}

    def test_deterministic(self):
        p = encode(fm.to_xnf(parse("G(F a & F !a) & (b U c)")))
        runs = [solve(p) for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]

    def test_budget_is_reported_distinctly(self):
        # pigeonhole 8 into 7 needs many conflicts
        n = 7
        var = {(i, j): fm.atom(f"p{i}_{j}") for i in range(n + 1) for j in range(n)}
        parts = [fm.disj(var[i, j] for j in range(n)) for i in range(n + 1)]
        for j in range(n):
            for i, k in itertools.combinations(range(n + 1), 2):
                parts.append(fm.disj(fm.neg(var[i, j]), fm.neg(var[k, j])))
        p = encode(fm.conj(parts))
        with pytest.raises(ResourceLimit):
            solve(p, budget=5)


class TestDecode:
    def test_tag_true(self):
        u = parse("a U b")
        p = encode(fm.to_xnf(u))
        out = solve(p, [p.encoder.var(fm.tag(u))])
        d = decode(out, p)
        assert ("b", True) in d.literals
        assert d.nexts == frozenset()

    def test_tag_false(self):
        u = parse("a U b")
        p = encode(fm.to_xnf(u))
        out = solve(p, [-p.encoder.var(fm.tag(u))])
        d = decode(out, p)
        assert ("a", True) in d.literals
        assert d.nexts == {u}

    def test_unconstrained_atoms_default_false(self):
        p = encode(parse("a | X c"))
        out = solve(p, [p.encoder.var(parse("X c"))])
        d = decode(out, p, props=["a", "b"])
        assert d.literals == (("a", False), ("b", False))

    def test_one_polarity_per_atom(self):
        p = encode(fm.to_xnf(parse("(a U b) & G c")))
        d = decode(solve(p), p)
        names = [n for n, _ in d.literals]
        assert names == sorted(set(names)) == ["a", "b", "c"]


class TestRoundTrip:
    """Every model induces a closure assignment that satisfies the local rules."""

    @pytest.mark.parametrize(
        "text", ["a U b", "G(F a & F !a)", "(a U b) & !b", "a R (b | X a)", "F(a & X !a) & G b"]
    )
    def test_reconstructed_assignment_is_consistent(self, text):
        f = fm.to_nnf(parse(text))
        props = fm.atomic_props(f)
        cl = fm.closure(f)
        x = fm.to_xnf(f)
        p = encode(x)
        ls = leaves(x.formula)
        for signed in all_models(p, [p.encoder.var(g) for g in ls]):
            val = {p.encoder.atom_of[abs(l)]: l > 0 for l in signed}
            lits = {fm.atom(n) if val.get(fm.atom(n), False) else fm.neg(fm.atom(n)) for n in props}

            def holds(g):
                xg = fm.xnf(g)
                row = {a: val.get(a, False) for a in leaves(xg)}
                for a in row:
                    if a.kind == Kind.ATOM:
                        row[a] = fm.atom(a.name) in lits
                return prop_eval(xg, row)

            big = frozenset(lits | {g for g in cl if g.kind not in (Kind.ATOM, Kind.NOT) and holds(g)})
            assert is_assignment(big, props), sorted(map(fm.to_str, big))


class TestQueryEngine:
    def test_incremental_blocking_enumerates_rows(self):
        enc = Encoder()
        f = parse("a | b")
        eng = QueryEngine(enc, f)
        rows = set()
        while eng.solve():
            p = eng.assignment(["a", "b"])
            rows.add(p.literals)
            eng.add_clause(p.blocking_clause())
        eng.close()
        assert rows == {
            (("a", True), ("b", True)), (("a", True), ("b", False)), (("a", False), ("b", True)),
        }

    def test_foreign_next_atoms_are_pinned(self):
        enc = Encoder()
        eng = QueryEngine(enc, parse("a"))
        assert not eng.solve([parse("X b")])
        eng.close()

    def test_scope_atoms_are_free(self):
        enc = Encoder()
        eng = QueryEngine(enc, parse("a"), scope=[parse("X b")])
        assert eng.solve([parse("X b")])
        eng.close()

    def test_counts_calls(self):
        enc = Encoder()
        eng = QueryEngine(enc, parse("a"))
        eng.solve()
        eng.solve()
        assert eng.stats.sat_calls == 2
        eng.close()
