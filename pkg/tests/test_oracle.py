from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltlsat import formula as fm
from ltlsat.bench import all_formulas, random_formula
from ltlsat.oracle import (
    OracleBoundExceeded,
    UltimatelyPeriodicWord,
    enumerate_assignments,
    eval_lasso,
    immediate,
    is_assignment,
    oracle_check,
    postponed_untils,
)
from ltlsat.parser import parse

W = UltimatelyPeriodicWord.of


def nnf(text: str):
    return fm.to_nnf(parse(text))


class TestEvalLasso:
    def test_constant_word(self):
        assert eval_lasso(W([], [{"a": True}]), nnf("G a"))

    def test_until_over_two_positions(self):
        w = W([{"a": True, "b": False}], [{"a": False, "b": True}])
        assert eval_lasso(w, nnf("a U b"))
        assert not eval_lasso(w, nnf("b U a & b"))

    def test_never(self):
        assert not eval_lasso(W([], [{"a": False}]), nnf("F a"))

    def test_release_needs_whole_loop(self):
        w = W([], [{"a": False, "b": True}, {"a": False, "b": True}])
        assert eval_lasso(w, nnf("a R b"))
        w2 = W([], [{"a": False, "b": True}, {"a": False, "b": False}])
        assert not eval_lasso(w2, nnf("a R b"))

    def test_alternation(self):
        w = W([], [{"a": True}, {"a": False}])
        assert eval_lasso(w, nnf("G(F a & F !a)"))
        assert not eval_lasso(w, nnf("F G a"))

    def test_next_at_loop_end(self):
        w = W([{"a": False}], [{"a": True}])
        assert eval_lasso(w, nnf("X a & X X a & !a"))

    def test_missing_atoms_read_false(self):
        assert eval_lasso(W([], [{}]), nnf("G !z"))

    def test_empty_loop_rejected(self):
        with pytest.raises(ValueError):
            W([{"a": True}], [])

    @given(st.integers(0, 2**32))
    @settings(max_examples=150, deadline=None)
    def test_rotation_invariance(self, seed):
        rng = random.Random(seed)
        f = random_formula(rng, ("a", "b"), 3)
        row = lambda: {"a": rng.random() < 0.5, "b": rng.random() < 0.5}  # noqa: E731
        prefix = [row() for _ in range(rng.randint(0, 2))]
        loop = [row() for _ in range(rng.randint(1, 3))]
        # unrolling one loop step into the prefix names the same infinite word
        w1 = W(prefix, loop)
        w2 = W(prefix + loop[:1], loop[1:] + loop[:1])
        assert eval_lasso(w1, f) == eval_lasso(w2, f)


class TestAssignments:
    def test_valid_assignment_listed(self):
        a, b = fm.atom("a"), fm.atom("b")
        u = fm.until(a, b)
        out = enumerate_assignments(fm.conj(u, fm.neg(b)))
        assert frozenset({a, u, fm.neg(b), fm.nxt(u)}) in out

    def test_incomplete_set_not_listed(self):
        a, b = fm.atom("a"), fm.atom("b")
        u = fm.until(a, b)
        out = enumerate_assignments(fm.conj(u, fm.neg(b)))
        assert frozenset({u, fm.neg(b)}) not in out

    def test_atom(self):
        assert enumerate_assignments(fm.atom("a")) == {frozenset({fm.atom("a")})}

    def test_local_rules(self):
        a, b = fm.atom("a"), fm.atom("b")
        assert not is_assignment(frozenset({a, fm.neg(a)}), ["a"])
        assert not is_assignment(frozenset({fm.disj(a, b), fm.neg(a), fm.neg(b)}), ["a", "b"])
        assert is_assignment(frozenset({fm.disj(a, b), fm.neg(a), b}), ["a", "b"])

    def test_tags(self):
        a, b = fm.atom("a"), fm.atom("b")
        u = fm.until(a, b)
        now = frozenset({u, b, a})
        later = frozenset({u, a, fm.neg(b), fm.nxt(u)})
        assert immediate(now) == {u} and postponed_untils(now) == frozenset()
        assert immediate(later) == frozenset() and postponed_untils(later) == {u}

    def test_bound(self):
        f = nnf("G(F a & F !a) & (b U c) & (c R d)")
        with pytest.raises(OracleBoundExceeded):
            enumerate_assignments(f, bound=8)


class TestOracleCheck:
    @pytest.mark.parametrize(
        "text,sat",
        [
            ("G(F a & F !a)", True),
            ("F a & G !a", False),
            ("true", True),
            ("false", False),
            ("G F a & F G !a", False),
            ("a U b & G !b", False),
            ("G(X(F a & F !a))", True),
            ("(a U b) & !b", True),
        ],
    )
    def test_verdicts(self, text, sat):
        f = nnf(text)
        v = oracle_check(f)
        assert v.sat is sat
        if sat:
            assert eval_lasso(v.word, f)

    def test_bound(self):
        with pytest.raises(OracleBoundExceeded):
            oracle_check(nnf("G(F a & F !a) & (b U c) & (c R d)"), bound=8)

    def test_full_and_reduced_agree(self):
        for f in all_formulas(5, ("a", "b")):
            if len(fm.closure(f)) > 9:
                continue
            r = oracle_check(f)
            full = oracle_check(f, mode="full")
            assert r.sat == full.sat, fm.to_str(f)
            if full.sat:
                assert eval_lasso(full.word, f)

    def test_witnesses_validate(self):
        rng = random.Random(2)
        for _ in range(300):
            f = random_formula(rng, ("a", "b", "c"), 4)
            try:
                v = oracle_check(f)
            except OracleBoundExceeded:
                continue
            if v.sat:
                assert eval_lasso(v.word, f)
