from __future__ import annotations

import pytest

from ltlsat import formula as fm
from ltlsat.muscore import CoreQuery, SatisfiableQuery, all_cores_for, is_minimal, minimal_core
from ltlsat.parser import parse
from ltlsat.transys import TransitionSystem


def nnf(text: str):
    return fm.to_nnf(parse(text))


def cf(*texts):
    return tuple(nnf(t) for t in texts)


def postpone(u):
    """The constraint under which ``u`` is satisfied right now: xnf(u) ∧ v(u)."""
    return fm.conj(fm.xnf(u), fm.tag(u))


class TestMinimalCore:
    def test_current_literal_blocks_eventuality(self):
        u = nnf("F(!a & !b)")
        q = CoreQuery(cf("a", "X b", "F(!a & !b)"), postpone(u))
        assert minimal_core(q) == {fm.atom("a")}

    def test_invariant_conjunct_blocks_eventuality(self):
        u = nnf("F !b")
        q = CoreQuery(cf("G F a", "G b", "F !b"), postpone(u))
        assert minimal_core(q) == {nnf("G b")}

    def test_both_literals_needed(self):
        q = CoreQuery(cf("a", "!a"))
        assert minimal_core(q) == {fm.atom("a"), nnf("!a")}

    def test_satisfiable_query_is_rejected(self):
        with pytest.raises(SatisfiableQuery):
            minimal_core(CoreQuery(cf("a", "b")))

    def test_result_is_subset_and_minimal(self):
        q = CoreQuery(cf("a", "b", "c", "!a | !b", "d"))
        core = minimal_core(q)
        assert core <= set(q.conjuncts)
        assert core == set(cf("a", "b", "!a | !b"))
        assert is_minimal(q, core)

    def test_deterministic(self):
        q = CoreQuery(cf("a", "!a", "b", "!b"))
        first = minimal_core(q)
        assert all(minimal_core(q) == first for _ in range(5))

    def test_counts_calls(self):
        q = CoreQuery(cf("a", "!a"))
        system = TransitionSystem(fm.conj(q.conjuncts))
        minimal_core(q, system)
        assert system.stats.mus_calls == 1


class TestAllCores:
    def test_chain_states(self):
        u = nnf("F(!a & !b)")
        q0 = CoreQuery(cf("a", "X b", "F(!a & !b)"), postpone(u))
        q1 = CoreQuery(cf("b", "F(!a & !b)"), postpone(u))
        assert all_cores_for([q0, q1]) == [{fm.atom("a")}, {fm.atom("b")}]

    def test_singleton(self):
        assert all_cores_for([CoreQuery(cf("a", "!a"))]) == [{fm.atom("a"), nnf("!a")}]

    def test_duplicates_collapse(self):
        q = CoreQuery(cf("a", "!a"))
        assert len(all_cores_for([q, q, q])) == 1
