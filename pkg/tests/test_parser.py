from __future__ import annotations

import pytest

from ltlsat import formula as fm
from ltlsat.formula import Kind
from ltlsat.parser import LtlSyntaxError, parse


class TestParse:
    def test_until(self):
        assert parse("a U b") is fm.until(fm.atom("a"), fm.atom("b"))

    def test_eventually_desugars(self):
        assert parse("F a") is fm.until(fm.TT, fm.atom("a"))

    def test_always_desugars(self):
        a = fm.atom("a")
        want = fm.release(fm.FF, fm.conj(fm.until(fm.TT, a), fm.until(fm.TT, fm.neg(a))))
        assert parse("G((F a) & (F !a))") is want

    def test_precedence(self):
        assert parse("a & b | c") is parse("(a & b) | c")
        assert parse("a U b & c") is parse("(a U b) & c")
        assert parse("!a U b") is parse("(!a) U b")
        assert parse("a -> b | c") is parse("a -> (b | c)")

    def test_right_associative(self):
        assert parse("a U b U c") is parse("a U (b U c)")
        assert parse("a R b R c") is parse("a R (b R c)")
        assert parse("a -> b -> c") is parse("a -> (b -> c)")

    def test_constants(self):
        assert parse("true") is fm.TT
        assert parse("false & a") is fm.FF

    def test_iff(self):
        assert parse("a <-> b") is fm.iff(fm.atom("a"), fm.atom("b"))

    def test_prefix_chains(self):
        assert parse("GFa") is parse("G F a")
        assert parse("XXb") is parse("X X b")

    def test_identifiers(self):
        f = parse("p_1 & Boo & _x")
        assert {c.name for c in f.children} == {"p_1", "Boo", "_x"}
        assert all(c.kind == Kind.ATOM for c in f.children)

    def test_leading_operator_letters_split(self):
        # atom names cannot start with X, F or G; "Foo" is F applied to "oo"
        assert parse("Foo") is parse("F oo")

    def test_multiline(self):
        assert parse("a &\n  b") is parse("a & b")


class TestErrors:
    def test_reports_position_and_expected(self):
        with pytest.raises(LtlSyntaxError) as ei:
            parse("a &")
        e = ei.value
        assert (e.line, e.column) == (1, 4)
        assert "identifier" in e.expected

    def test_second_line(self):
        with pytest.raises(LtlSyntaxError) as ei:
            parse("a &\n) b")
        assert ei.value.line == 2

    @pytest.mark.parametrize("text", ["", "(a", "a b", "a & & b", "a $ b", "U a", "é"])
    def test_rejects(self, text):
        with pytest.raises(LtlSyntaxError):
            parse(text)
