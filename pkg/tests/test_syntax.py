from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from plpasym.errors import PLPSyntaxError
from plpasym.logic import And, Atom, Elem, Eq, Not, Or, TRUE, Var
from plpasym.syntax import (format_clause, format_probability, format_program, parse_program,
                            parse_query, tokenize)

from conftest import RUNNING_EXAMPLE


def test_running_example_parses(running_example):
    assert [(f.name, f.arity, f.prob) for f in running_example.facts] == \
        [("r", 1, Fraction(1, 2)), ("p", 2, Fraction(1, 2))]
    (clause,) = running_example.rules
    assert format_clause(clause) == "s(X) :- r(X), p(X,Y)."
    assert running_example.intensional == ("s",)


def test_probability_forms():
    program = parse_program("0.25 :: a(X).\n1 :: b.\n0 :: c(X,Y).\n3/8 :: d.\n")
    assert [f.prob for f in program.facts] == [Fraction(1, 4), 1, 0, Fraction(3, 8)]
    assert format_probability(Fraction(3, 8)) == "3/8"
    assert format_probability(Fraction(1)) == "1"


def test_probabilistic_rule_is_desugared():
    program = parse_program("1/2 :: q(X,Y).\n3/10 :: r(X) :- q(X,Y).\n")
    aux = [f for f in program.facts if f.auxiliary]
    assert len(aux) == 1 and aux[0].prob == Fraction(3, 10) and aux[0].arity == 2
    assert format_program(program) == (
        "1/2 :: q(X,Y).\n"
        "3/10 :: r_rule1(X,Y).\n"
        "r(X) :- q(X,Y), r_rule1(X,Y).\n")


def test_negation_equality_and_comments():
    program = parse_program("% a comment\n1/2 :: r(X).\nh(X,Y) :- r(X), r(Y), X \\= Y, \\+ r(Y).\n"
                            "g(X) :- r(X), X = X.\n")
    h = program.clauses_for("h")[0]
    assert [l.positive for l in h.body] == [True, True, False, False]
    assert format_clause(h) == "h(X,Y) :- r(X), r(Y), X \\= Y, \\+ r(Y)."


def test_anonymous_variables_are_distinct():
    program = parse_program("1/2 :: e(X,Y).\nh(X) :- e(X,_), e(_,X).\n")
    body = program.rules[0].body
    assert body[0].atom.args[1] != body[1].atom.args[0]


@pytest.mark.parametrize("text,line", [
    ("1/2 :: r(X).\nh(X) :- r(X)\n", 3),  # missing full stop (reported at end of input)
    ("1/2 :: r(X).\nr(X) :- r(X).\n", 2),  # fact symbol used as head
    ("1/2 :: r(X).\nh(X) :- r(X,Y).\n", 2),  # arity mismatch
    ("1/2 :: r(X).\nh(X) :- r(X), \\+ r(Y).\n", 2),  # not range restricted
    ("1/2 :: r(X,X).\n", 1),  # repeated fact variable
    ("1/2 :: r(X).\n1/3 :: r(Y).\n", 2),  # duplicate declaration
    ("3/2 :: r(X).\n", 1),  # probability out of range
    ("h(X) :- = .\n", 1),
])
def test_parse_errors_report_location(text, line):
    with pytest.raises(PLPSyntaxError) as info:
        parse_program(text)
    assert info.value.line == line
    assert info.value.code == "parse-error"


def test_tokenize_positions():
    toks = tokenize("a :- b.\n  c(X).")
    c = [t for t in toks if t.text == "c"][0]
    assert (c.line, c.col) == (2, 3)


def test_parse_query():
    assert parse_query("s(1)") == Atom("s", (Elem(1),))
    assert parse_query("true") == TRUE
    assert parse_query("r(1), \\+ r(2) ; 1 = 2.") == Or((
        And((Atom("r", (Elem(1),)), Not(Atom("r", (Elem(2),))))), Eq(Elem(1), Elem(2))))
    assert parse_query("tc(X,Y), X \\= Y") == And((Atom("tc", (Var("X"), Var("Y"))),
                                                  Not(Eq(Var("X"), Var("Y")))))
    with pytest.raises(PLPSyntaxError):
        parse_query("r(1) r(2)")


def test_true_and_false_body_literals():
    program = parse_program("h(X) :- false.\ng :- true.\n")
    assert format_program(program) == "h(X) :- false.\ng :- true.\n"


def test_empty_program():
    program = parse_program("")
    assert program.facts == () and program.rules == ()


def test_pool_programs_round_trip(pool):
    # printed programs list auxiliary facts as ordinary facts
    for member in pool:
        text = format_program(member.program)
        again = parse_program(text)
        assert format_program(again) == text
        assert again.rules == member.program.rules


@given(st.fractions(min_value=0, max_value=1, max_denominator=50))
def test_probability_formatting_round_trips(q):
    program = parse_program(f"{format_probability(q)} :: r(X).\n")
    assert program.facts[0].prob == q
