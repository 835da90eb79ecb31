from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from plpasym.asymptotics import (QfType, asymptotic_fixpoint, asymptotic_qe, asymptotic_query_prob,
                                 asymptotic_transform, count_qf_types, eliminate_boundary,
                                 enumerate_qf_types, essential_projection, generic_eval,
                                 mixture_distribution, nullary_case_split, restricted_growth_strings)
from plpasym.errors import AsymptoticError, ConstantsNotSupported, FormulaError, UnstratifiableError
from plpasym.generate import SENTENCE_VOCAB, SLOW_SENTENCES, sentence_pool
from plpasym.logic import TRUE, Atom, Var, Vocabulary, parse_sexpr, relations_of, to_sexpr
from plpasym.program import check_acyclic, check_determinate
from plpasym.semantics import (Family, check_projective, program_tv_distance, query_prob,
                               world_distribution)
from plpasym.syntax import format_program, parse_program, parse_query
from plpasym.wfomc import sentence_probability

from conftest import prob_rule_program, running_example_text

R = Vocabulary((("r", 1),))
RP = Vocabulary((("r", 1), ("p", 2)))


def empty_context(vocab=RP):
    return QfType(0, (), frozenset(), vocab)


def unary_context(r_true: bool, p_loop: bool = False):
    atoms = set()
    if r_true:
        atoms.add(("r", (0,)))
    if p_loop:
        atoms.add(("p", (0, 0)))
    return QfType(1, (0,), frozenset(atoms), RP)


# --- types ----------------------------------------------------------------

def test_partitions():
    assert list(restricted_growth_strings(2)) == [(0, 0), (0, 1)]
    assert len(list(restricted_growth_strings(4))) == 15  # Bell number


def test_type_counts():
    assert len(enumerate_qf_types(R, 1)) == 2
    assert len(enumerate_qf_types(RP, 1)) == 4
    assert len(enumerate_qf_types(R, 2)) == 6
    assert count_qf_types(RP, 2) == 4 + 2 ** 6
    assert len(enumerate_qf_types(R, 0)) == 1


@given(st.integers(0, 3), st.booleans(), st.booleans())
def test_type_count_formula_matches_enumeration(k, unary, binary):
    rels = (("r", 1),) * unary + (("p", 2),) * binary
    vocab = Vocabulary(rels)
    types = enumerate_qf_types(vocab, k)
    assert len(types) == count_qf_types(vocab, k)
    assert len(set(types)) == len(types)


def test_types_reject_constants_and_nullary():
    with pytest.raises(ConstantsNotSupported):
        enumerate_qf_types(Vocabulary((("r", 1),), ("c",)), 1)
    with pytest.raises(AsymptoticError):
        enumerate_qf_types(Vocabulary((("c", 0),)), 1)


def test_type_restriction():
    t = QfType(2, (0, 1), frozenset({("r", (1,)), ("p", (0, 1))}), RP)
    assert t.restrict([1]) == QfType(1, (0,), frozenset({("r", (0,))}), RP)
    assert t.restrict([1, 0]).true_atoms == {("r", (0,)), ("p", (1, 0))}
    assert t.restrict([0], R).true_atoms == frozenset()


# --- generic evaluation -----------------------------------------------------

def test_generic_eval_examples():
    some_successor = parse_sexpr("(exists y (p x y))")
    all_successors = parse_sexpr("(forall y (p x y))")
    for ctx in (unary_context(True), unary_context(False)):
        assert generic_eval(some_successor, ctx, ["x"])
        assert not generic_eval(all_successors, ctx, ["x"])
    assert not generic_eval(parse_sexpr("(r x)"), unary_context(False), ["x"])


def test_generic_eval_errors():
    with pytest.raises(AsymptoticError):
        generic_eval(parse_sexpr("(exists x (s x))"), empty_context())
    with pytest.raises(AsymptoticError):
        generic_eval(parse_sexpr("(exists x (r x))"), empty_context(), [], {"r": Fraction(1)})
    with pytest.raises(ConstantsNotSupported):
        generic_eval(parse_sexpr("(r 'c)"), empty_context())
    with pytest.raises(FormulaError):
        generic_eval(parse_sexpr("(r x)"), empty_context())


def test_generic_eval_on_slow_sentence():
    (text,) = SLOW_SENTENCES
    f = parse_sexpr(text)
    assert generic_eval(f, empty_context(), [])
    half = {"r": Fraction(1, 2), "p": Fraction(1, 2)}
    values = [sentence_probability(f, SENTENCE_VOCAB, half, n) for n in range(5, 11)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_extension_axioms_hold_generically():
    from plpasym.logic import extension_axioms
    for r in (0, 1, 2):
        for axiom in extension_axioms(R, r):
            assert generic_eval(axiom.formula(R), QfType(0, (), frozenset(), R), [])


# --- quantifier elimination ---------------------------------------------------

def test_qe_running_example():
    out = asymptotic_qe(parse_sexpr("(exists y (and (r x) (p x y)))"), ["x"])
    assert to_sexpr(out) == "(r x)"


def test_qe_isolated_relation_is_true():
    assert asymptotic_qe(parse_sexpr("(exists y (and (not (= y x)) (i x y)))"), ["x"]) == TRUE


def test_qe_of_quantifier_free_input_is_equivalent():
    f = parse_sexpr("(or (and (r x) (not (p x y))) (= x y))")
    g = asymptotic_qe(f, ["x", "y"])
    for t in enumerate_qf_types(RP, 2):
        assert generic_eval(f, t, ["x", "y"]) == generic_eval(g, t, ["x", "y"])


@pytest.mark.parametrize("text,formula", sentence_pool())
def test_qe_uses_only_input_relations(text, formula):
    out = asymptotic_qe(formula, [])
    assert set(relations_of(out)) <= set(relations_of(formula))
    assert out == TRUE or to_sexpr(out) == "false"


def test_essential_projection():
    points = {(True, False), (True, True)}
    assert essential_projection(points, 2) == ([0], {(True,)})


# --- fixpoint -----------------------------------------------------------------

def test_fixpoint_running_example(running_example):
    table = asymptotic_fixpoint(running_example)
    vocab = table.vocabularies["s"]
    assert vocab == RP
    assert {t for t in table["s"]} == {t for t in enumerate_qf_types(RP, 1) if ("r", (0,)) in t.true_atoms}


def test_fixpoint_transitive_closure(transitive_closure):
    table = asymptotic_fixpoint(transitive_closure)
    assert table["tc"] == frozenset(enumerate_qf_types(Vocabulary((("e", 2),)), 2))
    sizes = [h["tc"] for h in table.history]
    assert sizes == sorted(sizes)
    assert len(table.history) <= count_qf_types(Vocabulary((("e", 2),)), 2) + 1


def test_fixpoint_empty_program():
    table = asymptotic_fixpoint(parse_program(""))
    assert table.types == {}


def test_fixpoint_preconditions():
    with pytest.raises(AsymptoticError):
        asymptotic_fixpoint(parse_program("1 :: r(X).\nh(X) :- r(X).\n"))
    with pytest.raises(AsymptoticError):
        asymptotic_fixpoint(parse_program("1/2 :: c.\nh :- c.\n"))
    with pytest.raises(ConstantsNotSupported):
        asymptotic_fixpoint(parse_program("1/2 :: e(X,Y).\nh(X) :- e(X,k).\n"))


def test_fixpoint_with_stratified_negation():
    program = parse_program("1/2 :: e(X,Y).\n"
                            "src(X) :- e(X,Y).\n"
                            "sink(X) :- e(Y,X), \\+ src(X).\n")
    table = asymptotic_fixpoint(program)
    assert len(table["src"]) == 2  # every element has a successor
    assert table["sink"] == frozenset()


# --- transform ------------------------------------------------------------------

def test_transform_running_example(running_example):
    t = asymptotic_transform(running_example)
    assert format_program(t.program) == "1/2 :: r(X).\n1/2 :: p(X,Y).\ns(X) :- r(X).\n"
    assert t.branches == [((), Fraction(1))]


def test_transform_transitive_closure(transitive_closure):
    t = asymptotic_transform(transitive_closure)
    assert t.rules_text == "tc(X,Y).\n"


def test_transform_text_is_parseable_and_stable(running_example):
    t = asymptotic_transform(running_example)
    text = t.to_text()
    assert text.startswith("% asymptotically equivalent acyclic determinate program\n")
    assert parse_program(text).rules == t.program.rules
    assert asymptotic_transform(running_example).to_text() == text


def test_transform_drops_auxiliary_facts():
    low = asymptotic_transform(parse_program(prob_rule_program("1/10")))
    high = asymptotic_transform(parse_program(prob_rule_program("9/10")))
    assert low.to_text() == high.to_text()
    assert [f.name for f in low.program.facts] == ["q"]


def test_transform_keeps_auxiliary_facts_of_determinate_rules():
    t = asymptotic_transform(parse_program("1/2 :: r(X).\n1/3 :: h(X) :- r(X).\n"))
    assert t.rules_text == "h(X) :- h_rule1(X), r(X).\n"


def test_transform_boundary_symbols():
    program = parse_program("1 :: a(X).\n0 :: b(X).\n1/2 :: r(X).\n"
                            "h(X) :- a(X), r(X), \\+ b(X).\nk(X) :- b(X).\ng(X) :- r(X), \\+ u(X).\n"
                            "m(X) :- k(X).\n")
    t = asymptotic_transform(program)
    assert t.rules_text == "g(X) :- r(X).\nh(X) :- r(X).\nk(X) :- false.\nm(X) :- false.\n"
    assert eliminate_boundary(program).clauses_for("h")[0].body[0].atom == Atom("r", (Var("X"),))


def test_transform_nullary_guards():
    program = parse_program("1/3 :: c.\n1/2 :: r(X).\nh(X) :- c, r(X).\nh(X) :- \\+ c, \\+ r(X).\nb :- c.\n")
    t = asymptotic_transform(program)
    assert t.rules_text == "b :- c.\nh(X) :- c, r(X).\nh(X) :- \\+ c, \\+ r(X).\n"
    assert [w for _, w in t.branches] == [Fraction(1, 3), Fraction(2, 3)]
    for n in (1, 2, 3):
        assert program_tv_distance(program, t.program, n) == 0


def test_transform_errors():
    with pytest.raises(ConstantsNotSupported):
        asymptotic_transform(parse_program("1/2 :: e(X,Y).\nh(X) :- e(X,k).\n"))
    with pytest.raises(UnstratifiableError):
        asymptotic_transform(parse_program("p(X) :- \\+ p(X).\n"))


def test_transform_hygiene_on_pool(pool):
    for member in pool:
        t = asymptotic_transform(member.program)
        assert check_determinate(t.program)[0], member.name
        assert check_acyclic(t.program), member.name


def test_projectivity_collapse_on_pool(pool):
    checked = 0
    for member in pool:
        if not check_projective(Family.from_program(member.program), 4).holds:
            continue
        t = asymptotic_transform(member.program)
        for n in range(1, 5):
            assert program_tv_distance(member.program, t.program, n) == 0, (member.name, n)
        checked += 1
    assert checked >= 10


def test_determinate_programs_transform_to_equal_families():
    program = parse_program("1/2 :: r(X).\n1/3 :: e(X,Y).\n"
                            "h(X,Y) :- e(X,Y), \\+ r(Y).\nh(X,Y) :- X = Y, r(X).\n")
    t = asymptotic_transform(program)
    for n in range(1, 5):
        assert program_tv_distance(program, t.program, n) == 0


CONVERGING = [
    running_example_text(Fraction(1, 2), Fraction(1, 2)),
    "1/2 :: p(X,Y).\ns(X) :- p(X,Y).\n",
    "1/2 :: r(X).\n1/2 :: p(X,Y).\ns(X) :- p(X,Y), \\+ r(X).\n",
    "3/4 :: p(X,Y).\ns(X) :- p(X,Y), p(X,Z), Y \\= Z.\n",
]


@pytest.mark.parametrize("text", CONVERGING)
def test_tv_decreases_on_converging_programs(text):
    program = parse_program(text)
    t = asymptotic_transform(program)
    tv = [program_tv_distance(program, t.program, n) for n in range(2, 8)]
    assert all(b < a for a, b in zip(tv, tv[1:]))
    assert tv[-1] <= Fraction(1, 16)


def test_tv_need_not_decrease_at_small_n():
    # each derived atom needs a witness z distinct from y with e(z,x); with
    # q = 1/4 the number of disagreeing atoms grows before the witnesses appear
    program = parse_program("1/4 :: a(X,Y).\nh(X,Y) :- a(X,X), a(Z,X), a(X,Y), Y \\= Z.\n")
    t = asymptotic_transform(program)
    tv = [program_tv_distance(program, t.program, n, max_atoms=16) for n in (2, 3, 4)]
    assert tv[1] > tv[0] and tv[2] < tv[1]


# --- nullary split ----------------------------------------------------------------

def test_nullary_split_weights():
    assert [(b.config, b.weight) for b in nullary_case_split(parse_program("1/2 :: r(X).\n"))] == \
        [((), Fraction(1))]
    program = parse_program("1/3 :: c.\n1/2 :: r(X).\nh(X) :- c, r(X).\n")
    branches = nullary_case_split(program)
    assert [(b.config, b.weight) for b in branches] == [((("c", True),), Fraction(1, 3)),
                                                        ((("c", False),), Fraction(2, 3))]
    assert format_program(branches[0].program) == "1/2 :: r(X).\nh(X) :- r(X).\n"
    assert format_program(branches[1].program) == "1/2 :: r(X).\n"


def test_nullary_mixture_equals_original():
    program = parse_program("1/3 :: c.\n1/4 :: d.\n1/2 :: r(X).\n"
                            "h(X) :- c, r(X).\nh(X) :- \\+ d, \\+ r(X).\ng :- c, \\+ d.\n")
    branches = nullary_case_split(program)
    assert len(branches) == 4 and sum(b.weight for b in branches) == 1
    for n in (1, 2, 3):
        original = world_distribution(program, n)
        assert mixture_distribution(branches, n, original.vocab).weights == original.weights


# --- limit queries -------------------------------------------------------------------

def test_limit_queries(running_example, transitive_closure):
    assert asymptotic_query_prob(running_example, parse_query("s(X)")) == Fraction(1, 2)
    assert asymptotic_query_prob(parse_program("3/10 :: r(X).\n"), parse_query("r(X)")) == Fraction(3, 10)
    assert asymptotic_query_prob(transitive_closure, parse_query("tc(X,Y), X \\= Y")) == 1
    assert asymptotic_query_prob(running_example, parse_query("s(X), s(Y)")) == Fraction(1, 4)


def test_limit_is_approached_by_exact_values(running_example):
    values = [query_prob(running_example, n, parse_query("s(1)")) for n in range(1, 8)]
    limit = asymptotic_query_prob(running_example, parse_query("s(X)"))
    gaps = [limit - v for v in values]
    assert all(g > 0 for g in gaps) and all(b < a for a, b in zip(gaps, gaps[1:]))


def test_limit_rejects_quantifiers(running_example):
    with pytest.raises(FormulaError):
        asymptotic_query_prob(running_example, parse_sexpr("(exists x (s x))"))
