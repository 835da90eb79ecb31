import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from plpasym.errors import ConstantsNotSupported, ScaleLimitExceeded, StructureError
from plpasym.logic import FiniteStructure, Vocabulary, enumerate_structures
from plpasym.program import datalog_eval
from plpasym.semantics import (CheckReport, Family, WorldDistribution, check_CIP, check_exchangeable,
                               check_IP, check_projective, m_star, m_star_conditional,
                               m_star_family, marginal_distribution, point_mass,
                               program_tv_distance, query_prob, reduct_distribution,
                               tv_distance, world_distribution)
from plpasym.syntax import parse_program, parse_query

from conftest import running_example_text


def brute_distribution(program, n):
    """Oracle: enumerate fact structures, run the naive Datalog engine."""
    vocab = Vocabulary(tuple((f.name, f.arity) for f in program.facts))
    weights = {}
    for s in enumerate_structures(vocab, n):
        w = Fraction(1)
        for f in program.facts:
            true = len(s.relation(f.name))
            w *= f.prob ** true * (1 - f.prob) ** (n ** f.arity - true)
        if w:
            mask = datalog_eval(program, s).to_mask()
            weights[mask] = weights.get(mask, 0) + w
    return weights


def test_running_example_at_n1(running_example):
    d = world_distribution(running_example, 1)
    # atoms: p(1,1), r(1), s(1)
    assert d.weights == {0b000: Fraction(1, 4), 0b001: Fraction(1, 4), 0b010: Fraction(1, 4),
                         0b111: Fraction(1, 4)}


def test_world_distribution_matches_datalog_oracle(pool):
    for member in pool:
        for n in (1, 2):
            d = world_distribution(member.program, n)
            assert d.weights == brute_distribution(member.program, n), member.name


@pytest.mark.parametrize("q_r,q_p", [(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 3), Fraction(3, 4)),
                                     (Fraction(9, 10), Fraction(1, 10))])
def test_query_matches_closed_form(q_r, q_p):
    program = parse_program(running_example_text(q_r, q_p))
    for n in range(1, 8):
        assert query_prob(program, n, parse_query("s(1)")) == q_r * (1 - (1 - q_p) ** n)


def test_query_forms(running_example):
    assert query_prob(running_example, 2, parse_query("true")) == 1
    assert query_prob(running_example, 2, parse_query("s(1), s(2)")) == Fraction(3, 8) ** 2
    assert query_prob(running_example, 2, parse_query("s(1) ; \\+ s(1)")) == 1
    assert query_prob(running_example, 2, parse_query("1 = 2")) == 0


@given(st.integers(0, 23), st.sampled_from(["h1(1)", "h1(1,2)", "a(1)", "a(1,1)", "h2(2)", "h2(1,1)"]))
def test_query_prob_agrees_with_full_distribution(index, text):
    from plpasym.generate import program_pool
    program = program_pool()[index].program
    q = parse_query(text)
    name = q.pred
    if name not in program.arities or program.arities[name] != len(q.args):
        return
    d = world_distribution(program, 2)
    assert query_prob(program, 2, q) == d.formula_prob(q)


def test_marginals_agree_with_reducts(pool):
    for member in pool[:12]:
        for names in (member.program.fact_names, member.program.intensional[:1]):
            for n in (1, 2):
                full = world_distribution(member.program, n)
                assert marginal_distribution(member.program, n, names).weights == \
                    reduct_distribution(full, names).weights


def test_tv_closed_form(running_example):
    # s(i) differs from r(i) exactly when r(i) holds and i has no successor
    for n in range(1, 6):
        transformed = parse_program("1/2 :: r(X).\n1/2 :: p(X,Y).\ns(X) :- r(X).\n")
        tv = program_tv_distance(running_example, transformed, n)
        assert tv == 1 - (1 - Fraction(1, 2) * Fraction(1, 2) ** n) ** n
        if n <= 2:
            d1 = world_distribution(running_example, n)
            d2 = world_distribution(transformed, n)
            assert tv == tv_distance(d1, d2)


def test_tv_with_different_facts():
    a = parse_program("1/2 :: r(X).\nh(X) :- r(X).\n")
    b = parse_program("1/3 :: r(X).\nh(X) :- r(X).\n")
    assert program_tv_distance(a, b, 1) == Fraction(1, 6)
    assert program_tv_distance(a, b, 1, names=["h"]) == Fraction(1, 6)


def test_scale_guard(running_example):
    with pytest.raises(ScaleLimitExceeded):
        world_distribution(running_example, 5)
    with pytest.raises(ScaleLimitExceeded):
        query_prob(running_example, 3, parse_query("s(1)"), max_atoms=3)


def test_constants():
    program = parse_program("1/2 :: e(X,Y).\nh(X) :- e(X,c).\n")
    assert query_prob(program, 2, parse_query("h(1)"), constants={"c": 2}) == Fraction(1, 2)
    with pytest.raises(ConstantsNotSupported):
        query_prob(program, 2, parse_query("h(1)"))


def test_boundary_and_undeclared_symbols():
    program = parse_program("1 :: a(X).\n0 :: b(X).\nh(X) :- a(X), \\+ b(X), \\+ u(X).\n")
    d = world_distribution(program, 2)
    assert len(d.weights) == 1
    assert query_prob(program, 2, parse_query("h(1), h(2)")) == 1


def test_distribution_json_round_trip(running_example):
    d = world_distribution(running_example, 2)
    again = WorldDistribution.from_json(json.dumps(d.to_json()))
    assert again.weights == d.weights and again.vocab == d.vocab


def test_distribution_validation():
    v = Vocabulary((("r", 1),))
    with pytest.raises(StructureError):
        WorldDistribution(v, 1, {0: Fraction(1, 2)})
    assert point_mass(v, 2, FiniteStructure(v, 2, {"r": [(2,)]})).weights == {2: 1}


# --- checkers ---------------------------------------------------------------

def test_projectivity_counterexample(running_example):
    report = check_projective(Family.from_program(running_example), 3)
    assert report.holds is False
    assert (report.witness["m"], report.witness["n"]) == (1, 2)
    assert report.witness["atom"] == "s(1)"
    assert (report.witness["P_m(atom)"], report.witness["P_n(atom)"]) == ("1/4", "3/8")


def test_projective_and_exchangeable_determinate(qf_equality):
    fam = Family.from_program(qf_equality)
    assert check_projective(fam, 4).holds
    assert check_exchangeable(fam, 4).holds
    assert check_projective(fam, 4).summary() == "projectivity: holds up to n=4"


def test_programs_are_exchangeable(pool):
    for member in pool[:8]:
        assert check_exchangeable(Family.from_program(member.program), 3).holds, member.name


def test_non_exchangeable_family_is_detected():
    v = Vocabulary((("r", 1),))
    fam = Family(v, lambda n: point_mass(v, n, FiniteStructure(v, n, {"r": [(1,)]})))
    report = check_exchangeable(fam, 2)
    assert report.holds is False and report.witness["n"] == 2


def test_ip_and_cip(qf_equality):
    fam = Family.from_program(qf_equality)
    assert check_IP(fam, 4).holds
    assert check_CIP(fam, 4).holds
    reduct = Family.from_program(qf_equality, names=["pp"])
    assert check_IP(reduct, 4).holds
    report = check_CIP(reduct, 3)
    assert report.holds is False
    assert report.witness["domain"] == [1, 2, 3]


def test_nullary_fact_breaks_ip():
    program = parse_program("1/2 :: c.\n1/2 :: r(X).\nh(X) :- c, r(X).\n")
    report = check_IP(Family.from_program(program, names=["h"]), 2)
    assert report.holds is False


def test_non_projective_family_gates_ip(running_example):
    report = check_IP(Family.from_program(running_example), 2)
    assert report.holds is None and report.notes


def test_report_json():
    report = CheckReport("IP", True, 4)
    assert json.loads(json.dumps(report.to_json())) == \
        {"property": "IP", "holds": True, "n_max": 4, "witness": None, "notes": []}


# --- m* -----------------------------------------------------------------------

def test_m_star_normalised_and_projective():
    for n in range(1, 8):
        assert m_star(n).total() == 1
    assert m_star(2).weights == {0: Fraction(1, 3), 1: Fraction(1, 6), 2: Fraction(1, 6),
                                 3: Fraction(1, 3)}
    fam = m_star_family()
    assert check_projective(fam, 5).holds
    assert check_exchangeable(fam, 5).holds


def test_m_star_conditional_rule_of_succession():
    for n in range(1, 7):
        for k in range(n + 1):
            assert m_star_conditional(n, range(1, k + 1)) == Fraction(k + 1, n + 2)
    with pytest.raises(StructureError):
        m_star_conditional(2, [3])
