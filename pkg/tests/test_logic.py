import itertools

import pytest
from hypothesis import given, strategies as st

from plpasym.errors import FormulaError, StructureError
from plpasym.logic import (And, Atom, Elem, Eq, Exists, ForAll, Implies, Lfp, Not, Or, TRUE, Var,
                           Vocabulary, atom, count_isomorphic, delta_atoms, desugar,
                           enumerate_structures, eval_formula, extension_axioms, FiniteStructure,
                           free_vars, ground_atoms, isomorphism_classes, lfp_step, parse_sexpr,
                           permute_structure, reduct_structure, relations_of, substructure, to_sexpr)

V = Vocabulary((("r", 1), ("p", 2)))


def test_vocabulary_is_sorted_and_ground_atoms_are_canonical():
    v = Vocabulary((("p", 2), ("r", 1), ("c", 0)))
    assert v.names == ("c", "p", "r")
    atoms = ground_atoms(v, 2)
    assert atoms[0] == ("c", ())
    assert atoms[1:5] == [("p", (1, 1)), ("p", (1, 2)), ("p", (2, 1)), ("p", (2, 2))]
    assert atoms[5:] == [("r", (1,)), ("r", (2,))]


def test_enumerate_structures_counts_and_masks():
    structures = list(enumerate_structures(V, 2))
    assert len(structures) == 2 ** 6
    assert all(s.to_mask() == i for i, s in enumerate(structures))
    assert FiniteStructure.from_mask(V, 2, 5) == structures[5]


def test_enumerate_rejects_constants_and_empty_domain():
    with pytest.raises(StructureError):
        list(enumerate_structures(Vocabulary((("r", 1),), ("c",)), 2))
    with pytest.raises(StructureError):
        list(enumerate_structures(V, 0))


def test_structure_validation():
    with pytest.raises(StructureError):
        FiniteStructure(V, 2, {"r": [(3,)]})
    with pytest.raises(StructureError):
        FiniteStructure(V, 2, {"q": [(1,)]})


def test_quantifiers_and_equality():
    s = FiniteStructure(V, 3, {"p": [(1, 2), (2, 3), (3, 1)], "r": [(1,)]})
    assert eval_formula(s, parse_sexpr("(forall x (exists y (p x y)))"))
    assert not eval_formula(s, parse_sexpr("(exists x (p x x))"))
    assert eval_formula(s, parse_sexpr("(exists x (and (r x) (forall y (implies (r y) (= x y)))))"))
    assert eval_formula(s, atom("p", "x", "y"), {"x": 1, "y": 2})


def test_unbound_variables_are_an_error():
    s = FiniteStructure(V, 1)
    with pytest.raises(FormulaError):
        eval_formula(s, atom("r", "x"))


TC_LFP = Lfp(("u", "v"), "T",
             Or((atom("e", "u", "v"), Exists("w", And((atom("e", "u", "w"), atom("T", "w", "v")))))),
             (Var("x"), Var("y")))


def test_lfp_transitive_closure_on_a_path():
    vocab = Vocabulary((("e", 2),))
    s = FiniteStructure(vocab, 4, {"e": [(1, 2), (2, 3), (3, 4)]})
    reach = {(a, b) for a in range(1, 5) for b in range(1, 5)
             if eval_formula(s, TC_LFP, {"x": a, "y": b})}
    assert reach == {(a, b) for a in range(1, 5) for b in range(a + 1, 5)}


def test_lfp_step_applies_the_operator_once():
    vocab = Vocabulary((("e", 2),))
    s = FiniteStructure(vocab, 3, {"e": [(1, 2), (2, 3)]})
    first = lfp_step(s, TC_LFP, [])
    assert first == {(1, 2), (2, 3)}
    assert lfp_step(s, TC_LFP, first) == {(1, 2), (2, 3), (1, 3)}


def test_lfp_rejects_negative_occurrence():
    bad = Lfp(("u",), "T", Not(atom("T", "u")), (Var("x"),))
    with pytest.raises(FormulaError):
        eval_formula(FiniteStructure(V, 1), bad, {"x": 1})


def test_substructure_reduct_and_permutation():
    s = FiniteStructure(V, 3, {"p": [(1, 3), (3, 2)], "r": [(3,)]})
    sub, relabel = substructure(s, [1, 3])
    assert relabel == {1: 1, 3: 2}
    assert sub.relation("p") == {(1, 2)}
    assert sub.relation("r") == {(2,)}
    red = reduct_structure(s, ["r"])
    assert red.vocab.names == ("r",)
    swapped = permute_structure(s, {1: 2, 2: 1, 3: 3})
    assert swapped.relation("p") == {(2, 3), (3, 1)}


def test_isomorphism_classes_for_one_unary_relation():
    vocab = Vocabulary((("r", 1),))
    for n in range(1, 5):
        classes = isomorphism_classes(vocab, n)
        assert len(classes) == n + 1
        assert sorted(len(c) for c in classes) == sorted(_binom(n, k) for k in range(n + 1))
    s = FiniteStructure(vocab, 4, {"r": [(1,), (2,)]})
    assert count_isomorphic(s) == 6


def _binom(n, k):
    from math import comb
    return comb(n, k)


def test_isomorphism_classes_partition_all_structures():
    classes = isomorphism_classes(Vocabulary((("e", 2),)), 2)
    assert sum(len(c) for c in classes) == 16
    assert len(classes) == 10  # labelled digraphs with loops on 2 nodes up to swap


def test_extension_axioms():
    vocab = Vocabulary((("r", 1),))
    assert [len(delta_atoms(vocab, r)) for r in (0, 1, 2)] == [1, 1, 1]
    assert len(delta_atoms(V, 1)) == 1 + 3
    axioms = list(extension_axioms(vocab, 1))
    assert len(axioms) == 2
    rich = FiniteStructure(vocab, 4, {"r": [(1,), (2,)]})
    poor = FiniteStructure(vocab, 3, {"r": [(1,), (2,)]})
    assert all(eval_formula(rich, a.formula(vocab)) for a in axioms)
    assert not all(eval_formula(poor, a.formula(vocab)) for a in axioms)


def test_sexpr_golden():
    f = parse_sexpr("(forall x (exists y (and (p x y) (not (= x y)))))")
    assert f == ForAll("x", Exists("y", And((atom("p", "x", "y"), Not(Eq(Var("x"), Var("y")))))))
    assert to_sexpr(f) == "(forall x (exists y (and (p x y) (not (= x y)))))"
    s = FiniteStructure(V, 2, {"p": [(2, 1)], "r": [(1,)]})
    assert to_sexpr(s) == "(structure 2 (p (2 1)) (r (1)))"
    assert parse_sexpr("(r 2)") == Atom("r", (Elem(2),))


# --- property tests --------------------------------------------------------

variables = st.sampled_from(["x", "y"])


def _atoms():
    return st.one_of(
        st.builds(lambda v: atom("r", v), variables),
        st.builds(lambda a, b: atom("p", a, b), variables, variables),
        st.builds(lambda a, b: Eq(Var(a), Var(b)), variables, variables),
        st.just(TRUE))


formulas = st.recursive(
    _atoms(),
    lambda sub: st.one_of(
        st.builds(Not, sub),
        st.builds(lambda a, b: And((a, b)), sub, sub),
        st.builds(lambda a, b: Or((a, b)), sub, sub),
        st.builds(Implies, sub, sub),
        st.builds(Exists, variables, sub),
        st.builds(ForAll, variables, sub)),
    max_leaves=6)

structures = st.integers(min_value=0, max_value=2 ** 6 - 1).map(lambda m: FiniteStructure.from_mask(V, 2, m))


@given(formulas)
def test_sexpr_round_trip(f):
    assert parse_sexpr(to_sexpr(f)) == f


@given(formulas, structures, st.integers(1, 2), st.integers(1, 2))
def test_negation_and_desugaring_preserve_truth(f, s, a, b):
    env = {"x": a, "y": b}
    value = eval_formula(s, f, env)
    assert eval_formula(s, Not(f), env) == (not value)
    assert eval_formula(s, desugar(f), env) == value
    assert relations_of(desugar(f)) == relations_of(f)
    assert free_vars(desugar(f)) == free_vars(f)


@given(formulas, structures, st.integers(1, 2), st.integers(1, 2))
def test_truth_is_invariant_under_isomorphism(f, s, a, b):
    perm = {1: 2, 2: 1}
    assert eval_formula(s, f, {"x": a, "y": b}) == \
        eval_formula(permute_structure(s, perm), f, {"x": perm[a], "y": perm[b]})
