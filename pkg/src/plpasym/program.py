"""Probabilistic logic programs: data types, stratification, static checks,
unfolding of acyclic programs, and a naive Datalog evaluator."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

import networkx as nx

from .errors import ProgramError, StructureError, UnstratifiableError
from .logic import (Atom, Const, Elem, Eq, FiniteStructure, Term, Truth, Var,
                    Vocabulary)

BodyAtom = Union[Atom, Eq, Truth]


@dataclass(frozen=True)
class Literal:
    atom: BodyAtom
    positive: bool = True

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    @property
    def is_builtin(self) -> bool:
        return not isinstance(self.atom, Atom)


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple[Literal, ...] = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def variables(self) -> set[str]:
        out = term_vars(self.head.args)
        for lit in self.body:
            out |= literal_vars(lit)
        return out

    def body_vars(self) -> set[str]:
        out: set[str] = set()
        for lit in self.body:
            out |= literal_vars(lit)
        return out


@dataclass(frozen=True)
class ProbFact:
    name: str
    arity: int
    prob: Fraction
    auxiliary: bool = False
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "prob", Fraction(self.prob))
        if not 0 <= self.prob <= 1:
            raise ProgramError(f"probability of {self.name} outside [0,1]")


def term_vars(args: Iterable[Term]) -> set[str]:
    return {t.name for t in args if isinstance(t, Var)}


def literal_vars(lit: Literal) -> set[str]:
    a = lit.atom
    if isinstance(a, Atom):
        return term_vars(a.args)
    if isinstance(a, Eq):
        return term_vars((a.left, a.right))
    return set()


@dataclass(frozen=True)
class ProbProgram:
    facts: tuple[ProbFact, ...] = ()
    rules: tuple[Clause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "facts", tuple(self.facts))
        object.__setattr__(self, "rules", tuple(self.rules))
        names = [f.name for f in self.facts]
        if len(set(names)) != len(names):
            raise ProgramError("a probabilistic fact symbol is declared twice")
        heads = {c.head.pred for c in self.rules}
        clash = heads & set(names)
        if clash:
            raise ProgramError(f"fact symbols used as rule heads: {sorted(clash)}")
        self._arities()  # validates consistency

    def _arities(self) -> dict[str, int]:
        out: dict[str, int] = {}

        def note(name: str, arity: int):
            if out.setdefault(name, arity) != arity:
                raise ProgramError(f"symbol {name!r} used with arities {out[name]} and {arity}")

        for f in self.facts:
            note(f.name, f.arity)
        for c in self.rules:
            note(c.head.pred, len(c.head.args))
            for lit in c.body:
                if isinstance(lit.atom, Atom):
                    note(lit.atom.pred, len(lit.atom.args))
        return out

    @property
    def arities(self) -> dict[str, int]:
        return self._arities()

    @property
    def fact_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.facts)

    @property
    def intensional(self) -> tuple[str, ...]:
        return tuple(sorted({c.head.pred for c in self.rules}))

    @property
    def extensional(self) -> tuple[str, ...]:
        """Fact symbols plus body symbols that are never defined.

        Undeclared extensional symbols have no probabilistic fact; they are
        read under the closed-world assumption (always empty).
        """
        idb = set(self.intensional)
        return tuple(sorted(name for name in self.arities if name not in idb))

    @property
    def undeclared(self) -> tuple[str, ...]:
        facts = set(self.fact_names)
        return tuple(name for name in self.extensional if name not in facts)

    @property
    def constants(self) -> tuple[str, ...]:
        out: set[str] = set()
        for c in self.rules:
            out |= {t.name for t in c.head.args if isinstance(t, Const)}
            for lit in c.body:
                a = lit.atom
                args = a.args if isinstance(a, Atom) else (a.left, a.right) if isinstance(a, Eq) else ()
                out |= {t.name for t in args if isinstance(t, Const)}
        return tuple(sorted(out))

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(tuple(self.arities.items()), self.constants)

    @property
    def extensional_vocabulary(self) -> Vocabulary:
        ar = self.arities
        return Vocabulary(tuple((name, ar[name]) for name in self.extensional), self.constants)

    def fact(self, name: str) -> ProbFact:
        for f in self.facts:
            if f.name == name:
                return f
        raise ProgramError(f"no probabilistic fact {name!r}")

    def clauses_for(self, pred: str) -> list[Clause]:
        return [c for c in self.rules if c.head.pred == pred]

    def with_facts(self, facts: Iterable[ProbFact]) -> "ProbProgram":
        return ProbProgram(tuple(facts), self.rules)


# --------------------------------------------------------------------------
# stratification


@dataclass(frozen=True)
class Stratification:
    strata: tuple[tuple[str, ...], ...]

    def level(self, pred: str) -> int:
        for i, stratum in enumerate(self.strata):
            if pred in stratum:
                return i
        raise ProgramError(f"{pred!r} is not intensional")


def dependency_graph(program: ProbProgram) -> nx.DiGraph:
    """Edges body-symbol -> head-symbol between intensional symbols, with
    attribute ``negative`` true if some occurrence is negated."""
    idb = set(program.intensional)
    g = nx.DiGraph()
    g.add_nodes_from(sorted(idb))
    for c in program.rules:
        for lit in c.body:
            if isinstance(lit.atom, Atom) and lit.atom.pred in idb:
                src, dst = lit.atom.pred, c.head.pred
                neg = g.edges[src, dst]["negative"] if g.has_edge(src, dst) else False
                g.add_edge(src, dst, negative=neg or not lit.positive)
    return g


def _negative_cycle(g: nx.DiGraph) -> list[str] | None:
    for comp in sorted(nx.strongly_connected_components(g), key=lambda c: sorted(c)):
        sub = g.subgraph(comp)
        for u, v, neg in sorted(sub.edges(data="negative")):
            if neg:
                if u == v:
                    return [u, u]
                path = nx.shortest_path(sub, v, u)
                return [u] + path
    return None


def stratify(program: ProbProgram) -> Stratification:
    """Lowest-level assignment: level(h) >= level(b) for positive intensional
    body symbols b, and level(h) > level(b) for negated ones."""
    g = dependency_graph(program)
    cycle = _negative_cycle(g)
    if cycle is not None:
        raise UnstratifiableError(cycle)
    level = {p: 0 for p in g.nodes}
    changed = True
    while changed:
        changed = False
        for u, v, neg in g.edges(data="negative"):
            need = level[u] + (1 if neg else 0)
            if level[v] < need:
                level[v] = need
                changed = True
    if not level:
        return Stratification(())
    top = max(level.values())
    strata = tuple(tuple(sorted(p for p in level if level[p] == i)) for i in range(top + 1))
    return Stratification(tuple(s for s in strata if s))


# --------------------------------------------------------------------------
# static checks


def check_determinate(program: ProbProgram) -> tuple[bool, list[Clause]]:
    offenders = [c for c in program.rules if not c.body_vars() <= term_vars(c.head.args)]
    return not offenders, offenders


def is_strongly_acyclic(program: ProbProgram) -> bool:
    idb = set(program.intensional)
    return not any(isinstance(lit.atom, Atom) and lit.atom.pred in idb
                   for c in program.rules for lit in c.body)


def check_acyclic(program: ProbProgram) -> bool:
    """True iff the program is acyclic in the strong sense (no intensional
    symbol in any body), possibly after unfolding."""
    if is_strongly_acyclic(program):
        return True
    if not nx.is_directed_acyclic_graph(dependency_graph(program)):
        return False
    try:
        unfold_acyclic(program)
    except ProgramError:
        return False
    return True


# --------------------------------------------------------------------------
# unfolding


class _Fresh:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.counter = 0

    def __call__(self) -> str:
        while True:
            self.counter += 1
            name = f"_G{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _subst_term(t: Term, sub: Mapping[str, Term]) -> Term:
    if isinstance(t, Var) and t.name in sub:
        return sub[t.name]
    return t


def _subst_lit(lit: Literal, sub: Mapping[str, Term]) -> Literal:
    a = lit.atom
    if isinstance(a, Atom):
        return Literal(Atom(a.pred, tuple(_subst_term(t, sub) for t in a.args)), lit.positive)
    if isinstance(a, Eq):
        return Literal(Eq(_subst_term(a.left, sub), _subst_term(a.right, sub)), lit.positive)
    return lit


def _match_head(clause: Clause, call_args: tuple[Term, ...], fresh: _Fresh):
    """Rename ``clause`` apart and bind its head to ``call_args``.

    Returns (substituted body, extra equality literals) or None when the
    head cannot match (two distinct constants).
    """
    renaming = {v: Var(fresh()) for v in sorted(clause.variables())}
    sub: dict[str, Term] = {}
    eqs: list[Literal] = []
    for s, t in zip(clause.head.args, call_args):
        s = _subst_term(s, renaming)
        if isinstance(s, Var) and s.name not in sub:
            sub[s.name] = t
            continue
        left = _subst_term(s, sub)
        if isinstance(left, Const) and isinstance(t, Const):
            if left != t:
                return None
            continue
        if left != t:
            eqs.append(Literal(Eq(left, t)))
    full = {v: _subst_term(r, sub) for v, r in renaming.items()}
    body = [_subst_lit(lit, full) for lit in clause.body]
    eqs = [_subst_lit(e, full) for e in eqs]
    return body, eqs


def _negated_options(lit: Literal) -> Literal:
    a = lit.atom
    if isinstance(a, Truth):
        return Literal(Truth(not a.value) if lit.positive else a, True)
    return lit.negate()


def unfold_acyclic(program: ProbProgram) -> ProbProgram:
    """Unfold intensional body atoms until no intensional symbol occurs in any
    body.  Negated intensional literals are expanded by De Morgan, which
    requires the defining clauses to have no local variables."""
    g = dependency_graph(program)
    if not nx.is_directed_acyclic_graph(g):
        raise ProgramError("intensional dependency graph has a cycle")
    idb = set(program.intensional)
    all_vars: set[str] = set()
    for c in program.rules:
        all_vars |= c.variables()
    fresh = _Fresh(all_vars)
    done: dict[str, list[Clause]] = {}

    def expand(clause: Clause) -> Iterator[Clause]:
        for i, lit in enumerate(clause.body):
            if isinstance(lit.atom, Atom) and lit.atom.pred in idb:
                break
        else:
            yield clause
            return
        before, after = list(clause.body[:i]), list(clause.body[i + 1:])
        call = lit.atom.args
        if lit.positive:
            for d in done[lit.atom.pred]:
                matched = _match_head(d, call, fresh)
                if matched is None:
                    continue
                body, eqs = matched
                yield from expand(Clause(clause.head, tuple(before + eqs + body + after),
                                         clause.line, clause.col))
            return
        # not p(call): every defining clause must fail
        alternatives: list[list[Literal]] = []
        for d in done[lit.atom.pred]:
            if not d.body_vars() <= term_vars(d.head.args):
                raise ProgramError(f"cannot unfold negation of {lit.atom.pred}: "
                                   "a defining clause has local variables")
            matched = _match_head(d, call, fresh)
            if matched is None:
                continue
            body, eqs = matched
            alternatives.append([_negated_options(x) for x in eqs + body])
        for choice in itertools.product(*alternatives):
            yield from expand(Clause(clause.head, tuple(before + list(choice) + after),
                                     clause.line, clause.col))

    per_clause: dict[int, list[Clause]] = {}
    for pred in nx.topological_sort(g):
        done[pred] = []
        for i, c in enumerate(program.rules):
            if c.head.pred == pred:
                per_clause[i] = list(expand(c))
                done[pred].extend(per_clause[i])
    rules = tuple(e for i in range(len(program.rules)) for e in per_clause[i])
    return ProbProgram(program.facts, rules)


# --------------------------------------------------------------------------
# naive Datalog evaluation


def _term_value(t: Term, env: Mapping[str, int], structure: FiniteStructure):
    if isinstance(t, Var):
        return env.get(t.name)
    if isinstance(t, Elem):
        return t.value
    try:
        return structure.constants[t.name]
    except KeyError:
        raise StructureError(f"constant {t.name} is not interpreted") from None


def _solutions(clause: Clause, rel: Mapping[str, set], structure: FiniteStructure) -> Iterator[dict]:
    positives = [l.atom for l in clause.body if l.positive and isinstance(l.atom, Atom)]
    rest = [l for l in clause.body if not (l.positive and isinstance(l.atom, Atom))]
    variables = sorted(clause.variables())

    def join(i: int, env: dict) -> Iterator[dict]:
        if i == len(positives):
            yield env
            return
        a = positives[i]
        for tup in rel[a.pred]:
            new = dict(env)
            ok = True
            for t, v in zip(a.args, tup):
                cur = _term_value(t, new, structure)
                if cur is None:
                    new[t.name] = v
                elif cur != v:
                    ok = False
                    break
            if ok:
                yield from join(i + 1, new)

    for env in join(0, {}):
        free = [v for v in variables if v not in env]
        for vals in itertools.product(structure.domain, repeat=len(free)):
            full = dict(env)
            full.update(zip(free, vals))
            if all(_literal_holds(l, full, rel, structure) for l in rest):
                yield full


def _literal_holds(lit: Literal, env, rel, structure) -> bool:
    a = lit.atom
    if isinstance(a, Truth):
        val = a.value
    elif isinstance(a, Eq):
        val = _term_value(a.left, env, structure) == _term_value(a.right, env, structure)
    else:
        val = tuple(_term_value(t, env, structure) for t in a.args) in rel[a.pred]
    return val == lit.positive


def datalog_eval(program: ProbProgram, structure: FiniteStructure) -> FiniteStructure:
    """Extend an extensional structure by the program's intensional relations,
    stratum by stratum, each to its fixpoint."""
    strat = stratify(program)
    arities = program.arities
    ext_vocab = set(structure.vocab.names)
    idb = set(program.intensional)
    if ext_vocab & idb:
        raise StructureError(f"input interprets intensional symbols {sorted(ext_vocab & idb)}")
    missing = set(program.fact_names) - ext_vocab
    if missing:
        raise StructureError(f"input does not interpret fact symbols {sorted(missing)}")
    arities = {**{n: a for n, a in structure.vocab.relations}, **arities}
    rel: dict[str, set] = {name: set(structure.relation(name)) for name in ext_vocab}
    for name in program.extensional:
        rel.setdefault(name, set())
    for name in idb:
        rel[name] = set()
    for stratum in strat.strata:
        clauses = [c for c in program.rules if c.head.pred in stratum]
        changed = True
        while changed:
            changed = False
            for c in clauses:
                for env in list(_solutions(c, rel, structure)):
                    head = tuple(_term_value(t, env, structure) for t in c.head.args)
                    if head not in rel[c.head.pred]:
                        rel[c.head.pred].add(head)
                        changed = True
    out_names = sorted(ext_vocab | idb | set(program.extensional))
    vocab = Vocabulary(tuple((n, arities[n]) for n in out_names), structure.vocab.constants)
    return FiniteStructure(vocab, structure.n, {n: rel[n] for n in out_names}, structure.constants)


def datalog_formula_holds(program: ProbProgram, predicate: str, args: Iterable[int],
                          structure: FiniteStructure) -> bool:
    if predicate not in program.arities:
        raise ProgramError(f"unknown predicate {predicate!r}")
    return datalog_eval(program, structure).holds(predicate, tuple(args))
