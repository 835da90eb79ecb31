"""Almost-sure reasoning over random structures and the asymptotic transform.

Fact relations with probabilities strictly inside (0, 1) produce random
structures whose first-order theory converges to that of a countable generic
model: every consistent one-point extension of a quantifier-free type is
realised.  In that model the truth of any first-order formula, and of any
predicate defined by a stratified Datalog program, depends only on the
quantifier-free type of its arguments.  This module computes those type sets
and emits them as an acyclic determinate program.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import AsymptoticError, ConstantsNotSupported, FormulaError
from .logic import (FALSE, TRUE, And, Atom, Const, Elem, Eq, Exists, ForAll, Formula,
                    Implies, Lfp, Not, Or, Truth, Var, Vocabulary, desugar, free_vars,
                    relations_of)
from .program import Clause, Literal, ProbFact, ProbProgram, stratify
from .semantics import query_prob
from .syntax import fact_variables, format_clause, format_fact, format_probability

BlockAtom = tuple[str, tuple[int, ...]]


# --------------------------------------------------------------------------
# quantifier-free types


def restricted_growth_strings(k: int) -> Iterator[tuple[int, ...]]:
    """Set partitions of k positions as restricted growth strings, in
    lexicographic order (so the all-equal partition comes first)."""
    def rec(prefix: list[int], top: int):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from rec(prefix + [b], max(top, b))
    yield from rec([], -1)


def block_atoms(vocab: Vocabulary, nblocks: int) -> list[BlockAtom]:
    return [(name, args) for name, arity in vocab.relations
            for args in itertools.product(range(nblocks), repeat=arity)]


@dataclass(frozen=True)
class QfType:
    """A complete quantifier-free type over variables v1..vk.

    ``blocks[i]`` is the equality class of v_{i+1} (a restricted growth
    string); ``true_atoms`` lists the atoms over class indices that hold,
    every other atom over the classes and ``vocab`` being false.
    """

    k: int
    blocks: tuple[int, ...]
    true_atoms: frozenset[BlockAtom]
    vocab: Vocabulary

    def __post_init__(self):
        if len(self.blocks) != self.k:
            raise FormulaError("block string length differs from k")
        seen = -1
        for b in self.blocks:
            if b > seen + 1:
                raise FormulaError("blocks must form a restricted growth string")
            seen = max(seen, b)
        valid = set(block_atoms(self.vocab, self.nblocks))
        if not set(self.true_atoms) <= valid:
            raise FormulaError("type mentions atoms outside its vocabulary or classes")

    @property
    def nblocks(self) -> int:
        return max(self.blocks) + 1 if self.blocks else 0

    def holds(self, atom: BlockAtom) -> bool:
        return atom in self.true_atoms

    def restrict(self, positions: Sequence[int], vocab: Vocabulary | None = None) -> "QfType":
        """Type of the sub-tuple (v_{p+1} for p in positions) over ``vocab``."""
        vocab = vocab or self.vocab
        renumber: dict[int, int] = {}
        for p in positions:
            renumber.setdefault(self.blocks[p], len(renumber))
        names = set(vocab.names)
        atoms = frozenset((name, tuple(renumber[a] for a in args)) for name, args in self.true_atoms
                          if name in names and all(a in renumber for a in args))
        return QfType(len(positions), tuple(renumber[self.blocks[p]] for p in positions), atoms, vocab)

    def formula(self, variables: Sequence[str] | None = None) -> Formula:
        names = list(variables) if variables is not None else [f"v{i}" for i in range(1, self.k + 1)]
        return conj_formula(partition_literals(self.blocks, names)
                            + [a if pol else Not(a) for a, pol in
                               self._literals(names)])

    def _literals(self, names):
        reps = representatives(self.blocks)
        for name, args in block_atoms(self.vocab, self.nblocks):
            a = Atom(name, tuple(Var(names[reps[b]]) for b in args))
            yield a, (name, args) in self.true_atoms


def representatives(blocks: Sequence[int]) -> dict[int, int]:
    reps: dict[int, int] = {}
    for i, b in enumerate(blocks):
        reps.setdefault(b, i)
    return reps


def partition_literals(blocks: Sequence[int], names: Sequence[str]) -> list[Formula]:
    reps = representatives(blocks)
    out: list[Formula] = []
    for i, b in enumerate(blocks):
        if reps[b] != i:
            out.append(Eq(Var(names[i]), Var(names[reps[b]])))
    rep_list = sorted(reps.values())
    for a, b in itertools.combinations(rep_list, 2):
        out.append(Not(Eq(Var(names[a]), Var(names[b]))))
    return out


def conj_formula(items: list[Formula]) -> Formula:
    if not items:
        return TRUE
    return items[0] if len(items) == 1 else And(tuple(items))


def disj_formula(items: list[Formula]) -> Formula:
    if not items:
        return FALSE
    return items[0] if len(items) == 1 else Or(tuple(items))


def _check_type_vocab(vocab: Vocabulary):
    if vocab.constants:
        raise ConstantsNotSupported("types are defined for relational, constant-free vocabularies")
    nullary = [name for name, arity in vocab.relations if arity == 0]
    if nullary:
        raise AsymptoticError(f"nullary relations {nullary} must be split off before type reasoning")


def enumerate_qf_types(vocab: Vocabulary, k: int) -> list[QfType]:
    """All complete quantifier-free k-types over ``vocab``: partitions in
    restricted-growth order, then atom subsets in binary-counting order."""
    _check_type_vocab(vocab)
    out = []
    for blocks in restricted_growth_strings(k):
        atoms = block_atoms(vocab, max(blocks) + 1 if blocks else 0)
        for bits in range(1 << len(atoms)):
            true = frozenset(a for i, a in enumerate(atoms) if bits >> i & 1)
            out.append(QfType(k, blocks, true, vocab))
    return out


def count_qf_types(vocab: Vocabulary, k: int) -> int:
    return sum(1 << len(block_atoms(vocab, max(b) + 1 if b else 0)) for b in restricted_growth_strings(k))


# --------------------------------------------------------------------------
# generic model evaluation


def _check_probabilities(names: Iterable[str], probabilities: Mapping[str, Fraction] | None):
    if probabilities is None:
        return
    for name in names:
        if name not in probabilities:
            raise AsymptoticError(f"symbol {name} has no probability (intensional or undeclared)")
        q = Fraction(probabilities[name])
        if not 0 < q < 1:
            raise AsymptoticError(f"probability of {name} is {q}; eliminate boundary facts first")


def generic_eval(formula: Formula, context: QfType, variables: Sequence[str] | None = None,
                 probabilities: Mapping[str, Fraction] | None = None) -> bool:
    """Truth of a first-order formula in the generic model at any tuple
    realising ``context``; ``variables[i]`` is bound to v_{i+1}."""
    f = desugar(formula)
    rels = relations_of(f)
    fv = sorted(free_vars(f))
    if variables is None:
        variables = fv
    variables = list(variables)
    if len(variables) != context.k:
        raise FormulaError(f"{len(variables)} variables for a {context.k}-type")
    if set(fv) - set(variables):
        raise FormulaError(f"free variables {sorted(set(fv) - set(variables))} not bound by the context")
    _check_formula(f)
    known = dict(context.vocab.relations)
    for name, arity in rels.items():
        if name not in known:
            raise AsymptoticError(f"symbol {name} is not in the context vocabulary (intensional?)")
        if known[name] != arity:
            raise FormulaError(f"arity mismatch for {name}")
    _check_type_vocab(context.vocab)
    _check_probabilities(rels, probabilities)
    truth = {a: (a in context.true_atoms) for a in block_atoms(context.vocab, context.nblocks)}
    env = {v: context.blocks[i] for i, v in enumerate(variables)}
    return _GenericModel(known).eval(f, env, context.nblocks, truth)


def _check_formula(f: Formula):
    if isinstance(f, Lfp):
        raise FormulaError("generic evaluation is first-order only")
    if isinstance(f, Atom) or isinstance(f, Eq):
        args = f.args if isinstance(f, Atom) else (f.left, f.right)
        for t in args:
            if isinstance(t, Const):
                raise ConstantsNotSupported("constants are not supported in asymptotic reasoning")
            if isinstance(t, Elem):
                raise FormulaError("domain elements cannot occur in generic evaluation")
    for c in (f.items if isinstance(f, (And, Or)) else (f.body,) if isinstance(f, (Not, Exists)) else ()):
        _check_formula(c)


class _GenericModel:
    def __init__(self, arities: Mapping[str, int]):
        self.arities = dict(arities)
        self._rels_cache: dict[int, dict[str, int]] = {}

    def rels(self, f: Formula) -> dict[str, int]:
        key = id(f)
        if key not in self._rels_cache:
            self._rels_cache[key] = relations_of(f)
        return self._rels_cache[key]

    def eval(self, f: Formula, env: dict[str, int], nblocks: int, truth: dict[BlockAtom, bool]) -> bool:
        if isinstance(f, Atom):
            key = (f.pred, tuple(env[t.name] for t in f.args))
            return truth[key]
        if isinstance(f, Eq):
            return env[f.left.name] == env[f.right.name]
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, Not):
            return not self.eval(f.body, env, nblocks, truth)
        if isinstance(f, And):
            return all(self.eval(c, env, nblocks, truth) for c in f.items)
        if isinstance(f, Or):
            return any(self.eval(c, env, nblocks, truth) for c in f.items)
        if isinstance(f, Exists):
            inner = dict(env)
            for b in range(nblocks):
                inner[f.var] = b
                if self.eval(f.body, inner, nblocks, truth):
                    return True
            # a fresh element: every consistent extension type is realised
            inner[f.var] = nblocks
            rels = self.rels(f.body)
            new_atoms = [(name, args) for name, arity in sorted(rels.items())
                         for args in itertools.product(range(nblocks + 1), repeat=arity)
                         if nblocks in args]
            for bits in range(1 << len(new_atoms)):
                ext = dict(truth)
                for i, a in enumerate(new_atoms):
                    ext[a] = bool(bits >> i & 1)
                if self.eval(f.body, inner, nblocks + 1, ext):
                    return True
            return False
        raise FormulaError(f"unsupported formula node {type(f).__name__}")


# --------------------------------------------------------------------------
# simplification of accepted point sets


def essential_projection(points: set[tuple[bool, ...]], dims: int) -> tuple[list[int], set[tuple[bool, ...]]]:
    """Drop coordinates the set does not depend on.

    Coordinate j is inessential iff the set is closed under flipping j.
    Returns the essential coordinates and the projected set.
    """
    essential = []
    for j in range(dims):
        for p in points:
            flipped = p[:j] + (not p[j],) + p[j + 1:]
            if flipped not in points:
                essential.append(j)
                break
    projected = {tuple(p[j] for j in essential) for p in points}
    return essential, projected


def _type_point(t: QfType, atoms: Sequence[BlockAtom]) -> tuple[bool, ...]:
    return tuple(a in t.true_atoms for a in atoms)


def asymptotic_qe(formula: Formula, variables: Sequence[str] | None = None,
                  probabilities: Mapping[str, Fraction] | None = None) -> Formula:
    """Quantifier-free formula almost surely equivalent to ``formula``: the
    disjunction of the accepted types, with atoms the acceptance does not
    depend on removed.  Uses only relation symbols of the input."""
    f = desugar(formula)
    variables = list(variables) if variables is not None else sorted(free_vars(f))
    rels = relations_of(f)
    vocab = Vocabulary(tuple(rels.items()))
    _check_type_vocab(vocab)
    _check_probabilities(rels, probabilities)
    k = len(variables)
    disjuncts: list[Formula] = []
    full = True
    for blocks in restricted_growth_strings(k):
        atoms = block_atoms(vocab, max(blocks) + 1 if blocks else 0)
        accepted = set()
        for bits in range(1 << len(atoms)):
            true = frozenset(a for i, a in enumerate(atoms) if bits >> i & 1)
            t = QfType(k, blocks, true, vocab)
            if generic_eval(f, t, variables):
                accepted.add(_type_point(t, atoms))
        if len(accepted) != 1 << len(atoms):
            full = False
        if not accepted:
            continue
        essential, proj = essential_projection(accepted, len(atoms))
        reps = representatives(blocks)
        part = partition_literals(blocks, variables)
        pieces = []
        for point in sorted(proj, reverse=True):
            lits = []
            for j, pol in zip(essential, point):
                name, args = atoms[j]
                a = Atom(name, tuple(Var(variables[reps[b]]) for b in args))
                lits.append(a if pol else Not(a))
            pieces.append(conj_formula(lits))
        disjuncts.append(conj_formula(part + [disj_formula(pieces)]) if part else disj_formula(pieces))
    if full:
        return TRUE
    return disj_formula(disjuncts)


# --------------------------------------------------------------------------
# program preprocessing


def _check_constant_free(program: ProbProgram):
    if program.constants:
        raise ConstantsNotSupported(f"constants {list(program.constants)} are not supported "
                                    "in asymptotic reasoning")


def _substitute(program: ProbProgram, values: Mapping[str, bool], drop_facts: bool) -> ProbProgram:
    """Replace every literal over a symbol in ``values`` by its truth value:
    true literals are removed, clauses with a false literal are dropped."""
    rules = []
    for c in program.rules:
        body = []
        dead = False
        for lit in c.body:
            a = lit.atom
            if isinstance(a, Atom) and a.pred in values:
                if values[a.pred] != lit.positive:
                    dead = True
                    break
                continue
            body.append(lit)
        if not dead:
            rules.append(Clause(c.head, tuple(body), c.line, c.col))
    facts = [f for f in program.facts if not (drop_facts and f.name in values)]
    return ProbProgram(tuple(facts), tuple(rules))


def boundary_values(program: ProbProgram) -> dict[str, bool]:
    """Symbols fixed almost surely: facts with probability 0 or 1, and
    undeclared extensional symbols (always empty)."""
    out = {f.name: f.prob == 1 for f in program.facts if f.prob in (0, 1)}
    out.update({name: False for name in program.undeclared})
    return out


def eliminate_boundary(program: ProbProgram) -> ProbProgram:
    """Substitute boundary-probability symbols by truth values in rule bodies.

    The boundary facts stay declared, so the distribution is unchanged.
    Repeated until stable, since dropping clauses can leave a predicate
    with no definition, which makes it empty."""
    while True:
        used = {l.atom.pred for c in program.rules for l in c.body if isinstance(l.atom, Atom)}
        values = {k: v for k, v in boundary_values(program).items() if k in used}
        if not values:
            return program
        program = _substitute(program, values, drop_facts=False)


@dataclass(frozen=True)
class NullaryBranch:
    config: tuple[tuple[str, bool], ...]
    weight: Fraction
    program: ProbProgram


def nullary_case_split(program: ProbProgram) -> list[NullaryBranch]:
    """One branch per truth assignment to the nullary facts, weighted by its
    probability; branch programs have the nullary facts substituted out."""
    nullary = [f for f in program.facts if f.arity == 0]
    out = []
    for vals in itertools.product((True, False), repeat=len(nullary)):
        weight = Fraction(1)
        for f, v in zip(nullary, vals):
            weight *= f.prob if v else 1 - f.prob
        config = tuple((f.name, v) for f, v in zip(nullary, vals))
        out.append(NullaryBranch(config, weight, _substitute(program, dict(config), drop_facts=True)))
    return out


def mixture_distribution(branches: Sequence[NullaryBranch], n: int, vocab: Vocabulary,
                         max_atoms: int = 25):
    """Weighted sum of branch distributions embedded into ``vocab`` (nullary
    symbols set from each branch configuration, vanished symbols empty)."""
    from collections import defaultdict
    from .ground import atom_index
    from .logic import ground_atoms
    from .semantics import WorldDistribution, world_distribution

    idx = atom_index(vocab, n)
    out: dict[int, Fraction] = defaultdict(Fraction)
    for br in branches:
        if br.weight == 0:
            continue
        d = world_distribution(br.program, n, max_atoms)
        base = sum(1 << idx[(name, ())] for name, v in br.config if v)
        src_atoms = ground_atoms(d.vocab, n)
        moves = [idx[a] for a in src_atoms]
        for mask, w in d.weights.items():
            m = base
            for i, dst in enumerate(moves):
                if mask >> i & 1:
                    m |= 1 << dst
            out[m] += br.weight * w
    return WorldDistribution(vocab, n, dict(out))


# --------------------------------------------------------------------------
# the type-level fixpoint


def type_vocabularies(program: ProbProgram) -> dict[str, Vocabulary]:
    """For each intensional predicate the (non-nullary) fact relations it
    depends on, directly or through other intensional predicates."""
    idb = set(program.intensional)
    arities = program.arities
    direct: dict[str, set[str]] = {p: set() for p in idb}
    uses: dict[str, set[str]] = {p: set() for p in idb}
    for c in program.rules:
        for lit in c.body:
            if isinstance(lit.atom, Atom):
                name = lit.atom.pred
                (uses if name in idb else direct)[c.head.pred].add(name)
    closure = {p: set(direct[p]) for p in idb}
    changed = True
    while changed:
        changed = False
        for p in idb:
            for q in uses[p]:
                if not closure[q] <= closure[p]:
                    closure[p] |= closure[q]
                    changed = True
    return {p: Vocabulary(tuple((r, arities[r]) for r in sorted(closure[p]) if arities[r] > 0))
            for p in sorted(idb)}


@dataclass
class TypeTable:
    """Accepted types per intensional predicate, with the vocabulary each
    predicate's types range over and the table sizes after each sweep."""

    types: dict[str, frozenset[QfType]]
    vocabularies: dict[str, Vocabulary]
    arities: dict[str, int]
    history: list[dict[str, int]] = field(default_factory=list)

    def accepts(self, pred: str, t: QfType) -> bool:
        return t in self.types[pred]

    def __getitem__(self, pred: str) -> frozenset[QfType]:
        return self.types[pred]


class _ClauseMatcher:
    """Decides whether a clause derives its head on a given head type."""

    def __init__(self, clause: Clause, idb_vocab: Mapping[str, Vocabulary], head_vocab: Vocabulary):
        self.clause = clause
        self.idb_vocab = idb_vocab
        self.head_vocab = head_vocab
        self.head_vars = [t.name for t in clause.head.args]
        seen = set(self.head_vars)
        self.body_vars: list[str] = []
        for lit in clause.body:
            a = lit.atom
            args = a.args if isinstance(a, Atom) else (a.left, a.right) if isinstance(a, Eq) else ()
            for t in args:
                if t.name not in seen:
                    seen.add(t.name)
                    self.body_vars.append(t.name)

    def accepts(self, tau: QfType, tables: Mapping[str, frozenset[QfType]]) -> bool:
        env: dict[str, int] = {}
        for v, b in zip(self.head_vars, tau.blocks):
            if env.setdefault(v, b) != b:
                return False
        for placement in self._placements(env, tau.nblocks):
            if self._check(placement, tau, tables):
                return True
        return False

    def _placements(self, env: dict[str, int], nblocks: int) -> Iterator[dict[str, int]]:
        def rec(i: int, cur: dict[str, int], top: int):
            if i == len(self.body_vars):
                yield cur
                return
            for b in range(top + 1):
                nxt = dict(cur)
                nxt[self.body_vars[i]] = b
                yield from rec(i + 1, nxt, max(top, b + 1))
        yield from rec(0, env, nblocks)

    def _check(self, env: dict[str, int], tau: QfType, tables) -> bool:
        nb = tau.nblocks
        needed: list[BlockAtom] = []
        deferred = []
        for lit in self.clause.body:
            a = lit.atom
            if isinstance(a, Truth):
                if a.value != lit.positive:
                    return False
                continue
            if isinstance(a, Eq):
                if (env[a.left.name] == env[a.right.name]) != lit.positive:
                    return False
                continue
            blocks = tuple(env[t.name] for t in a.args)
            if a.pred in self.idb_vocab:
                distinct = sorted(set(blocks))
                if any(b >= nb for b in distinct):
                    for name, arity in self.idb_vocab[a.pred].relations:
                        for args in itertools.product(distinct, repeat=arity):
                            if any(b >= nb for b in args):
                                needed.append((name, args))
                deferred.append((lit, blocks))
            else:
                key = (a.pred, blocks)
                if all(b < nb for b in blocks):
                    if (key in tau.true_atoms) != lit.positive:
                        return False
                else:
                    needed.append(key)
                    deferred.append((lit, blocks))
        needed = sorted(set(needed))
        for bits in range(1 << len(needed)):
            extra = {a for i, a in enumerate(needed) if bits >> i & 1}
            if all(self._literal(lit, blocks, tau, extra, needed, tables) for lit, blocks in deferred):
                return True
        return False

    def _literal(self, lit: Literal, blocks, tau: QfType, extra, needed, tables) -> bool:
        a = lit.atom
        nb = tau.nblocks
        if a.pred not in self.idb_vocab:
            return ((a.pred, blocks) in extra) == lit.positive
        vocab = self.idb_vocab[a.pred]
        renumber: dict[int, int] = {}
        for b in blocks:
            renumber.setdefault(b, len(renumber))
        true = set()
        for name, arity in vocab.relations:
            for args in itertools.product(list(renumber), repeat=arity):
                key = (name, args)
                val = key in extra if any(b >= nb for b in args) else key in tau.true_atoms
                if val:
                    true.add((name, tuple(renumber[b] for b in args)))
        t = QfType(len(blocks), tuple(renumber[b] for b in blocks), frozenset(true), vocab)
        return (t in tables[a.pred]) == lit.positive


def _check_fixpoint_input(program: ProbProgram):
    _check_constant_free(program)
    for f in program.facts:
        if f.arity == 0 and any(isinstance(l.atom, Atom) and l.atom.pred == f.name
                                for c in program.rules for l in c.body):
            raise AsymptoticError(f"nullary fact {f.name} must be split off first")
    used = {l.atom.pred for c in program.rules for l in c.body if isinstance(l.atom, Atom)}
    boundary = {name for name in boundary_values(program) if name in used}
    if boundary:
        raise AsymptoticError(f"boundary or undeclared symbols {sorted(boundary)} not eliminated")


def asymptotic_fixpoint(program: ProbProgram,
                        vocabularies: Mapping[str, Vocabulary] | None = None) -> TypeTable:
    """Stratum by stratum, grow the accepted type set of each predicate until
    no clause accepts a new head type."""
    _check_fixpoint_input(program)
    strat = stratify(program)
    arities = program.arities
    vocabs = dict(type_vocabularies(program))
    if vocabularies:
        for p, v in vocabularies.items():
            if p in vocabs:
                vocabs[p] = v
    candidates = {p: enumerate_qf_types(vocabs[p], arities[p]) for p in vocabs}
    tables: dict[str, frozenset[QfType]] = {p: frozenset() for p in vocabs}
    matchers = {p: [_ClauseMatcher(c, vocabs, vocabs[p]) for c in program.clauses_for(p)] for p in vocabs}
    history = []
    for stratum in strat.strata:
        while True:
            changed = False
            for p in stratum:
                current = set(tables[p])
                for t in candidates[p]:
                    if t in current:
                        continue
                    if any(m.accepts(t, tables) for m in matchers[p]):
                        current.add(t)
                        tables[p] = frozenset(current)
                        changed = True
            history.append({p: len(tables[p]) for p in sorted(tables)})
            if not changed:
                break
    return TypeTable(tables, vocabs, {p: arities[p] for p in vocabs}, history)


# --------------------------------------------------------------------------
# emission


@dataclass
class DeterminateProgram:
    program: ProbProgram
    branches: list[tuple[tuple[tuple[str, bool], ...], Fraction]]

    @cached_property
    def rules_text(self) -> str:
        return "".join(format_clause(c) + "\n" for c in self.program.rules)

    @property
    def rules_hash(self) -> str:
        return hashlib.sha256(self.rules_text.encode()).hexdigest()

    def to_text(self) -> str:
        lines = ["% asymptotically equivalent acyclic determinate program",
                 f"% rules-sha256: {self.rules_hash}"]
        for config, weight in self.branches:
            desc = ", ".join(f"{name}={'true' if v else 'false'}" for name, v in config) or "(no nullary facts)"
            lines.append(f"% branch {desc}: weight {format_probability(weight)}")
        body = "".join(format_fact(f) + "\n" for f in self.program.facts) + self.rules_text
        return "\n".join(lines) + "\n" + body


def _emit_predicate(pred: str, arity: int, vocab: Vocabulary, guards: Sequence[str],
                    branch_tables: Sequence[tuple[dict[str, bool], TypeTable]]) -> list[Clause]:
    names = fact_variables(arity)
    head = Atom(pred, tuple(Var(v) for v in names))
    clauses: list[Clause] = []
    all_full = True
    for blocks in restricted_growth_strings(arity):
        atoms = block_atoms(vocab, max(blocks) + 1 if blocks else 0)
        dims = len(guards) + len(atoms)
        accepted = set()
        for config, table in branch_tables:
            gpoint = tuple(config[g] for g in guards)
            for t in table[pred]:
                if t.blocks == blocks:
                    accepted.add(gpoint + _type_point(t, atoms))
        if len(accepted) != 1 << dims:
            all_full = False
        if not accepted:
            continue
        essential, proj = essential_projection(accepted, dims)
        reps = representatives(blocks)
        part = [Literal(f.body, False) if isinstance(f, Not) else Literal(f)
                for f in partition_literals(blocks, names)]
        for point in sorted(proj, reverse=True):
            lits = list(part)
            for j, pol in zip(essential, point):
                if j < len(guards):
                    a = Atom(guards[j], ())
                else:
                    name, args = atoms[j - len(guards)]
                    a = Atom(name, tuple(Var(names[reps[b]]) for b in args))
                lits.append(Literal(a, pol))
            clauses.append(Clause(head, tuple(lits)))
    if all_full:
        return [Clause(head, ())]
    if not clauses:
        return [Clause(head, (Literal(Truth(False)),))]
    return clauses


def asymptotic_transform(program: ProbProgram) -> DeterminateProgram:
    """Acyclic determinate program asymptotically equivalent to ``program``.

    Pipeline: substitute boundary-probability symbols, split on nullary
    facts, run the type fixpoint in each branch, then emit one guarded clause
    per essential (guard, type) point.  Facts are carried over, except
    auxiliary facts of probabilistic rules that no longer occur.
    """
    _check_constant_free(program)
    stratify(program)
    base = eliminate_boundary(program)
    vocabs = type_vocabularies(base)
    guards = sorted(f.name for f in base.facts if f.arity == 0 and f.prob not in (0, 1))
    branches = nullary_case_split(ProbProgram(
        tuple(f for f in base.facts if f.arity > 0 or f.name in guards), base.rules))
    branch_tables = []
    for br in branches:
        table = asymptotic_fixpoint(br.program, vocabs)
        for p in vocabs:
            table.types.setdefault(p, frozenset())
        branch_tables.append((dict(br.config), table))
    arities = program.arities
    rules: list[Clause] = []
    for pred in program.intensional:
        if pred in vocabs:
            rules += _emit_predicate(pred, arities[pred], vocabs[pred], guards, branch_tables)
        else:  # every clause was removed by boundary elimination
            head = Atom(pred, tuple(Var(v) for v in fact_variables(arities[pred])))
            rules.append(Clause(head, (Literal(Truth(False)),)))
    used = {l.atom.pred for c in rules for l in c.body if isinstance(l.atom, Atom)}
    facts = tuple(f for f in program.facts if not f.auxiliary or f.name in used)
    out = ProbProgram(facts, tuple(rules))
    return DeterminateProgram(out, [(br.config, br.weight) for br in branches])


def asymptotic_query_prob(program: ProbProgram, query: Formula,
                          transformed: DeterminateProgram | None = None) -> Fraction:
    """Limit probability of a quantifier-free query, its variables denoting
    distinct elements (numerals in the query keep their values)."""
    t = transformed or asymptotic_transform(program)
    used: set[int] = set()
    variables: list[str] = []

    def collect(f: Formula):
        if isinstance(f, Atom) or isinstance(f, Eq):
            args = f.args if isinstance(f, Atom) else (f.left, f.right)
            for a in args:
                if isinstance(a, Elem):
                    used.add(a.value)
                elif isinstance(a, Var) and a.name not in variables:
                    variables.append(a.name)
                elif isinstance(a, Const):
                    raise ConstantsNotSupported("constants are not supported in asymptotic queries")
        elif isinstance(f, (Exists, ForAll, Lfp)):
            raise FormulaError("asymptotic queries must be quantifier-free")
        else:
            for c in (f.items if isinstance(f, (And, Or)) else (f.body,) if isinstance(f, Not)
                      else (f.left, f.right) if isinstance(f, Implies) else ()):
                collect(c)

    collect(query)
    assignment: dict[str, int] = {}
    nxt = 1
    for v in variables:
        while nxt in used:
            nxt += 1
        assignment[v] = nxt
        nxt += 1
    ground = _ground_vars(query, assignment)
    n = max([1, *used, *assignment.values()])
    return query_prob(t.program, n, ground)


def _ground_vars(f: Formula, assignment: Mapping[str, int]) -> Formula:
    def term(t):
        return Elem(assignment[t.name]) if isinstance(t, Var) else t
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(term(t) for t in f.args))
    if isinstance(f, Eq):
        return Eq(term(f.left), term(f.right))
    if isinstance(f, Not):
        return Not(_ground_vars(f.body, assignment))
    if isinstance(f, And):
        return And(tuple(_ground_vars(c, assignment) for c in f.items))
    if isinstance(f, Or):
        return Or(tuple(_ground_vars(c, assignment) for c in f.items))
    if isinstance(f, Implies):
        return Implies(_ground_vars(f.left, assignment), _ground_vars(f.right, assignment))
    return f
