"""Relational vocabularies, formulas (first-order and least fixed point), and
finite structures on the domain ``{1..n}``.

Ground atoms of a vocabulary are enumerated in a fixed canonical order:
relations sorted by ``(name, arity)``, tuples of each relation in
lexicographic order.  Structures are interchangeable with bit masks over this
order (bit ``i`` set iff ground atom ``i`` holds), which is what the exact
inference code works with.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import FormulaError, StructureError

# --------------------------------------------------------------------------
# vocabularies


@dataclass(frozen=True)
class Vocabulary:
    relations: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        rels = tuple(sorted((str(name), int(arity)) for name, arity in self.relations))
        names = [name for name, _ in rels]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate relation names in {names}")
        if any(arity < 0 for _, arity in rels):
            raise StructureError("negative arity")
        consts = tuple(sorted(self.constants))
        if len(set(consts)) != len(consts):
            raise StructureError("duplicate constant names")
        if set(consts) & set(names):
            raise StructureError("constant and relation share a name")
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "constants", consts)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)

    def arity(self, name: str) -> int:
        for rel, arity in self.relations:
            if rel == name:
                return arity
        raise StructureError(f"relation {name!r} not in vocabulary")

    def __contains__(self, name: object) -> bool:
        return any(rel == name for rel, _ in self.relations)

    def restrict(self, names: Iterable[str]) -> "Vocabulary":
        wanted = set(names)
        missing = wanted - set(self.names)
        if missing:
            raise StructureError(f"symbols not in vocabulary: {sorted(missing)}")
        return Vocabulary(tuple(r for r in self.relations if r[0] in wanted), ())

    def union(self, other: "Vocabulary") -> "Vocabulary":
        merged = dict(self.relations)
        for name, arity in other.relations:
            if merged.get(name, arity) != arity:
                raise StructureError(f"arity clash for {name!r}")
            merged[name] = arity
        return Vocabulary(tuple(merged.items()), tuple(set(self.constants) | set(other.constants)))


def ground_atoms(vocab: Vocabulary, n: int) -> list[tuple[str, tuple[int, ...]]]:
    """All ground atoms over ``{1..n}`` in canonical order."""
    dom = range(1, n + 1)
    return [(name, args) for name, arity in vocab.relations
            for args in itertools.product(dom, repeat=arity)]


# --------------------------------------------------------------------------
# terms and formulas


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Elem:
    """A domain element used directly as a term (ground queries)."""

    value: int

    def __str__(self) -> str:
        return str(self.value)


Term = Union[Var, Const, Elem]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    items: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ForAll:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Lfp:
    """``[LFP_{vars, so_var} body] args``."""

    vars: tuple[str, ...]
    so_var: str
    body: "Formula"
    args: tuple[Term, ...]


Formula = Union[Atom, Eq, Truth, Not, And, Or, Implies, Exists, ForAll, Lfp]

TRUE = Truth(True)
FALSE = Truth(False)


def term(x: Union[str, int, Term]) -> Term:
    if isinstance(x, (Var, Const, Elem)):
        return x
    if isinstance(x, int):
        return Elem(x)
    return Var(x)


def atom(pred: str, *args: Union[str, int, Term]) -> Atom:
    return Atom(pred, tuple(term(a) for a in args))


def eq(a, b) -> Eq:
    return Eq(term(a), term(b))


def conj(*items: Formula) -> Formula:
    if len(items) == 1:
        return items[0]
    return And(tuple(items)) if items else TRUE


def disj(*items: Formula) -> Formula:
    if len(items) == 1:
        return items[0]
    return Or(tuple(items)) if items else FALSE


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Exists, ForAll, Lfp)):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.items
    if isinstance(f, Implies):
        return (f.left, f.right)
    return ()


def _term_vars(args: Iterable[Term]) -> set[str]:
    return {t.name for t in args if isinstance(t, Var)}


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(_term_vars(f.args))
    if isinstance(f, Eq):
        return frozenset(_term_vars((f.left, f.right)))
    if isinstance(f, (Exists, ForAll)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, Lfp):
        return (free_vars(f.body) - set(f.vars)) | _term_vars(f.args)
    out: frozenset[str] = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def free_so_vars(f: Formula, relations: Iterable[str] = ()) -> frozenset[str]:
    """Predicate names used in ``f`` that are neither relations nor bound by an
    enclosing Lfp."""
    rels = set(relations)

    def walk(g: Formula, bound: frozenset[str]) -> set[str]:
        if isinstance(g, Atom):
            return set() if g.pred in bound or g.pred in rels else {g.pred}
        if isinstance(g, Lfp):
            return walk(g.body, bound | {g.so_var})
        out: set[str] = set()
        for c in children(g):
            out |= walk(c, bound)
        return out

    return frozenset(walk(f, frozenset()))


def relations_of(f: Formula) -> dict[str, int]:
    """Relation symbols of ``f`` (second-order variables excluded) with arities."""
    out: dict[str, int] = {}

    def walk(g: Formula, bound: frozenset[str]):
        if isinstance(g, Atom):
            if g.pred in bound:
                return
            if out.setdefault(g.pred, len(g.args)) != len(g.args):
                raise FormulaError(f"relation {g.pred!r} used with two arities")
            return
        if isinstance(g, Lfp):
            walk(g.body, bound | {g.so_var})
            return
        for c in children(g):
            walk(c, bound)

    walk(f, frozenset())
    return out


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Exists, ForAll, Lfp)):
        return False
    return all(is_quantifier_free(c) for c in children(f))


def desugar(f: Formula) -> Formula:
    """Rewrite Implies and ForAll into Not/Or/Exists."""
    if isinstance(f, Implies):
        return Or((Not(desugar(f.left)), desugar(f.right)))
    if isinstance(f, ForAll):
        return Not(Exists(f.var, Not(desugar(f.body))))
    if isinstance(f, Not):
        return Not(desugar(f.body))
    if isinstance(f, And):
        return And(tuple(desugar(c) for c in f.items))
    if isinstance(f, Or):
        return Or(tuple(desugar(c) for c in f.items))
    if isinstance(f, Exists):
        return Exists(f.var, desugar(f.body))
    if isinstance(f, Lfp):
        return Lfp(f.vars, f.so_var, desugar(f.body), f.args)
    return f


def is_positive_in(f: Formula, so_var: str) -> bool:
    """True iff every free occurrence of ``so_var`` is under an even number of
    negations; the antecedent of an implication counts as one negation."""

    def walk(g: Formula, negative: bool) -> bool:
        if isinstance(g, Atom):
            return not (g.pred == so_var and negative)
        if isinstance(g, Not):
            return walk(g.body, not negative)
        if isinstance(g, Implies):
            return walk(g.left, not negative) and walk(g.right, negative)
        if isinstance(g, Lfp) and g.so_var == so_var:
            return True  # shadowed
        return all(walk(c, negative) for c in children(g))

    return walk(f, False)


# --------------------------------------------------------------------------
# finite structures


class FiniteStructure:
    """An immutable structure on ``{1..n}``."""

    __slots__ = ("vocab", "n", "_ext", "constants", "_key")

    def __init__(self, vocab: Vocabulary, n: int,
                 relations: Mapping[str, Iterable[Sequence[int]]] | None = None,
                 constants: Mapping[str, int] | None = None):
        if n < 0:
            raise StructureError("domain size must be nonnegative")
        relations = dict(relations or {})
        unknown = set(relations) - set(vocab.names)
        if unknown:
            raise StructureError(f"relations not in vocabulary: {sorted(unknown)}")
        ext = {}
        for name, arity in vocab.relations:
            tuples = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise StructureError(f"{name}{t}: expected arity {arity}")
                if any(not (isinstance(a, int) and 1 <= a <= n) for a in t):
                    raise StructureError(f"{name}{t}: entries must lie in 1..{n}")
            ext[name] = tuples
        consts = dict(constants or {})
        if set(consts) != set(vocab.constants):
            raise StructureError("constant interpretation must cover exactly the vocabulary constants")
        for c, v in consts.items():
            if not 1 <= v <= n:
                raise StructureError(f"constant {c} interpreted outside the domain")
        self.vocab = vocab
        self.n = n
        self._ext = ext
        self.constants = consts
        self._key = (vocab, n, tuple(sorted(ext.items())), tuple(sorted(consts.items())))

    def relation(self, name: str) -> frozenset[tuple[int, ...]]:
        try:
            return self._ext[name]
        except KeyError:
            raise StructureError(f"relation {name!r} not in vocabulary") from None

    def holds(self, name: str, args: Sequence[int]) -> bool:
        return tuple(args) in self.relation(name)

    @property
    def domain(self) -> range:
        return range(1, self.n + 1)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteStructure) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"FiniteStructure({to_sexpr(self)})"

    def true_atoms(self) -> list[tuple[str, tuple[int, ...]]]:
        return [a for a in ground_atoms(self.vocab, self.n) if a[1] in self._ext[a[0]]]

    def to_mask(self) -> int:
        mask = 0
        for i, (name, args) in enumerate(ground_atoms(self.vocab, self.n)):
            if args in self._ext[name]:
                mask |= 1 << i
        return mask

    @classmethod
    def from_mask(cls, vocab: Vocabulary, n: int, mask: int) -> "FiniteStructure":
        rels: dict[str, list] = {name: [] for name in vocab.names}
        for i, (name, args) in enumerate(ground_atoms(vocab, n)):
            if mask >> i & 1:
                rels[name].append(args)
        return cls(vocab, n, rels)


def enumerate_structures(vocab: Vocabulary, n: int) -> Iterator[FiniteStructure]:
    """Every structure on ``{1..n}`` exactly once, ordered by bit mask over the
    canonical ground-atom order (first atom = least significant bit)."""
    if vocab.constants:
        raise StructureError("enumeration of constant interpretations is not supported")
    if n < 1:
        raise StructureError("domain size must be at least 1")
    count = len(ground_atoms(vocab, n))
    for mask in range(1 << count):
        yield FiniteStructure.from_mask(vocab, n, mask)


def substructure(structure: FiniteStructure,
                 subset: Iterable[int]) -> tuple[FiniteStructure, dict[int, int]]:
    """Restrict to ``subset`` and relabel it to ``{1..k}`` preserving order.

    Returns the substructure and the relabeling (old element -> new element).
    """
    elems = sorted(set(subset))
    if not elems:
        raise StructureError("substructure on an empty subset")
    if any(not 1 <= e <= structure.n for e in elems):
        raise StructureError("subset outside the domain")
    relabel = {old: new for new, old in enumerate(elems, start=1)}
    for c, v in structure.constants.items():
        if v not in relabel:
            raise StructureError(f"subset omits the interpretation of constant {c}")
    rels = {name: [tuple(relabel[a] for a in t) for t in structure.relation(name)
                   if all(a in relabel for a in t)]
            for name in structure.vocab.names}
    consts = {c: relabel[v] for c, v in structure.constants.items()}
    return FiniteStructure(structure.vocab, len(elems), rels, consts), relabel


def reduct_structure(structure: FiniteStructure, subvocabulary: Iterable[str]) -> FiniteStructure:
    names = set(subvocabulary.names if isinstance(subvocabulary, Vocabulary) else subvocabulary)
    sub = structure.vocab.restrict(names)
    sub = Vocabulary(sub.relations, structure.vocab.constants)
    return FiniteStructure(sub, structure.n, {name: structure.relation(name) for name in names},
                           structure.constants)


def permute_structure(structure: FiniteStructure, perm: Mapping[int, int]) -> FiniteStructure:
    rels = {name: [tuple(perm[a] for a in t) for t in structure.relation(name)]
            for name in structure.vocab.names}
    consts = {c: perm[v] for c, v in structure.constants.items()}
    return FiniteStructure(structure.vocab, structure.n, rels, consts)


def isomorphism_orbit(structure: FiniteStructure) -> set[FiniteStructure]:
    """All structures on the same domain isomorphic to ``structure``.

    Breadth-first closure under adjacent transpositions, which generate the
    symmetric group.
    """
    if structure.vocab.constants:
        raise StructureError("isomorphism counting requires a constant-free vocabulary")
    n = structure.n
    swaps = []
    for i in range(1, n):
        perm = {a: a for a in range(1, n + 1)}
        perm[i], perm[i + 1] = i + 1, i
        swaps.append(perm)
    seen = {structure}
    queue = deque([structure])
    while queue:
        cur = queue.popleft()
        for perm in swaps:
            nxt = permute_structure(cur, perm)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def count_isomorphic(structure: FiniteStructure) -> int:
    return len(isomorphism_orbit(structure))


def isomorphism_classes(vocab: Vocabulary, n: int) -> list[frozenset[FiniteStructure]]:
    """Partition of all structures on ``{1..n}`` into isomorphism classes,
    ordered by the smallest mask in each class."""
    assigned: set[FiniteStructure] = set()
    classes = []
    for s in enumerate_structures(vocab, n):
        if s in assigned:
            continue
        orbit = isomorphism_orbit(s)
        assigned |= orbit
        classes.append(frozenset(orbit))
    return classes


# --------------------------------------------------------------------------
# evaluation


class _Evaluator:
    def __init__(self, structure: FiniteStructure):
        self.structure = structure
        self.lfp_cache: dict = {}
        self.fv_cache: dict[int, tuple[tuple[str, ...], tuple[str, ...]]] = {}

    def value(self, t: Term, env: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise FormulaError(f"unbound variable {t.name}") from None
        if isinstance(t, Elem):
            if not 1 <= t.value <= self.structure.n:
                raise FormulaError(f"element {t.value} outside the domain 1..{self.structure.n}")
            return t.value
        try:
            return self.structure.constants[t.name]
        except KeyError:
            raise FormulaError(f"uninterpreted constant {t.name}") from None

    def eval(self, f: Formula, env: dict[str, int], so_env: Mapping[str, frozenset]) -> bool:
        if isinstance(f, Atom):
            args = tuple(self.value(t, env) for t in f.args)
            if f.pred in so_env:
                return args in so_env[f.pred]
            if f.pred not in self.structure.vocab:
                raise FormulaError(f"unknown relation or free second-order variable {f.pred!r}")
            if self.structure.vocab.arity(f.pred) != len(args):
                raise FormulaError(f"arity mismatch for {f.pred}")
            return args in self.structure.relation(f.pred)
        if isinstance(f, Eq):
            return self.value(f.left, env) == self.value(f.right, env)
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, Not):
            return not self.eval(f.body, env, so_env)
        if isinstance(f, And):
            return all(self.eval(c, env, so_env) for c in f.items)
        if isinstance(f, Or):
            return any(self.eval(c, env, so_env) for c in f.items)
        if isinstance(f, Exists):
            saved = env.get(f.var)
            try:
                for a in self.structure.domain:
                    env[f.var] = a
                    if self.eval(f.body, env, so_env):
                        return True
                return False
            finally:
                if saved is None:
                    env.pop(f.var, None)
                else:
                    env[f.var] = saved
        if isinstance(f, Lfp):
            args = tuple(self.value(t, env) for t in f.args)
            return args in self.fixpoint(f, env, so_env)
        if isinstance(f, (Implies, ForAll)):
            return self.eval(desugar(f), env, so_env)
        raise FormulaError(f"not a formula: {f!r}")

    def _parameters(self, f: Lfp) -> tuple[tuple[str, ...], tuple[str, ...]]:
        key = id(f)
        if key not in self.fv_cache:
            fo = tuple(sorted(free_vars(f.body) - set(f.vars)))
            so = tuple(sorted(free_so_vars(Lfp(f.vars, f.so_var, f.body, ()), self.structure.vocab.names)))
            self.fv_cache[key] = (fo, so)
        return self.fv_cache[key]

    def step(self, f: Lfp, current: frozenset, env: dict[str, int],
             so_env: Mapping[str, frozenset]) -> frozenset:
        inner = dict(so_env)
        inner[f.so_var] = current
        local = dict(env)
        out = set()
        for tup in itertools.product(self.structure.domain, repeat=len(f.vars)):
            local.update(zip(f.vars, tup))
            if self.eval(f.body, local, inner):
                out.add(tup)
        return frozenset(out)

    def fixpoint(self, f: Lfp, env: dict[str, int], so_env: Mapping[str, frozenset]) -> frozenset:
        fo, so = self._parameters(f)
        try:
            key = (id(f), tuple(env[v] for v in fo), tuple(so_env[x] for x in so))
        except KeyError as exc:
            raise FormulaError(f"unbound parameter {exc.args[0]} of fixed point") from None
        if key in self.lfp_cache:
            return self.lfp_cache[key]
        current: frozenset = frozenset()
        while True:
            nxt = self.step(f, current, env, so_env)
            if nxt == current:
                break
            current = nxt
        self.lfp_cache[key] = current
        return current


def _check_lfp_nodes(f: Formula):
    if isinstance(f, Lfp):
        if len(f.vars) != len(f.args):
            raise FormulaError("fixed point variable tuple and argument tuple differ in length")
        if not is_positive_in(f.body, f.so_var):
            raise FormulaError(f"{f.so_var} occurs negatively in its fixed point body")
    for c in children(f):
        _check_lfp_nodes(c)


def eval_formula(structure: FiniteStructure, formula: Formula,
                 assignment: Mapping[str, int] | None = None) -> bool:
    """Truth of ``formula`` in ``structure`` under ``assignment``."""
    env = dict(assignment or {})
    missing = free_vars(formula) - set(env)
    if missing:
        raise FormulaError(f"unbound variables {sorted(missing)}")
    free_so = free_so_vars(formula, structure.vocab.names)
    if free_so:
        raise FormulaError(f"free second-order variables {sorted(free_so)}")
    _check_lfp_nodes(formula)
    for v, a in env.items():
        if not 1 <= a <= structure.n:
            raise FormulaError(f"{v} assigned outside the domain")
    return _Evaluator(structure).eval(desugar(formula), env, {})


def lfp_step(structure: FiniteStructure, formula: Lfp, current: Iterable[Sequence[int]],
             assignment: Mapping[str, int] | None = None,
             so_bindings: Mapping[str, Iterable[Sequence[int]]] | None = None) -> frozenset:
    """One application of the operator F^phi of ``formula`` to ``current``."""
    if not isinstance(formula, Lfp):
        raise FormulaError("lfp_step expects an Lfp node")
    _check_lfp_nodes(formula)
    k = len(formula.vars)
    cur = frozenset(tuple(t) for t in current)
    if any(len(t) != k for t in cur):
        raise FormulaError(f"relation arity differs from {k}")
    so_env = {x: frozenset(tuple(t) for t in rel) for x, rel in (so_bindings or {}).items()}
    ev = _Evaluator(structure)
    return ev.step(Lfp(formula.vars, formula.so_var, desugar(formula.body), formula.args),
                   cur, dict(assignment or {}), so_env)


# --------------------------------------------------------------------------
# extension axioms


def delta_atoms(vocab: Vocabulary, r: int) -> list[Atom]:
    """Atoms over ``v1..v{r+1}`` that mention ``v{r+1}``."""
    names = [f"v{i}" for i in range(1, r + 2)]
    last = names[-1]
    out = []
    for rel, arity in vocab.relations:
        for args in itertools.product(names, repeat=arity):
            if last in args:
                out.append(atom(rel, *args))
    return out


@dataclass(frozen=True)
class ExtensionAxiom:
    r: int
    phi_subset: frozenset[Atom]

    def __post_init__(self):
        last = f"v{self.r + 1}"
        for a in self.phi_subset:
            if Var(last) not in a.args:
                raise FormulaError(f"{a} does not mention {last}")

    def formula(self, vocab: Vocabulary) -> Formula:
        names = [f"v{i}" for i in range(1, self.r + 2)]
        new = names[-1]
        distinct_old = [Not(eq(a, b)) for a, b in itertools.combinations(names[:-1], 2)]
        distinct_new = [Not(eq(a, new)) for a in names[:-1]]
        lits = [a if a in self.phi_subset else Not(a) for a in delta_atoms(vocab, self.r)]
        body: Formula = Exists(new, conj(*distinct_new, *lits))
        if distinct_old:
            body = Implies(conj(*distinct_old), body)
        for v in reversed(names[:-1]):
            body = ForAll(v, body)
        return body


def extension_axioms(vocab: Vocabulary, r: int) -> Iterator[ExtensionAxiom]:
    delta = delta_atoms(vocab, r)
    for bits in range(1 << len(delta)):
        yield ExtensionAxiom(r, frozenset(a for i, a in enumerate(delta) if bits >> i & 1))


# --------------------------------------------------------------------------
# s-expression debug format


def _term_sexpr(t: Term) -> str:
    if isinstance(t, Const):
        return "'" + t.name
    return str(t)


def to_sexpr(obj: Union[Formula, FiniteStructure]) -> str:
    if isinstance(obj, FiniteStructure):
        parts = [f"(structure {obj.n}"]
        for name in obj.vocab.names:
            tuples = " ".join("(" + " ".join(map(str, t)) + ")" for t in sorted(obj.relation(name)))
            parts.append(f" ({name}{' ' + tuples if tuples else ''})")
        for c, v in sorted(obj.constants.items()):
            parts.append(f" ('{c} {v})")
        return "".join(parts) + ")"
    f = obj
    if isinstance(f, Atom):
        return "(" + " ".join([f.pred, *(_term_sexpr(t) for t in f.args)]) + ")"
    if isinstance(f, Eq):
        return f"(= {_term_sexpr(f.left)} {_term_sexpr(f.right)})"
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return f"(not {to_sexpr(f.body)})"
    if isinstance(f, And):
        return "(and" + "".join(" " + to_sexpr(c) for c in f.items) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + to_sexpr(c) for c in f.items) + ")"
    if isinstance(f, Implies):
        return f"(implies {to_sexpr(f.left)} {to_sexpr(f.right)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {to_sexpr(f.body)})"
    if isinstance(f, ForAll):
        return f"(forall {f.var} {to_sexpr(f.body)})"
    if isinstance(f, Lfp):
        return (f"(lfp ({' '.join(f.vars)}) {f.so_var} {to_sexpr(f.body)} "
                f"({' '.join(_term_sexpr(t) for t in f.args)}))")
    raise FormulaError(f"not a formula: {f!r}")


def _tokenize_sexpr(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _read(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise FormulaError("unexpected end of s-expression")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise FormulaError("unbalanced parentheses")
        return items, pos + 1
    if tok == ")":
        raise FormulaError("unexpected ')'")
    return tok, pos + 1


def _sexpr_term(x) -> Term:
    if not isinstance(x, str):
        raise FormulaError(f"expected a term, got {x!r}")
    if x.startswith("'"):
        return Const(x[1:])
    if x.isdigit():
        return Elem(int(x))
    return Var(x)


def _sexpr_formula(x) -> Formula:
    if isinstance(x, str):
        if x == "true":
            return TRUE
        if x == "false":
            return FALSE
        return Atom(x, ())
    if not x:
        raise FormulaError("empty list")
    head, rest = x[0], x[1:]
    if head == "not":
        return Not(_sexpr_formula(rest[0]))
    if head == "and":
        return And(tuple(_sexpr_formula(c) for c in rest))
    if head == "or":
        return Or(tuple(_sexpr_formula(c) for c in rest))
    if head == "implies":
        return Implies(_sexpr_formula(rest[0]), _sexpr_formula(rest[1]))
    if head == "=":
        return Eq(_sexpr_term(rest[0]), _sexpr_term(rest[1]))
    if head in ("exists", "forall"):
        cls = Exists if head == "exists" else ForAll
        return cls(rest[0], _sexpr_formula(rest[1]))
    if head == "lfp":
        vars_, so_var, body, args = rest
        return Lfp(tuple(vars_), so_var, _sexpr_formula(body), tuple(_sexpr_term(t) for t in args))
    return Atom(head, tuple(_sexpr_term(t) for t in rest))


def parse_sexpr(text: str) -> Formula:
    tokens = _tokenize_sexpr(text)
    tree, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise FormulaError("trailing tokens after s-expression")
    return _sexpr_formula(tree)
