"""Exact distributions induced by programs on finite domains, and checkers for
projectivity, exchangeability, IP and CIP.

All probabilities are exact ``Fraction`` values.  Worlds are bit masks over
the canonical ground-atom order of the distribution's vocabulary.
"""

from __future__ import annotations

import itertools
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import FormulaError, ProgramError, ScaleLimitExceeded, StructureError
from .ground import (BitMap, GroundAtom, Grounding, atom_index, enumeration_vectors,
                     pack_masks, permutation_bitmap, reduct_bitmap, subset_bitmap)
from .logic import (And, Atom, Const, Elem, Eq, Exists, FiniteStructure, ForAll,
                    Formula, Implies, Lfp, Not, Or, Truth, Var, Vocabulary,
                    count_isomorphic, ground_atoms, isomorphism_classes, free_vars)
from .program import ProbProgram

DEFAULT_MAX_ATOMS = 25


# --------------------------------------------------------------------------
# world distributions


def format_ground_atom(atom: GroundAtom) -> str:
    name, args = atom
    return name if not args else f"{name}({','.join(map(str, args))})"


_ATOM_RE = re.compile(r"^\s*([a-z][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*$")


def parse_ground_atom(text: str) -> GroundAtom:
    m = _ATOM_RE.match(text)
    if not m:
        raise StructureError(f"malformed ground atom {text!r}")
    args = tuple(int(a) for a in m.group(2).split(",")) if m.group(2) and m.group(2).strip() else ()
    return m.group(1), args


@dataclass
class WorldDistribution:
    """Exact distribution over structures on ``{1..n}`` (zero weights omitted)."""

    vocab: Vocabulary
    n: int
    weights: dict[int, Fraction]
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.weights = {m: Fraction(w) for m, w in self.weights.items() if w != 0}
        if self.check:
            total = sum(self.weights.values(), Fraction(0))
            if total != 1:
                raise StructureError(f"weights sum to {total}, not 1")
            if any(w < 0 or w > 1 for w in self.weights.values()):
                raise StructureError("weight outside [0,1]")
            limit = 1 << len(self.atoms)
            if any(not 0 <= m < limit for m in self.weights):
                raise StructureError("world index out of range")

    @property
    def atoms(self) -> list[GroundAtom]:
        return ground_atoms(self.vocab, self.n)

    @property
    def index(self) -> dict[GroundAtom, int]:
        return atom_index(self.vocab, self.n)

    def structure(self, mask: int) -> FiniteStructure:
        return FiniteStructure.from_mask(self.vocab, self.n, mask)

    def weight(self, world: int | FiniteStructure) -> Fraction:
        if isinstance(world, FiniteStructure):
            world = world.to_mask()
        return self.weights.get(world, Fraction(0))

    def prob(self, event: Callable[[int], bool]) -> Fraction:
        return sum((w for m, w in self.weights.items() if event(m)), Fraction(0))

    def formula_prob(self, formula: Formula) -> Fraction:
        idx = self.index
        return self.prob(lambda m: _eval_ground_mask(formula, m, idx, self.n))

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def to_json(self) -> dict:
        atoms = self.atoms
        worlds = []
        for m in sorted(self.weights):
            names = [format_ground_atom(a) for i, a in enumerate(atoms) if m >> i & 1]
            w = self.weights[m]
            worlds.append({"atoms": names, "weight": f"{w.numerator}/{w.denominator}"})
        return {"n": self.n, "vocabulary": [[name, ar] for name, ar in self.vocab.relations],
                "worlds": worlds}

    @classmethod
    def from_json(cls, data: dict | str) -> "WorldDistribution":
        if isinstance(data, str):
            data = json.loads(data)
        vocab = Vocabulary(tuple((name, int(ar)) for name, ar in data["vocabulary"]))
        n = int(data["n"])
        idx = atom_index(vocab, n)
        weights: dict[int, Fraction] = {}
        for world in data["worlds"]:
            mask = 0
            for text in world["atoms"]:
                a = parse_ground_atom(text)
                if a not in idx:
                    raise StructureError(f"atom {text} not over the vocabulary on 1..{n}")
                mask |= 1 << idx[a]
            if mask in weights:
                raise StructureError("world listed twice")
            weights[mask] = Fraction(world["weight"])
        return cls(vocab, n, weights)


def point_mass(vocab: Vocabulary, n: int, structure: FiniteStructure | int) -> WorldDistribution:
    mask = structure.to_mask() if isinstance(structure, FiniteStructure) else structure
    return WorldDistribution(vocab, n, {mask: Fraction(1)})


# --------------------------------------------------------------------------
# ground formula evaluation


def _ground_term(t, n: int) -> int:
    if isinstance(t, Elem):
        if not 1 <= t.value <= n:
            raise FormulaError(f"element {t.value} outside 1..{n}")
        return t.value
    if isinstance(t, Var):
        raise FormulaError(f"query is not ground: variable {t.name}")
    raise FormulaError(f"constant {t.name} in a ground query")


def ground_formula_atoms(formula: Formula, n: int) -> list[GroundAtom]:
    """Ground atoms of a ground quantifier-free formula."""
    out: list[GroundAtom] = []

    def walk(f: Formula):
        if isinstance(f, Atom):
            a = (f.pred, tuple(_ground_term(t, n) for t in f.args))
            if a not in out:
                out.append(a)
        elif isinstance(f, Eq):
            _ground_term(f.left, n), _ground_term(f.right, n)
        elif isinstance(f, Truth):
            pass
        elif isinstance(f, Not):
            walk(f.body)
        elif isinstance(f, (And, Or)):
            for c in f.items:
                walk(c)
        elif isinstance(f, Implies):
            walk(f.left)
            walk(f.right)
        else:
            raise FormulaError("query must be quantifier-free and ground")

    walk(formula)
    return out


def _eval_ground_vectors(f: Formula, values: Mapping[GroundAtom, np.ndarray], length: int, n: int):
    if isinstance(f, Atom):
        return values[(f.pred, tuple(_ground_term(t, n) for t in f.args))]
    if isinstance(f, Eq):
        return np.full(length, _ground_term(f.left, n) == _ground_term(f.right, n))
    if isinstance(f, Truth):
        return np.full(length, f.value)
    if isinstance(f, Not):
        return ~_eval_ground_vectors(f.body, values, length, n)
    if isinstance(f, And):
        out = np.ones(length, dtype=bool)
        for c in f.items:
            out &= _eval_ground_vectors(c, values, length, n)
        return out
    if isinstance(f, Or):
        out = np.zeros(length, dtype=bool)
        for c in f.items:
            out |= _eval_ground_vectors(c, values, length, n)
        return out
    if isinstance(f, Implies):
        return ~_eval_ground_vectors(f.left, values, length, n) | _eval_ground_vectors(f.right, values, length, n)
    raise FormulaError("query must be quantifier-free and ground")


def _eval_ground_mask(f: Formula, mask: int, idx: Mapping[GroundAtom, int], n: int) -> bool:
    if isinstance(f, Atom):
        a = (f.pred, tuple(_ground_term(t, n) for t in f.args))
        if a not in idx:
            raise FormulaError(f"atom {format_ground_atom(a)} not in the vocabulary")
        return bool(mask >> idx[a] & 1)
    if isinstance(f, Eq):
        return _ground_term(f.left, n) == _ground_term(f.right, n)
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Not):
        return not _eval_ground_mask(f.body, mask, idx, n)
    if isinstance(f, And):
        return all(_eval_ground_mask(c, mask, idx, n) for c in f.items)
    if isinstance(f, Or):
        return any(_eval_ground_mask(c, mask, idx, n) for c in f.items)
    if isinstance(f, Implies):
        return (not _eval_ground_mask(f.left, mask, idx, n)) or _eval_ground_mask(f.right, mask, idx, n)
    raise FormulaError("formula must be quantifier-free and ground")


# --------------------------------------------------------------------------
# weights of fact worlds


class _WeightModel:
    """World weights grouped by the number of true atoms per fact relation.

    ``keys[w]`` encodes the per-relation counts of world ``w``; ``weight(key)``
    is the exact product-measure weight of any world with that key.
    """

    def __init__(self, program: ProbProgram, atoms: Sequence[GroundAtom],
                 vectors: Mapping[GroundAtom, np.ndarray], length: int):
        probs = {f.name: f.prob for f in program.facts}
        rels = sorted({a[0] for a in atoms})
        counts = {r: sum(1 for a in atoms if a[0] == r) for r in rels}
        self.rels = rels
        self.counts = counts
        self.probs = {r: probs[r] for r in rels}
        self.size = 1
        keys = np.zeros(length, dtype=np.int64)
        self.strides = {}
        for r in rels:
            self.strides[r] = self.size
            k = np.zeros(length, dtype=np.int64)
            for a in atoms:
                if a[0] == r:
                    k += vectors[a]
            keys += k * self.size
            self.size *= counts[r] + 1
        self.keys = keys
        self._cache: dict[int, Fraction] = {}

    def weight(self, key: int) -> Fraction:
        if key not in self._cache:
            w = Fraction(1)
            rest = key
            for r in self.rels:
                k = rest % (self.counts[r] + 1)
                rest //= self.counts[r] + 1
                q = self.probs[r]
                w *= q ** k * (1 - q) ** (self.counts[r] - k)
            self._cache[key] = w
        return self._cache[key]

    def event_prob(self, event: np.ndarray) -> Fraction:
        keys, counts = np.unique(self.keys[event], return_counts=True)
        return sum((int(c) * self.weight(int(k)) for k, c in zip(keys, counts)), Fraction(0))

    def grouped(self, masks: Sequence[int] | np.ndarray, bits: int) -> dict[int, Fraction]:
        """Distribution of a per-world mask value."""
        out: dict[int, Fraction] = defaultdict(Fraction)
        if isinstance(masks, np.ndarray) and bits + self.size.bit_length() < 62:
            combined = masks.astype(np.int64) * self.size + self.keys
            vals, counts = np.unique(combined, return_counts=True)
            for v, c in zip(vals.tolist(), counts.tolist()):
                m, k = divmod(v, self.size)
                out[m] += c * self.weight(k)
        else:
            tally: dict[tuple[int, int], int] = defaultdict(int)
            for m, k in zip(masks, self.keys.tolist()):
                tally[(m, k)] += 1
            for (m, k), c in tally.items():
                out[m] += c * self.weight(k)
        return dict(out)


def _guard(count: int, max_atoms: int):
    if count > max_atoms:
        raise ScaleLimitExceeded(f"{count} free fact atoms exceed the limit of {max_atoms} "
                                 f"(2^{count} worlds)")


def world_distribution(program: ProbProgram, n: int, max_atoms: int = DEFAULT_MAX_ATOMS,
                       constants: Mapping[str, int] | None = None) -> WorldDistribution:
    """The distribution induced by ``program`` on ``{1..n}`` over its full
    vocabulary (facts, undeclared extensional symbols and derived symbols)."""
    g = Grounding(program, n, constants)
    vocab = Vocabulary(tuple(program.arities.items()))
    atoms = ground_atoms(vocab, n)
    free = [a for a in atoms if g.is_free_fact(a)]
    _guard(len(free), max_atoms)
    vectors, length = enumeration_vectors(free)
    values = g.evaluate(atoms, vectors, length)
    model = _WeightModel(program, free, vectors, length)
    vecs = [values[a] for a in atoms]
    if len(atoms) <= 62:
        masks = np.zeros(length, dtype=np.int64)
        for j, v in enumerate(vecs):
            masks |= v.astype(np.int64) << j
        weights = model.grouped(masks, len(atoms))
    else:
        weights = model.grouped(pack_masks(vecs, length), len(atoms))
    return WorldDistribution(vocab, n, weights)


def query_prob(program: ProbProgram, n: int, formula: Formula, max_atoms: int = DEFAULT_MAX_ATOMS,
               constants: Mapping[str, int] | None = None) -> Fraction:
    """Probability of a ground quantifier-free formula, enumerating only the
    fact atoms in its dependency cone."""
    if free_vars(formula):
        raise FormulaError(f"query is not ground: free variables {sorted(free_vars(formula))}")
    g = Grounding(program, n, constants)
    targets = ground_formula_atoms(formula, n)
    for a in targets:
        g.check_atom(a)
    _, facts = g.cone(targets)
    _guard(len(facts), max_atoms)
    vectors, length = enumeration_vectors(facts)
    values = g.evaluate(targets, vectors, length)
    event = _eval_ground_vectors(formula, values, length, n)
    return _WeightModel(program, facts, vectors, length).event_prob(event)


# --------------------------------------------------------------------------
# reducts, marginals, total variation


def reduct_distribution(dist: WorldDistribution, subvocabulary: Iterable[str] | Vocabulary) -> WorldDistribution:
    names = subvocabulary.names if isinstance(subvocabulary, Vocabulary) else tuple(subvocabulary)
    sub = dist.vocab.restrict(names)
    bm = reduct_bitmap(dist.vocab, sub, dist.n)
    out: dict[int, Fraction] = defaultdict(Fraction)
    for m, w in dist.weights.items():
        out[bm(m)] += w
    return WorldDistribution(sub, dist.n, dict(out))


def subset_marginal(dist: WorldDistribution, elements: Sequence[int]) -> dict[int, Fraction]:
    """Distribution of the substructure on ``elements`` (relabelled to
    ``1..len(elements)``), as mask -> weight."""
    bm, _ = subset_bitmap(dist.vocab, dist.n, elements)
    out: dict[int, Fraction] = defaultdict(Fraction)
    for m, w in dist.weights.items():
        out[bm(m)] += w
    return dict(out)


def tv_distance(d1: WorldDistribution, d2: WorldDistribution) -> Fraction:
    if d1.vocab.relations != d2.vocab.relations or d1.n != d2.n:
        raise StructureError("distributions over different vocabularies or domains")
    keys = set(d1.weights) | set(d2.weights)
    return sum((abs(d1.weight(k) - d2.weight(k)) for k in keys), Fraction(0)) / 2


def _components(groundings: Sequence[Grounding], targets: Sequence[GroundAtom]) -> list[tuple[list[GroundAtom], list[GroundAtom]]]:
    """Group target atoms whose cones (in any of the groundings) share fact atoms."""
    parent = list(range(len(targets)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[GroundAtom, int] = {}
    cones = []
    for i, a in enumerate(targets):
        facts: set[GroundAtom] = set()
        for g in groundings:
            if a[0] in g.idb:
                facts |= set(g.cone([a])[1])
            elif g.is_free_fact(a):
                facts.add(a)
        cones.append(facts)
        for f in facts:
            if f in owner:
                parent[find(i)] = find(owner[f])
            else:
                owner[f] = i
    groups: dict[int, list[int]] = defaultdict(list)
    for i in range(len(targets)):
        groups[find(i)].append(i)
    out = []
    for members in sorted(groups.values()):
        facts = set()
        for i in members:
            facts |= cones[i]
        out.append(([targets[i] for i in members], sorted(facts)))
    return out


def marginal_distribution(program: ProbProgram, n: int, names: Iterable[str],
                          max_atoms: int = DEFAULT_MAX_ATOMS,
                          constants: Mapping[str, int] | None = None) -> WorldDistribution:
    """Reduct of the induced distribution to ``names``, computed component by
    component (independent groups of atoms are enumerated separately)."""
    names = tuple(names)
    vocab = Vocabulary(tuple((name, program.arities[name]) for name in names))
    g = Grounding(program, n, constants)
    atoms = ground_atoms(vocab, n)
    idx = {a: i for i, a in enumerate(atoms)}
    dist: dict[int, Fraction] = {0: Fraction(1)}
    for members, facts in _components([g], atoms):
        _guard(len(facts), max_atoms)
        vectors, length = enumeration_vectors(facts)
        values = g.evaluate(members, vectors, length)
        masks = np.zeros(length, dtype=object)
        for a in members:
            masks = masks + values[a].astype(object) * (1 << idx[a])
        local = _WeightModel(program, facts, vectors, length).grouped(masks.tolist(), len(atoms))
        dist = {m1 | m2: w1 * w2 for m1, w1 in dist.items() for m2, w2 in local.items()}
    return WorldDistribution(vocab, n, dist)


def common_vocabulary(p1: ProbProgram, p2: ProbProgram) -> tuple[str, ...]:
    a1, a2 = p1.arities, p2.arities
    common = sorted(set(a1) & set(a2))
    for name in common:
        if a1[name] != a2[name]:
            raise ProgramError(f"{name} has different arities in the two programs")
    return tuple(common)


def program_tv_distance(p1: ProbProgram, p2: ProbProgram, n: int,
                        names: Iterable[str] | None = None,
                        max_atoms: int = DEFAULT_MAX_ATOMS) -> Fraction:
    """Total variation distance between the distributions of two programs on
    ``{1..n}``, restricted to ``names`` (default: the common vocabulary).

    When both programs have the same facts (with equal probabilities) and none
    of them is hidden by the restriction, both distributions are images of the
    same fact measure and the distance is the probability that some derived
    atom differs; that probability factorises over independent components.
    Otherwise the two reducts are enumerated and compared directly.
    """
    names = tuple(sorted(names)) if names is not None else common_vocabulary(p1, p2)
    f1 = {f.name: f.prob for f in p1.facts if f.prob not in (0, 1)}
    f2 = {f.name: f.prob for f in p2.facts if f.prob not in (0, 1)}
    fixed1 = {f.name: f.prob for f in p1.facts if f.prob in (0, 1)}
    fixed2 = {f.name: f.prob for f in p2.facts if f.prob in (0, 1)}
    same_facts = (f1 == f2 and set(f1) <= set(names)
                  and all(fixed2.get(k, 0) == v for k, v in fixed1.items())
                  and all(fixed1.get(k, 0) == v for k, v in fixed2.items()))
    if not same_facts:
        d1 = marginal_distribution(p1, n, names, max_atoms)
        d2 = marginal_distribution(p2, n, names, max_atoms)
        return tv_distance(d1, d2)
    g1, g2 = Grounding(p1, n), Grounding(p2, n)
    vocab = Vocabulary(tuple((name, p1.arities[name]) for name in names))
    derived = [a for a in ground_atoms(vocab, n) if a[0] in g1.idb or a[0] in g2.idb]
    agree = Fraction(1)
    for members, facts in _components([g1, g2], derived):
        _guard(len(facts), max_atoms)
        vectors, length = enumeration_vectors(facts)
        v1 = g1.evaluate(members, vectors, length)
        v2 = g2.evaluate(members, vectors, length)
        same = np.ones(length, dtype=bool)
        for a in members:
            same &= v1[a] == v2[a]
        agree *= _WeightModel(p1, facts, vectors, length).event_prob(same)
    return 1 - agree


# --------------------------------------------------------------------------
# families and reports


class Family:
    """A family of distributions, one per domain size, with caching."""

    def __init__(self, vocab: Vocabulary, builder: Callable[[int], WorldDistribution], name: str = ""):
        self.vocab = vocab
        self.builder = builder
        self.name = name
        self._cache: dict[int, WorldDistribution] = {}

    def __call__(self, n: int) -> WorldDistribution:
        if n not in self._cache:
            d = self.builder(n)
            if d.vocab.relations != self.vocab.relations or d.n != n:
                raise StructureError(f"family member at n={n} has the wrong vocabulary or size")
            self._cache[n] = d
        return self._cache[n]

    @classmethod
    def from_program(cls, program: ProbProgram, max_atoms: int = DEFAULT_MAX_ATOMS,
                     names: Iterable[str] | None = None) -> "Family":
        if names is None:
            vocab = Vocabulary(tuple(program.arities.items()))
            return cls(vocab, lambda n: world_distribution(program, n, max_atoms), "program")
        names = tuple(names)
        vocab = Vocabulary(tuple((nm, program.arities[nm]) for nm in names))
        return cls(vocab, lambda n: marginal_distribution(program, n, names, max_atoms), "program-reduct")

    def reduct(self, names: Iterable[str]) -> "Family":
        names = tuple(names)
        sub = self.vocab.restrict(names)
        return Family(sub, lambda n: reduct_distribution(self(n), names), f"{self.name}-reduct")


@dataclass
class CheckReport:
    prop: str
    holds: bool | None
    n_max: int
    witness: dict | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"property": self.prop, "holds": self.holds, "n_max": self.n_max,
                "witness": self.witness, "notes": list(self.notes)}

    def summary(self) -> str:
        if self.holds is None:
            head = f"{self.prop}: not applicable"
        elif self.holds:
            head = f"{self.prop}: holds up to n={self.n_max}" if self.n_max else f"{self.prop}: holds"
        else:
            head = f"{self.prop}: fails"
        lines = [head]
        if self.witness:
            for k, v in self.witness.items():
                lines.append(f"  {k}: {v}")
        lines += [f"  note: {note}" for note in self.notes]
        return "\n".join(lines)


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _world_atoms(vocab: Vocabulary, n: int, mask: int) -> list[str]:
    return [format_ground_atom(a) for i, a in enumerate(ground_atoms(vocab, n)) if mask >> i & 1]


def check_projective(family: Family, n_max: int) -> CheckReport:
    """Compare the marginal of Q^(n) on {1..m} with Q^(m) for all m < n <= n_max,
    ascending in n then m; stops at the first mismatch."""
    vocab = family.vocab
    for n in range(2, n_max + 1):
        dn = family(n)
        for m in range(1, n):
            marg = subset_marginal(dn, range(1, m + 1))
            dm = family(m)
            for mask in sorted(set(marg) | set(dm.weights)):
                if marg.get(mask, 0) != dm.weight(mask):
                    witness = {"m": m, "n": n, "world": _world_atoms(vocab, m, mask),
                               "P_m(world)": _fmt(dm.weight(mask)),
                               "P_n(substructure = world)": _fmt(Fraction(marg.get(mask, 0)))}
                    atom_w = _atom_mismatch(vocab, m, dm.weights, marg)
                    if atom_w:
                        witness.update(atom_w)
                    return CheckReport("projectivity", False, n_max, witness)
    return CheckReport("projectivity", True, n_max)


def _atom_mismatch(vocab, m, wm: Mapping[int, Fraction], wn: Mapping[int, Fraction]) -> dict | None:
    for i, a in enumerate(ground_atoms(vocab, m)):
        pm = sum((w for k, w in wm.items() if k >> i & 1), Fraction(0))
        pn = sum((w for k, w in wn.items() if k >> i & 1), Fraction(0))
        if pm != pn:
            return {"atom": format_ground_atom(a), "P_m(atom)": _fmt(pm), "P_n(atom)": _fmt(pn)}
    return None


def check_exchangeable(family: Family, n_max: int) -> CheckReport:
    """Isomorphic worlds have equal weight; checked with adjacent
    transpositions, which generate all permutations."""
    vocab = family.vocab
    for n in range(2, n_max + 1):
        d = family(n)
        for i in range(1, n):
            perm = {a: a for a in range(1, n + 1)}
            perm[i], perm[i + 1] = i + 1, i
            bm = permutation_bitmap(vocab, n, perm)
            for mask in sorted(d.weights):
                other = bm(mask)
                if d.weight(other) != d.weights[mask]:
                    return CheckReport("exchangeability", False, n_max, {
                        "n": n, "world": _world_atoms(vocab, n, mask), "weight": _fmt(d.weights[mask]),
                        "permuted": _world_atoms(vocab, n, other), "permuted_weight": _fmt(d.weight(other))})
    return CheckReport("exchangeability", True, n_max)


@dataclass(frozen=True)
class FormulaBudget:
    """Witness search space for IP/CIP: conjunctions of at most
    ``max_literals`` literals using at most ``max_vars`` distinct variables."""

    max_literals: int = 4
    max_vars: int = 2


def _conjunctions(atoms: Sequence[GroundAtom], budget: FormulaBudget,
                  required: int | None = None) -> Iterator[tuple[tuple[GroundAtom, bool], ...]]:
    """Conjunctions of literals over ``atoms`` (ground atoms over variable
    indices), smallest first.  ``required`` forces one variable to occur."""
    for size in range(1, budget.max_literals + 1):
        for combo in itertools.combinations(atoms, size):
            used = {a for _, args in combo for a in args}
            if len(used) > budget.max_vars:
                continue
            if required is not None and required not in used:
                continue
            for signs in itertools.product((True, False), repeat=size):
                yield tuple(zip(combo, signs))


def _conj_text(conj) -> str:
    parts = []
    for (name, args), sign in conj:
        a = name if not args else f"{name}({','.join('x' + str(v) for v in args)})"
        parts.append(a if sign else "not " + a)
    return " and ".join(parts)


def _conj_holds(conj, mask: int, idx: Mapping[GroundAtom, int]) -> bool:
    return all(bool(mask >> idx[a] & 1) == sign for a, sign in conj)


def _diagram_text(vocab: Vocabulary, k: int, mask: int) -> str:
    lits = []
    for i, (name, args) in enumerate(ground_atoms(vocab, k)):
        a = name if not args else f"{name}({','.join('x' + str(v) for v in args)})"
        lits.append(a if mask >> i & 1 else "not " + a)
    return " and ".join(lits) if lits else "true"


def _projectivity_gate(family: Family, n_max: int, prop: str) -> CheckReport | None:
    proj = check_projective(family, n_max)
    if proj.holds:
        return None
    return CheckReport(prop, None, n_max, proj.witness,
                       [f"{prop} is defined for projective families; this family is not projective"])


def check_IP(family: Family, n_max: int, budget: FormulaBudget = FormulaBudget()) -> CheckReport:
    """Independence of the substructures on {1..a} and {a+1..a+b} under
    Q^(a+b), for all a + b <= n_max.

    Independence of the two substructures is equivalent to independence of
    every pair of quantifier-free events on them (each event is a union of
    diagrams), so this decides IP up to n_max exactly.  The budget is searched
    only to report a small witness formula pair.
    """
    gate = _projectivity_gate(family, n_max, "IP")
    if gate:
        return gate
    vocab = family.vocab
    for total in range(2, n_max + 1):
        d = family(total)
        for a in range(1, total):
            b = total - a
            bma, _ = subset_bitmap(vocab, total, range(1, a + 1))
            bmb, _ = subset_bitmap(vocab, total, range(a + 1, total + 1))
            joint: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
            pa: dict[int, Fraction] = defaultdict(Fraction)
            pb: dict[int, Fraction] = defaultdict(Fraction)
            for m, w in d.weights.items():
                x, y = bma(m), bmb(m)
                joint[(x, y)] += w
                pa[x] += w
                pb[y] += w
            bad = next(((x, y) for x in sorted(pa) for y in sorted(pb)
                        if joint.get((x, y), 0) != pa[x] * pb[y]), None)
            if bad is None:
                continue
            witness = {"n": a, "m": b, "domain": list(range(1, total + 1))}
            found = _ip_budget_witness(vocab, a, b, joint, pa, pb, budget)
            if found:
                witness.update(found)
            else:
                x, y = bad
                witness.update({"phi": _diagram_text(vocab, a, x), "psi": _diagram_text(vocab, b, y),
                                "P(phi and psi)": _fmt(joint.get(bad, Fraction(0))),
                                "P(phi)P(psi)": _fmt(pa[x] * pb[y])})
            return CheckReport("IP", False, n_max, witness)
    return CheckReport("IP", True, n_max)


def _ip_budget_witness(vocab, a, b, joint, pa, pb, budget: FormulaBudget):
    ia, ib = atom_index(vocab, a), atom_index(vocab, b)
    conj_a = list(_conjunctions(list(ia), budget))
    conj_b = list(_conjunctions(list(ib), budget))
    for phi in conj_a:
        xs = {x for x in pa if _conj_holds(phi, x, ia)}
        p_phi = sum((pa[x] for x in xs), Fraction(0))
        for psi in conj_b:
            ys = {y for y in pb if _conj_holds(psi, y, ib)}
            p_psi = sum((pb[y] for y in ys), Fraction(0))
            p_both = sum((w for (x, y), w in joint.items() if x in xs and y in ys), Fraction(0))
            if p_both != p_phi * p_psi:
                return {"phi": _conj_text(phi), "psi": _conj_text(psi),
                        "P(phi and psi)": _fmt(p_both), "P(phi)P(psi)": _fmt(p_phi * p_psi)}
    return None


def check_CIP(family: Family, n_max: int, budget: FormulaBudget = FormulaBudget()) -> CheckReport:
    """For each n with n + 1 <= n_max and each positive-probability structure
    omega on {1..n-1}: the events {1..n} |= phi and {1..n-1, n+1} |= phi are
    conditionally independent given omega, for every quantifier-free phi.

    Writing J for the conditional joint law of the two substructures and
    mu_X, mu_Y for its marginals, the condition for all phi (all sets S of
    substructures) is equivalent to J + J^T = mu_X mu_Y^T + mu_Y mu_X^T,
    which is checked exactly.  Zero-probability omega are skipped.
    """
    gate = _projectivity_gate(family, n_max, "CIP")
    if gate:
        return gate
    vocab = family.vocab
    for n in range(1, n_max):
        d = family(n + 1)
        bmw, _ = subset_bitmap(vocab, n + 1, range(1, n))
        bmx, _ = subset_bitmap(vocab, n + 1, range(1, n + 1))
        bmy, _ = subset_bitmap(vocab, n + 1, list(range(1, n)) + [n + 1])
        groups: dict[int, dict[tuple[int, int], Fraction]] = defaultdict(lambda: defaultdict(Fraction))
        for m, w in d.weights.items():
            groups[bmw(m)][(bmx(m), bmy(m))] += w
        for omega in sorted(groups):
            joint = groups[omega]
            p_omega = sum(joint.values(), Fraction(0))
            if p_omega == 0:
                continue
            mx: dict[int, Fraction] = defaultdict(Fraction)
            my: dict[int, Fraction] = defaultdict(Fraction)
            for (x, y), w in joint.items():
                mx[x] += w / p_omega
                my[y] += w / p_omega
            support = sorted(set(mx) | set(my))
            bad = None
            for i, x in enumerate(support):
                for y in support[i:]:
                    lhs = (joint.get((x, y), 0) + (joint.get((y, x), 0) if x != y else 0)) / p_omega
                    rhs = mx.get(x, 0) * my.get(y, 0) + (mx.get(y, 0) * my.get(x, 0) if x != y else 0)
                    if lhs != rhs:
                        bad = (x, y)
                        break
                if bad:
                    break
            if bad is None:
                continue
            witness = {"n": n, "domain": list(range(1, n + 2)),
                       "omega": _world_atoms(vocab, n - 1, omega) if n > 1 else [],
                       "omega_domain": list(range(1, n))}
            found = _cip_budget_witness(vocab, n, joint, p_omega, budget)
            if found:
                witness.update(found)
            else:
                x, y = bad
                phi = _diagram_text(vocab, n, x)
                if x != y:
                    phi = f"({phi}) or ({_diagram_text(vocab, n, y)})"
                witness["phi"] = phi
            return CheckReport("CIP", False, n_max, witness)
    return CheckReport("CIP", True, n_max)


def _cip_budget_witness(vocab, n, joint, p_omega, budget: FormulaBudget):
    idx = atom_index(vocab, n)
    relevant = [a for a in idx if n in a[1]]
    for phi in _conjunctions(relevant, budget, required=n):
        both = sum((w for (x, y), w in joint.items() if _conj_holds(phi, x, idx) and _conj_holds(phi, y, idx)),
                   Fraction(0)) / p_omega
        px = sum((w for (x, _), w in joint.items() if _conj_holds(phi, x, idx)), Fraction(0)) / p_omega
        py = sum((w for (_, y), w in joint.items() if _conj_holds(phi, y, idx)), Fraction(0)) / p_omega
        if both != px * py:
            event_x = _instantiate(phi, list(range(1, n + 1)))
            event_y = _instantiate(phi, list(range(1, n)) + [n + 1])
            return {"phi": _conj_text(phi), "event_1": event_x, "event_2": event_y,
                    "P(both | omega)": _fmt(both), "P(event_1 | omega)P(event_2 | omega)": _fmt(px * py)}
    return None


def _instantiate(conj, elements: list[int]) -> str:
    parts = []
    for (name, args), sign in conj:
        a = format_ground_atom((name, tuple(elements[v - 1] for v in args)))
        parts.append(a if sign else "not " + a)
    return " and ".join(parts)


# --------------------------------------------------------------------------
# Carnap's m*


M_STAR_VOCAB = Vocabulary((("r", 1),))


def _check_m_star_vocab(vocab: Vocabulary):
    if len(vocab.relations) != 1 or vocab.relations[0][1] != 1 or vocab.constants:
        raise StructureError("m* is defined here for a single unary relation")


def m_star(n: int, vocab: Vocabulary = M_STAR_VOCAB) -> WorldDistribution:
    """Uniform over isomorphism classes and uniform within each class:
    weight(w) = 1 / (C_n * N_w), with C_n the number of classes."""
    _check_m_star_vocab(vocab)
    classes = isomorphism_classes(vocab, n)
    c_n = len(classes)
    weights = {}
    for cls in classes:
        for s in cls:
            weights[s.to_mask()] = Fraction(1, c_n * len(cls))
    return WorldDistribution(vocab, n, weights)


def m_star_family(vocab: Vocabulary = M_STAR_VOCAB) -> Family:
    return Family(vocab, lambda n: m_star(n, vocab), "m*")


def m_star_conditional(n: int, positives: Iterable[int], vocab: Vocabulary = M_STAR_VOCAB) -> Fraction:
    """m*(R(n+1) | R(i) for i in positives, not R(i) for other i <= n),
    summed directly from the weights of m_star(n + 1)."""
    pos = set(positives)
    if not pos <= set(range(1, n + 1)):
        raise StructureError("positive indices must lie in 1..n")
    d = m_star(n + 1, vocab)
    pattern = sum(1 << (i - 1) for i in pos)
    low = (1 << n) - 1
    cond = sum((w for m, w in d.weights.items() if m & low == pattern), Fraction(0))
    joint = sum((w for m, w in d.weights.items() if m & low == pattern and m >> n & 1), Fraction(0))
    return joint / cond
