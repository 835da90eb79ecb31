"""Grounding of programs on a fixed domain and vectorised evaluation.

The evaluator works on many fact worlds at once: every free fact atom is a
numpy boolean vector indexed by world number, and each derived atom is
computed by vector AND/OR over its ground rules.  Only the atoms relevant to
the requested targets (their dependency cone) are grounded and evaluated.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import ConstantsNotSupported, ProgramError, StructureError
from .logic import Atom, Const, Elem, Eq, Truth, Var, Vocabulary, ground_atoms
from .program import ProbProgram, stratify

GroundAtom = tuple[str, tuple[int, ...]]


def atom_index(vocab: Vocabulary, n: int) -> dict[GroundAtom, int]:
    return {a: i for i, a in enumerate(ground_atoms(vocab, n))}


class BitMap:
    """Relocates bits of an integer mask: bit ``src`` goes to bit ``dst``.

    Applied through one 256-entry table per source byte.
    """

    def __init__(self, pairs: Iterable[tuple[int, int]], src_bits: int):
        self.nbytes = max(1, (src_bits + 7) // 8)
        by_byte: list[list[tuple[int, int]]] = [[] for _ in range(self.nbytes)]
        for src, dst in pairs:
            by_byte[src // 8].append((src % 8, dst))
        self.tables = []
        for entries in by_byte:
            table = [0] * 256
            for b in range(256):
                out = 0
                for bit, dst in entries:
                    if b >> bit & 1:
                        out |= 1 << dst
                table[b] = out
            self.tables.append(table)

    def __call__(self, mask: int) -> int:
        out = 0
        for table, byte in zip(self.tables, mask.to_bytes(self.nbytes, "little")):
            if byte:
                out |= table[byte]
        return out


def subset_bitmap(vocab: Vocabulary, n: int, elements: Sequence[int]) -> tuple[BitMap, int]:
    """Bit map from worlds on ``{1..n}`` to the substructure on ``elements``,
    relabelled order-preservingly to ``{1..len(elements)}``.  Nullary atoms
    are always kept.  Returns the map and the target atom count."""
    elems = sorted(elements)
    relabel = {old: new for new, old in enumerate(elems, start=1)}
    src = atom_index(vocab, n)
    dst = atom_index(vocab, len(elems))
    pairs = [(i, dst[(name, tuple(relabel[a] for a in args))])
             for (name, args), i in src.items() if all(a in relabel for a in args)]
    return BitMap(pairs, len(src)), len(dst)


def reduct_bitmap(vocab: Vocabulary, sub: Vocabulary, n: int) -> BitMap:
    src = atom_index(vocab, n)
    dst = atom_index(sub, n)
    return BitMap([(i, dst[a]) for a, i in src.items() if a in dst], len(src))


def permutation_bitmap(vocab: Vocabulary, n: int, perm: Mapping[int, int]) -> BitMap:
    idx = atom_index(vocab, n)
    return BitMap([(i, idx[(name, tuple(perm[a] for a in args))]) for (name, args), i in idx.items()],
                  len(idx))


class Grounding:
    """Lazily grounded program on ``{1..n}``.

    Fact atoms of facts with probability 0 or 1, and atoms of undeclared
    extensional symbols, are fixed (false, true, false respectively) and
    folded into the ground rules; the remaining fact atoms are free.
    """

    def __init__(self, program: ProbProgram, n: int, constants: Mapping[str, int] | None = None):
        if n < 1:
            raise StructureError("domain size must be at least 1")
        self.program = program
        self.n = n
        consts = dict(constants or {})
        missing = set(program.constants) - set(consts)
        if missing:
            raise ConstantsNotSupported(f"no interpretation given for constants {sorted(missing)}")
        for c, v in consts.items():
            if not 1 <= v <= n:
                raise StructureError(f"constant {c} interpreted outside 1..{n}")
        self.constants = consts
        stratify(program)  # raises on unstratifiable input
        self.facts = {f.name: f for f in program.facts}
        self.idb = set(program.intensional)
        self.ext = set(program.extensional)
        self._rules: dict[GroundAtom, list[tuple[tuple[GroundAtom, ...], tuple[GroundAtom, ...]]]] = {}
        self._by_pred = {p: program.clauses_for(p) for p in self.idb}

    # fixed / free classification -------------------------------------------------
    def fixed_value(self, atom: GroundAtom) -> bool | None:
        name = atom[0]
        if name in self.idb:
            return None
        fact = self.facts.get(name)
        if fact is None:
            return False
        if fact.prob == 0:
            return False
        if fact.prob == 1:
            return True
        return None

    def is_free_fact(self, atom: GroundAtom) -> bool:
        return atom[0] not in self.idb and self.fixed_value(atom) is None

    # grounding ------------------------------------------------------------------
    def _value(self, t, env):
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Elem):
            return t.value
        return self.constants[t.name]

    def rules(self, atom: GroundAtom):
        """Ground rules for a derived atom: list of (positive atoms, negative atoms)."""
        if atom in self._rules:
            return self._rules[atom]
        name, args = atom
        out = []
        for clause in self._by_pred.get(name, ()):
            env: dict[str, int] = {}
            ok = True
            for t, a in zip(clause.head.args, args):
                if isinstance(t, Var):
                    if env.setdefault(t.name, a) != a:
                        ok = False
                        break
                elif self._value(t, env) != a:
                    ok = False
                    break
            if not ok:
                continue
            rest = sorted(clause.variables() - set(env))
            for vals in itertools.product(range(1, self.n + 1), repeat=len(rest)):
                full = dict(env)
                full.update(zip(rest, vals))
                ground = self._ground_body(clause.body, full)
                if ground is not None:
                    out.append(ground)
        out = sorted(set(out))
        self._rules[atom] = out
        return out

    def _ground_body(self, body, env):
        pos, neg = [], []
        for lit in body:
            a = lit.atom
            if isinstance(a, Truth):
                if a.value != lit.positive:
                    return None
                continue
            if isinstance(a, Eq):
                if (self._value(a.left, env) == self._value(a.right, env)) != lit.positive:
                    return None
                continue
            ga = (a.pred, tuple(self._value(t, env) for t in a.args))
            fixed = self.fixed_value(ga)
            if fixed is not None:
                if fixed != lit.positive:
                    return None
                continue
            (pos if lit.positive else neg).append(ga)
        return tuple(sorted(set(pos))), tuple(sorted(set(neg)))

    def cone(self, atoms: Iterable[GroundAtom]) -> tuple[list[GroundAtom], list[GroundAtom]]:
        """Derived atoms reachable from ``atoms`` and the free fact atoms they
        depend on (both sorted)."""
        derived: set[GroundAtom] = set()
        facts: set[GroundAtom] = set()
        queue = deque(atoms)
        while queue:
            a = queue.popleft()
            if a[0] in self.idb:
                if a in derived:
                    continue
                derived.add(a)
                for pos, neg in self.rules(a):
                    queue.extend(pos)
                    queue.extend(neg)
            elif self.is_free_fact(a):
                facts.add(a)
        return sorted(derived), sorted(facts)

    def check_atom(self, atom: GroundAtom):
        name, args = atom
        arities = self.program.arities
        if name not in arities:
            raise ProgramError(f"unknown predicate {name!r}")
        if len(args) != arities[name]:
            raise ProgramError(f"{name} expects {arities[name]} arguments")
        if any(not 1 <= a <= self.n for a in args):
            raise StructureError(f"{name}{args}: elements must lie in 1..{self.n}")

    # evaluation -----------------------------------------------------------------
    def evaluate(self, targets: Iterable[GroundAtom], fact_vectors: Mapping[GroundAtom, np.ndarray],
                 length: int) -> dict[GroundAtom, np.ndarray]:
        """Truth vectors of the target atoms given vectors for free fact atoms.

        Fixed fact atoms may be requested and are returned as constants.
        """
        targets = list(targets)
        derived, facts = self.cone(targets)
        missing = [a for a in facts if a not in fact_vectors]
        if missing:
            raise ProgramError(f"no vector for fact atom {missing[0]}")
        values: dict[GroundAtom, np.ndarray] = {a: fact_vectors[a] for a in facts}
        false = np.zeros(length, dtype=bool)
        graph = nx.DiGraph()
        graph.add_nodes_from(derived)
        for a in derived:
            for pos, neg in self.rules(a):
                for b in pos + neg:
                    if b[0] in self.idb:
                        graph.add_edge(b, a)
        cond = nx.condensation(graph)
        for comp in nx.topological_sort(cond):
            members = sorted(cond.nodes[comp]["members"])
            recursive = len(members) > 1 or graph.has_edge(members[0], members[0])
            for a in members:
                values[a] = false
            while True:
                changed = False
                for a in members:
                    acc = false
                    for pos, neg in self.rules(a):
                        term = None
                        for b in pos:
                            term = values[b] if term is None else term & values[b]
                        for b in neg:
                            nb = ~values[b]
                            term = nb if term is None else term & nb
                        if term is None:
                            acc = np.ones(length, dtype=bool)
                            break
                        acc = acc | term
                    if recursive and not np.array_equal(acc, values[a]):
                        changed = True
                    values[a] = acc
                if not (recursive and changed):
                    break
        out = {}
        for a in targets:
            if a in values:
                out[a] = values[a]
            else:
                fixed = self.fixed_value(a)
                out[a] = np.full(length, bool(fixed), dtype=bool)
        return out


def enumeration_vectors(atoms: Sequence[GroundAtom]) -> tuple[dict[GroundAtom, np.ndarray], int]:
    """Vectors enumerating all assignments to ``atoms``: world ``w`` sets atom
    ``j`` iff bit ``j`` of ``w`` is set."""
    length = 1 << len(atoms)
    worlds = np.arange(length, dtype=np.int64)
    return {a: ((worlds >> j) & 1).astype(bool) for j, a in enumerate(atoms)}, length


def pack_masks(vectors: Sequence[np.ndarray], length: int) -> list[int]:
    """Combine per-bit vectors into one Python int per world."""
    if not vectors:
        return [0] * length
    chunks = []
    for start in range(0, len(vectors), 62):
        acc = np.zeros(length, dtype=np.int64)
        for j, vec in enumerate(vectors[start:start + 62]):
            acc |= vec.astype(np.int64) << j
        chunks.append((start, acc.tolist()))
    if len(chunks) == 1:
        return chunks[0][1]
    out = [0] * length
    for start, vals in chunks:
        for w, v in enumerate(vals):
            if v:
                out[w] |= v << start
    return out
