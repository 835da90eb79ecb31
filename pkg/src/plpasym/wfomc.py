"""Exact probabilities of two-variable sentences by lifted counting.

Used as an oracle where world enumeration is out of reach: the probability
that an independent random structure over unary and binary relations
satisfies a sentence of quantifier rank at most two, for domain sizes up to
about ten.  Quantified subformulas are abstracted into fresh nullary and
unary symbols; existential constraints are removed by inclusion-exclusion,
leaving a sum over element cells with pairwise interaction factors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, lcm
from typing import Mapping

from .errors import FormulaError
from .logic import (And, Atom, Elem, Eq, Exists, Formula, Not, Or, Truth, Var, Vocabulary, desugar,
                    enumerate_structures, eval_formula, free_vars, relations_of)

_A = "__a"
_B = "__b"


@dataclass
class Abstraction:
    """``top`` is a boolean combination of nullary symbols ``__b{j}``, each
    standing for ``exists x gammas[j]``; unary ``__a{i}(x)`` stands for
    ``exists y betas[i]``."""

    top: Formula
    gammas: list[Formula]
    betas: list[Formula]


def _rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    def t(a):
        return Var(mapping.get(a.name, a.name)) if isinstance(a, Var) else a
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(t(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(t(f.left), t(f.right))
    if isinstance(f, Not):
        return Not(_rename(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(_rename(c, mapping) for c in f.items))
    if isinstance(f, Or):
        return Or(tuple(_rename(c, mapping) for c in f.items))
    return f


def _mentions(f: Formula, prefix: str) -> bool:
    return any(name.startswith(prefix) for name in relations_of(f))


def abstract(sentence: Formula) -> Abstraction:
    gammas: list[Formula] = []
    betas: list[Formula] = []

    def walk(f: Formula) -> Formula:
        if isinstance(f, Exists):
            body = walk(f.body)
            free = free_vars(body) - {f.var}
            if not free:
                gammas.append(_rename(body, {f.var: "x"}))
                return Atom(f"{_B}{len(gammas) - 1}", ())
            if len(free) == 1:
                if _mentions(body, _A):
                    raise FormulaError("quantifier rank above two is not supported")
                (u,) = free
                betas.append(_rename(body, {u: "x", f.var: "y"}))
                return Atom(f"{_A}{len(betas) - 1}", (Var(u),))
            raise FormulaError("more than two variables in scope")
        if isinstance(f, Not):
            return Not(walk(f.body))
        if isinstance(f, And):
            return And(tuple(walk(c) for c in f.items))
        if isinstance(f, Or):
            return Or(tuple(walk(c) for c in f.items))
        if isinstance(f, Atom) and any(isinstance(a, Elem) for a in f.args):
            raise FormulaError("domain elements are not allowed in counted sentences")
        return f

    f = desugar(sentence)
    if free_vars(f):
        raise FormulaError(f"free variables {sorted(free_vars(f))} in a sentence")
    return Abstraction(walk(f), gammas, betas)


def _eval(f: Formula, env: Mapping[str, int], lookup) -> bool:
    if isinstance(f, Atom):
        return lookup(f.pred, tuple(env[a.name] for a in f.args))
    if isinstance(f, Eq):
        return env[f.left.name] == env[f.right.name]
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Not):
        return not _eval(f.body, env, lookup)
    if isinstance(f, And):
        return all(_eval(c, env, lookup) for c in f.items)
    if isinstance(f, Or):
        return any(_eval(c, env, lookup) for c in f.items)
    raise FormulaError(f"unexpected node {type(f).__name__}")


class _Counter:
    def __init__(self, vocab: Vocabulary, probabilities: Mapping[str, Fraction], abstraction: Abstraction):
        for name, arity in vocab.relations:
            if arity not in (1, 2):
                raise FormulaError("only unary and binary relations are supported")
        self.unary = [name for name, a in vocab.relations if a == 1]
        self.binary = [name for name, a in vocab.relations if a == 2]
        self.q = {name: Fraction(probabilities[name]) for name, _ in vocab.relations}
        self.denom = lcm(*[q.denominator for q in self.q.values()]) if self.q else 1
        self.ab = abstraction

    def _w(self, name: str, value: bool) -> int:
        q = self.q[name]
        num = q.numerator * (self.denom // q.denominator)
        return num if value else self.denom - num

    def count(self, n: int) -> Fraction:
        """P(sentence) on a domain of size n."""
        total = 0
        nb = len(self.ab.gammas)
        for bvals in itertools.product((False, True), repeat=nb):
            def blook(pred, args):
                return bvals[int(pred[len(_B):])]
            if not _eval(self.ab.top, {}, blook):
                continue
            true_js = [j for j in range(nb) if bvals[j]]
            false_js = [j for j in range(nb) if not bvals[j]]
            for size in range(len(true_js) + 1):
                for subset in itertools.combinations(true_js, size):
                    sign = -1 if size % 2 else 1
                    total += sign * self._forall(n, false_js + list(subset), bvals)
        atoms = n * len(self.unary) + n * n * len(self.binary)
        return Fraction(total, self.denom ** atoms)

    def _forall(self, n: int, negated: list[int], bvals) -> int:
        """Scaled weight of: for every x, no gamma_j(x) with j in ``negated``."""
        ab = self.ab
        na = len(ab.betas)
        cells = []
        states = [(False, True), (True, False), (True, True)]  # (a_i, con_i)
        for ubits in itertools.product((False, True), repeat=len(self.unary) + len(self.binary)):
            base = 1
            for name, v in zip(self.unary + self.binary, ubits):
                base *= self._w(name, v)
            unary = dict(zip(self.unary, ubits))
            diag = dict(zip(self.binary, ubits[len(self.unary):]))
            for st in itertools.product(states, repeat=na):
                avals = [s[0] for s in st]
                cons = [s[1] for s in st]

                def look(pred, args, unary=unary, diag=diag, avals=avals):
                    if pred.startswith(_B):
                        return bvals[int(pred[len(_B):])]
                    if pred.startswith(_A):
                        return avals[int(pred[len(_A):])]
                    return unary[pred] if pred in unary else diag[pred]

                if any(_eval(ab.gammas[j], {"x": 0}, look) for j in negated):
                    continue
                if any(c and _eval(ab.betas[i], {"x": 0, "y": 0}, look) for i, c in enumerate(cons)):
                    continue
                sign = -1 if sum(1 for a, c in st if a and c) % 2 else 1
                cells.append((sign * base, unary, diag, cons))
        if not cells:
            return 0
        m = len(cells)
        pair = [[self._pair(cells[i], cells[j], bvals) for j in range(m)] for i in range(m)]
        weights = [c[0] for c in cells]
        total = 0

        def rec(i: int, remaining: int, acc: int, counts: list[int]):
            nonlocal total
            if i == m - 1:
                k = remaining
                f = acc * weights[i] ** k * pair[i][i] ** comb(k, 2)
                for j, kj in enumerate(counts):
                    f *= pair[i][j] ** (k * kj)
                total += f * factorial(n) // _prod_fact(counts + [k])
                return
            for k in range(remaining + 1):
                f = acc * weights[i] ** k * pair[i][i] ** comb(k, 2)
                if k:
                    for j, kj in enumerate(counts):
                        if kj:
                            f *= pair[i][j] ** (k * kj)
                if f == 0 and k:
                    continue
                rec(i + 1, remaining - k, f, counts + [k])

        rec(0, n, 1, [])
        return total

    def _pair(self, c, d, bvals) -> int:
        """Scaled weight of the binary atoms between two distinct elements."""
        _, cu, cd, ccons = c
        _, du, dd, dcons = d
        out = 0
        nbin = len(self.binary)
        for bits in itertools.product((False, True), repeat=2 * nbin):
            fwd = dict(zip(self.binary, bits[:nbin]))
            bwd = dict(zip(self.binary, bits[nbin:]))

            def look(pred, args):
                if pred.startswith(_B):
                    return bvals[int(pred[len(_B):])]
                if len(args) == 1:
                    return (cu if args[0] == 0 else du)[pred]
                a, b = args
                if a == b:
                    return (cd if a == 0 else dd)[pred]
                return fwd[pred] if a == 0 else bwd[pred]

            ok = all(not (con and _eval(self.ab.betas[i], {"x": 0, "y": 1}, look))
                     for i, con in enumerate(ccons))
            ok = ok and all(not (con and _eval(self.ab.betas[i], {"x": 1, "y": 0}, look))
                            for i, con in enumerate(dcons))
            if ok:
                w = 1
                for name in self.binary:
                    w *= self._w(name, fwd[name]) * self._w(name, bwd[name])
                out += w
        return out


def _prod_fact(counts: list[int]) -> int:
    out = 1
    for k in counts:
        out *= factorial(k)
    return out


def sentence_probability(sentence: Formula, vocab: Vocabulary, probabilities: Mapping[str, Fraction],
                         n: int) -> Fraction:
    """Exact probability that a random structure of size n satisfies a
    sentence with at most two variables in scope.  Every relation is
    independent with the given probability per ground atom."""
    if n < 1:
        raise FormulaError("domain size must be at least 1")
    rels = relations_of(sentence)
    known = dict(vocab.relations)
    for name, arity in rels.items():
        if known.get(name) != arity:
            raise FormulaError(f"relation {name}/{arity} is not in the vocabulary")
    return _Counter(vocab, probabilities, abstract(sentence)).count(n)


def brute_force_probability(sentence: Formula, vocab: Vocabulary, probabilities: Mapping[str, Fraction],
                            n: int) -> Fraction:
    """The same probability by enumerating every structure (small n only)."""
    total = Fraction(0)
    for s in enumerate_structures(vocab, n):
        if not eval_formula(s, sentence):
            continue
        w = Fraction(1)
        for name, arity in vocab.relations:
            q = Fraction(probabilities[name])
            true = len(s.relation(name))
            w *= q ** true * (1 - q) ** (n ** arity - true)
        total += w
    return total
