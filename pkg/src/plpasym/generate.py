"""Seeded pools of programs and sentences for experiments and tests.

The program generator builds small stratified programs directly as text and
parses them, so every pool member goes through the ordinary front end.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .ground import Grounding
from .logic import Formula, Vocabulary, ground_atoms, parse_sexpr
from .program import ProbProgram, check_determinate
from .syntax import fact_variables, format_probability, parse_program


@dataclass(frozen=True)
class PoolConfig:
    seed: int = 20240611
    size: int = 24
    max_fact_relations: int = 2
    max_arity: int = 2
    max_free_atoms: int = 16
    atom_budget_n: int = 4
    denominators: tuple[int, ...] = (2, 3, 4, 5, 10)
    boundary_rate: float = 0.1
    determinate_rate: float = 0.5
    prob_rule_rate: float = 0.2


@dataclass(frozen=True)
class PoolProgram:
    name: str
    text: str
    program: ProbProgram
    determinate: bool


def _probability(rng: random.Random, cfg: PoolConfig) -> Fraction:
    if rng.random() < cfg.boundary_rate:
        return Fraction(rng.choice((0, 1)))
    den = rng.choice(cfg.denominators)
    return Fraction(rng.randint(1, den - 1), den)


def _args(rng: random.Random, arity: int, variables: list[str]) -> str:
    return ",".join(rng.choice(variables) for _ in range(arity))


def _atom(name: str, args: str) -> str:
    return f"{name}({args})" if args else name


class _ProgramBuilder:
    def __init__(self, rng: random.Random, cfg: PoolConfig):
        self.rng = rng
        self.cfg = cfg

    def build(self) -> tuple[str, bool]:
        rng, cfg = self.rng, self.cfg
        determinate = rng.random() < cfg.determinate_rate
        nfacts = rng.randint(1, cfg.max_fact_relations)
        names = ["a", "b"][:nfacts]
        facts = {name: rng.randint(1, cfg.max_arity) for name in names}
        lines = [f"{format_probability(_probability(rng, cfg))} :: "
                 f"{_atom(name, ','.join(fact_variables(ar)))}." for name, ar in facts.items()]
        preds: dict[str, int] = {}
        for i in range(rng.randint(1, 3)):
            head = f"h{i + 1}"
            arity = rng.randint(1, 2)
            preds[head] = arity
            lower = {p: a for p, a in preds.items() if p != head}
            for _ in range(rng.randint(1, 2)):
                clause = self._clause(head, arity, facts, lower, determinate)
                if clause not in lines:
                    lines.append(clause)
        return "\n".join(lines) + "\n", determinate

    def _clause(self, head: str, arity: int, facts: dict[str, int], lower: dict[str, int],
                determinate: bool) -> str:
        rng, cfg = self.rng, self.cfg
        head_vars = fact_variables(arity)
        pool = head_vars if determinate else head_vars + ["Z"]
        positive_syms = dict(facts)
        positive_syms.update(lower)
        if rng.random() < 0.3:
            positive_syms[head] = arity  # positive recursion
        body: list[str] = []
        bound: set[str] = set()
        for _ in range(rng.randint(1, 2)):
            name = rng.choice(sorted(positive_syms))
            args = _args(rng, positive_syms[name], pool)
            if _atom(name, args) not in body:
                body.append(_atom(name, args))
            bound |= set(a for a in args.split(",") if a)
        extensional = {**facts, **lower}
        for v in [v for v in head_vars if v not in bound]:
            name = rng.choice(sorted(extensional))
            args = [v] + [rng.choice(pool) for _ in range(extensional[name] - 1)]
            rng.shuffle(args)
            body.append(_atom(name, ",".join(args)))
            bound |= set(args)
        choices = sorted(bound)
        if rng.random() < 0.5:
            name = rng.choice(sorted(extensional))
            negated = _atom(name, _args(rng, extensional[name], choices))
            if negated not in body:
                body.append("\\+ " + negated)
        if rng.random() < 0.3 and len(choices) >= 2:
            x, y = rng.sample(choices, 2)
            op = rng.choice(("=", "\\="))
            body.append(f"{x} {op} {y}")
        annotation = ""
        if rng.random() < cfg.prob_rule_rate:
            den = rng.choice(cfg.denominators)
            annotation = f"{rng.randint(1, den - 1)}/{den} :: "
        return f"{annotation}{_atom(head, ','.join(head_vars))} :- {', '.join(body)}."


def free_fact_atoms(program: ProbProgram, n: int) -> int:
    g = Grounding(program, n)
    return sum(1 for a in ground_atoms(program.extensional_vocabulary, n) if g.is_free_fact(a))


def program_pool(cfg: PoolConfig = PoolConfig()) -> list[PoolProgram]:
    """``cfg.size`` distinct programs within the atom budget, in a fixed order."""
    rng = random.Random(cfg.seed)
    builder = _ProgramBuilder(rng, cfg)
    out: list[PoolProgram] = []
    seen: set[str] = set()
    while len(out) < cfg.size:
        text, _ = builder.build()
        if text in seen:
            continue
        program = parse_program(text)
        if free_fact_atoms(program, cfg.atom_budget_n) > cfg.max_free_atoms:
            continue
        seen.add(text)
        out.append(PoolProgram(f"pool{len(out):02d}", text, program, check_determinate(program)[0]))
    return out


SENTENCE_VOCAB = Vocabulary((("r", 1), ("p", 2)))

#: quantifier rank at most two, over r (unary) and p (binary)
SENTENCES: tuple[str, ...] = (
    "(exists x (r x))",
    "(forall x (r x))",
    "(exists x (p x x))",
    "(forall x (p x x))",
    "(forall x (exists y (p x y)))",
    "(exists x (forall y (p x y)))",
    "(forall x (forall y (or (p x y) (p y x))))",
    "(forall x (or (r x) (exists y (and (p x y) (r y)))))",
    "(and (exists x (r x)) (forall x (exists y (and (not (= x y)) (p x y) (not (p y x))))))",
    "(exists x (and (r x) (forall y (implies (r y) (p x y)))))",
    "(forall x (and (exists y (p x y)) (exists y (p y x))))",
    "(exists x (forall y (implies (p x y) (r y))))",
    "(forall x (exists y (and (r y) (p x y))))",
    "(exists x (and (r x) (not (p x x)) (forall y (not (p y x)))))",
    "(forall x (implies (r x) (exists y (and (not (r y)) (p y x)))))",
    "(exists x (exists y (and (p x y) (p y x) (not (= x y)))))",
    "(forall x (forall y (implies (and (r x) (r y)) (p x y))))",
    "(exists x (forall y (p y x)))",
    "(forall x (exists y (and (not (= x y)) (p x y) (p y x))))",
    "(exists x (and (not (r x)) (forall y (implies (p x y) (= x y)))))",
    "(forall x (or (p x x) (exists y (and (p x y) (not (r y))))))",
    "(not (exists x (forall y (or (= x y) (p x y)))))",
    "(exists x (and (r x) (p x x)))",
    "(forall x (implies (p x x) (r x)))",
    "(and (exists x (r x)) (exists x (not (r x))))",
    "(forall x (forall y (implies (p x y) (p y x))))",
    "(exists x (forall y (implies (not (= x y)) (not (p x y)))))",
    "(forall x (exists y (and (p x y) (not (p y y)))))",
    "(exists y (forall x (implies (r x) (p x y))))",
    "(or (forall x (r x)) (exists x (exists y (and (r x) (not (r y)) (p x y)))))",
    "(forall x (or (not (r x)) (exists y (p x y))))",
    "(exists x (and (r x) (forall y (implies (p x y) (= x y)))))",
    "(forall x (forall y (or (= x y) (p x y) (p y x) (r x))))",
)


#: almost surely true, but each element's witness has probability 1/8, so the
#: finite-n probability falls until n = 5 before rising towards 1
SLOW_SENTENCES: tuple[str, ...] = (
    "(forall x (exists y (and (not (= x y)) (r y) (not (p x y)) (not (p y x)))))",
)


def sentence_pool(sentences: tuple[str, ...] = SENTENCES) -> list[tuple[str, Formula]]:
    return [(s, parse_sexpr(s)) for s in sentences]
