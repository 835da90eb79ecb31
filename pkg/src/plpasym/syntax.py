"""Surface syntax for probabilistic logic programs and ground queries.

Grammar::

    program   := statement*
    statement := [prob '::'] atom [':-' body] '.'
    body      := literal (',' literal)*
    literal   := '\\+' atom | atom | term '=' term | term '\\=' term | 'true' | 'false'
    prob      := digits '/' digits | digits '.' digits | digits

``%`` starts a comment that runs to the end of the line.  Variables start
with an uppercase letter or ``_`` (a lone ``_`` is anonymous); lowercase names
in argument position are constants.  A probabilistic rule ``p :: h :- body``
is desugared into a fresh auxiliary fact over the rule's variables that is
conjoined to the body.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import ProgramError, PLPSyntaxError
from .logic import (Atom, Const, Elem, Eq, Formula, Not, And, Or, Term, Truth,
                    Var, FALSE, TRUE)
from .program import Clause, Literal, ProbFact, ProbProgram, literal_vars, term_vars

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<prob>\d+/\d+|\d+\.\d+|\d+)
  | (?P<op>::|:-|\\\+|\\=|[=(),.;])
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise PLPSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def parse_probability(text: str, line: int = 0, col: int = 0) -> Fraction:
    value = Fraction(text)
    if not 0 <= value <= 1:
        raise PLPSyntaxError(f"probability {text} outside [0,1]", line, col)
    return value


class _Parser:
    def __init__(self, text: str, numerals: bool = False):
        self.tokens = tokenize(text)
        self.i = 0
        self.numerals = numerals
        self.anon = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg: str, tok: Token | None = None) -> PLPSyntaxError:
        tok = tok or self.tok
        return PLPSyntaxError(msg, tok.line, tok.col)

    def take(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of input"
            raise self.error(f"expected {want!r}, found {got!r}")
        self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.i += 1
            if tok.text == "_":
                self.anon += 1
                return Var(f"_Anon{self.anon}")
            return Var(tok.text)
        if tok.kind == "name":
            self.i += 1
            return Const(tok.text)
        if tok.kind == "prob" and self.numerals and tok.text.isdigit():
            self.i += 1
            return Elem(int(tok.text))
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def atom(self) -> tuple[Atom, Token]:
        tok = self.take("name")
        args: list[Term] = []
        if self.at("op", "("):
            self.i += 1
            if not self.at("op", ")"):
                args.append(self.term())
                while self.at("op", ","):
                    self.i += 1
                    args.append(self.term())
            self.take("op", ")")
        return Atom(tok.text, tuple(args)), tok

    def _starts_term_comparison(self) -> bool:
        nxt = self.tokens[self.i + 1]
        return nxt.kind == "op" and nxt.text in ("=", "\\=")

    def literal(self) -> Literal:
        if self.at("op", "\\+"):
            self.i += 1
            if self.at("name", "true") or self.at("name", "false"):
                return Literal(Truth(self.take("name").text == "true"), False)
            a, _ = self.atom()
            return Literal(a, False)
        if self.tok.kind in ("var", "name", "prob") and self._starts_term_comparison():
            left = self.term()
            op = self.take("op").text
            right = self.term()
            return Literal(Eq(left, right), op == "=")
        if self.at("name", "true") or self.at("name", "false"):
            return Literal(Truth(self.take("name").text == "true"))
        a, _ = self.atom()
        return Literal(a)

    def body(self) -> list[Literal]:
        lits = [self.literal()]
        while self.at("op", ","):
            self.i += 1
            lits.append(self.literal())
        return lits


def _fresh_name(base: str, taken: set[str]) -> str:
    i = 1
    while f"{base}_rule{i}" in taken:
        i += 1
    name = f"{base}_rule{i}"
    taken.add(name)
    return name


def _ordered_vars(head: Atom, body: Iterable[Literal]) -> list[str]:
    seen: list[str] = []
    for t in head.args:
        if isinstance(t, Var) and t.name not in seen:
            seen.append(t.name)
    for lit in body:
        a = lit.atom
        args = a.args if isinstance(a, Atom) else (a.left, a.right) if isinstance(a, Eq) else ()
        for t in args:
            if isinstance(t, Var) and t.name not in seen:
                seen.append(t.name)
    return seen


def parse_program(text: str) -> ProbProgram:
    """Parse program text into a ProbProgram (probabilistic rules desugared)."""
    p = _Parser(text)
    facts: list[ProbFact] = []
    rules: list[Clause] = []
    prob_rules: list[tuple[Fraction, Atom, list[Literal], Token]] = []
    fact_tokens: dict[str, Token] = {}
    while not p.at("eof"):
        prob = None
        start = p.tok
        if p.at("prob"):
            tok = p.take("prob")
            prob = parse_probability(tok.text, tok.line, tok.col)
            p.take("op", "::")
        head, head_tok = p.atom()
        body: list[Literal] = []
        if p.at("op", ":-"):
            p.i += 1
            body = p.body()
        p.take("op", ".")
        if prob is not None and not body:
            names = [t.name if isinstance(t, Var) else None for t in head.args]
            if None in names or len(set(names)) != len(names) or any(n.startswith("_Anon") for n in names):
                raise PLPSyntaxError("arguments of a probabilistic fact must be distinct variables",
                                     head_tok.line, head_tok.col)
            if head.pred in fact_tokens:
                raise PLPSyntaxError(f"probabilistic fact {head.pred} declared twice",
                                     head_tok.line, head_tok.col)
            fact_tokens[head.pred] = head_tok
            facts.append(ProbFact(head.pred, len(head.args), prob, False, start.line, start.col))
        elif prob is not None:
            prob_rules.append((prob, head, body, start))
        else:
            rules.append(Clause(head, tuple(body), start.line, start.col))

    taken = set(fact_tokens) | {c.head.pred for c in rules} | {h.pred for _, h, _, _ in prob_rules}
    for c in rules:
        taken |= {l.atom.pred for l in c.body if isinstance(l.atom, Atom)}
    for prob, head, body, tok in prob_rules:
        aux = _fresh_name(head.pred, taken)
        args = tuple(Var(v) for v in _ordered_vars(head, body))
        facts.append(ProbFact(aux, len(args), prob, True, tok.line, tok.col))
        rules.append(Clause(head, tuple(body) + (Literal(Atom(aux, args)),), tok.line, tok.col))

    _check_program(facts, rules, fact_tokens)
    try:
        return ProbProgram(tuple(facts), tuple(rules))
    except ProgramError as exc:
        raise PLPSyntaxError(str(exc)) from None


def _check_program(facts: list[ProbFact], rules: list[Clause], fact_tokens: dict[str, Token]):
    fact_names = {f.name for f in facts}
    arity: dict[str, tuple[int, int, int]] = {}
    for f in facts:
        arity[f.name] = (f.arity, f.line, f.col)
    for c in rules:
        if c.head.pred in fact_names:
            raise PLPSyntaxError(f"fact symbol {c.head.pred} reused as a rule head", c.line, c.col)
        atoms = [c.head] + [l.atom for l in c.body if isinstance(l.atom, Atom)]
        for a in atoms:
            prev = arity.setdefault(a.pred, (len(a.args), c.line, c.col))
            if prev[0] != len(a.args):
                raise PLPSyntaxError(f"{a.pred} used with arity {len(a.args)}, "
                                     f"earlier with arity {prev[0]}", c.line, c.col)
        positive_vars = term_vars(c.head.args)
        for l in c.body:
            if l.positive and isinstance(l.atom, Atom):
                positive_vars |= term_vars(l.atom.args)
        for l in c.body:
            unsafe = literal_vars(l) - positive_vars
            if unsafe:
                raise PLPSyntaxError(f"variable {sorted(unsafe)[0]} is not range restricted",
                                     c.line, c.col)


def parse_query(text: str) -> Formula:
    """Parse a query: ``,`` is conjunction, ``;`` disjunction, ``\\+`` negation,
    numerals denote domain elements."""
    p = _Parser(text, numerals=True)

    def disjunction() -> Formula:
        items = [conjunction()]
        while p.at("op", ";"):
            p.i += 1
            items.append(conjunction())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction() -> Formula:
        items = [unary()]
        while p.at("op", ","):
            p.i += 1
            items.append(unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary() -> Formula:
        if p.at("op", "\\+"):
            p.i += 1
            return Not(unary())
        if p.at("op", "("):
            p.i += 1
            f = disjunction()
            p.take("op", ")")
            return f
        if p.tok.kind in ("var", "name", "prob") and p._starts_term_comparison():
            left = p.term()
            op = p.take("op").text
            right = p.term()
            f = Eq(left, right)
            return f if op == "=" else Not(f)
        if p.at("name", "true"):
            p.i += 1
            return TRUE
        if p.at("name", "false"):
            p.i += 1
            return FALSE
        a, _ = p.atom()
        return a

    f = disjunction()
    if p.at("op", "."):
        p.i += 1
    if not p.at("eof"):
        raise p.error(f"unexpected {p.tok.text!r} after query")
    return f


# --------------------------------------------------------------------------
# printing


def format_probability(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def fact_variables(arity: int) -> list[str]:
    if arity <= 3:
        return ["X", "Y", "Z"][:arity]
    return [f"X{i}" for i in range(1, arity + 1)]


def format_term(t: Term) -> str:
    return str(t)


def format_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(format_term(t) for t in a.args)})"


def format_literal(lit: Literal) -> str:
    a = lit.atom
    if isinstance(a, Truth):
        return ("true" if a.value else "false") if lit.positive else ("false" if a.value else "true")
    if isinstance(a, Eq):
        op = "=" if lit.positive else "\\="
        return f"{format_term(a.left)} {op} {format_term(a.right)}"
    return format_atom(a) if lit.positive else "\\+ " + format_atom(a)


def format_fact(f: ProbFact) -> str:
    head = Atom(f.name, tuple(Var(v) for v in fact_variables(f.arity)))
    return f"{format_probability(f.prob)} :: {format_atom(head)}."


def format_clause(c: Clause) -> str:
    if not c.body:
        return format_atom(c.head) + "."
    return f"{format_atom(c.head)} :- {', '.join(format_literal(l) for l in c.body)}."


def format_program(program: ProbProgram) -> str:
    lines = [format_fact(f) for f in program.facts]
    lines += [format_clause(c) for c in program.rules]
    return "\n".join(lines) + ("\n" if lines else "")
