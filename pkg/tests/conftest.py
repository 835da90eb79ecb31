from fractions import Fraction

import pytest
from hypothesis import settings

from plpasym.generate import program_pool
from plpasym.syntax import parse_program

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

RUNNING_EXAMPLE = """\
1/2 :: r(X).
1/2 :: p(X,Y).
s(X) :- r(X), p(X,Y).
"""

TRANSITIVE_CLOSURE = """\
1/2 :: e(X,Y).
tc(X,Y) :- e(X,Y).
tc(X,Y) :- e(X,Z), tc(Z,Y).
"""

QF_EQUALITY = """\
1/2 :: r(X).
pp(X,Y) :- X = Y.
pp(X,Y) :- r(X).
"""


def prob_rule_program(annotation: str) -> str:
    return f"1/2 :: q(X,Y).\n{annotation} :: r(X) :- q(X,Y).\n"


def running_example_text(q_r: Fraction, q_p: Fraction) -> str:
    return f"{q_r} :: r(X).\n{q_p} :: p(X,Y).\ns(X) :- r(X), p(X,Y).\n"


@pytest.fixture
def running_example():
    return parse_program(RUNNING_EXAMPLE)


@pytest.fixture
def transitive_closure():
    return parse_program(TRANSITIVE_CLOSURE)


@pytest.fixture
def qf_equality():
    return parse_program(QF_EQUALITY)


@pytest.fixture(scope="session")
def pool():
    return program_pool()


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
