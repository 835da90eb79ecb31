"""Exact and asymptotic semantics of probabilistic logic programs.

Submodules:

* ``logic``: vocabularies, first-order and fixed-point formulas, finite structures
* ``program`` and ``syntax``: stratified Datalog programs with probabilistic facts
* ``semantics``: exact world distributions, marginals and property checkers
* ``asymptotics``: almost-sure type reasoning and the determinate transform
* ``wfomc``: exact counting oracle for two-variable sentences
* ``cli``: the ``plpasym`` command
"""

from .asymptotics import (QfType, asymptotic_fixpoint, asymptotic_qe, asymptotic_query_prob,
                          asymptotic_transform, enumerate_qf_types, generic_eval, nullary_case_split)
from .errors import PLPError
from .logic import FiniteStructure, Vocabulary, eval_formula, parse_sexpr, to_sexpr
from .program import ProbProgram, check_acyclic, check_determinate, stratify
from .semantics import (Family, check_CIP, check_IP, check_exchangeable, check_projective, m_star,
                        m_star_conditional, program_tv_distance, query_prob, world_distribution)
from .syntax import format_program, parse_program, parse_query

__all__ = [
    "QfType", "asymptotic_fixpoint", "asymptotic_qe", "asymptotic_query_prob", "asymptotic_transform",
    "enumerate_qf_types", "generic_eval", "nullary_case_split", "PLPError", "FiniteStructure",
    "Vocabulary", "eval_formula", "parse_sexpr", "to_sexpr", "ProbProgram", "check_acyclic",
    "check_determinate", "stratify", "Family", "check_CIP", "check_IP", "check_exchangeable",
    "check_projective", "m_star", "m_star_conditional", "program_tv_distance", "query_prob",
    "world_distribution", "format_program", "parse_program", "parse_query",
]
