"""Circumscriptive Datalog (SKY) engine: parsing, grounding, minimal models."""

from .backtrack import SolveConfig, SolveResult, SolverStats, solve
from .circumscription import ModelSet, enumerate_bruteforce, is_minimal, is_model
from .fixpoint import Interpretation, least_model, naive_least_model
from .grounder import GroundAtom, GroundProgram, ground_program, guess_domain, herbrand_universe
from .parser import ParseError, parse_program, tokenize
from .syntax import Program, StratificationError, ValidityError

__all__ = [
    "GroundAtom", "GroundProgram", "Interpretation", "ModelSet", "ParseError", "Program",
    "SolveConfig", "SolveResult", "SolverStats", "StratificationError", "ValidityError",
    "enumerate_bruteforce", "ground_program", "guess_domain", "herbrand_universe",
    "is_minimal", "is_model", "least_model", "naive_least_model", "parse_program",
    "solve", "tokenize",
]
