"""Nested sequent calculi for constructive modal logics."""

from .formula import ParseError, parse, show
from .sequent import Sequent, parse_sequent
from .calculus import LOGICS, RuleId, SystemConfig, logic
from .derivation import Derivation, check

__all__ = ["ParseError", "parse", "show", "Sequent", "parse_sequent", "LOGICS", "RuleId",
           "SystemConfig", "logic", "Derivation", "check"]
