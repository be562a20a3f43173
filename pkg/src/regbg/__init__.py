"""Normalized regular expressions over a background of equations.

The first layer interns normalized expressions as integers (ExprStore). The
second layer (Background) groups them into language classes and stores
derivative equations between class representatives; DFAs, minimization and
the simplification pipelines are built on top.
"""

from .background import Background, InvariantViolation, gc
from .expr import ExprStore
from .plain import ParseError, lift, parse, to_text
from .simplify import Workbench, config_for

__all__ = [
    "Background",
    "ExprStore",
    "InvariantViolation",
    "ParseError",
    "Workbench",
    "config_for",
    "gc",
    "lift",
    "parse",
    "to_text",
]
