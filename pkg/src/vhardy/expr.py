"""Tiny restricted evaluator for user formulas such as ``"(1+r)**-1.5"``."""
from __future__ import annotations

from typing import Callable

import numpy as np

NAMES = {name: getattr(np, name) for name in (
    "exp", "log", "sqrt", "sin", "cos", "tanh", "arctan", "abs", "minimum", "maximum",
    "where", "pi", "e")}
NAMES.update(min=np.minimum, max=np.maximum)


def compile_formula(expr: str, variables: tuple) -> Callable:
    """Compile ``expr`` into ``fn(**variables)``; only numpy math names are visible."""
    code = compile(expr, "<formula>", "eval")
    bad = set(code.co_names) - set(NAMES) - set(variables)
    if bad:
        raise ValueError(f"unknown names in formula {expr!r}: {sorted(bad)}")

    def fn(**values):
        env = dict(NAMES)
        env.update(values)
        return eval(code, {"__builtins__": {}}, env)

    return fn
