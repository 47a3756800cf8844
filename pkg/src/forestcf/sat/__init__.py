"""Complete SAT solving behind a small, deterministic interface.

solve() accepts a CnfFormula and returns a SolveResult with a total
assignment on satisfiable inputs. Two interchangeable backends implement the
same CDCL algorithm: a compiled extension (forestcf.sat._core, built from
_core.pyx) and a pure-Python fallback (core_py). The compiled core is
selected automatically when importable; set FORESTCF_SAT_BACKEND=pure or
=compiled to force one. Both produce identical assignments and statistics on
identical inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

from ..encoding import CnfFormula
from . import core_py

try:
    from . import _core  # compiled twin of core_py
except ImportError:
    _core = None


class BudgetExhausted(RuntimeError):
    """The conflict budget ran out before a SAT/UNSAT answer was reached."""

    def __init__(self, stats: "SolverStats"):
        super().__init__(f"solver exceeded its conflict budget ({stats.conflicts} conflicts)")
        self.stats = stats


@dataclass(frozen=True)
class SolverStats:
    decisions: int
    propagations: int
    conflicts: int
    learned: int
    restarts: int


@dataclass(frozen=True)
class SolveResult:
    sat: bool
    assignment: Optional[tuple]  # assignment[i] is the value of variable i+1
    stats: SolverStats

    def value(self, var: int) -> bool:
        return self.assignment[var - 1]


def backend_name() -> str:
    forced = os.environ.get("FORESTCF_SAT_BACKEND", "auto")
    if forced == "pure":
        return "pure"
    if forced == "compiled":
        if _core is None:
            raise RuntimeError("compiled SAT core requested but not built")
        return "compiled"
    return "compiled" if _core is not None else "pure"


def solve(formula: CnfFormula, max_conflicts: int | None = None) -> SolveResult:
    """Decide the formula. Raises BudgetExhausted if max_conflicts runs out,
    ValueError on a malformed literal."""
    budget = -1 if max_conflicts is None else max_conflicts
    core = _core if backend_name() == "compiled" else core_py
    status, model, raw = core.solve_core(formula.n_vars, list(formula.clauses), budget)
    stats = SolverStats(*raw)
    if status == 2:
        raise BudgetExhausted(stats)
    if status == 1:
        return SolveResult(sat=True, assignment=tuple(bool(b) for b in model), stats=stats)
    return SolveResult(sat=False, assignment=None, stats=stats)


def verify(formula: CnfFormula, assignment: Sequence[bool]) -> bool:
    """True iff every clause has a satisfied literal. Independent of solve()."""
    if len(assignment) != formula.n_vars:
        return False
    for clause in formula.clauses:
        for lit in clause:
            value = assignment[lit - 1] if lit > 0 else not assignment[-lit - 1]
            if value:
                break
        else:
            return False
    return True
