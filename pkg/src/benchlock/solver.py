"""Complete CDCL SAT solver: two-watched-literal unit propagation,
first-UIP clause learning, activity-based decisions, phase saving and Luby
restarts. An external DIMACS solver can be substituted per call.

Assumptions are handled by adding them as unit clauses to a fresh solver
instance per call, which gives assumption semantics without incremental
state. A hit on the configured time budget raises SolverTimeout, distinct
from an unsat answer. Every sat model is verified against the clause
database before it is returned.
"""

from __future__ import annotations

import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush
from pathlib import Path
from typing import Iterable, Sequence

from .cnf import CnfFormula, emit_dimacs, model_satisfies, parse_dimacs_model
from .errors import CnfError, SolverTimeout

_RESTART_BASE = 128
_ACTIVITY_DECAY = 0.95
_ACTIVITY_LIMIT = 1e100


@dataclass
class SolverStats:
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    restarts: int = 0

    def merge(self, other: "SolverStats") -> None:
        self.decisions += other.decisions
        self.conflicts += other.conflicts
        self.propagations += other.propagations
        self.restarts += other.restarts

    def as_dict(self) -> dict:
        return {
            "decisions": self.decisions,
            "conflicts": self.conflicts,
            "propagations": self.propagations,
            "restarts": self.restarts,
        }


@dataclass
class SatOutcome:
    status: str  # "sat" | "unsat"
    model: dict[int, int] | None = None
    stats: SolverStats = field(default_factory=SolverStats)


def _luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence 1,1,2,1,1,2,4,..."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


class Solver:
    """Single-use solver over a fixed clause set (literal codes: 2v / 2v+1)."""

    def __init__(self, n_vars: int, clauses: Iterable[Iterable[int]],
                 deadline: float | None = None):
        self.n_vars = n_vars
        self.deadline = deadline
        self.stats = SolverStats()
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n_vars + 2)]
        # vals[code]: 0 unassigned, 1 true, 2 false
        self.vals = [0] * (2 * n_vars + 2)
        self.level = [0] * (n_vars + 1)
        self.reason = [-1] * (n_vars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity = [0.0] * (n_vars + 1)
        self.var_inc = 1.0
        self.phase = [False] * (n_vars + 1)
        self.heap: list[tuple[float, int]] = []
        self.unsat_at_load = False

        units: list[int] = []
        for lits in clauses:
            codes = []
            for lit in lits:
                v = abs(lit)
                if v == 0 or v > n_vars:
                    raise CnfError(f"literal {lit} out of range")
                codes.append(2 * v if lit > 0 else 2 * v + 1)
            if not codes:
                self.unsat_at_load = True
                return
            if len(codes) == 1:
                units.append(codes[0])
                continue
            ci = len(self.clauses)
            self.clauses.append(codes)
            self.watches[codes[0]].append(ci)
            self.watches[codes[1]].append(ci)
            for c in codes:
                self.activity[c >> 1] += 1.0
        for v in range(1, n_vars + 1):
            heappush(self.heap, (-self.activity[v], v))
        for code in units:
            if self.vals[code] == 2:
                self.unsat_at_load = True
                return
            if self.vals[code] == 0:
                self._enqueue(code, -1)

    # -- core mechanics -----------------------------------------------------

    def _enqueue(self, code: int, reason_ci: int) -> None:
        self.vals[code] = 1
        self.vals[code ^ 1] = 2
        v = code >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason_ci
        self.phase[v] = not (code & 1)
        self.trail.append(code)

    def _propagate(self) -> int:
        """Propagate until fixpoint; return conflicting clause index or -1."""
        vals = self.vals
        clauses = self.clauses
        watches = self.watches
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            self.stats.propagations += 1
            falsed = lit ^ 1
            ws = watches[falsed]
            keep: list[int] = []
            i = 0
            n_ws = len(ws)
            while i < n_ws:
                ci = ws[i]
                i += 1
                lits = clauses[ci]
                if lits[0] == falsed:
                    lits[0], lits[1] = lits[1], lits[0]
                first = lits[0]
                if vals[first] == 1:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(lits)):
                    if vals[lits[k]] != 2:
                        lits[1], lits[k] = lits[k], lits[1]
                        watches[lits[1]].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if vals[first] == 2:
                    keep.extend(ws[i:])
                    watches[falsed] = keep
                    return ci
                self._enqueue(first, ci)
            watches[falsed] = keep
        return -1

    def _bump(self, v: int) -> None:
        act = self.activity[v] + self.var_inc
        self.activity[v] = act
        if act > _ACTIVITY_LIMIT:
            scale = 1e-100
            for u in range(1, self.n_vars + 1):
                self.activity[u] *= scale
            self.var_inc *= scale
            act = self.activity[v]
        heappush(self.heap, (-act, v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP conflict analysis: (learned clause codes, backtrack level)."""
        seen = [False] * (self.n_vars + 1)
        learnt: list[int] = []
        path = 0
        p = -1
        index = len(self.trail)
        cur_level = len(self.trail_lim)
        lits = self.clauses[confl]
        start = 0
        while True:
            for j in range(start, len(lits)):
                q = lits[j]
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        path += 1
                    else:
                        learnt.append(q)
            while True:
                index -= 1
                if seen[self.trail[index] >> 1]:
                    break
            p = self.trail[index]
            v = p >> 1
            seen[v] = False
            path -= 1
            if path == 0:
                break
            lits = self.clauses[self.reason[v]]
            start = 1
        learnt.insert(0, p ^ 1)
        if len(learnt) == 1:
            return learnt, 0
        # move a max-level literal into the second watch slot
        max_j = max(range(1, len(learnt)), key=lambda j: self.level[learnt[j] >> 1])
        learnt[1], learnt[max_j] = learnt[max_j], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    def _backtrack(self, target: int) -> None:
        limit = self.trail_lim[target]
        for code in reversed(self.trail[limit:]):
            self.vals[code] = 0
            self.vals[code ^ 1] = 0
            v = code >> 1
            heappush(self.heap, (-self.activity[v], v))
        del self.trail[limit:]
        del self.trail_lim[target:]
        self.qhead = limit

    def _decide(self) -> bool:
        while self.heap:
            _, v = heappop(self.heap)
            if self.vals[2 * v] == 0:
                self.stats.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(2 * v if self.phase[v] else 2 * v + 1, -1)
                return True
        return False

    def _check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SolverTimeout("solver exceeded its time budget")

    def run(self) -> SatOutcome:
        if self.unsat_at_load:
            return SatOutcome("unsat", stats=self.stats)
        restart_count = 0
        budget = _RESTART_BASE * _luby(1)
        conflicts_here = 0
        while True:
            confl = self._propagate()
            if confl >= 0:
                self.stats.conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    return SatOutcome("unsat", stats=self.stats)
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[learnt[0]].append(ci)
                    self.watches[learnt[1]].append(ci)
                    self._enqueue(learnt[0], ci)
                self.var_inc /= _ACTIVITY_DECAY
                if self.stats.conflicts % 64 == 0:
                    self._check_deadline()
                if conflicts_here >= budget:
                    restart_count += 1
                    self.stats.restarts += 1
                    conflicts_here = 0
                    budget = _RESTART_BASE * _luby(restart_count + 1)
                    if self.trail_lim:
                        self._backtrack(0)
            else:
                if len(self.trail) == self.n_vars:
                    model = {
                        v: 1 if self.vals[2 * v] == 1 else 0
                        for v in range(1, self.n_vars + 1)
                    }
                    return SatOutcome("sat", model=model, stats=self.stats)
                if self.stats.decisions % 512 == 0:
                    self._check_deadline()
                self._decide()


def solve(
    cnf: CnfFormula,
    assumptions: Iterable[int] = (),
    timeout_ms: float | None = None,
    external_command: Sequence[str] | None = None,
) -> SatOutcome:
    """Decide a formula under optional assumption literals.

    With ``external_command`` the formula (plus assumptions as units) goes
    to that solver as a DIMACS file; otherwise the built-in CDCL engine
    decides it. Raises SolverTimeout when the budget is exhausted. On sat,
    the model is total over the formula's variables and verified against
    every clause.
    """
    assumptions = list(assumptions)
    for lit in assumptions:
        if lit == 0 or abs(lit) > cnf.var_count:
            raise CnfError(f"assumption literal {lit} out of range")
    clause_iter = cnf.clauses + [[lit] for lit in assumptions]
    if external_command is not None:
        augmented = CnfFormula(var_count=cnf.var_count)
        augmented.clauses = clause_iter
        outcome = solve_with_external(augmented, external_command, timeout_ms)
    else:
        deadline = None
        if timeout_ms is not None:
            deadline = time.monotonic() + timeout_ms / 1000.0
        outcome = Solver(cnf.var_count, clause_iter, deadline).run()
    if outcome.status == "sat" and not model_satisfies(cnf, outcome.model):
        raise AssertionError("solver produced a non-satisfying model")
    return outcome


def solve_with_external(
    cnf: CnfFormula,
    command: Sequence[str],
    timeout_ms: float | None = None,
) -> SatOutcome:
    """Run a DIMACS solver subprocess on the formula.

    The command gets the CNF file path appended. Interpretation follows
    the solver-competition convention: exit status 10 = sat, 20 = unsat,
    with the status/model lines on stdout as parsed by
    parse_dimacs_model. Any model returned is completed with zeros for
    unmentioned variables.
    """
    with tempfile.TemporaryDirectory(prefix="benchlock_cnf_") as tmp:
        path = Path(tmp) / "formula.cnf"
        path.write_text(emit_dimacs(cnf), encoding="utf-8")
        try:
            proc = subprocess.run(
                [*command, str(path)],
                capture_output=True,
                text=True,
                timeout=timeout_ms / 1000.0 if timeout_ms is not None else None,
            )
        except subprocess.TimeoutExpired:
            raise SolverTimeout(
                f"external solver exceeded {timeout_ms} ms"
            ) from None
    status, partial = parse_dimacs_model(proc.stdout)
    if status == "unknown":
        if proc.returncode == 10:
            status = "sat"
        elif proc.returncode == 20:
            status = "unsat"
        else:
            raise CnfError(
                f"external solver gave no verdict (exit {proc.returncode})"
            )
    if status == "unsat":
        return SatOutcome("unsat")
    model = {v: partial.get(v, 0) for v in range(1, cnf.var_count + 1)}
    if not model_satisfies(cnf, model):
        raise CnfError(
            "external solver reported sat but printed no usable model"
        )
    return SatOutcome("sat", model=model)
