"""CNF formulas, DIMACS I/O and a small deterministic DPLL engine.

The engine is used three ways: exact model counting (the oracle behind the
encoding tests), model enumeration, and budget-truncated probing for the
SAT feature vector. Branching is always on the lowest-index unassigned
variable, true first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .csp import LimitExceeded

__all__ = [
    "CnfFormula",
    "DimacsError",
    "write_dimacs",
    "parse_dimacs",
    "count_models",
    "iter_models",
    "ProbeStats",
    "dpll_probe",
]

VarKey = tuple  # (csp variable id, "eq" | "leq", value)


class DimacsError(ValueError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    """A clause list plus the bookkeeping needed to decode models.

    ``var_map`` maps ``(csp_var, kind, value)`` with kind ``"eq"`` (direct,
    support) or ``"leq"`` (order) to the SAT variable index. ``domains`` keeps
    the CSP domains so that order-encoded variables without any SAT variable
    (domain size 1) can still be decoded.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    var_map: dict = field(default_factory=dict)
    encoding: str | None = None
    include_domains: bool | None = None
    domains: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def tags(self) -> dict[int, VarKey]:
        return {sat: key for key, sat in self.var_map.items()}


# ---------------------------------------------------------------------------
# DIMACS


def _tag(kind: str, value: int) -> str:
    return f"{kind}({value})"


_TAG = re.compile(r"^(eq|leq)\((-?\d+)\)$")


def write_dimacs(formula: CnfFormula) -> str:
    """Render ``formula`` as DIMACS CNF.

    Decoding metadata goes into leading comment lines::

        c encoding direct domains
        c domain X 1 2
        c map X eq(1) 1
    """
    out = []
    if formula.encoding is not None:
        variant = "domains" if formula.include_domains else "nodomains"
        out.append(f"c encoding {formula.encoding} {variant}")
    for vid, dom in formula.domains.items():
        out.append(f"c domain {vid} {' '.join(map(str, dom))}")
    for (vid, kind, value), sat in sorted(formula.var_map.items(), key=lambda kv: kv[1]):
        out.append(f"c map {vid} {_tag(kind, value)} {sat}")
    out.append(f"p cnf {formula.num_vars} {len(formula.clauses)}")
    for clause in formula.clauses:
        out.append(" ".join([*map(str, clause), "0"]))
    return "\n".join(out) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = num_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    var_map: dict = {}
    domains: dict = {}
    encoding = include_domains = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) >= 4 and parts[1] == "map":
                m = _TAG.match(parts[3])
                if m and len(parts) == 5:
                    var_map[(parts[2], m.group(1), int(m.group(2)))] = int(parts[4])
            elif len(parts) >= 3 and parts[1] == "domain":
                domains[parts[2]] = tuple(int(v) for v in parts[3:])
            elif len(parts) == 4 and parts[1] == "encoding":
                encoding = parts[2]
                include_domains = parts[3] == "domains"
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad header {line!r}")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        if line.startswith("%"):
            break
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        try:
            lits = [int(t) for t in line.split()]
        except ValueError:
            raise DimacsError(f"line {lineno}: non-integer literal") from None
        for lit in lits:
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if num_clauses != len(clauses):
        raise DimacsError(f"header announces {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses), var_map, encoding, include_domains, domains)


# ---------------------------------------------------------------------------
# DPLL


class _Dpll:
    """Assignment trail with occurrence-list unit propagation."""

    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]]):
        self.n = num_vars
        self.clauses = [tuple(c) for c in clauses]
        self.value = [0] * (num_vars + 1)
        self.trail: list[int] = []
        self.occ: dict[int, list[int]] = {}
        for ci, clause in enumerate(self.clauses):
            for lit in set(clause):
                self.occ.setdefault(lit, []).append(ci)
        self.propagations = 0

    def assign(self, lit: int):
        self.value[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)

    def undo(self, mark: int):
        value = self.value
        while len(self.trail) > mark:
            value[abs(self.trail.pop())] = 0

    def lit_value(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def propagate(self, start: int) -> bool:
        """Propagate trail entries from ``start``; False on conflict."""
        value, clauses, trail = self.value, self.clauses, self.trail
        i = start
        while i < len(trail):
            falsified = -trail[i]
            i += 1
            for ci in self.occ.get(falsified, ()):
                free = 0
                unit = 0
                for lit in clauses[ci]:
                    v = value[abs(lit)]
                    if v == 0:
                        free += 1
                        unit = lit
                    elif (v > 0) == (lit > 0):
                        break
                else:
                    if free == 0:
                        return False
                    if free == 1:
                        self.assign(unit)
                        self.propagations += 1
        return True

    def root(self) -> bool:
        """Assert unit clauses and propagate; False if the formula is refuted."""
        for clause in self.clauses:
            if not clause:
                return False
            if len(clause) == 1:
                state = self.lit_value(clause[0])
                if state < 0:
                    return False
                if state == 0:
                    self.assign(clause[0])
                    self.propagations += 1
        return self.propagate(0)

    def all_satisfied(self) -> bool:
        value = self.value
        for clause in self.clauses:
            for lit in clause:
                v = value[abs(lit)]
                if v != 0 and (v > 0) == (lit > 0):
                    break
            else:
                return False
        return True

    def pick(self) -> int:
        value = self.value
        for var in range(1, self.n + 1):
            if value[var] == 0:
                return var
        return 0


def count_models(formula: CnfFormula, limit: int = 1_000_000) -> int:
    """Exact number of satisfying assignments over all ``num_vars`` variables.

    ``limit`` caps the number of search nodes; :class:`LimitExceeded` is
    raised beyond it.
    """
    engine = _Dpll(formula.num_vars, formula.clauses)
    if not engine.root():
        return 0
    nodes = 0

    def count() -> int:
        nonlocal nodes
        nodes += 1
        if nodes > limit:
            raise LimitExceeded(f"model counting exceeded {limit} nodes")
        if engine.all_satisfied():
            return 1 << (engine.n - len(engine.trail))
        var = engine.pick()
        total = 0
        for lit in (var, -var):
            mark = len(engine.trail)
            engine.assign(lit)
            if engine.propagate(mark):
                total += count()
            engine.undo(mark)
        return total

    return count()


def iter_models(formula: CnfFormula, limit: int = 1_000_000) -> Iterator[frozenset[int]]:
    """Yield every model as the frozenset of variables assigned true."""
    engine = _Dpll(formula.num_vars, formula.clauses)
    if not engine.root():
        return
    nodes = 0

    def expand(free: list[int]):
        base = {lit for lit in engine.trail if lit > 0}
        for mask in range(1 << len(free)):
            yield frozenset(base | {v for i, v in enumerate(free) if mask >> i & 1})

    def walk():
        nonlocal nodes
        nodes += 1
        if nodes > limit:
            raise LimitExceeded(f"model enumeration exceeded {limit} nodes")
        if engine.all_satisfied():
            free = [v for v in range(1, engine.n + 1) if engine.value[v] == 0]
            yield from expand(free)
            return
        var = engine.pick()
        for lit in (var, -var):
            mark = len(engine.trail)
            engine.assign(lit)
            if engine.propagate(mark):
                yield from walk()
            engine.undo(mark)

    yield from walk()


@dataclass(frozen=True)
class ProbeStats:
    decisions: int = 0
    propagations: int = 0
    backtracks: int = 0
    solved: bool = False
    assigned_fraction: float = 0.0


def dpll_probe(formula: CnfFormula, budget: int) -> ProbeStats:
    """Run a satisfiability DPLL search allowed at most ``budget`` decisions.

    ``solved`` is set when the search found a model or refuted the formula
    before running out of decisions. Flipping a decision after a conflict
    counts as a backtrack, not a decision.
    """
    if budget <= 0:
        return ProbeStats()
    engine = _Dpll(formula.num_vars, formula.clauses)
    decisions = backtracks = 0
    solved = False
    if not engine.root():
        solved = True
    else:
        stack: list[tuple[int, int, bool]] = []  # (trail mark, literal, flipped)
        while True:
            if engine.all_satisfied():
                solved = True
                break
            if decisions >= budget:
                break
            var = engine.pick()
            decisions += 1
            mark = len(engine.trail)
            stack.append((mark, var, False))
            engine.assign(var)
            ok = engine.propagate(mark)
            while not ok:
                while stack and stack[-1][2]:
                    engine.undo(stack.pop()[0])
                if not stack:
                    break
                mark, lit, _ = stack.pop()
                engine.undo(mark)
                backtracks += 1
                stack.append((mark, -lit, True))
                engine.assign(-lit)
                ok = engine.propagate(mark)
            if not ok:
                solved = True  # refuted
                break
    frac = len(engine.trail) / formula.num_vars if formula.num_vars else 0.0
    return ProbeStats(decisions, engine.propagations, backtracks, solved, frac)
