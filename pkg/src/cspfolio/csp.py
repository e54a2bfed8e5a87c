"""CSP data model, the native text format, normalization and a brute-force
solution counter.

Constraints are kept in one of three shapes:

``forbidden``
    binary extensional constraint given by its conflicting value pairs
``relation``
    binary comparison ``X op Y``
``bound``
    unary comparison ``X op k``

:func:`normalize` expands relations into forbidden pairs over the current
domains, so every encoder only ever deals with ``forbidden`` and ``bound``.
"""

from __future__ import annotations

import itertools
import operator
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "OPERATORS",
    "CspError",
    "CspSyntaxError",
    "LimitExceeded",
    "Variable",
    "Constraint",
    "CspInstance",
    "forbidden",
    "relation",
    "bound",
    "parse_native",
    "render_native",
    "normalize",
    "is_solution",
    "count_solutions",
    "iter_solutions",
]

OPERATORS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "=": operator.eq,
    "!=": operator.ne,
}

_FLIPPED = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}


class CspError(ValueError):
    """Invalid CSP instance or unsupported input."""


class CspSyntaxError(CspError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LimitExceeded(RuntimeError):
    """Raised by the exhaustive counters when the work limit is passed."""


@dataclass(frozen=True)
class Variable:
    id: str
    domain: tuple[int, ...]

    def __post_init__(self):
        dom = tuple(sorted(set(int(v) for v in self.domain)))
        if not dom:
            raise CspError(f"variable {self.id!r} has an empty domain")
        object.__setattr__(self, "domain", dom)


@dataclass(frozen=True)
class Constraint:
    kind: str
    scope: tuple[str, ...]
    tuples: tuple[tuple[int, int], ...] = ()
    relation: str | None = None
    bound: int | None = None

    def __post_init__(self):
        scope = tuple(self.scope)
        object.__setattr__(self, "scope", scope)
        if self.kind == "forbidden":
            if len(scope) != 2:
                raise CspError("forbidden constraint needs a binary scope")
            pairs = sorted(set((int(a), int(b)) for a, b in self.tuples))
            object.__setattr__(self, "tuples", tuple(pairs))
        elif self.kind == "relation":
            if len(scope) != 2 or self.relation not in OPERATORS:
                raise CspError(f"bad relation constraint {self.relation!r} on {scope}")
        elif self.kind == "bound":
            if len(scope) != 1 or self.relation not in OPERATORS or self.bound is None:
                raise CspError(f"bad bound constraint on {scope}")
        else:
            raise CspError(f"unknown constraint kind {self.kind!r}")
        if len(scope) == 2 and scope[0] == scope[1]:
            raise CspError(f"binary scope must be distinct, got {scope[0]!r} twice")

    def allows(self, a: int, b: int | None = None) -> bool:
        """Whether the value(s) satisfy this constraint."""
        if self.kind == "bound":
            return OPERATORS[self.relation](a, self.bound)
        if self.kind == "relation":
            return OPERATORS[self.relation](a, b)
        return (a, b) not in self._forbidden_set

    @property
    def _forbidden_set(self) -> frozenset:
        # cached on first use; the dataclass is frozen so bypass __setattr__
        try:
            return self.__dict__["_fs"]
        except KeyError:
            fs = frozenset(self.tuples)
            object.__setattr__(self, "_fs", fs)
            return fs


def forbidden(x: str, y: str, pairs: Iterable[tuple[int, int]]) -> Constraint:
    return Constraint("forbidden", (x, y), tuples=tuple(pairs))


def relation(x: str, op: str, y: str) -> Constraint:
    return Constraint("relation", (x, y), relation=op)


def bound(x: str, op: str, k: int) -> Constraint:
    return Constraint("bound", (x,), relation=op, bound=int(k))


@dataclass(frozen=True)
class CspInstance:
    """A CSP with finite integer domains and unary/binary constraints.

    ``dropped_tuples`` counts forbidden pairs discarded because they fell
    outside the domain product (XCSP input only).
    """

    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...] = ()
    name: str = ""
    dropped_tuples: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        seen = set()
        for var in self.variables:
            if var.id in seen:
                raise CspError(f"variable {var.id!r} declared twice")
            seen.add(var.id)
        for con in self.constraints:
            for vid in con.scope:
                if vid not in seen:
                    raise CspError(f"constraint references undeclared variable {vid!r}")

    @classmethod
    def build(cls, domains: Mapping[str, Iterable[int]], constraints=(), name=""):
        """Convenience constructor from an ordered ``{id: values}`` mapping."""
        return cls(tuple(Variable(k, tuple(v)) for k, v in domains.items()),
                   tuple(constraints), name)

    @property
    def domains(self) -> dict[str, tuple[int, ...]]:
        return {v.id: v.domain for v in self.variables}

    @property
    def is_normalized(self) -> bool:
        return all(c.kind != "relation" for c in self.constraints)


# ---------------------------------------------------------------------------
# native text format

_TOKEN = re.compile(r"[^\s,{}:]+|[{}:,]")


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CspSyntaxError(f"expected an integer, got {tok!r}", lineno) from None


def parse_native(text: str, name: str = "") -> CspInstance:
    """Parse the line-oriented native format.

    Directives::

        var X 1 3            # range 1..3
        var Y { 2 4 8 }      # explicit values
        forbid X Y : 1 2, 3 4
        rel X < Y            # <, <=, >, >=, =, !=
        bound X <= 2

    Variables must be declared before any constraint uses them.
    """
    variables: dict[str, Variable] = {}
    constraints: list[Constraint] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = _TOKEN.findall(line)
        head, rest = toks[0], toks[1:]

        def need_var(vid):
            if vid not in variables:
                raise CspSyntaxError(f"variable {vid!r} used before declaration", lineno)
            return variables[vid]

        try:
            if head == "var":
                if not rest:
                    raise CspSyntaxError("missing variable id", lineno)
                vid, spec = rest[0], rest[1:]
                if vid in variables:
                    raise CspSyntaxError(f"variable {vid!r} declared twice", lineno)
                if spec and spec[0] == "{":
                    if spec[-1] != "}":
                        raise CspSyntaxError("unterminated value set", lineno)
                    values = [_int(t, lineno) for t in spec[1:-1] if t != ","]
                elif len(spec) == 2:
                    lo, hi = _int(spec[0], lineno), _int(spec[1], lineno)
                    values = list(range(lo, hi + 1))
                else:
                    raise CspSyntaxError("var expects '<lo> <hi>' or '{ v1 v2 ... }'", lineno)
                if not values:
                    raise CspSyntaxError(f"variable {vid!r} has an empty domain", lineno)
                variables[vid] = Variable(vid, tuple(values))
            elif head == "forbid":
                if len(rest) < 3 or rest[2] != ":":
                    raise CspSyntaxError("forbid expects '<x> <y> : v w [, v w]*'", lineno)
                x, y = need_var(rest[0]), need_var(rest[1])
                if x.id == y.id:
                    raise CspSyntaxError("binary scope must be distinct", lineno)
                groups = " ".join(rest[3:]).split(",")
                pairs = []
                for group in groups:
                    vals = group.split()
                    if not vals:
                        continue
                    if len(vals) != 2:
                        raise CspSyntaxError(f"tuple {group.strip()!r} is not a pair", lineno)
                    a, b = _int(vals[0], lineno), _int(vals[1], lineno)
                    if a not in x.domain or b not in y.domain:
                        raise CspSyntaxError(
                            f"value outside domain in tuple ({a}, {b})", lineno)
                    pairs.append((a, b))
                constraints.append(forbidden(x.id, y.id, pairs))
            elif head == "rel":
                if len(rest) != 3 or rest[1] not in OPERATORS:
                    raise CspSyntaxError("rel expects '<x> <op> <y>'", lineno)
                x, y = need_var(rest[0]), need_var(rest[2])
                if x.id == y.id:
                    raise CspSyntaxError("binary scope must be distinct", lineno)
                constraints.append(relation(x.id, rest[1], y.id))
            elif head == "bound":
                if len(rest) != 3 or rest[1] not in OPERATORS:
                    raise CspSyntaxError("bound expects '<x> <op> <value>'", lineno)
                x = need_var(rest[0])
                constraints.append(bound(x.id, rest[1], _int(rest[2], lineno)))
            else:
                raise CspSyntaxError(f"unknown directive {head!r}", lineno)
        except CspSyntaxError:
            raise
        except CspError as exc:
            raise CspSyntaxError(str(exc), lineno) from None
    return CspInstance(tuple(variables.values()), tuple(constraints), name)


def render_native(instance: CspInstance) -> str:
    lines = []
    if instance.name:
        lines.append(f"# {instance.name}")
    for var in instance.variables:
        lo, hi = var.domain[0], var.domain[-1]
        if hi - lo + 1 == len(var.domain):
            lines.append(f"var {var.id} {lo} {hi}")
        else:
            lines.append(f"var {var.id} {{ {' '.join(map(str, var.domain))} }}")
    for con in instance.constraints:
        if con.kind == "forbidden":
            body = ", ".join(f"{a} {b}" for a, b in con.tuples)
            lines.append(f"forbid {con.scope[0]} {con.scope[1]} : {body}".rstrip())
        elif con.kind == "relation":
            lines.append(f"rel {con.scope[0]} {con.relation} {con.scope[1]}")
        else:
            lines.append(f"bound {con.scope[0]} {con.relation} {con.bound}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# normalization and enumeration


def flip_relation(op: str) -> str:
    """``a op b`` iff ``b flip(op) a``."""
    return _FLIPPED[op]


def normalize(instance: CspInstance) -> CspInstance:
    """Expand binary relations into forbidden pairs over the current domains.

    Bounds and already-extensional constraints are kept as they are, so the
    function is idempotent.
    """
    if instance.is_normalized:
        return instance
    doms = instance.domains
    out = []
    for con in instance.constraints:
        if con.kind == "relation":
            x, y = con.scope
            test = OPERATORS[con.relation]
            pairs = [(a, b) for a in doms[x] for b in doms[y] if not test(a, b)]
            out.append(forbidden(x, y, pairs))
        else:
            out.append(con)
    return CspInstance(instance.variables, tuple(out), instance.name, instance.dropped_tuples)


def is_solution(instance: CspInstance, assignment: Mapping[str, int]) -> bool:
    for var in instance.variables:
        if assignment.get(var.id) not in var.domain:
            return False
    for con in instance.constraints:
        vals = [assignment[v] for v in con.scope]
        if not con.allows(*vals):
            return False
    return True


def _space_size(instance: CspInstance) -> int:
    size = 1
    for var in instance.variables:
        size *= len(var.domain)
    return size


def iter_solutions(instance: CspInstance, limit: int = 1_000_000):
    """Yield every solution as a ``{var: value}`` dict, by plain enumeration."""
    if _space_size(instance) > limit:
        raise LimitExceeded(f"assignment space exceeds {limit}")
    ids = [v.id for v in instance.variables]
    for values in itertools.product(*(v.domain for v in instance.variables)):
        assignment = dict(zip(ids, values))
        if is_solution(instance, assignment):
            yield assignment


def count_solutions(instance: CspInstance, limit: int = 1_000_000) -> int:
    """Exact solution count by enumerating the full assignment space.

    Raises :class:`LimitExceeded` when the product of domain sizes is larger
    than ``limit``.
    """
    return sum(1 for _ in iter_solutions(instance, limit))


def index_domains(instance: CspInstance) -> dict[str, dict[int, int]]:
    """Map each variable's values to 1-based positions in ascending order."""
    return {v.id: {val: i for i, val in enumerate(v.domain, start=1)}
            for v in instance.variables}


def primal_neighbours(instance: CspInstance) -> dict[str, set[str]]:
    nbrs: dict[str, set[str]] = {v.id: set() for v in instance.variables}
    for con in instance.constraints:
        if len(con.scope) == 2:
            x, y = con.scope
            nbrs[x].add(y)
            nbrs[y].add(x)
    return nbrs


def constraint_pairs(con: Constraint, dx: Sequence[int], dy: Sequence[int]):
    """Forbidden pairs of a binary constraint restricted to ``dx`` x ``dy``."""
    if con.kind == "forbidden":
        sx, sy = set(dx), set(dy)
        return [(a, b) for a, b in con.tuples if a in sx and b in sy]
    test = OPERATORS[con.relation]
    return [(a, b) for a in dx for b in dy if not test(a, b)]
