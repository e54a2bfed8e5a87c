"""Direct, support and order encodings of binary CSPs into CNF.

Variable numbering is fixed: CSP variables in declaration order, values
ascending. Domain clauses (ALO/AMO for direct and support, the chain
clauses for order) are emitted first, then constraint clauses in
constraint order, so the ``include_domains=False`` variant is always a
sub-list of the full encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .cnf import CnfFormula
from .csp import OPERATORS, CspInstance, normalize

__all__ = [
    "EncodingConfig",
    "ALL_CONFIGS",
    "DecodeError",
    "encode",
    "encode_direct",
    "encode_support",
    "encode_order",
    "decode_model",
]

ENCODINGS = ("direct", "support", "order")


@dataclass(frozen=True)
class EncodingConfig:
    encoding: str
    include_domains: bool = True

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}; expected one of {ENCODINGS}")

    @property
    def name(self) -> str:
        return self.encoding if self.include_domains else f"{self.encoding}-nd"

    @classmethod
    def from_name(cls, name: str) -> "EncodingConfig":
        if name.endswith("-nd"):
            return cls(name[:-3], False)
        return cls(name, True)


ALL_CONFIGS = tuple(EncodingConfig(e, nd) for e in ENCODINGS for nd in (True, False))


class DecodeError(ValueError):
    """The model does not describe a CSP assignment (encoder or solver bug)."""


class _ClauseSink:
    """Collects clauses, folding in the boolean constants ``True``/``False``.

    A clause holding a true constant is dropped, false constants are removed,
    repeated literals are merged and tautologies are skipped. Nothing else is
    simplified.
    """

    def __init__(self):
        self.clauses: list[tuple[int, ...]] = []

    def add(self, lits: Iterable):
        out: list[int] = []
        for lit in lits:
            if lit is True:
                return
            if lit is False:
                continue
            if -lit in out:
                return
            if lit not in out:
                out.append(lit)
        self.clauses.append(tuple(out))


def _value_vars(instance: CspInstance, kind: str):
    var_map = {}
    index = {}
    nxt = 1
    for var in instance.variables:
        values = var.domain if kind == "eq" else var.domain[:-1]
        for val in values:
            var_map[(var.id, kind, val)] = nxt
            index[(var.id, val)] = nxt
            nxt += 1
    return var_map, index, nxt - 1


def _formula(instance, sink, var_map, num_vars, encoding, include_domains):
    return CnfFormula(num_vars, tuple(sink.clauses), var_map, encoding, include_domains,
                      dict(instance.domains))


def _allowed(var, con) -> list[bool]:
    test = OPERATORS[con.relation]
    return [test(val, con.bound) for val in var.domain]


def _eq_domain_clauses(instance, sink, index, include_domains):
    if include_domains:
        for var in instance.variables:
            lits = [index[(var.id, v)] for v in var.domain]
            sink.add(lits)
            for i, a in enumerate(lits):
                for b in lits[i + 1:]:
                    sink.add((-a, -b))


def _eq_bound(instance, sink, index, con):
    var = next(v for v in instance.variables if v.id == con.scope[0])
    for val, ok in zip(var.domain, _allowed(var, con)):
        if not ok:
            sink.add((-index[(var.id, val)],))


def encode_direct(instance: CspInstance, include_domains: bool = True) -> CnfFormula:
    """Direct encoding: one variable per value, one conflict clause per
    forbidden pair."""
    instance = normalize(instance)
    var_map, index, n = _value_vars(instance, "eq")
    sink = _ClauseSink()
    _eq_domain_clauses(instance, sink, index, include_domains)
    for con in instance.constraints:
        if con.kind == "bound":
            _eq_bound(instance, sink, index, con)
            continue
        x, y = con.scope
        for a, b in con.tuples:
            sink.add((-index[(x, a)], -index[(y, b)]))
    return _formula(instance, sink, var_map, n, "direct", include_domains)


def encode_support(instance: CspInstance, include_domains: bool = True) -> CnfFormula:
    """Support encoding: for every value of either endpoint of a constraint,
    the value implies one of its supports on the other side."""
    instance = normalize(instance)
    doms = instance.domains
    var_map, index, n = _value_vars(instance, "eq")
    sink = _ClauseSink()
    _eq_domain_clauses(instance, sink, index, include_domains)
    for con in instance.constraints:
        if con.kind == "bound":
            _eq_bound(instance, sink, index, con)
            continue
        x, y = con.scope
        bad = set(con.tuples)
        for a in doms[x]:
            sink.add([-index[(x, a)]] + [index[(y, b)] for b in doms[y] if (a, b) not in bad])
        for b in doms[y]:
            sink.add([-index[(y, b)]] + [index[(x, a)] for a in doms[x] if (a, b) not in bad])
    return _formula(instance, sink, var_map, n, "support", include_domains)


def encode_order(instance: CspInstance, include_domains: bool = True) -> CnfFormula:
    """Order encoding over threshold variables ``X <= v``.

    ``X <= max(D)`` is the constant true and ``X <= (value below min(D))``
    the constant false; both are folded away when clauses are emitted.
    """
    instance = normalize(instance)
    var_map, index, n = _value_vars(instance, "leq")
    positions = {v.id: v.domain for v in instance.variables}

    def leq(vid: str, i: int):
        # literal for "X takes one of its first i values"
        dom = positions[vid]
        if i <= 0:
            return False
        if i >= len(dom):
            return True
        return index[(vid, dom[i - 1])]

    def neg(lit):
        return (not lit) if isinstance(lit, bool) else -lit

    sink = _ClauseSink()
    if include_domains:
        for var in instance.variables:
            for i in range(1, len(var.domain) - 1):
                sink.add((neg(leq(var.id, i)), leq(var.id, i + 1)))
    for con in instance.constraints:
        if con.kind == "bound":
            vid = con.scope[0]
            var = next(v for v in instance.variables if v.id == vid)
            allowed = [i for i, ok in enumerate(_allowed(var, con), start=1) if ok]
            if not allowed:
                sink.add(())
                continue
            lo, hi = allowed[0], allowed[-1]
            sink.add((leq(vid, hi),))
            sink.add((neg(leq(vid, lo - 1)),))
            for i in range(lo + 1, hi):
                if i not in allowed:
                    sink.add((neg(leq(vid, i)), leq(vid, i - 1)))
            continue
        x, y = con.scope
        ix = {v: i for i, v in enumerate(positions[x], start=1)}
        iy = {v: i for i, v in enumerate(positions[y], start=1)}
        for a, b in con.tuples:
            i, j = ix[a], iy[b]
            sink.add((neg(leq(x, i)), leq(x, i - 1), neg(leq(y, j)), leq(y, j - 1)))
    return _formula(instance, sink, var_map, n, "order", include_domains)


_ENCODERS = {"direct": encode_direct, "support": encode_support, "order": encode_order}


def encode(instance: CspInstance, config: EncodingConfig | str) -> CnfFormula:
    if isinstance(config, str):
        config = EncodingConfig.from_name(config)
    return _ENCODERS[config.encoding](instance, config.include_domains)


def _truth(model) -> set[int]:
    if isinstance(model, Mapping):
        return {int(v) for v, val in model.items() if val}
    return {int(lit) for lit in model if int(lit) > 0}


def decode_model(formula: CnfFormula, model) -> dict[str, int]:
    """Translate a SAT model back into a CSP assignment.

    ``model`` is either a ``{sat_var: bool}`` mapping or an iterable of
    literals / true variable indices (missing variables count as false).
    """
    if formula.encoding not in ENCODINGS:
        raise DecodeError("formula carries no encoding metadata")
    true = _truth(model)
    assignment = {}
    for vid, dom in formula.domains.items():
        if formula.encoding == "order":
            value = dom[-1]
            for val in dom[:-1]:
                if formula.var_map[(vid, "leq", val)] in true:
                    value = val
                    break
            assignment[vid] = value
        else:
            chosen = [val for val in dom if formula.var_map[(vid, "eq", val)] in true]
            if len(chosen) != 1:
                raise DecodeError(
                    f"variable {vid!r} has {len(chosen)} true value literals, expected 1")
            assignment[vid] = chosen[0]
    return assignment
