"""Fixed-schema feature vectors for CNF formulas and CSP instances.

All features are counts or ratios of counts, so vectors are reproducible
bit for bit. Ratios with a zero denominator and statistics over empty
collections are reported as 0.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .cnf import CnfFormula, dpll_probe
from .csp import CspInstance, normalize, primal_neighbours
from .search import mac_probe

__all__ = [
    "StatSummary",
    "FeatureVector",
    "stat_summary",
    "sat_features",
    "csp_features",
    "SAT_SCHEMA",
    "CSP_SCHEMA",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 100

_STATS = ("mean", "cv", "min", "max", "entropy")


def _block(prefix: str) -> list[str]:
    return [f"{prefix}_{s}" for s in _STATS]


SAT_SCHEMA: tuple[str, ...] = tuple(
    ["num_vars", "num_clauses", "clause_var_ratio", "var_clause_ratio"]
    + _block("clause_len")
    + _block("var_degree")
    + ["pos_literal_frac"] + _block("clause_pos_frac")
    + ["horn_frac"] + _block("var_horn")
    + ["unit_frac", "binary_frac", "ternary_frac"]
    + ["probe_decisions", "probe_propagations", "probe_props_per_decision",
       "probe_backtracks", "probe_solved", "probe_assigned_frac"]
)

CSP_SCHEMA: tuple[str, ...] = tuple(
    ["num_vars", "num_constraints", "constraint_var_ratio", "domain_mean", "domain_max"]
    + _block("domain_size")
    + _block("tightness")
    + _block("degree")
    + ["probe_nodes", "probe_queue_pops", "probe_wipeouts", "probe_solved"]
)


@dataclass(frozen=True)
class StatSummary:
    mean: float
    cv: float
    min: float
    max: float
    entropy: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.mean, self.cv, self.min, self.max, self.entropy)


_ZERO = StatSummary(0.0, 0.0, 0.0, 0.0, 0.0)


def stat_summary(values: Sequence[float]) -> StatSummary:
    """Mean, coefficient of variation (population std / mean, 0 when the
    mean is 0), min, max and the Shannon entropy (nats) of the histogram of
    distinct values."""
    if len(values) == 0:
        raise ValueError("stat_summary needs at least one value")
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    cv = math.sqrt(var) / mean if mean != 0 else 0.0
    entropy = 0.0
    for count in Counter(values).values():
        p = count / n
        entropy -= p * math.log(p)
    return StatSummary(float(mean), float(cv), float(min(values)), float(max(values)),
                       entropy + 0.0)


def _summary(values) -> StatSummary:
    return stat_summary(values) if len(values) else _ZERO


def _ratio(a: float, b: float) -> float:
    return a / b if b else 0.0


@dataclass(frozen=True)
class FeatureVector:
    schema: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.schema) != len(self.values):
            raise ValueError("schema and values differ in length")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("feature values must be finite")

    def __getitem__(self, name: str) -> float:
        return self.values[self.schema.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.schema, self.values))


def sat_features(formula: CnfFormula, probe_node_budget: int = DEFAULT_BUDGET) -> FeatureVector:
    n, clauses = formula.num_vars, formula.clauses
    m = len(clauses)
    lengths = [len(c) for c in clauses]
    degree = [0] * (n + 1)
    horn_degree = [0] * (n + 1)
    n_pos = n_lits = n_horn = 0
    pos_frac = []
    for clause in clauses:
        pos = sum(1 for lit in clause if lit > 0)
        n_pos += pos
        n_lits += len(clause)
        pos_frac.append(_ratio(pos, len(clause)))
        horn = pos <= 1
        n_horn += horn
        for lit in clause:
            degree[abs(lit)] += 1
            if horn:
                horn_degree[abs(lit)] += 1

    values: list[float] = [n, m, _ratio(m, n), _ratio(n, m)]
    values += _summary(lengths).as_tuple()
    values += _summary(degree[1:]).as_tuple()
    values += [_ratio(n_pos, n_lits), *_summary(pos_frac).as_tuple()]
    values += [_ratio(n_horn, m), *_summary(horn_degree[1:]).as_tuple()]
    values += [_ratio(lengths.count(k), m) for k in (1, 2, 3)]

    probe = dpll_probe(formula, probe_node_budget)
    values += [probe.decisions, probe.propagations,
               _ratio(probe.propagations, probe.decisions),
               probe.backtracks, float(probe.solved), probe.assigned_fraction]
    return FeatureVector(SAT_SCHEMA, tuple(float(v) for v in values))


def csp_features(instance: CspInstance, probe_node_budget: int = DEFAULT_BUDGET) -> FeatureVector:
    instance = normalize(instance)
    doms = instance.domains
    sizes = [len(d) for d in doms.values()]
    n, c = len(sizes), len(instance.constraints)

    tightness = []
    for con in instance.constraints:
        if con.kind == "forbidden":
            x, y = con.scope
            tightness.append(len(con.tuples) / (len(doms[x]) * len(doms[y])))
        else:
            dom = doms[con.scope[0]]
            excluded = sum(1 for v in dom if not con.allows(v))
            tightness.append(excluded / len(dom))
    degrees = [len(s) for s in primal_neighbours(instance).values()]

    values: list[float] = [n, c, _ratio(c, n), _ratio(sum(sizes), n), max(sizes, default=0)]
    values += _summary(sizes).as_tuple()
    values += _summary(tightness).as_tuple()
    values += _summary(degrees).as_tuple()

    probe = mac_probe(instance, probe_node_budget)
    values += [probe.nodes, probe.queue_pops, probe.wipeouts, float(probe.solved)]
    return FeatureVector(CSP_SCHEMA, tuple(float(v) for v in values))
