"""Bounded backtracking search with AC-3 propagation (MAC), used for the
dynamic CSP features."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .csp import CspInstance, OPERATORS, normalize

__all__ = ["MacStats", "mac_probe"]


@dataclass(frozen=True)
class MacStats:
    nodes: int = 0
    queue_pops: int = 0
    wipeouts: int = 0
    solved: bool = False


class _Budget(Exception):
    pass


def mac_probe(instance: CspInstance, budget: int) -> MacStats:
    """Search at most ``budget`` nodes; variables in declaration order,
    values ascending.

    ``solved`` is true when a solution was found or the whole tree was
    refuted inside the budget. ``budget <= 0`` returns all zeros.
    """
    if budget <= 0:
        return MacStats()
    instance = normalize(instance)
    ids = [v.id for v in instance.variables]
    domains = {v.id: set(v.domain) for v in instance.variables}

    # unary bounds are node consistency, applied once up front
    for con in instance.constraints:
        if con.kind == "bound":
            test = OPERATORS[con.relation]
            vid = con.scope[0]
            domains[vid] = {a for a in domains[vid] if test(a, con.bound)}

    # arcs[(x, y)] = forbidden pairs oriented as (value of x, value of y)
    arcs: dict[tuple[str, str], set] = {}
    for con in instance.constraints:
        if con.kind != "forbidden":
            continue
        x, y = con.scope
        arcs.setdefault((x, y), set()).update(con.tuples)
        arcs.setdefault((y, x), set()).update((b, a) for a, b in con.tuples)
    incoming: dict[str, list[tuple[str, str]]] = {vid: [] for vid in ids}
    for x, y in arcs:
        incoming[y].append((x, y))

    stats = {"nodes": 0, "pops": 0, "wipeouts": 0}

    def ac3(doms, queue) -> bool:
        queued = set(queue)
        queue = deque(queue)
        while queue:
            arc = queue.popleft()
            queued.discard(arc)
            stats["pops"] += 1
            x, y = arc
            bad = arcs[arc]
            dy = doms[y]
            keep = {a for a in doms[x] if any((a, b) not in bad for b in dy)}
            if len(keep) != len(doms[x]):
                doms[x] = keep
                if not keep:
                    stats["wipeouts"] += 1
                    return False
                for nxt in incoming[x]:
                    if nxt[0] != y and nxt not in queued:
                        queue.append(nxt)
                        queued.add(nxt)
        return True

    def search(doms, depth) -> bool:
        if depth == len(ids):
            return True
        vid = ids[depth]
        for value in sorted(doms[vid]):
            if stats["nodes"] >= budget:
                raise _Budget
            stats["nodes"] += 1
            child = {k: set(v) for k, v in doms.items()}
            child[vid] = {value}
            if ac3(child, incoming[vid]) and search(child, depth + 1):
                return True
        return False

    solved = False
    if any(not d for d in domains.values()):
        stats["wipeouts"] += 1
        solved = True
    else:
        try:
            if ac3(domains, sorted(arcs)):
                search(domains, 0)
            solved = True
        except _Budget:
            solved = False
    return MacStats(stats["nodes"], stats["pops"], stats["wipeouts"], solved)
