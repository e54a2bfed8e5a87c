"""Seeded generators for the instance families used in experiments."""

from __future__ import annotations

import itertools
import math
import random
from typing import Any, Mapping, Sequence

from .csp import CspError, CspInstance, Variable, forbidden, relation

__all__ = ["gen_random_binary", "gen_coloring", "gen_pigeonhole", "gen_family", "FAMILIES"]

FAMILIES = ("coloring", "pigeonhole", "random")


def gen_random_binary(n: int, d: int, p1: float, p2: float, seed: int) -> CspInstance:
    """Model-B style random binary CSP.

    Each of the ``n(n-1)/2`` variable pairs is constrained with probability
    ``p1``; a constrained pair forbids ``ceil(p2 * d**2)`` distinct value
    pairs drawn uniformly.
    """
    if n < 2 or d < 1:
        raise CspError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
    if not (0 <= p1 <= 1 and 0 <= p2 <= 1):
        raise CspError("density and tightness must lie in [0, 1]")
    rng = random.Random(seed)
    names = [f"X{i}" for i in range(1, n + 1)]
    # round first so that e.g. 0.7 * 10 does not become 8 tuples
    n_forbid = math.ceil(round(p2 * d * d, 9))
    space = list(itertools.product(range(1, d + 1), repeat=2))
    constraints = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p1:
            pairs = rng.sample(space, n_forbid)
            constraints.append(forbidden(names[i], names[j], pairs))
    variables = [Variable(v, tuple(range(1, d + 1))) for v in names]
    return CspInstance(tuple(variables), tuple(constraints),
                       f"random-n{n}-d{d}-p{p1:g}-q{p2:g}-s{seed}")


def gen_coloring(edges: Sequence[tuple[int, int]], k: int, n: int | None = None,
                 name: str = "") -> CspInstance:
    """Graph k-colouring with one ``!=`` constraint per edge."""
    if k < 1:
        raise CspError(f"need at least one colour, got k={k}")
    vertices = set(itertools.chain.from_iterable(edges))
    if n is None:
        n = max(vertices) + 1 if vertices else 0
    if n < 1 or any(v < 0 or v >= n for v in vertices):
        raise CspError("edge endpoints must lie in 0..n-1")
    seen = set()
    constraints = []
    for u, v in edges:
        if u == v:
            raise CspError(f"self-loop on vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        constraints.append(relation(f"v{key[0]}", "!=", f"v{key[1]}"))
    variables = [Variable(f"v{i}", tuple(range(1, k + 1))) for i in range(n)]
    return CspInstance(tuple(variables), tuple(constraints), name or f"coloring-n{n}-k{k}")


def gen_pigeonhole(p: int, h: int) -> CspInstance:
    """``p`` pigeons into ``h`` holes, pairwise distinct."""
    if p <= 0 or h <= 0:
        raise CspError(f"pigeonhole needs p > 0 and h > 0, got p={p}, h={h}")
    names = [f"P{i}" for i in range(1, p + 1)]
    variables = [Variable(v, tuple(range(1, h + 1))) for v in names]
    constraints = [relation(a, "!=", b) for a, b in itertools.combinations(names, 2)]
    return CspInstance(tuple(variables), tuple(constraints), f"pigeonhole-p{p}-h{h}")


def gen_family(family: str, params: Mapping[str, Any], seed: int = 0) -> CspInstance:
    """Dispatch to a family generator.

    ``coloring`` takes either ``edges`` (list of vertex pairs) or ``n`` and
    ``edge_prob`` for a seeded G(n, p) graph, plus ``k``. ``pigeonhole``
    takes ``p`` and ``h``. ``random`` takes ``n``, ``d``, ``p1``, ``p2``.
    """
    if family == "pigeonhole":
        return gen_pigeonhole(int(params["p"]), int(params["h"]))
    if family == "coloring":
        k = int(params["k"])
        if "edges" in params:
            return gen_coloring([tuple(e) for e in params["edges"]], k, params.get("n"))
        n = int(params["n"])
        prob = float(params["edge_prob"])
        rng = random.Random(seed)
        edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < prob]
        return gen_coloring(edges, k, n, name=f"coloring-n{n}-k{k}-e{prob:g}-s{seed}")
    if family == "random":
        return gen_random_binary(int(params["n"]), int(params["d"]),
                                 float(params["p1"]), float(params["p2"]), seed)
    raise CspError(f"unknown family {family!r}; expected one of {FAMILIES}")
