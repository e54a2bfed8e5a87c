"""Desk-scale synthetic experiments: a three-family instance corpus and
simulated solver runtimes with one specialist solver per family."""

from __future__ import annotations

import random
from pathlib import Path

import numpy as np

from .csp import CspInstance, render_native
from .generators import gen_family
from .portfolio import RuntimeMatrix, derive_seed
from .tables import write_manifest

FAMILY_SOLVERS = {"coloring": "solver_a", "pigeonhole": "solver_b", "random": "solver_c"}


def family_params(family: str, rng: random.Random) -> dict:
    if family == "pigeonhole":
        p = rng.randint(4, 9)
        return {"p": p, "h": rng.randint(p - 2, p + 1)}
    if family == "coloring":
        # sparse graphs with few colours
        return {"n": rng.randint(10, 20), "edge_prob": round(rng.uniform(0.1, 0.3), 3),
                "k": rng.randint(3, 4)}
    if family == "random":
        # denser constraint graphs over larger domains, tightness near the
        # usual model-B benchmark settings
        return {"n": rng.randint(6, 12), "d": rng.randint(5, 10),
                "p1": round(rng.uniform(0.3, 0.7), 3), "p2": round(rng.uniform(0.25, 0.5), 3)}
    raise ValueError(f"unknown family {family!r}")


def make_corpus(per_family: int, seed: int,
                families=("coloring", "pigeonhole", "random")) -> list[tuple[str, str, CspInstance]]:
    """``per_family`` instances of each family as ``(id, family, instance)``."""
    corpus = []
    for fam in families:
        rng = random.Random(derive_seed(seed, "corpus", fam))
        for i in range(per_family):
            params = family_params(fam, rng)
            inst = gen_family(fam, params, seed=rng.randrange(2**31))
            corpus.append((f"{fam}-{i:03d}", fam, inst))
    return corpus


def simulate_runtimes(instances, families, seed: int, timeout: float = 100.0,
                      fail_rate: float = 0.25) -> RuntimeMatrix:
    """One specialist per family: 1-10 s on its own family; on the others
    20-90 s, or a timeout with probability ``fail_rate``."""
    rng = np.random.default_rng(derive_seed(seed, "runtimes"))
    solvers = tuple(sorted(FAMILY_SOLVERS.values()))
    grid = np.empty((len(instances), len(solvers)))
    for i, fam in enumerate(families):
        for j, sid in enumerate(solvers):
            if FAMILY_SOLVERS.get(fam) == sid:
                grid[i, j] = rng.uniform(1.0, 10.0)
            elif rng.random() < fail_rate:
                grid[i, j] = timeout
            else:
                grid[i, j] = rng.uniform(20.0, 90.0)
    return RuntimeMatrix(tuple(instances), solvers, grid, timeout)


def write_corpus(directory, corpus) -> Path:
    """Write native instance files plus ``manifest.csv``; returns the
    manifest path."""
    directory = Path(directory)
    (directory / "instances").mkdir(parents=True, exist_ok=True)
    rows = []
    for iid, fam, inst in corpus:
        rel = Path("instances") / f"{iid}.csp"
        (directory / rel).write_text(render_native(inst))
        rows.append((rel, "native", fam))
    manifest = directory / "manifest.csv"
    write_manifest(manifest, rows)
    return manifest
