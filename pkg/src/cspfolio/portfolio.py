"""Clustering-based algorithm selection (ISAC style) and its baselines.

Training normalizes every feature to [-1, 1], clusters the training
instances with seeded k-means (grown one cluster at a time while every
cluster keeps at least ``min_cluster_size`` members) and gives each cluster
the solver with the lowest penalized average runtime on it. A new instance
goes to the solver of its nearest centroid.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "RuntimeMatrix",
    "FeatureMatrix",
    "Bounds",
    "Clustering",
    "PortfolioConfig",
    "PortfolioModel",
    "EvaluationReport",
    "derive_seed",
    "par_score",
    "normalize_fit",
    "normalize_apply",
    "cluster",
    "train",
    "select",
    "vbs",
    "best_single",
    "random_cluster_baseline",
    "stratified_folds",
    "cross_validate",
]


def derive_seed(seed: int, *keys) -> int:
    """Child seed for a named component; stable across runs and platforms."""
    words = [int(seed) & 0xFFFFFFFF]
    for key in keys:
        if isinstance(key, int):
            words.append(key & 0xFFFFFFFF)
        else:
            words.append(zlib.crc32(str(key).encode()))
    return int(np.random.SeedSequence(words).generate_state(1)[0])


@dataclass(frozen=True)
class RuntimeMatrix:
    """Runtimes in seconds, instances x solvers. Cells at or above the
    timeout are stored as exactly the timeout."""

    instances: tuple[str, ...]
    solvers: tuple[str, ...]
    runtimes: np.ndarray
    timeout: float

    def __post_init__(self):
        rt = np.asarray(self.runtimes, dtype=float)
        if rt.ndim != 2 or rt.shape != (len(self.instances), len(self.solvers)):
            raise ValueError(f"runtime grid shape {rt.shape} does not match "
                             f"{len(self.instances)} instances x {len(self.solvers)} solvers")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if np.any(~np.isfinite(rt)) or np.any(rt < 0):
            raise ValueError("runtimes must be finite and non-negative")
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "solvers", tuple(self.solvers))
        object.__setattr__(self, "runtimes", np.minimum(rt, self.timeout))

    def take(self, rows) -> "RuntimeMatrix":
        rows = np.asarray(rows, dtype=int)
        return RuntimeMatrix(tuple(self.instances[i] for i in rows), self.solvers,
                             self.runtimes[rows], self.timeout)

    def reorder(self, instances: Sequence[str]) -> "RuntimeMatrix":
        pos = {iid: i for i, iid in enumerate(self.instances)}
        return self.take([pos[i] for i in instances])


@dataclass(frozen=True)
class FeatureMatrix:
    instances: tuple[str, ...]
    schema: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(len(self.instances), len(self.schema))
        if not np.all(np.isfinite(vals)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "values", vals)

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=int)
        return FeatureMatrix(tuple(self.instances[i] for i in rows), self.schema,
                             self.values[rows])

    def reorder(self, instances: Sequence[str]) -> "FeatureMatrix":
        pos = {iid: i for i, iid in enumerate(self.instances)}
        return self.take([pos[i] for i in instances])


def par_score(runtimes, timeout: float, f: float = 10.0) -> float:
    """Penalized average runtime: a run at or past ``timeout`` counts as
    ``f * timeout``."""
    rt = np.asarray(runtimes, dtype=float)
    if rt.size == 0:
        raise ValueError("par_score of an empty set of runs")
    if f < 1:
        raise ValueError("penalty factor must be >= 1")
    return float(np.mean(np.where(rt < timeout, rt, f * timeout)))


def _solved(runtimes, timeout) -> int:
    return int(np.sum(np.asarray(runtimes) < timeout))


# ---------------------------------------------------------------------------
# normalization


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray


def normalize_fit(rows) -> Bounds:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0:
        raise ValueError("normalize_fit needs at least one row")
    return Bounds(rows.min(axis=0), rows.max(axis=0))


def normalize_apply(bounds: Bounds, rows) -> np.ndarray:
    """Affine map of ``[lower, upper]`` onto ``[-1, 1]`` per feature.

    Constant features map to 0 and values outside the fitted range are
    clamped.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.shape[-1] != bounds.lower.shape[0]:
        raise ValueError(f"expected {bounds.lower.shape[0]} features, got {rows.shape[-1]}")
    span = bounds.upper - bounds.lower
    safe = np.where(span > 0, span, 1.0)
    out = 2.0 * (rows - bounds.lower) / safe - 1.0
    out = np.where(span > 0, out, 0.0)
    return np.clip(out, -1.0, 1.0)


# ---------------------------------------------------------------------------
# clustering


@dataclass(frozen=True)
class Clustering:
    k: int
    centroids: np.ndarray
    assignment: np.ndarray


def _nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)  # first minimum wins ties


def _seed_centers(points, k, rng) -> np.ndarray:
    n = len(points)
    centers = [points[rng.integers(n)]]
    for _ in range(1, k):
        d2 = ((points[:, None, :] - np.array(centers)[None]) ** 2).sum(axis=2).min(axis=1)
        total = d2.sum()
        idx = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centers.append(points[idx])
    return np.array(centers, dtype=float)


def _kmeans(points, k, rng, n_init=10, max_iter=100):
    best = None
    for _ in range(n_init):
        centers = _seed_centers(points, k, rng)
        for _ in range(max_iter):
            labels = _nearest(points, centers)
            moved = centers.copy()
            for j in range(k):
                members = points[labels == j]
                if len(members):
                    moved[j] = members.mean(axis=0)
            if np.array_equal(moved, centers):
                break
            centers = moved
        labels = _nearest(points, centers)
        inertia = float(((points - centers[labels]) ** 2).sum())
        if best is None or inertia < best[0]:
            best = (inertia, centers, labels)
    return best[1], best[2]


def cluster(points, min_cluster_size: int, max_k: int, seed: int) -> Clustering:
    """Grow k from 1 while the k+1 split keeps every cluster at least
    ``min_cluster_size`` strong and ``k+1 <= max_k``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    if n == 0:
        raise ValueError("cannot cluster zero points")
    if min_cluster_size < 1 or max_k < 1:
        raise ValueError("min_cluster_size and max_k must be >= 1")
    rng = np.random.default_rng(seed)
    centroids = points.mean(axis=0, keepdims=True)
    labels = np.zeros(n, dtype=int)
    k = 1
    while k + 1 <= max_k and k + 1 <= n and n >= min_cluster_size:
        cand_centroids, cand_labels = _kmeans(points, k + 1, rng)
        sizes = np.bincount(cand_labels, minlength=k + 1)
        if sizes.min() < min_cluster_size:
            break
        k, centroids, labels = k + 1, cand_centroids, cand_labels
    return Clustering(k, centroids, labels)


# ---------------------------------------------------------------------------
# training and selection


@dataclass(frozen=True)
class PortfolioConfig:
    min_cluster_size: int = 10
    max_k: int = 10
    par: float = 10.0
    seed: int = 0


def _best_column(runtimes: np.ndarray, solvers: Sequence[str], timeout: float, f: float) -> int:
    """Lowest PAR, then most solved, then smallest solver id."""
    keys = []
    for j, sid in enumerate(solvers):
        col = runtimes[:, j]
        keys.append((par_score(col, timeout, f), -_solved(col, timeout), sid, j))
    return min(keys)[3]


@dataclass
class PortfolioModel:
    schema: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    centroids: np.ndarray
    cluster_solver: list[str]
    config: PortfolioConfig = field(default_factory=PortfolioConfig)

    @property
    def k(self) -> int:
        return len(self.cluster_solver)

    @property
    def bounds(self) -> Bounds:
        return Bounds(self.lower, self.upper)

    def to_json(self) -> str:
        return json.dumps({
            "schema": list(self.schema),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "k": self.k,
            "centroids": self.centroids.tolist(),
            "cluster_solver": list(self.cluster_solver),
            "config": asdict(self.config),
            "seed": self.config.seed,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PortfolioModel":
        data = json.loads(text)
        model = cls(tuple(data["schema"]), np.array(data["lower"], dtype=float),
                    np.array(data["upper"], dtype=float),
                    np.array(data["centroids"], dtype=float).reshape(data["k"], -1),
                    list(data["cluster_solver"]), PortfolioConfig(**data["config"]))
        if model.k != data["k"]:
            raise ValueError("model file: k does not match cluster_solver")
        return model


def train(features: FeatureMatrix, runtimes: RuntimeMatrix,
          config: PortfolioConfig = PortfolioConfig()) -> PortfolioModel:
    if len(features.instances) == 0:
        raise ValueError("empty training set")
    if set(features.instances) != set(runtimes.instances):
        raise ValueError("features and runtimes cover different instances")
    runtimes = runtimes.reorder(features.instances)
    bounds = normalize_fit(features.values)
    points = normalize_apply(bounds, features.values)
    clustering = cluster(points, config.min_cluster_size, config.max_k,
                         derive_seed(config.seed, "cluster"))
    cluster_solver = []
    for j in range(clustering.k):
        rows = runtimes.runtimes[clustering.assignment == j]
        best = _best_column(rows, runtimes.solvers, runtimes.timeout, config.par)
        cluster_solver.append(runtimes.solvers[best])
    return PortfolioModel(features.schema, bounds.lower, bounds.upper,
                          clustering.centroids, cluster_solver, config)


def select(model: PortfolioModel, row, schema: Sequence[str] | None = None) -> str:
    if schema is not None and tuple(schema) != tuple(model.schema):
        raise ValueError("feature schema does not match the model")
    point = normalize_apply(model.bounds, np.asarray(row, dtype=float))
    cid = int(_nearest(point[None, :], model.centroids)[0])
    return model.cluster_solver[cid]


# ---------------------------------------------------------------------------
# baselines


def vbs(matrix: RuntimeMatrix, f: float = 10.0) -> tuple[float, int]:
    best = matrix.runtimes.min(axis=1)
    return par_score(best, matrix.timeout, f), _solved(best, matrix.timeout)


def best_single(matrix: RuntimeMatrix, f: float = 10.0) -> tuple[str, float, int]:
    j = _best_column(matrix.runtimes, matrix.solvers, matrix.timeout, f)
    col = matrix.runtimes[:, j]
    return matrix.solvers[j], par_score(col, matrix.timeout, f), _solved(col, matrix.timeout)


def _random_cluster_runtimes(matrix: RuntimeMatrix, k: int, f: float, seed: int) -> np.ndarray:
    n = len(matrix.instances)
    if k < 1:
        raise ValueError("k must be >= 1")
    order = np.random.default_rng(seed).permutation(n)
    groups = np.empty(n, dtype=int)
    groups[order] = np.arange(n) % k
    chosen = np.empty(n)
    for g in range(min(k, n)):
        rows = groups == g
        j = _best_column(matrix.runtimes[rows], matrix.solvers, matrix.timeout, f)
        chosen[rows] = matrix.runtimes[rows, j]
    return chosen


def random_cluster_baseline(features: FeatureMatrix | None, runtimes: RuntimeMatrix, k: int,
                            f: float = 10.0, seed: int = 0) -> tuple[float, int]:
    """Split the instances uniformly at random into ``k`` near-equal groups
    and give each group its best solver *on these same instances*.

    ``features`` is accepted for interface symmetry and ignored: the groups
    do not depend on them.
    """
    chosen = _random_cluster_runtimes(runtimes, k, f, seed)
    return par_score(chosen, runtimes.timeout, f), _solved(chosen, runtimes.timeout)


# ---------------------------------------------------------------------------
# cross-validation


def stratified_folds(families: Sequence[str], folds: int, seed: int):
    """Deal each family's shuffled members round-robin over the folds.

    The dealing position carries over from one family to the next, so
    families smaller than ``folds`` still spread across folds. Returns the
    fold index per instance and the list of such small families.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(families), dtype=int)
    small = []
    offset = 0
    for fam in sorted(set(families)):
        members = [i for i, f in enumerate(families) if f == fam]
        if len(members) < folds:
            small.append(fam)
        members = [members[i] for i in rng.permutation(len(members))]
        for pos, idx in enumerate(members):
            fold_of[idx] = (offset + pos) % folds
        offset = (offset + len(members)) % folds
    return fold_of, small


@dataclass
class EvaluationReport:
    rows: dict[str, tuple[float, int]]
    n_instances: int
    timeout: float
    par: float
    folds: int
    seed: int
    config: PortfolioConfig
    clusters_per_fold: list[int]
    best_single_per_fold: list[str]
    notes: list[str]

    def par_of(self, approach: str) -> float:
        return self.rows[approach][0]

    def solved_of(self, approach: str) -> int:
        return self.rows[approach][1]

    @property
    def gap_closed(self) -> float:
        """Fraction of the Best Single to VBS PAR gap recovered by the
        portfolio (1.0 when there is no gap)."""
        gap = self.par_of("Best Single") - self.par_of("VBS")
        if gap <= 0:
            return 1.0
        return (self.par_of("Best Single") - self.par_of("Portfolio")) / gap

    def render(self) -> str:
        head = f"PAR{self.par:g}"
        lines = [f"{'Approach':<16}{head:>14}{'Solved':>10}"]
        for name in ("VBS", "Portfolio", "Random Cluster", "Best Single"):
            par, solved = self.rows[name]
            lines.append(f"{name:<16}{par:>14.2f}{solved:>10d}")
        lines.append("")
        lines.append(f"instances: {self.n_instances}  folds: {self.folds}  "
                     f"timeout: {self.timeout:g}  seed: {self.seed}")
        lines.append(f"config: min_cluster_size={self.config.min_cluster_size} "
                     f"max_k={self.config.max_k} par={self.config.par:g}")
        lines.append("clusters per fold: " + " ".join(map(str, self.clusters_per_fold)))
        lines.append("best single per fold: " + " ".join(self.best_single_per_fold))
        lines.append(f"gap closed: {self.gap_closed:.4f}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines) + "\n"


def cross_validate(features: FeatureMatrix, runtimes: RuntimeMatrix, families: Sequence[str],
                   folds: int = 10, config: PortfolioConfig = PortfolioConfig(),
                   overhead: Sequence[float] | None = None) -> EvaluationReport:
    """Stratified k-fold evaluation of the portfolio against VBS, the best
    single solver (picked on each training split) and the random-cluster
    baseline (picked on each test split).

    ``families`` and ``overhead`` are aligned with ``features.instances``.
    Overhead seconds are added to the portfolio's chosen runtime, capped at
    the timeout.
    """
    if set(features.instances) != set(runtimes.instances):
        only_f = sorted(set(features.instances) - set(runtimes.instances))
        only_r = sorted(set(runtimes.instances) - set(features.instances))
        raise ValueError(f"instance sets differ: only in features {only_f}, "
                         f"only in runtimes {only_r}")
    if len(families) != len(features.instances):
        raise ValueError("one family label per instance is required")
    rt = runtimes.reorder(features.instances)
    n, timeout, f = len(features.instances), rt.timeout, config.par
    extra = np.zeros(n) if overhead is None else np.asarray(overhead, dtype=float)
    if extra.shape != (n,) or np.any(extra < 0):
        raise ValueError("overhead must hold one non-negative value per instance")

    fold_of, small = stratified_folds(list(families), folds, derive_seed(config.seed, "folds"))
    portfolio_rt = np.empty(n)
    single_rt = np.empty(n)
    random_rt = np.empty(n)
    ks, singles = [], []
    for fold in range(folds):
        test = np.flatnonzero(fold_of == fold)
        trn = np.flatnonzero(fold_of != fold)
        if len(test) == 0 or len(trn) == 0:
            continue
        fold_cfg = PortfolioConfig(config.min_cluster_size, config.max_k, f,
                                   derive_seed(config.seed, "fold", fold))
        model = train(features.take(trn), rt.take(trn), fold_cfg)
        ks.append(model.k)
        col = {s: j for j, s in enumerate(rt.solvers)}
        for i in test:
            j = col[select(model, features.values[i])]
            portfolio_rt[i] = min(rt.runtimes[i, j] + extra[i], timeout)
        sid, _, _ = best_single(rt.take(trn), f)
        singles.append(sid)
        single_rt[test] = rt.runtimes[test, col[sid]]
        random_rt[test] = _random_cluster_runtimes(
            rt.take(test), model.k, f, derive_seed(config.seed, "random", fold))

    best = rt.runtimes.min(axis=1)
    rows = {
        "VBS": (par_score(best, timeout, f), _solved(best, timeout)),
        "Portfolio": (par_score(portfolio_rt, timeout, f), _solved(portfolio_rt, timeout)),
        "Random Cluster": (par_score(random_rt, timeout, f), _solved(random_rt, timeout)),
        "Best Single": (par_score(single_rt, timeout, f), _solved(single_rt, timeout)),
    }
    notes = ["best single is chosen per fold on the training split",
             "random cluster picks solvers on the test split it is scored on"]
    if overhead is None:
        notes.append("no overhead data: encoding/feature time counted as 0")
    else:
        notes.append("encoding + feature overhead added to portfolio runtimes")
    if small:
        notes.append("families smaller than the fold count placed round-robin: "
                     + ", ".join(small))
    return EvaluationReport(rows, n, timeout, f, folds, config.seed, config, ks, singles, notes)


def family_accuracy(values, families: Sequence[str], folds: int = 10, seed: int = 0) -> float:
    """Held-out accuracy of a nearest-centroid family classifier.

    Each fold normalizes on its training rows, takes one centroid per
    family, and labels the test rows by the closest centroid (ties go to
    the alphabetically first family).
    """
    values = np.asarray(values, dtype=float)
    fams = np.asarray(families)
    names = sorted(set(families))
    fold_of, _ = stratified_folds(list(families), folds, seed)
    correct = 0
    for fold in range(folds):
        test = fold_of == fold
        if not test.any():
            continue
        bounds = normalize_fit(values[~test])
        z = normalize_apply(bounds, values)
        present = [f for f in names if np.any(~test & (fams == f))]
        centroids = np.array([z[~test & (fams == f)].mean(axis=0) for f in present])
        pred = np.asarray(present)[_nearest(z[test], centroids)]
        correct += int(np.sum(pred == fams[test]))
    return correct / len(fams)
