"""CSV file formats shared by the harness: manifests, feature tables,
runtime matrices and overhead sidecars."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .portfolio import FeatureMatrix, RuntimeMatrix

FORMATS = ("native", "xcsp", "dimacs")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    format: str
    family: str

    @property
    def instance_id(self) -> str:
        return self.path.stem


def read_manifest(path) -> list[ManifestEntry]:
    """Read a ``path,format,family`` CSV; relative paths resolve against
    the manifest's directory."""
    base = Path(path).parent
    entries = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            fmt = (row.get("format") or "").strip()
            fam = (row.get("family") or "").strip()
            if fmt not in FORMATS:
                raise ValueError(f"{path}:{lineno}: unknown format {fmt!r}")
            if not fam:
                raise ValueError(f"{path}:{lineno}: empty family label")
            p = Path(row["path"].strip())
            entries.append(ManifestEntry(p if p.is_absolute() else base / p, fmt, fam))
    ids = [e.instance_id for e in entries]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ValueError(f"{path}: duplicate instance ids {dupes}")
    return entries


def write_manifest(path, entries: Iterable[tuple[str, str, str]]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "format", "family"])
        for row in entries:
            w.writerow([os.fspath(row[0]), row[1], row[2]])


def _fmt(x: float) -> str:
    return repr(float(x))


def write_feature_csv(path, schema: Sequence[str], rows, errors=()):
    """``rows`` holds ``(instance, values)``; ``errors`` holds
    ``(instance, message)`` and is written as ``#`` comment lines."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", *schema])
        for iid, values in rows:
            w.writerow([iid, *map(_fmt, values)])
        for iid, message in errors:
            fh.write(f"# error {iid}: {' '.join(str(message).split())}\n")


def read_feature_csv(path) -> FeatureMatrix:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if not header or header[0] != "instance":
        raise ValueError(f"{path}: first column must be 'instance'")
    ids, values = [], []
    for row in reader:
        if row:
            ids.append(row[0])
            values.append([float(v) for v in row[1:]])
    return FeatureMatrix(tuple(ids), tuple(header[1:]),
                         np.array(values, dtype=float).reshape(len(ids), len(header) - 1))


def write_runtime_csv(path, matrix: RuntimeMatrix):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", *matrix.solvers])
        for iid, row in zip(matrix.instances, matrix.runtimes):
            w.writerow([iid, *map(_fmt, row)])


def read_runtime_csv(path, timeout: float) -> RuntimeMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ids, grid = [], []
        for row in reader:
            if row:
                ids.append(row[0])
                grid.append([float(v) for v in row[1:]])
    return RuntimeMatrix(tuple(ids), tuple(header[1:]),
                         np.array(grid, dtype=float).reshape(len(ids), len(header) - 1), timeout)


def write_overhead_csv(path, rows: Iterable[tuple[str, float, float]]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "encode_s", "feature_s"])
        for iid, enc, feat in rows:
            w.writerow([iid, _fmt(enc), _fmt(feat)])


def read_overhead_csv(path) -> dict[str, float]:
    """Total (encode + feature) seconds per instance."""
    with open(path, newline="") as fh:
        return {row["instance"]: float(row["encode_s"]) + float(row["feature_s"])
                for row in csv.DictReader(fh)}


def read_labels(path) -> dict[str, str]:
    """Family per instance, from a manifest or an ``instance,family`` CSV."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    if "path" in header:
        return {e.instance_id: e.family for e in read_manifest(path)}
    with open(path, newline="") as fh:
        return {row["instance"]: row["family"] for row in csv.DictReader(fh)}
