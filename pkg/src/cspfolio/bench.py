"""Experiment harness behind the ``cspfolio`` command.

Each ``cmd_*`` function does the work of one subcommand and returns a
process exit status (``cmd_evaluate`` returns the report text). Progress
and summaries go to stderr; nothing here calls ``sys.exit``.
"""

from __future__ import annotations

import csv
import itertools
import os
import random
import shlex
import signal
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path
from typing import Mapping

from .cnf import CnfFormula, count_models, iter_models, parse_dimacs, write_dimacs
from .csp import CspError, CspInstance, count_solutions, is_solution, parse_native
from .encode import ALL_CONFIGS, DecodeError, EncodingConfig, decode_model, encode
from .features import CSP_SCHEMA, DEFAULT_BUDGET, SAT_SCHEMA, csp_features, sat_features
from .generators import gen_coloring, gen_pigeonhole, gen_random_binary
from .portfolio import PortfolioConfig, cross_validate, derive_seed, train
from .tables import (read_feature_csv, read_labels, read_manifest, read_overhead_csv,
                     read_runtime_csv, write_feature_csv, write_overhead_csv)
from .xcsp import parse_xcsp

#: exit codes of SAT-competition solvers that count as a finished run
SOLVED_CODES = (0, 10, 20)


def _log(msg: str):
    print(msg, file=sys.stderr)


def load_instance(path, fmt: str | None = None) -> CspInstance | CnfFormula:
    path = Path(path)
    if fmt is None:
        fmt = {".xml": "xcsp", ".cnf": "dimacs"}.get(path.suffix.lower(), "native")
    text = path.read_text()
    if fmt == "xcsp":
        return parse_xcsp(text)
    if fmt == "dimacs":
        return parse_dimacs(text)
    return parse_native(text, name=path.stem)


# ---------------------------------------------------------------------------
# encode


def cmd_encode(input_path, encoding: str, include_domains: bool, output_path,
               fmt: str | None = None) -> int:
    start = time.perf_counter()
    try:
        inst = load_instance(input_path, fmt)
        if isinstance(inst, CnfFormula):
            raise CspError("input is already CNF")
        formula = encode(inst, EncodingConfig(encoding, include_domains))
    except (CspError, OSError) as exc:
        _log(f"error: {input_path}: {exc}")
        return 2
    Path(output_path).write_text(write_dimacs(formula))
    elapsed = time.perf_counter() - start
    _log(f"{input_path}: {formula.num_vars} vars, {formula.num_clauses} clauses, {elapsed:.3f}s")
    return 0


# ---------------------------------------------------------------------------
# features


def _feature_row(args):
    path, fmt, kind, config_name, budget = args
    try:
        inst = load_instance(path, fmt)
        enc_s = 0.0
        if kind == "csp":
            if isinstance(inst, CnfFormula):
                raise CspError("CSP features need a CSP instance, got DIMACS")
            t0 = time.perf_counter()
            vec = csp_features(inst, budget)
        else:
            formula = inst
            if not isinstance(inst, CnfFormula):
                t0 = time.perf_counter()
                formula = encode(inst, config_name)
                enc_s = time.perf_counter() - t0
            t0 = time.perf_counter()
            vec = sat_features(formula, budget)
        feat_s = time.perf_counter() - t0
        return vec.values, enc_s, feat_s, None
    except Exception as exc:  # recorded per row, never fatal for the run
        return None, 0.0, 0.0, f"{type(exc).__name__}: {exc}"


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=4))


def _features_one(entries, kind, config_name, budget, out, overhead_out, jobs) -> int:
    schema = CSP_SCHEMA if kind == "csp" else SAT_SCHEMA
    jobs_in = [(e.path, e.format, kind, config_name, budget) for e in entries]
    results = _map(_feature_row, jobs_in, jobs)
    rows, errors, overhead = [], [], []
    for entry, (values, enc_s, feat_s, err) in zip(entries, results):
        if err is None:
            rows.append((entry.instance_id, values))
            overhead.append((entry.instance_id, enc_s, feat_s))
        else:
            errors.append((entry.instance_id, err))
    write_feature_csv(out, schema, rows, errors)
    write_overhead_csv(overhead_out, overhead)
    label = "csp" if kind == "csp" else config_name
    _log(f"{label}: {len(rows)} rows, {len(errors)} errors -> {out}")
    for iid, err in errors:
        _log(f"  {iid}: {err}")
    return 0 if rows else 1


def _overhead_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".overhead.csv")


def cmd_features(manifest, kind: str, encoding: str | None, include_domains: bool = True,
                 budget: int = DEFAULT_BUDGET, out=None, overhead_out=None, jobs: int = 1) -> int:
    """Write a feature CSV for every manifest entry.

    With ``encoding="all"``, ``out`` is a directory that receives
    ``csp.csv`` plus one CSV per encoding variant (seven in total), each
    with its ``.overhead.csv`` sidecar.
    """
    try:
        entries = read_manifest(manifest)
    except (OSError, ValueError, KeyError) as exc:
        _log(f"error: {exc}")
        return 2
    if encoding == "all":
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        status = _features_one(entries, "csp", None, budget, outdir / "csp.csv",
                               outdir / "csp.overhead.csv", jobs)
        for cfg in ALL_CONFIGS:
            status |= _features_one(entries, "sat", cfg.name, budget, outdir / f"{cfg.name}.csv",
                                    outdir / f"{cfg.name}.overhead.csv", jobs)
        return status
    if kind not in ("csp", "sat"):
        _log(f"error: unknown feature kind {kind!r}")
        return 2
    name = None
    if kind == "sat":
        name = EncodingConfig(encoding or "direct", include_domains).name
    return _features_one(entries, kind, name, budget, out,
                         overhead_out or _overhead_path(out), jobs)


# ---------------------------------------------------------------------------
# run-solvers


def _run_one(command: list[str], timeout: float, grace: float) -> tuple[float, str]:
    start = time.perf_counter()
    try:
        proc = subprocess.Popen(command, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
                                start_new_session=True)
    except OSError:
        return timeout, "error"
    try:
        code = proc.wait(timeout=timeout)
    except subprocess.TimeoutExpired:
        _signal_group(proc, signal.SIGTERM)
        try:
            proc.wait(timeout=grace)
        except subprocess.TimeoutExpired:
            _signal_group(proc, signal.SIGKILL)
            proc.wait()
        return timeout, "timeout"
    elapsed = time.perf_counter() - start
    if code not in SOLVED_CODES:
        return timeout, "error"
    if elapsed >= timeout:
        return timeout, "timeout"
    return elapsed, "solved"


def _signal_group(proc, sig):
    try:
        os.killpg(proc.pid, sig)
    except (ProcessLookupError, PermissionError):
        pass


def _records_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".records.csv")


def read_records(path) -> dict[tuple[str, str], dict]:
    records = {}
    if Path(path).exists():
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                records[(row["instance"], row["solver"])] = row
    return records


def cmd_run_solvers(manifest, solvers: Mapping[str, str], timeout: float, out,
                    jobs: int = 1, grace: float = 1.0) -> int:
    """Run every solver on every instance and write the runtime CSV.

    ``solvers`` maps a solver id to a command template containing
    ``{instance}``. Finished runs are appended to ``<out>.records.csv`` as
    they complete; a rerun skips pairs already recorded there.
    """
    entries = read_manifest(manifest)
    for sid, template in solvers.items():
        if "{instance}" not in template:
            _log(f"error: solver {sid!r} template lacks the {{instance}} placeholder")
            return 2
    rec_path = _records_path(out)
    done = read_records(rec_path)
    todo = [(e, sid) for e in entries for sid in solvers
            if (e.instance_id, sid) not in done]
    new_file = not rec_path.exists()
    with open(rec_path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new_file:
            writer.writerow(["instance", "solver", "runtime", "status"])
            fh.flush()

        def work(item):
            entry, sid = item
            cmd = shlex.split(solvers[sid].format(instance=shlex.quote(str(entry.path))))
            return entry.instance_id, sid, *_run_one(cmd, timeout, grace)

        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            for iid, sid, runtime, status in pool.map(work, todo):
                writer.writerow([iid, sid, repr(float(runtime)), status])
                fh.flush()
                done[(iid, sid)] = {"runtime": runtime, "status": status}
    _log(f"ran {len(todo)} of {len(entries) * len(solvers)} runs "
         f"({len(entries) * len(solvers) - len(todo)} resumed)")

    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance", *solvers])
        for e in entries:
            writer.writerow([e.instance_id] + [
                repr(min(float(done[(e.instance_id, sid)]["runtime"]), float(timeout)))
                for sid in solvers])
    errors = sum(1 for r in done.values() if r["status"] == "error")
    if errors:
        _log(f"warning: {errors} runs ended in error and are scored as timeouts")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(features_csv, runtime_csv, timeout: float, labels=None, overhead_csv=None,
                 folds: int = 10, config: PortfolioConfig = PortfolioConfig(),
                 model_out=None) -> str:
    """Cross-validate the portfolio and return the rendered report.

    Raises ``ValueError`` when the feature and runtime files disagree on
    the instance set.
    """
    feats = read_feature_csv(features_csv)
    rts = read_runtime_csv(runtime_csv, timeout)
    fids, rids = set(feats.instances), set(rts.instances)
    if fids != rids:
        raise ValueError(
            "feature and runtime CSVs cover different instances: "
            f"only in features {sorted(fids - rids)}; only in runtimes {sorted(rids - fids)}")
    if labels is None:
        _log("warning: no labels given, treating all instances as one family")
        families = ["all"] * len(feats.instances)
    else:
        lab = read_labels(labels)
        missing = [i for i in feats.instances if i not in lab]
        if missing:
            raise ValueError(f"no family label for {missing}")
        families = [lab[i] for i in feats.instances]
    overhead = None
    if overhead_csv is not None:
        oh = read_overhead_csv(overhead_csv)
        missing = [i for i in feats.instances if i not in oh]
        if missing:
            raise ValueError(f"no overhead entry for {missing}")
        overhead = [oh[i] for i in feats.instances]
    report = cross_validate(feats, rts, families, folds, config, overhead)
    if model_out is not None:
        model = train(feats, rts, config)
        Path(model_out).write_text(model.to_json())
    return report.render()


# ---------------------------------------------------------------------------
# selftest


def _drop_amo(formula: CnfFormula) -> CnfFormula:
    owner = {sat: key[0] for key, sat in formula.var_map.items()}
    kept = [c for c in formula.clauses
            if not (len(c) == 2 and c[0] < 0 and c[1] < 0
                    and owner.get(-c[0]) == owner.get(-c[1]))]
    return CnfFormula(formula.num_vars, tuple(kept), formula.var_map, formula.encoding,
                      formula.include_domains, formula.domains)


MUTANTS = {"drop-amo": ("direct", _drop_amo)}


def selftest_corpus(n: int, seed: int) -> list[CspInstance]:
    """Seeded random binary instances with n <= 4, d <= 4 and mixed
    density/tightness."""
    rng = random.Random(derive_seed(seed, "selftest"))
    return [gen_random_binary(rng.randint(2, 4), rng.randint(1, 4),
                              rng.choice([0.0, 0.3, 0.6, 1.0]),
                              rng.choice([0.0, 0.1, 0.25, 0.5, 1.0]),
                              rng.randrange(2**31))
            for _ in range(n)]


def family_checks() -> list[CspInstance]:
    """Pigeonhole up to 3x3 and the triangle 3-colouring."""
    corpus = [gen_pigeonhole(p, h) for p, h in itertools.product(range(1, 4), repeat=2)]
    corpus.append(gen_coloring([(0, 1), (1, 2), (0, 2)], 3))
    return corpus


def check_bijection(inst: CspInstance, encoding: str, mutate=None) -> str | None:
    """Return a failure description, or None when models and solutions
    correspond one to one."""
    formula = encode(inst, EncodingConfig(encoding, True))
    if mutate is not None:
        formula = mutate(formula)
    expected = count_solutions(inst)
    got = count_models(formula)
    if got != expected:
        return f"{encoding}: {got} models vs {expected} solutions"
    seen = set()
    for model in iter_models(formula):
        try:
            sol = decode_model(formula, model)
        except DecodeError as exc:
            return f"{encoding}: {exc}"
        if not is_solution(inst, sol):
            return f"{encoding}: decoded model is not a solution"
        seen.add(tuple(sorted(sol.items())))
    if len(seen) != expected:
        return f"{encoding}: decoding is not injective"
    return None


def cmd_selftest(n: int = 200, seed: int = 0, mutant: str | None = None, out=print) -> int:
    """Model counts of all three full encodings must equal the brute-force
    solution count, with decoding as the bijection, on every instance."""
    mutate_enc, mutate = MUTANTS[mutant] if mutant else (None, None)
    corpus = selftest_corpus(n, seed)
    failures = []
    for i, inst in enumerate(corpus):
        for enc in ("direct", "support", "order"):
            err = check_bijection(inst, enc, mutate if enc == mutate_enc else None)
            if err:
                failures.append(f"#{i} {inst.name}: {err}")
                break
    passed = len(corpus) - len(failures)
    out(f"{passed}/{len(corpus)} bijection checks passed")
    for line in failures[:10]:
        out(f"  FAIL {line}")
    return 0 if not failures else 1
