"""
A cluster-based portfolio on simulated solvers
==============================================

Three families, three solvers, each fast on one family only. The
portfolio clusters training instances by their SAT features and gives
each cluster its best solver; cross-validation compares it with the
virtual best solver, the best single solver and random clusters.
"""

import tempfile
from pathlib import Path

from cspfolio import bench
from cspfolio.portfolio import PortfolioConfig, PortfolioModel, derive_seed
from cspfolio.synthetic import make_corpus, simulate_runtimes, write_corpus
from cspfolio.tables import write_runtime_csv

seed = 0
work = Path(tempfile.mkdtemp(prefix="cspfolio-"))
corpus = make_corpus(100, seed)
manifest = write_corpus(work, corpus)

runtimes = simulate_runtimes([c[0] for c in corpus], [c[1] for c in corpus], seed)
write_runtime_csv(work / "runtimes.csv", runtimes)
print("solvers:", runtimes.solvers, "timeout:", runtimes.timeout)

# features for the CSP view and all six encodings
bench.cmd_features(manifest, "sat", "all", out=work / "features", jobs=4)

config = PortfolioConfig(seed=derive_seed(seed, "portfolio"))
report = bench.cmd_evaluate(work / "features" / "support.csv", work / "runtimes.csv",
                            runtimes.timeout, labels=manifest, config=config,
                            model_out=work / "model.json")
print(report)

# the final model, trained on every instance
model = PortfolioModel.from_json((work / "model.json").read_text())
print("k =", model.k, "cluster -> solver:", model.cluster_solver)
print("files in", work)
