"""
Do encoded formulas remember where they came from?
==================================================

SAT features of three instance families, one table per encoding, and a
nearest-centroid check of how well the family can be told from the
features alone.
"""

import numpy as np

from cspfolio.encode import ALL_CONFIGS, encode
from cspfolio.features import csp_features, sat_features
from cspfolio.portfolio import family_accuracy
from cspfolio.synthetic import make_corpus

corpus = make_corpus(60, seed=0)
families = [fam for _, fam, _ in corpus]
print(len(corpus), "instances:", {f: families.count(f) for f in sorted(set(families))})

# one instance of each family, seen through the direct encoding
for iid, fam, inst in corpus[::60]:
    fv = sat_features(encode(inst, "direct"))
    print(f"{iid:<16} vars={fv['num_vars']:>5.0f} clauses={fv['num_clauses']:>6.0f} "
          f"horn={fv['horn_frac']:.3f} binary={fv['binary_frac']:.3f} "
          f"probe_decisions={fv['probe_decisions']:.0f}")

# the CSP-side view of the same instances
cv = np.array([csp_features(inst).values for _, _, inst in corpus])
print("CSP features, family accuracy:", family_accuracy(cv, families))

# held-out family accuracy per encoding; 10 stratified folds
for cfg in ALL_CONFIGS:
    X = np.array([sat_features(encode(inst, cfg)).values for _, _, inst in corpus])
    print(f"{cfg.name:<12} {family_accuracy(X, families):.3f}")
