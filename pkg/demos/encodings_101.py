"""
Three ways to write a CSP as CNF
================================

A two-variable instance translated with the direct, support and order
encodings, with and without domain clauses.
"""

from cspfolio.cnf import count_models, iter_models, write_dimacs
from cspfolio.csp import count_solutions, parse_native
from cspfolio.encode import ALL_CONFIGS, decode_model, encode

# X and Y range over {1, 2}; the pair X=1, Y=2 is forbidden
inst = parse_native("""
var X 1 2
var Y 1 2
forbid X Y : 1 2
""", name="tiny")
print("solutions:", count_solutions(inst))

# direct: one boolean per value, at-least-one / at-most-one per variable,
# one clause per forbidden pair
direct = encode(inst, "direct")
print(write_dimacs(direct))

# every model decodes back to exactly one solution
for model in iter_models(direct):
    print(sorted(model), "->", decode_model(direct, model))

# order: a boolean per threshold X <= v; the single conflict clause
# becomes (not X<=1 or Y<=1)
order = encode(inst, "order")
print(write_dimacs(order))

# the ND variants drop domain clauses; extra models appear but the
# variable count stays the same
print(f"{'config':<12}{'vars':>6}{'clauses':>9}{'models':>8}")
for cfg in ALL_CONFIGS:
    f = encode(inst, cfg)
    print(f"{cfg.name:<12}{f.num_vars:>6}{f.num_clauses:>9}{count_models(f):>8}")
