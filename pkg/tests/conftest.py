import itertools

import pytest
from hypothesis import strategies as st

from cspfolio.csp import CspInstance, Variable, bound, forbidden, relation, parse_native


@pytest.fixture
def tiny():
    """X, Y in {1, 2} with the single forbidden pair (1, 2)."""
    return parse_native("var X 1 2\nvar Y 1 2\nforbid X Y : 1 2")


@st.composite
def small_instances(draw, max_vars=4, max_dom=4, allow_relations=True):
    """Random CSPs with arbitrary (possibly non-contiguous) integer domains."""
    n = draw(st.integers(1, max_vars))
    variables = []
    for i in range(n):
        dom = draw(st.sets(st.integers(-3, 6), min_size=1, max_size=max_dom))
        variables.append(Variable(f"V{i}", tuple(dom)))
    ops = ["<", "<=", ">", ">=", "=", "!="]
    constraints = []
    for _ in range(draw(st.integers(0, 5))):
        kinds = ["forbidden", "bound"] + (["relation"] if allow_relations else [])
        kind = draw(st.sampled_from(kinds))
        if kind == "bound":
            v = draw(st.sampled_from(variables))
            constraints.append(bound(v.id, draw(st.sampled_from(ops)), draw(st.integers(-4, 7))))
            continue
        if n < 2:
            continue
        x, y = draw(st.lists(st.sampled_from(variables), min_size=2, max_size=2, unique=True))
        if kind == "relation":
            constraints.append(relation(x.id, draw(st.sampled_from(ops)), y.id))
        else:
            space = list(itertools.product(x.domain, y.domain))
            pairs = draw(st.lists(st.sampled_from(space), max_size=len(space)))
            constraints.append(forbidden(x.id, y.id, pairs))
    return CspInstance(tuple(variables), tuple(constraints), "h")
