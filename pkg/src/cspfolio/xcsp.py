"""Reader for the XCSP 2.1 subset this package can encode.

Accepted: integer domains, binary extensional relations (``supports`` or
``conflicts`` semantics) and intensional predicates whose expression is a
single comparison (``eq ne lt le gt ge``) between two variables or between
a variable and a constant. Everything else is rejected with
:class:`UnsupportedConstraint`.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from .csp import (CspError, CspInstance, Constraint, Variable, bound, flip_relation,
                  forbidden, relation)

__all__ = ["UnsupportedConstraint", "parse_xcsp"]

_FUNCTIONS = {"eq": "=", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}
_CALL = re.compile(r"^\s*(\w+)\s*\(\s*([^(),]+?)\s*,\s*([^(),]+?)\s*\)\s*$")


class UnsupportedConstraint(CspError):
    pass


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(elem, name):
    return [c for c in elem if _local(c.tag) == name]


def _child(elem, name):
    found = _children(elem, name)
    return found[0] if found else None


def _section(root, name, item):
    elem = _child(root, name)
    return _children(elem, item) if elem is not None else []


def _parse_values(text: str) -> list[int]:
    values = []
    for tok in (text or "").split():
        if ".." in tok:
            lo, hi = tok.split("..")
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(tok))
    return values


def _parse_tuples(text: str) -> list[tuple[int, ...]]:
    tuples = []
    for chunk in (text or "").split("|"):
        vals = chunk.split()
        if vals:
            tuples.append(tuple(int(v) for v in vals))
    return tuples


def _as_int(tok: str):
    try:
        return int(tok)
    except ValueError:
        return None


def parse_xcsp(text: str) -> CspInstance:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise CspError(f"malformed XML: {exc}") from None
    if _local(root.tag) != "instance":
        raise CspError("malformed XML: root element must be <instance>")

    pres = _child(root, "presentation")
    name = pres.get("name", "") if pres is not None else ""

    domains = {}
    for dom in _section(root, "domains", "domain"):
        try:
            domains[dom.get("name")] = _parse_values(dom.text)
        except ValueError:
            raise CspError(f"bad values in domain {dom.get('name')!r}") from None

    variables = {}
    for var in _section(root, "variables", "variable"):
        dname = var.get("domain")
        if dname not in domains:
            raise CspError(f"variable {var.get('name')!r} uses unknown domain {dname!r}")
        variables[var.get("name")] = Variable(var.get("name"), tuple(domains[dname]))

    relations = {}
    for rel in _section(root, "relations", "relation"):
        relations[rel.get("name")] = rel

    predicates = {}
    for pred in _section(root, "predicates", "predicate"):
        params = (_child(pred, "parameters").text or "").split()
        formals = params[1::2]  # "int X int Y"
        expr = _child(pred, "expression")
        func = _child(expr, "functional") if expr is not None else None
        predicates[pred.get("name")] = (formals, (func.text if func is not None else "") or "")

    constraints: list[Constraint] = []
    dropped = 0
    for con in _section(root, "constraints", "constraint"):
        cname = con.get("name", "?")
        scope = (con.get("scope") or "").split()
        arity = int(con.get("arity", len(scope)))
        ref = con.get("reference", "")
        for vid in scope:
            if vid not in variables:
                raise CspError(f"constraint {cname} references undeclared variable {vid!r}")
        if ref not in relations and ref not in predicates:
            kind = ref or "(no reference)"
            raise UnsupportedConstraint(f"unsupported constraint type: {kind} ({cname})")
        if arity > 2 or len(scope) > 2:
            raise UnsupportedConstraint(
                f"constraint {cname}: arity > 2 is not supported (arity {arity})")

        if ref in relations:
            rel = relations[ref]
            if len(scope) != 2 or int(rel.get("arity", 2)) != 2:
                raise UnsupportedConstraint(
                    f"unsupported constraint type: unary extensional relation {ref} ({cname})")
            if scope[0] == scope[1]:
                raise CspError(f"constraint {cname}: binary scope must be distinct")
            dx, dy = variables[scope[0]].domain, variables[scope[1]].domain
            listed = set()
            for t in _parse_tuples(rel.text):
                if len(t) != 2:
                    raise CspError(f"relation {ref}: tuple {t} is not a pair")
                listed.add(t)
            semantics = rel.get("semantics", "supports")
            if semantics == "conflicts":
                inside = {t for t in listed if t[0] in dx and t[1] in dy}
                dropped += len(listed) - len(inside)
                pairs = inside
            elif semantics == "supports":
                pairs = {(a, b) for a in dx for b in dy if (a, b) not in listed}
            else:
                raise CspError(f"relation {ref}: unknown semantics {semantics!r}")
            constraints.append(forbidden(scope[0], scope[1], pairs))
        else:
            constraints.append(_predicate_constraint(cname, con, predicates[ref], variables))

    return CspInstance(tuple(variables.values()), tuple(constraints), name, dropped)


def _predicate_constraint(cname, con, predicate, variables) -> Constraint:
    formals, body = predicate
    params_elem = _child(con, "parameters")
    actuals = (params_elem.text or "").split() if params_elem is not None else []
    if len(actuals) != len(formals):
        raise CspError(f"constraint {cname}: expected {len(formals)} parameters")
    binding = dict(zip(formals, actuals))
    match = _CALL.match(body)
    if not match or match.group(1) not in _FUNCTIONS:
        raise UnsupportedConstraint(
            f"unsupported constraint type: intensional expression {body.strip()!r} ({cname})")
    op = _FUNCTIONS[match.group(1)]
    left, right = (binding.get(t, t) for t in match.group(2, 3))
    lnum, rnum = _as_int(left), _as_int(right)
    for term, num in ((left, lnum), (right, rnum)):
        if num is None and term not in variables:
            raise CspError(f"constraint {cname}: unknown term {term!r}")
    if lnum is None and rnum is None:
        if left == right:
            raise UnsupportedConstraint(
                f"unsupported constraint type: comparison of {left!r} with itself ({cname})")
        return relation(left, op, right)
    if lnum is None:
        return bound(left, op, rnum)
    if rnum is None:
        return bound(right, flip_relation(op), lnum)
    raise UnsupportedConstraint(
        f"unsupported constraint type: constant comparison ({cname})")
