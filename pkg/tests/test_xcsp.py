import pytest

from cspfolio.csp import CspError, count_solutions, parse_native
from cspfolio.xcsp import UnsupportedConstraint, parse_xcsp

HEAD = """<?xml version="1.0" encoding="UTF-8"?>
<instance>
<presentation name="t" format="XCSP 2.1"/>
<domains nbDomains="1"><domain name="D0" nbValues="2">1..2</domain></domains>
<variables nbVariables="2">
  <variable name="X" domain="D0"/><variable name="Y" domain="D0"/>
</variables>
"""


def doc(relations="", predicates="", constraints=""):
    return (HEAD + f"<relations>{relations}</relations>"
            + f"<predicates>{predicates}</predicates>"
            + f"<constraints>{constraints}</constraints></instance>")


def test_conflicts_relation_matches_native():
    inst = parse_xcsp(doc(
        '<relation name="R0" arity="2" nbTuples="1" semantics="conflicts">1 2</relation>',
        constraints='<constraint name="C0" arity="2" scope="X Y" reference="R0"/>'))
    native = parse_native("var X 1 2\nvar Y 1 2\nforbid X Y : 1 2", name="t")
    assert inst == native


def test_supports_relation_is_complemented():
    inst = parse_xcsp(doc(
        '<relation name="R0" arity="2" nbTuples="3" semantics="supports">1 1|2 1|2 2</relation>',
        constraints='<constraint name="C0" arity="2" scope="X Y" reference="R0"/>'))
    assert inst.constraints[0].tuples == ((1, 2),)


def test_out_of_domain_conflicts_are_dropped_and_counted():
    inst = parse_xcsp(doc(
        '<relation name="R0" arity="2" nbTuples="2" semantics="conflicts">1 2|3 3</relation>',
        constraints='<constraint name="C0" arity="2" scope="X Y" reference="R0"/>'))
    assert inst.constraints[0].tuples == ((1, 2),)
    assert inst.dropped_tuples == 1


def test_predicates():
    preds = ('<predicate name="P0"><parameters>int A int B</parameters>'
             '<expression><functional>ne(A,B)</functional></expression></predicate>'
             '<predicate name="P1"><parameters>int A int K</parameters>'
             '<expression><functional>le(A,K)</functional></expression></predicate>'
             '<predicate name="P2"><parameters>int K int A</parameters>'
             '<expression><functional>lt(K,A)</functional></expression></predicate>')
    cons = ('<constraint name="C0" arity="2" scope="X Y" reference="P0">'
            '<parameters>X Y</parameters></constraint>'
            '<constraint name="C1" arity="1" scope="X" reference="P1">'
            '<parameters>X 1</parameters></constraint>'
            '<constraint name="C2" arity="1" scope="Y" reference="P2">'
            '<parameters>0 Y</parameters></constraint>')
    inst = parse_xcsp(doc(predicates=preds, constraints=cons))
    kinds = [(c.kind, c.relation, c.bound) for c in inst.constraints]
    assert kinds == [("relation", "!=", None), ("bound", "<=", 1), ("bound", ">", 0)]
    assert count_solutions(inst) == 1  # X=1, Y=2


def test_global_constraint_rejected():
    cons = '<constraint name="C0" arity="2" scope="X Y" reference="global:allDifferent"/>'
    with pytest.raises(UnsupportedConstraint, match="unsupported constraint type.*allDifferent"):
        parse_xcsp(doc(constraints=cons))


def test_arity_three_rejected():
    rel = '<relation name="R0" arity="3" nbTuples="1" semantics="conflicts">1 1 1</relation>'
    cons = '<constraint name="C0" arity="3" scope="X Y X" reference="R0"/>'
    with pytest.raises(UnsupportedConstraint, match="arity > 2"):
        parse_xcsp(doc(rel, constraints=cons))


def test_compound_expression_rejected():
    preds = ('<predicate name="P0"><parameters>int A int B</parameters>'
             '<expression><functional>eq(add(A,1),B)</functional></expression></predicate>')
    cons = ('<constraint name="C0" arity="2" scope="X Y" reference="P0">'
            '<parameters>X Y</parameters></constraint>')
    with pytest.raises(UnsupportedConstraint):
        parse_xcsp(doc(predicates=preds, constraints=cons))


def test_malformed_xml():
    with pytest.raises(CspError, match="malformed XML"):
        parse_xcsp("<instance><domains>")
