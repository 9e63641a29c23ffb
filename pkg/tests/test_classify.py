import dataclasses
import json

import pytest
from hypothesis import given, settings, strategies as st

from fibtype.classify import (
    RULES,
    CrossCheckMismatch,
    GroupStatus,
    Structure,
    classify,
    classify_group,
    classify_spine,
    cross_check,
    cyclic,
    cyclic_order_formula,
    spine_yes_h_forms,
)
from fibtype.coset import EnumerationLimits, EnumerationOverflow
from fibtype.presentations import FibTypeParams

triples = st.integers(1, 12).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1), st.integers(0, n - 1)))


def summary(v):
    s = v.group.structure
    return v.group.status, s.label() if s else None, v.spine.status, v.spine.family


@pytest.mark.parametrize(
    "params,expected",
    [
        ((6, 5, 2), ("yes", "cyclic(7)", "no", None)),
        ((9, 4, 1), ("unknown", None, "no", None)),
        ((9, 7, 1), ("unknown", None, "no", None)),
        ((9, 1, 2), ("no", None, "no", None)),
        ((7, 3, 1), ("no", None, "no", None)),
        ((10, 2, 1), ("yes", "Sieradski(10)", "yes", "sieradski")),
        ((4, 3, 1), ("yes", "cyclic(5)", "yes", "fibonacci")),
        ((3, 1, 2), ("yes", "Fibonacci(3), order 8", "yes", "fibonacci")),
        ((3, 2, 1), ("yes", "Fibonacci(3), order 8", "yes", "fibonacci")),
        ((5, 1, 2), ("yes", "cyclic(11)", "no", None)),
        ((7, 1, 2), ("yes", "cyclic(29)", "no", None)),
        ((6, 5, 3), ("yes", "cyclic(7)", "no", None)),
        ((5, 1, 1), ("yes", "trivial", "yes", "S3")),
        ((5, 0, 1), ("yes", "cyclic(31)", "no", None)),
        ((8, 5, 1), ("yes", "cyclic(17)", "no", None)),
        ((8, 7, 1), ("yes", "Fibonacci(8)", "yes", "fibonacci")),
    ],
)
def test_examples(params, expected):
    v = classify(params)
    assert summary(v) == expected
    assert v.justification and all(r.rule in RULES for r in v.justification)


def test_free_products():
    v = classify((12, 2, 4))
    assert v.normal_form["d"] == 2
    assert v.group.structure.kind == "free-product" and len(v.group.structure.factors) == 2
    assert v.spine.family == "wedge"
    t = classify((6, 2, 2))
    assert t.group.structure.label() == "trivial"
    assert classify((6, 0, 3)).group.structure.label() == "free-product(cyclic(3), cyclic(3), cyclic(3))"
    assert classify((18, 2, 4)).group.status == "no"


def test_aliases_and_tuple_input():
    p = FibTypeParams(7, 6, 1)
    assert classify_group(p) == classify_spine(p) == classify((7, 6, 1))


def test_order_formula():
    assert cyclic_order_formula(6, 5) == 7
    assert cyclic_order_formula(4, 3) == 5
    assert cyclic_order_formula(8, 1) == 17
    assert spine_yes_h_forms(9) == {1, 2}
    assert spine_yes_h_forms(8) == {1, 2, 7}


@given(triples)
def test_normalization_route_invariance(t):
    n, m, k = t
    a, b = classify(t), classify((n, m, (m - k) % n))
    assert summary(a) == summary(b)


@given(triples)
def test_deterministic_json(t):
    a = json.dumps(classify(t).to_json(), sort_keys=True)
    b = json.dumps(classify(t).to_json(), sort_keys=True)
    assert a == b
    d = json.loads(a)
    assert set(d) == {"params", "normal_form", "group_status", "spine_status", "justification"}
    assert d["group_status"]["status"] in ("yes", "no", "unknown")
    assert d["spine_status"]["status"] in ("yes", "no")


@given(triples)
def test_spine_yes_needs_group_yes(t):
    v = classify(t)
    if v.spine.status == "yes":
        assert v.group.status == "yes"


@settings(max_examples=25)
@given(triples)
def test_cross_check_random(t):
    try:
        report = cross_check(classify(t), budget=EnumerationLimits(max_cosets=300_000))
    except EnumerationOverflow:
        return
    assert report.passed


@pytest.mark.parametrize("params", [(6, 5, 3), (9, 3, 1), (4, 3, 1), (5, 1, 2), (3, 0, 1), (10, 1, 5)])
def test_cross_check_examples(params):
    assert cross_check(classify(params)).passed


def test_fault_injection_order():
    v = classify((6, 5, 3))
    bad = dataclasses.replace(v, group=GroupStatus("yes", cyclic(12)))
    with pytest.raises(CrossCheckMismatch) as err:
        cross_check(bad)
    assert not err.value.report.passed


def test_fault_injection_structure():
    v = classify((5, 1, 2))
    bad = dataclasses.replace(v, group=GroupStatus("yes", Structure("sieradski", n=5)))
    with pytest.raises(CrossCheckMismatch):
        cross_check(bad)


def test_fault_injection_spine():
    from fibtype.classify import SpineStatus

    v = classify((7, 3, 1))
    bad = dataclasses.replace(v, spine=SpineStatus("yes", "S3"))
    with pytest.raises(CrossCheckMismatch):
        cross_check(bad)


def test_overflow_propagates():
    with pytest.raises(EnumerationOverflow):
        cross_check(classify((7, 6, 1)), budget=EnumerationLimits(max_cosets=5))
