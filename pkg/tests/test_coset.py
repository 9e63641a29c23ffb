import pytest
from hypothesis import given, settings, strategies as st

from fibtype.abelian import AbelianInvariants, abelian_images, abelianization
from fibtype.coset import (
    EnumerationLimits,
    EnumerationOverflow,
    abelian_quotient_table,
    derived_subgroup_table,
    enumerate_cosets,
    group_order,
    kernel_generators,
    order_of_element,
    reidemeister_schreier,
    schreier_generators,
)
from fibtype.presentations import FibTypeParams, GeneralPresentation, Word, make_fib_presentation, parse_word


def pres(n, m, k):
    return make_fib_presentation(FibTypeParams(n, m, k)).to_general()


# known finite orders: Z_{2^n-1} for H(n,0), Q8, SL(2,3), SL(2,5), Z_5, Z_11, Z_29, Z_9, Z_2^3 x| Z_7
KNOWN = [
    ((3, 0, 1), 7),
    ((5, 0, 1), 31),
    ((3, 2, 1), 8),
    ((4, 2, 1), 24),
    ((5, 2, 1), 120),
    ((4, 3, 1), 5),
    ((5, 4, 1), 11),
    ((7, 6, 1), 29),
    ((6, 4, 1), 9),
    ((6, 3, 1), 56),
    ((2, 1, 0), 1),
]


@pytest.mark.parametrize("params,order", KNOWN)
@pytest.mark.parametrize("strategy", ["hlt", "felsch"])
def test_known_orders(params, order, strategy, warm_enumerator):
    t = enumerate_cosets(pres(*params), strategy=strategy)
    assert t.is_complete and t.index == order
    assert t.peak_cosets >= order and t.defined_cosets >= order


@settings(max_examples=40)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1), st.integers(0, n - 1))))
def test_strategies_agree(t):
    p = pres(*t)
    inv = abelianization(make_fib_presentation(FibTypeParams(*t)))
    lim = EnumerationLimits(max_cosets=200_000)
    a = enumerate_cosets(p, limits=lim, strategy="hlt")
    b = enumerate_cosets(p, limits=lim, strategy="felsch")
    if a.is_complete and b.is_complete:
        assert a.index == b.index
        # the abelianization is a quotient
        assert inv.is_finite and a.index % inv.order == 0


def test_table_is_permutation_action(warm_enumerator):
    t = enumerate_cosets(pres(5, 2, 1))
    for col in range(t.table.shape[1]):
        assert sorted(t.table[1:, col]) == list(range(1, 121))
    for r in pres(5, 2, 1).relators:
        assert all(t.act(c, r) == c for c in range(1, 121))


def test_subgroup_index(warm_enumerator):
    p = pres(5, 2, 1)
    t = enumerate_cosets(p, [parse_word("x0")])
    assert t.is_complete
    assert 120 % t.index == 0
    assert t.index * order_of_element(p, parse_word("x0")) == 120


def test_order_of_element():
    p = pres(3, 2, 1)
    assert order_of_element(p, parse_word("x0")) == 4
    assert order_of_element(p, parse_word("x0 x0")) == 2
    assert order_of_element(p, Word.from_letters([])) == 1
    assert order_of_element(pres(5, 4, 1), parse_word("x0")) == 11


def test_overflow_reported():
    t = enumerate_cosets(pres(8, 3, 1), limits=EnumerationLimits(max_cosets=1000))
    assert t.status == "overflowed" and t.index is None and t.overflow_reason
    with pytest.raises(EnumerationOverflow) as err:
        group_order(pres(8, 3, 1), EnumerationLimits(max_cosets=1000))
    assert err.value.table.status == "overflowed"
    with pytest.raises(ValueError):
        EnumerationLimits(max_cosets=0)
    with pytest.raises(ValueError):
        enumerate_cosets(pres(3, 2, 1), strategy="todd")


def test_free_group_overflows():
    t = enumerate_cosets(GeneralPresentation(2, []), limits=EnumerationLimits(max_cosets=500))
    assert not t.is_complete


def test_reidemeister_schreier_index_formula():
    # rank of the free group on the Schreier generators: index*(g-1)+1
    p = pres(3, 2, 1)
    t = enumerate_cosets(p, [parse_word("x0")])
    gens = schreier_generators(t)
    assert len(gens) == t.index * (p.generator_count - 1) + 1
    sub = reidemeister_schreier(p, t)
    assert group_order(sub) == 8 // t.index


def abelian_of(p: GeneralPresentation) -> AbelianInvariants:
    from fibtype.abelian import abelianization_general

    return abelianization_general(p)


@pytest.mark.parametrize("params,quot,derived_ab", [((6, 3, 1), (7,), (2, 2, 2)), ((9, 3, 1), (7,), (2,) * 6)])
def test_derived_subgroup(params, quot, derived_ab):
    p = pres(*params)
    inv = abelianization(make_fib_presentation(FibTypeParams(*params)))
    assert inv.torsion == quot
    t = derived_subgroup_table(p)
    assert t.index == quot[0]
    sub = reidemeister_schreier(p, t)
    assert abelian_of(sub) == AbelianInvariants(derived_ab)


def test_kernel_generators_route_agrees():
    p = pres(9, 3, 1)
    images, tors = abelian_images(9, p.relators)
    flat = [v[0] for v in images]
    pivot = next(g for g, a in enumerate(flat) if a % tors[0] and pow(a, -1, tors[0]))
    t = enumerate_cosets(p, kernel_generators(flat, tors[0], pivot))
    assert t.index == 7
    a = abelian_of(reidemeister_schreier(p, t))
    b = abelian_of(reidemeister_schreier(p, abelian_quotient_table(9, images, tors)))
    assert a == b == AbelianInvariants((2,) * 6)


def test_abelian_quotient_table_validation():
    with pytest.raises(ValueError):
        abelian_quotient_table(2, [[1]], (3,))
    t = abelian_quotient_table(1, [[1]], (5,))
    assert t.index == 5 and t.strategy == "direct"
