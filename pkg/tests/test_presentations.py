from math import gcd

import pytest
from hypothesis import given, strategies as st

from fibtype.presentations import (
    ALT_FIBONACCI_WORD,
    ALT_SIERADSKI_WORD,
    CyclicPresentation,
    FibTypeParams,
    GeneralPresentation,
    Word,
    flip_substitution,
    halve_even_presentation,
    make_fib_presentation,
    parse_word,
    reduce_gcd,
    relator_key,
    same_relator_sets,
    to_h_form,
)

letters = st.lists(st.tuples(st.integers(0, 4), st.sampled_from([1, -1])), max_size=12)


def test_parse_roundtrip():
    w = parse_word("x0 X2 x1^2", 3)
    assert w.letters() == ((0, 1), (2, -1), (1, 1), (1, 1))
    assert parse_word(w.to_text(), 3) == w
    assert parse_word("1") == Word()


def test_parse_rejects():
    with pytest.raises(ValueError):
        parse_word("x5", 3)
    with pytest.raises(ValueError):
        parse_word("y1")


def test_relators_are_shifts():
    p = make_fib_presentation(FibTypeParams(5, 1, 2))
    rels = p.relators()
    assert len(rels) == 5
    assert rels[3].letters() == ((3, 1), (4, 1), (0, -1))


def test_unreduced_word_kept():
    # H(n,1) keeps its length-3 relator; reduction only on demand
    p = make_fib_presentation(FibTypeParams(4, 1, 1))
    assert len(p.w) == 3
    assert p.w.cyclic_reduce().letters() == ((0, 1),)


def test_params_reduce_mod_n():
    assert FibTypeParams(5, 7, -1).as_tuple() == (5, 2, 4)
    with pytest.raises(ValueError):
        FibTypeParams(0, 1, 1)


def test_gcd_split():
    d, q = reduce_gcd(FibTypeParams(12, 4, 8))
    assert d == 4 and q.as_tuple() == (3, 1, 2)


@pytest.mark.parametrize(
    "triple,expected",
    [((5, 3, 1), (5, 3)), ((5, 1, 2), (5, 3)), ((7, 1, 2), (7, 4)), ((8, 2, 1), (8, 2)), ((6, 5, 2), None)],
)
def test_h_form(triple, expected):
    assert to_h_form(FibTypeParams(*triple)) == expected


def test_h_form_n_minus_one_for_fibonacci():
    # F(2,n) = H(n, n-1) whenever n is even (route through the flip)
    for n in range(4, 14, 2):
        assert to_h_form(FibTypeParams(n, 1, 2)) == (n, n - 1)


@given(st.integers(1, 30), st.integers(0, 29), st.integers(0, 29))
def test_h_form_is_isomorphism_when_found(n, m, k):
    p = FibTypeParams(n, m, k)
    hf = to_h_form(p)  # raises if the reindexing fails on relators
    if gcd(n, p.k) == 1 or gcd(n, p.m - p.k) == 1:
        assert hf is not None
    else:
        assert hf is None


@given(st.integers(1, 30), st.integers(0, 29), st.integers(0, 29))
def test_flip_carries_relators(n, m, k):
    p = FibTypeParams(n, m, k)
    sub = flip_substitution(n)
    src = [sub.apply(r) for r in make_fib_presentation(p).relators()]
    assert same_relator_sets(src, make_fib_presentation(p.flipped()).relators())


@given(letters)
def test_free_reduce_idempotent(ls):
    w = Word.from_letters(ls)
    r = w.free_reduce()
    assert r.is_freely_reduced()
    assert r.free_reduce() == r
    assert (w * w.inverse()).free_reduce() == Word()


@given(letters)
def test_exponent_sums_additive(ls):
    w = Word.from_letters(ls)
    assert w.exponent_sums(5) == w.free_reduce().exponent_sums(5)
    assert [-x for x in w.exponent_sums(5)] == w.inverse().exponent_sums(5)


@given(letters, st.integers(0, 11))
def test_relator_key_invariant_under_rotation(ls, r):
    w = Word.from_letters(ls)
    L = len(w.letters())
    rot = Word.from_letters(w.letters()[r % L :] + w.letters()[: r % L]) if L else w
    assert relator_key(rot) == relator_key(w) == relator_key(w.inverse())


def test_halving_fibonacci_and_sieradski():
    h = halve_even_presentation(make_fib_presentation(FibTypeParams(4, 1, 2)))
    assert h.n == 2 and same_relator_sets(h.relators(), CyclicPresentation(2, parse_word("X0 x1 x1 X0 x1")).relators())
    for m in range(3, 7):
        h = halve_even_presentation(make_fib_presentation(FibTypeParams(2 * m, 1, 2)))
        assert same_relator_sets(h.relators(), CyclicPresentation(m, ALT_FIBONACCI_WORD).relators())
    for m in range(3, 7):
        h = halve_even_presentation(make_fib_presentation(FibTypeParams(2 * m, 2, 1)))
        assert same_relator_sets(h.relators(), CyclicPresentation(m, ALT_SIERADSKI_WORD).relators())


def test_general_presentation_extends():
    p = make_fib_presentation(FibTypeParams(3, 1, 2)).to_general()
    q = p.with_relators([parse_word("x0")])
    assert isinstance(q, GeneralPresentation)
    assert len(q.relators) == 4
