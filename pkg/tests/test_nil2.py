import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autostruct.errors import BudgetExceeded, NotPrime, PresentationMismatch
from autostruct.nil2 import (
    Nil2Element,
    collect,
    format_element,
    from_word,
    oracle_comm,
    oracle_enumerate,
    oracle_inverse,
    oracle_mul,
    oracle_pow,
    parse_element,
    quotient,
)
from autostruct.presentations import make_presentation

X = Nil2Element.x
Y = Nil2Element.y


def closed_form_mul(g, h):
    """Direct product formula: b''_{ik} = b + b' + a_k * a'_i for i < k."""
    p = g.p
    a, a2 = g.a_map, h.a_map
    idx = set(a) | set(a2)
    new_a = {i: a.get(i, 0) + a2.get(i, 0) for i in idx}
    new_b = dict(g.b_map)
    for key, e in h.b:
        new_b[key] = new_b.get(key, 0) + e
    for i in idx:
        for k in idx:
            if i < k:
                new_b[(i, k)] = new_b.get((i, k), 0) + a.get(k, 0) * a2.get(i, 0)
    return Nil2Element.make(p, new_a, new_b)


def random_element(rng, p, n=5):
    a = {i: rng.randrange(p) for i in range(n)}
    b = {(i, k): rng.randrange(p) for i in range(n) for k in range(i + 1, n)}
    return Nil2Element.make(p, a, b)


elements = st.builds(
    lambda p, a, b: Nil2Element.make(p, a, {(min(i, k), max(i, k)): e for (i, k), e in b.items() if i != k}),
    st.just(3),
    st.dictionaries(st.integers(0, 4), st.integers(0, 2), max_size=5),
    st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), st.integers(0, 2), max_size=4),
)


def test_single_swap():
    assert oracle_mul(X(3, 1), X(3, 0)) == Nil2Element.make(3, {0: 1, 1: 1}, {(0, 1): 1})


def test_identity_is_neutral():
    g = from_word(3, [("x2", 1), ("x0", 2), ("y(0,3)", 1)])
    e = Nil2Element.identity(3)
    assert oracle_mul(g, e) == g == oracle_mul(e, g)


def test_square_of_x0x1():
    g = oracle_mul(X(3, 0), X(3, 1))
    assert oracle_mul(g, g) == Nil2Element.make(3, {0: 2, 1: 2}, {(0, 1): 1})


def test_inverse_of_x0x1():
    g = oracle_mul(X(3, 0), X(3, 1))
    assert oracle_inverse(g) == Nil2Element.make(3, {0: 2, 1: 2}, {(0, 1): 1})


def test_comm_x1_x0():
    assert oracle_comm(X(3, 1), X(3, 0)) == Y(3, 0, 1)
    assert oracle_comm(X(3, 0), X(3, 1)) == Y(3, 0, 1, 2)


def test_collect_reports_corrections():
    a, corr = collect(5, [(2, 3), (0, 4), (2, 2)])
    assert a == {0: 4}
    # x2^3 past x0^4 emits y(0,2)^12 = y(0,2)^2
    assert corr == {(0, 2): 2}


@pytest.mark.parametrize("p", [3, 5])
def test_matches_closed_form(p):
    rng = random.Random(p)
    for _ in range(300):
        g, h = random_element(rng, p), random_element(rng, p)
        assert oracle_mul(g, h) == closed_form_mul(g, h)


@pytest.mark.parametrize("p", [3, 5])
def test_associativity(p):
    rng = random.Random(100 + p)
    for _ in range(1000):
        f, g, h = (random_element(rng, p) for _ in range(3))
        assert oracle_mul(oracle_mul(f, g), h) == oracle_mul(f, oracle_mul(g, h))


def test_exponent_three():
    rng = random.Random(7)
    for _ in range(100):
        g = random_element(rng, 3)
        assert oracle_pow(g, 3).is_identity()
        assert oracle_mul(g, oracle_inverse(g)).is_identity()


def test_pow_rejects_negative():
    with pytest.raises(ValueError):
        oracle_pow(X(3, 0), -1)


@settings(max_examples=100, deadline=None)
@given(elements, elements)
def test_commutator_alternating_and_central(g, h):
    c = oracle_comm(g, h)
    assert c.is_central()
    assert oracle_mul(c, oracle_comm(h, g)).is_identity()
    central = Nil2Element(3, (), g.b)
    assert oracle_comm(central, h).is_identity()


@settings(max_examples=100, deadline=None)
@given(elements, elements, elements)
def test_commutator_bilinear(f, g, h):
    # class 2: [fg, h] = [f, h][g, h]
    assert oracle_comm(oracle_mul(f, g), h) == oracle_mul(oracle_comm(f, h), oracle_comm(g, h))


def test_enumerate_small():
    # by hand: e; x0^a, x1^a (4); x0^a x1^b (4); x1^a x0^b = x0^b x1^a y^(ab) with ab != 0 (4)
    got = list(oracle_enumerate(3, 1, 2))
    assert len(got) == 13
    assert len(set(got)) == 13


def test_enumerate_len_zero():
    assert list(oracle_enumerate(3, 3, 0)) == [Nil2Element.identity(3)]


def test_enumerate_counts_match_brute_force():
    # independent count: evaluate every word with the closed-form product
    for max_index, max_len in [(1, 3), (2, 2), (3, 3)]:
        seen = set()
        letters = [(i, e) for i in range(max_index + 1) for e in (1, 2)]
        for n in range(max_len + 1):
            for word in itertools.product(letters, repeat=n):
                g = Nil2Element.identity(3)
                for i, e in word:
                    g = closed_form_mul(g, X(3, i, e))
                seen.add(g)
        assert len(list(oracle_enumerate(3, max_index, max_len))) == len(seen)


def test_enumerate_budget():
    with pytest.raises(BudgetExceeded):
        list(oracle_enumerate(3, 3, 3, budget=50))


def test_enumerate_rejects_non_prime():
    with pytest.raises(NotPrime):
        list(oracle_enumerate(4, 1, 1))


def test_quotient_maps():
    assert quotient(Y(3, 0, 1), "gp") == "1"
    assert quotient(Y(3, 0, 1), "hp") == "00|01"
    assert quotient(oracle_mul(X(3, 1), X(3, 0)), "gp") == "111"
    assert quotient(oracle_mul(X(3, 1), X(3, 0)), "fp") == "11"
    assert quotient(Nil2Element.identity(3), "gp") == "0"
    assert quotient(Nil2Element.identity(3), "hp") == ""


def test_quotient_checks_presentation():
    gp = make_presentation("gp", 3)
    with pytest.raises(PresentationMismatch):
        quotient(X(3, 0), "hp", gp)
    with pytest.raises(PresentationMismatch):
        quotient(X(5, 0), "gp", gp)


def test_format_and_parse():
    # x3 x0^2 = x0^2 x3 y(0,3)^(1*2)
    g = from_word(3, [("x3", 1), ("x0", 2)])
    text = format_element(g)
    assert text == "x0^2 x3 y(0,3)^2"
    assert parse_element(3, text) == g
    assert format_element(Nil2Element.identity(3)) == "e"
    assert parse_element(3, "e").is_identity()
