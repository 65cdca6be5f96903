import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autostruct.automata import (
    PAD,
    Alphabet,
    Budget,
    MultiTrackAutomaton,
    accepts,
    combine,
    complement,
    convolve,
    cylindrify,
    deconvolve,
    determinize,
    empty_automaton,
    enumerate_words,
    equivalent,
    finite_language,
    intersect,
    is_empty,
    join,
    minimize,
    project,
    rename_tracks,
    union,
    valid_convolutions,
    witness,
)
from autostruct.errors import (
    AlphabetMismatch,
    BudgetExceeded,
    InvalidDigit,
    NotPrime,
    TrackOutOfRange,
)
from autostruct.formats import write_aut

from conftest import digit_strings, string_tuples


def last_nonzero(p):
    """A: nonempty and the last digit is not 0."""
    al = Alphabet(p, 1)
    trans = [(q, (d,), 1 if d else 0) for q in (0, 1) for d in range(p)]
    return MultiTrackAutomaton.build(al, 2, [0], [1], trans)


def short(p):
    """B: length at most 1."""
    al = Alphabet(p, 1)
    return MultiTrackAutomaton.build(al, 2, [0], [0, 1], [(0, (d,), 1) for d in range(p)])


def second_last_one(p):
    """N: nondeterministic guess of the second-to-last position."""
    al = Alphabet(p, 1)
    trans = [(0, (d,), 0) for d in range(p)] + [(0, (1,), 1)] + [(1, (d,), 2) for d in range(p)]
    return MultiTrackAutomaton.build(al, 3, [0], [2], trans)


def equal(p):
    al = Alphabet(p, 2)
    return MultiTrackAutomaton.build(al, 1, [0], [0], [(0, (d, d), 0) for d in range(p)])


def shorter(p):
    """Lt: track 0 strictly shorter than track 1."""
    al = Alphabet(p, 2)
    trans = [(0, (x, y), 0) for x in range(p) for y in range(p)]
    trans += [(q, (PAD, y), 1) for q in (0, 1) for y in range(p)]
    return MultiTrackAutomaton.build(al, 2, [0], [1], trans)


ONE_TRACK = {
    "A": (last_nonzero, lambda w: w != "" and w[-1] != "0"),
    "B": (short, lambda w: len(w) <= 1),
    "N": (second_last_one, lambda w: len(w) >= 2 and w[-2] == "1"),
}


def lang1(aut, p, n=4):
    return {w for w in digit_strings(p, n) if accepts(aut, (w,))}


def is_valid_convolution(word):
    k = len(word[0]) if word else 0
    for i in range(k):
        ended = False
        for sym in word:
            if sym[i] is PAD:
                ended = True
            elif ended:
                return False
    return all(any(x is not PAD for x in sym) for sym in word)


def raw_words(p, k, n):
    symbols = list(itertools.product(list(range(p)) + [PAD], repeat=k))
    for m in range(n + 1):
        yield from itertools.product(symbols, repeat=m)


# --- convolution -------------------------------------------------------------


def test_convolve_pads_shorter_tracks():
    assert convolve(("12", "2")) == ((1, 2), (2, PAD))


def test_convolve_empty():
    assert convolve(("", "")) == ()


def test_convolve_round_trip():
    word = convolve(("102", "21", "1"))
    assert deconvolve(word) == ((1, 0, 2), (2, 1), (1,))


def test_convolve_rejects_large_digit():
    with pytest.raises(InvalidDigit):
        convolve(("13",), p=3)


def test_alphabet_requires_prime():
    with pytest.raises(NotPrime):
        Alphabet(4, 1)
    assert Alphabet(2, 1).size == 2


def test_pad_sorts_last_and_prints_as_underscore():
    assert sorted([(PAD,), (2,), (0,)]) == [(0,), (2,), (PAD,)]
    assert repr(PAD) == "_"


# --- Boolean operations ------------------------------------------------------


def test_combine_examples():
    A, B = last_nonzero(3), short(3)
    assert lang1(combine(A, A, "and"), 3) == lang1(A, 3)
    both = {w for w in digit_strings(3, 2) if accepts(combine(A, B, "and"), (w,))}
    assert both == {"1", "2"}
    assert not accepts(combine(A, B, "and_not"), ("1",))


def test_combine_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        combine(last_nonzero(3), last_nonzero(5), "or")
    with pytest.raises(AlphabetMismatch):
        combine(last_nonzero(3), equal(3), "and")


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("x,y", list(itertools.product("ABN", repeat=2)))
def test_combine_against_enumeration(p, x, y):
    (mx, fx), (my, fy) = ONE_TRACK[x], ONE_TRACK[y]
    a, b = mx(p), my(p)
    cases = {
        "and": lambda w: fx(w) and fy(w),
        "or": lambda w: fx(w) or fy(w),
        "and_not": lambda w: fx(w) and not fy(w),
    }
    for mode, pred in cases.items():
        aut = combine(a, b, mode)
        bad = [w for w in digit_strings(p, 4) if accepts(aut, (w,)) != pred(w)]
        assert bad == [], mode


def test_complement_examples():
    A = last_nonzero(3)
    assert equivalent(complement(complement(A)), A)
    al = Alphabet(3, 1)
    assert equivalent(complement(empty_automaton(al)), valid_convolutions(al))
    words = list(digit_strings(3, 4))
    assert len(words) == 121
    assert all(accepts(A, (w,)) != accepts(complement(A), (w,)) for w in words)


@pytest.mark.parametrize("p", [2, 3])
def test_boolean_laws(p):
    a, b, c = last_nonzero(p), short(p), second_last_one(p)
    n = lambda x: complement(x)  # noqa: E731
    words = list(digit_strings(p, 4))

    def same(x, y):
        return all(accepts(x, (w,)) == accepts(y, (w,)) for w in words)

    assert same(n(union(a, b)), intersect(n(a), n(b)))
    assert same(n(intersect(a, c)), union(n(a), n(c)))
    assert same(intersect(a, union(b, c)), union(intersect(a, b), intersect(a, c)))
    assert same(union(a, intersect(b, c)), intersect(union(a, b), union(a, c)))
    assert same(n(n(c)), c)


@pytest.mark.parametrize("p", [2, 3])
def test_two_track_complement(p):
    E, L = equal(p), shorter(p)
    for aut, pred in ((E, lambda u, v: u == v), (L, lambda u, v: len(u) < len(v))):
        c = complement(aut)
        for u, v in string_tuples(p, 2, 4 if p == 2 else 3):
            assert accepts(c, (u, v)) == (not pred(u, v))


# --- projection --------------------------------------------------------------


def test_project_equality_is_everything():
    E = equal(3)
    assert equivalent(project(E, 1), valid_convolutions(Alphabet(3, 1)))


def test_project_needs_padding_saturation():
    # a longer partner for track 0 always exists, even past the end of track 0
    L = shorter(3)
    assert equivalent(project(L, 1), valid_convolutions(Alphabet(3, 1)))
    assert lang1(project(L, 0), 3) == {w for w in digit_strings(3, 4) if w}


def test_project_addition_is_total(fp3):
    sums = project(fp3.M, 2)
    for u, v in string_tuples(3, 2, 3):
        canonical = (u == "" or u[-1] != "0") and (v == "" or v[-1] != "0")
        assert accepts(sums, (u, v)) == canonical


def test_project_empty():
    al = Alphabet(3, 2)
    assert is_empty(project(empty_automaton(al), 0))


def test_project_track_out_of_range():
    with pytest.raises(TrackOutOfRange):
        project(equal(3), 2)


def test_project_to_zero_tracks_decides_emptiness():
    assert project(last_nonzero(3), 0).accepts_word(())
    assert not project(empty_automaton(Alphabet(3, 1)), 0).accepts_word(())


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("track", [0, 1])
def test_project_after_cylindrify_is_identity(p, track):
    A = last_nonzero(p)
    assert equivalent(project(cylindrify(A, track), track), A)
    L = shorter(p)
    for t in range(3):
        assert equivalent(project(cylindrify(L, t), t), L)


def test_cylindrify_against_enumeration():
    A = last_nonzero(2)
    cyl = cylindrify(A, 0)
    for u, v in string_tuples(2, 2, 4):
        assert accepts(cyl, (u, v)) == (v != "" and v[-1] != "0")


def test_join_shares_named_tracks():
    E = equal(3)
    # x = y and y = z gives x = z after projecting y
    both, names = join(E, ("x", "y"), E, ("y", "z"))
    assert names == ("x", "y", "z")
    xz = project(both, 1)
    assert equivalent(xz, E)


def test_rename_tracks_swaps():
    L = shorter(3)
    R = rename_tracks(L, [1, 0])
    for u, v in string_tuples(3, 2, 3):
        assert accepts(R, (u, v)) == (len(v) < len(u))


@pytest.mark.parametrize("p", [2])
def test_constructed_automata_accept_only_valid_convolutions(p):
    E, L = equal(p), shorter(p)
    built = [
        complement(E), complement(L), union(E, L), intersect(complement(E), L),
        cylindrify(last_nonzero(p), 1), minimize(complement(L)),
        rename_tracks(L, [1, 0]), project(cylindrify(L, 2), 0),
    ]
    for aut in built:
        for word in raw_words(p, 2, 3):
            if aut.accepts_word(word):
                assert is_valid_convolution(word), (aut, word)


# --- determinization and minimization ---------------------------------------


def test_minimize_last_nonzero_has_two_states():
    m = minimize(determinize(last_nonzero(3)))
    assert m.n_states == 2
    assert len(m.accepting) == 1


def test_minimize_empty_has_no_accepting_state():
    m = minimize(empty_automaton(Alphabet(3, 1)))
    assert m.accepting == frozenset()


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("name", ["A", "B", "N"])
def test_determinize_minimize_preserve_language(p, name):
    make, pred = ONE_TRACK[name]
    a = make(p)
    d = determinize(a)
    m = minimize(a)
    assert d.deterministic and m.deterministic
    for w in digit_strings(p, 5):
        assert accepts(a, (w,)) == accepts(d, (w,)) == accepts(m, (w,)) == pred(w)


def test_second_last_one_minimal_size():
    # residuals of "second-to-last digit is 1" over {0,1}: 4 Myhill-Nerode classes
    assert minimize(second_last_one(2)).n_states == 4


def test_minimize_is_canonical():
    L = shorter(3)
    a = minimize(union(L, L))
    b = minimize(complement(complement(L)))
    assert write_aut(a) == write_aut(b)
    assert write_aut(minimize(a)) == write_aut(a)


def test_determinize_budget():
    with pytest.raises(BudgetExceeded):
        determinize(second_last_one(3), Budget(max_subsets=2))


# --- queries -----------------------------------------------------------------


def test_witness_examples():
    al = Alphabet(3, 2)
    assert witness(valid_convolutions(al)) == ()
    assert witness(empty_automaton(al)) is None
    assert witness(last_nonzero(3)) == ((1,),)


def test_witness_tie_break_prefers_digits_over_pad():
    assert witness(shorter(3)) == ((PAD, 0),)


@pytest.mark.parametrize("name", ["A", "B", "N"])
def test_witness_is_shortest(name):
    make, pred = ONE_TRACK[name]
    a = make(3)
    w = witness(a)
    shortest = min((x for x in digit_strings(3, 4) if pred(x)), key=lambda x: (len(x), x))
    assert len(w) == len(shortest)
    assert accepts(a, (tuple(s[0] for s in w),))


def test_equivalent_examples():
    A = last_nonzero(3)
    assert equivalent(A, A)
    assert equivalent(A, minimize(determinize(A)))
    assert not equivalent(A, complement(A))
    with pytest.raises(AlphabetMismatch):
        equivalent(A, equal(3))


def test_enumerate_words_counts():
    # valid convolutions of length <= n are pairs of strings of length <= n
    al = Alphabet(2, 2)
    assert sum(1 for _ in enumerate_words(al, 3)) == 15 ** 2
    assert sum(1 for _ in enumerate_words(Alphabet(3, 1), 4)) == 121


def test_finite_language():
    assert finite_language(short(2)) == [(), ((0,),), ((1,),)]
    with pytest.raises(ValueError):
        finite_language(last_nonzero(2))


# --- random automata ---------------------------------------------------------


@st.composite
def small_nfas(draw):
    p = draw(st.sampled_from([2, 3]))
    n = draw(st.integers(1, 4))
    trans = draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, p - 1), st.integers(0, n - 1)),
        max_size=12,
    ))
    initial = draw(st.sets(st.integers(0, n - 1), min_size=1))
    accepting = draw(st.sets(st.integers(0, n - 1)))
    al = Alphabet(p, 1)
    return MultiTrackAutomaton.build(al, n, initial, accepting, [(s, (d,), t) for s, d, t in trans])


@settings(max_examples=60, deadline=None)
@given(small_nfas())
def test_random_nfa_determinize_minimize(a):
    p = a.alphabet.p
    d, m, c = determinize(a), minimize(a), complement(a)
    for w in digit_strings(p, 4):
        x = accepts(a, (w,))
        assert accepts(d, (w,)) == x
        assert accepts(m, (w,)) == x
        assert accepts(c, (w,)) != x
    assert (witness(a) is None) == is_empty(a)


@settings(max_examples=40, deadline=None)
@given(small_nfas(), small_nfas())
def test_random_nfa_equivalence_matches_enumeration(a, b):
    if a.alphabet != b.alphabet:
        return
    p = a.alphabet.p
    same = all(accepts(a, (w,)) == accepts(b, (w,)) for w in digit_strings(p, 6))
    # automata with at most 4 states that differ do so on a word shorter than 8
    if equivalent(a, b):
        assert same
    else:
        w = witness(combine(a, b, "and_not"))
        if w is None:
            w = witness(combine(b, a, "and_not"))
        assert w is not None
        (letters,) = deconvolve(w, tracks=1)
        assert accepts(a, (letters,)) != accepts(b, (letters,))
