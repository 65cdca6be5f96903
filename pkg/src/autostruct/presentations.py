"""Word-automatic presentations of F_p^(omega), G_p and H_p.

Encodings (all canonical, so equality of elements is equality of strings):

* ``fp``: ``[alpha] = prod x_i^{alpha_i}`` as the digit string alpha with no
  trailing zero; the identity is the empty string.
* ``gp``: ``u^c [alpha]`` as ``c alpha_0 alpha_1 ...``; canonical iff the
  length is 1 or the last digit is non-zero; the identity is ``"0"``.
* ``hp``: ``[alpha] prod z_k^{gamma_k}`` as pairs ``(alpha_k, gamma_k)``,
  written ``"alpha|gamma"``; ``gamma_0`` is always 0 and the last pair is not
  ``(0, 0)``; the identity is the empty string.

Multiplication follows the streaming formula
``[a][b] = [a + b] * prod_{k>0} w_k^{a_k * (b_0 + ... + b_{k-1})}`` with
``w_k = u`` in G_p and ``w_k = z_k`` in H_p.  Consequently
``x_k x_i = x_i x_k u`` (resp. ``z_k``) for ``i < k``, i.e. ``[x_k, x_i] = u``
with ``[g, h] = g^-1 h^-1 g h``.

On automaton tracks an H_p letter packs the pair as ``alpha * p + gamma``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

from .automata import (
    PAD,
    accepts,
    Alphabet,
    MultiTrackAutomaton,
    explore,
    is_prime,
    join,
    minimize,
    project,
    witness,
)
from .errors import (
    ArityError,
    BadGenerator,
    EvenPrimeUnsupported,
    NotInDomain,
    NotPrime,
    PresentationMismatch,
    UnknownSymbol,
)

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
_DIGIT_VALUE = {c: i for i, c in enumerate(DIGITS)}

_OK, _ZERO, _DONE = 0, 1, 2


def _flag(flag: int, letter) -> int | None:
    """Per-track canonicality state: OK (may end here), ZERO (last letter 0), DONE (padding)."""
    if flag == _DONE:
        return _DONE if letter == PAD else None
    if letter == PAD:
        return _DONE if flag == _OK else None
    return _OK if letter != 0 else _ZERO


@dataclass(frozen=True)
class Signature:
    relations: dict
    constants: frozenset = frozenset()
    generator_pattern: str | None = None

    def arity(self, name: str) -> int:
        try:
            return self.relations[name]
        except KeyError:
            raise UnknownSymbol(f"unknown relation {name!r}") from None

    def is_constant(self, name: str) -> bool:
        if name in self.constants:
            return True
        return bool(self.generator_pattern and re.fullmatch(self.generator_pattern, name))

    def with_relation(self, name: str, arity: int) -> "Signature":
        rels = dict(self.relations)
        rels[name] = arity
        return replace(self, relations=rels)


@dataclass(frozen=True, eq=False)
class Presentation:
    """Domain automaton, relation automata and codecs for one group."""

    name: str
    kind: str
    p: int
    width: int
    domain: MultiTrackAutomaton
    relations: dict
    constants: dict
    signature: Signature
    identity: str
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def alphabet(self) -> Alphabet:
        return self.domain.alphabet

    @property
    def M(self) -> MultiTrackAutomaton:
        return self.relations["M"]

    def constant(self, name: str) -> str:
        if name in self.constants:
            return self.constants[name]
        if self.signature.is_constant(name):
            return encode(self, parse_generator_word(name))
        raise UnknownSymbol(f"unknown constant {name!r}")

    def to_word(self, s: str) -> tuple:
        return to_letters(self, s)

    def from_word(self, letters: Sequence[int]) -> str:
        return from_letters(self, letters)

    def in_domain(self, s: str) -> bool:
        try:
            letters = to_letters(self, s)
        except NotInDomain:
            return False
        return self.domain.accepts_word(tuple((x,) for x in letters))

    def __repr__(self):
        return f"Presentation({self.name}, p={self.p})"


# ---------------------------------------------------------------------------
# string <-> letters


_LETTER_CACHE_SIZE = 1 << 16


def to_letters(pres: Presentation, s: str) -> tuple:
    """Letters of an element string (no canonicality check)."""
    cache = pres._cache.setdefault("letters", {})
    try:
        return cache[s]
    except KeyError:
        pass
    out = _decode_letters(pres, s)
    if len(cache) >= _LETTER_CACHE_SIZE:
        cache.clear()
    cache[s] = out
    return out


def _decode_letters(pres: Presentation, s: str) -> tuple:
    p = pres.p
    try:
        if pres.width == 1:
            out = tuple(_DIGIT_VALUE[c] for c in s)
            if any(x >= p for x in out):
                raise NotInDomain(f"{s!r}: digit out of range for p={p}")
            return out
        if s == "":
            return ()
        alpha, sep, gamma = s.partition("|")
        if not sep or len(alpha) != len(gamma):
            raise NotInDomain(f"{s!r}: expected alpha|gamma of equal length")
        a = [_DIGIT_VALUE[c] for c in alpha]
        g = [_DIGIT_VALUE[c] for c in gamma]
    except KeyError:
        raise NotInDomain(f"{s!r}: bad digit") from None
    if any(x >= p for x in a) or any(x >= p for x in g):
        raise NotInDomain(f"{s!r}: digit out of range for p={p}")
    return tuple(x * p + y for x, y in zip(a, g))


def from_letters(pres: Presentation, letters: Sequence[int]) -> str:
    if pres.width == 1:
        return "".join(DIGITS[x] for x in letters)
    if not letters:
        return ""
    p = pres.p
    return "".join(DIGITS[x // p] for x in letters) + "|" + "".join(DIGITS[x % p] for x in letters)


def format_element(pres: Presentation, s: str) -> str:
    """Display form: identity as ``e``."""
    return "e" if s == pres.identity else s


def parse_element(pres: Presentation, text: str) -> str:
    """Read an element string leniently and return its canonical encoding.

    ``e`` is the identity; H_p tracks may be of unequal length and may carry
    trailing zero pairs; F_p strings may carry trailing zeros.
    """
    text = text.strip()
    if text == "e":
        return pres.identity
    if pres.kind == "hp":
        alpha, sep, gamma = text.partition("|")
        n = max(len(alpha), len(gamma))
        alpha, gamma = alpha.ljust(n, "0"), gamma.ljust(n, "0")
        while n and alpha[n - 1] == "0" and gamma[n - 1] == "0":
            n -= 1
        text = alpha[:n] + "|" + gamma[:n] if n else ""
    elif pres.kind == "fp":
        text = text.rstrip("0")
    elif pres.kind == "gp" and len(text) > 1:
        text = text[0] + text[1:].rstrip("0")
    _require(pres, text)
    return text


# ---------------------------------------------------------------------------
# automaton builders


def _single_track_domain(alphabet: Alphabet, init, step, accepting) -> MultiTrackAutomaton:
    a1 = alphabet.with_tracks(1)

    def succ(state):
        for x in a1.letters:
            nxt = step(state, x)
            if nxt is not None:
                yield (x,), nxt

    return minimize(explore(a1, [init], succ, accepting))


def _ternary(alphabet: Alphabet, init, step, accepting, result) -> MultiTrackAutomaton:
    """Deterministic 3-track relation whose third letter is a function of the state.

    ``result(state, l1, l2)`` gives the only possible third letter (as a
    value, 0 meaning either the letter 0 or PAD); ``step`` validates.
    """
    a3 = alphabet.with_tracks(3)
    opts = list(a3.letters) + [PAD]

    def succ(state):
        for l1 in opts:
            for l2 in opts:
                v3 = result(state, l1, l2)
                if v3 is None:
                    continue
                for l3 in ((v3, PAD) if v3 == 0 else (v3,)):
                    sym = (l1, l2, l3)
                    if l1 == PAD and l2 == PAD and l3 == PAD:
                        continue
                    nxt = step(state, sym)
                    if nxt is not None:
                        yield sym, nxt

    return minimize(explore(a3, [init], succ, accepting))


def _flags(flags, sym):
    out = []
    for f, x in zip(flags, sym):
        g = _flag(f, x)
        if g is None:
            return None
        out.append(g)
    return tuple(out)


def _check_prime(p: int, odd: bool) -> None:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if odd and p == 2:
        raise EvenPrimeUnsupported("p = 2 is not supported for this group")


def _val(x) -> int:
    return 0 if x == PAD else x


def _build(name, kind, p, width, domain, mul_aut, constants, identity, gen_pattern) -> Presentation:
    sig = Signature({"M": 3, "inv": 2}, frozenset(constants), gen_pattern)
    pres = Presentation(name, kind, p, width, domain, {"M": mul_aut}, dict(constants), sig, identity)
    pres.relations["inv"] = _inverse_relation(pres)
    return pres


def singleton(pres: Presentation, s: str) -> MultiTrackAutomaton:
    letters = to_letters(pres, s)
    alphabet = pres.alphabet.with_tracks(1)
    rows = tuple({(x,): (i + 1,)} for i, x in enumerate(letters)) + ({},)
    return MultiTrackAutomaton(alphabet, rows, frozenset({0}), frozenset({len(letters)}))


def _inverse_relation(pres: Presentation) -> MultiTrackAutomaton:
    """inv(a, b) :<=> M(a, b, e), by joining with the identity singleton."""
    joined, names = join(pres.M, ("a", "b", "c"), singleton(pres, pres.identity), ("c",))
    assert names == ("a", "b", "c")
    return minimize(project(joined, 2))


def make_elem_abelian(p: int) -> Presentation:
    """F_p^(omega): digit strings without trailing zero, componentwise sum."""
    _check_prime(p, odd=False)
    alphabet = Alphabet(p, 1)
    domain = _single_track_domain(
        alphabet, _OK, lambda f, x: _flag(f, x), lambda f: f == _OK
    )

    def step(flags, sym):
        if (_val(sym[0]) + _val(sym[1])) % p != _val(sym[2]):
            return None
        return _flags(flags, sym)

    mul = _ternary(
        alphabet, (_OK, _OK, _OK), step,
        lambda flags: _ZERO not in flags,
        lambda state, l1, l2: (_val(l1) + _val(l2)) % p,
    )
    return _build(f"F_{p}^(omega)", "fp", p, 1, domain, mul, {"e": ""}, "", r"x\d+")


def make_gp(p: int) -> Presentation:
    """G_p: the central digit sits at position 0, alpha follows."""
    _check_prime(p, odd=True)
    alphabet = Alphabet(p, 1)
    start = "start"
    domain = _single_track_domain(
        alphabet, start,
        lambda f, x: _OK if f == start else _flag(f, x),
        lambda f: f == _OK,
    )

    # state after the first symbol: (r, s, flags); r = c3 - c1 - c2 - e so far,
    # s = sum of the second operand's alpha digits seen so far.
    def step(state, sym):
        if state == start:
            if PAD in sym:
                return None
            c1, c2, c3 = sym
            return ((c3 - c1 - c2) % p, 0, (_OK, _OK, _OK))
        r, s, flags = state
        a, b, g = _val(sym[0]), _val(sym[1]), _val(sym[2])
        if (a + b) % p != g:
            return None
        nf = _flags(flags, sym)
        if nf is None:
            return None
        return ((r - a * s) % p, (s + b) % p, nf)

    def result(state, l1, l2):
        if state == start:
            return None
        return (_val(l1) + _val(l2)) % p

    a3 = alphabet.with_tracks(3)
    opts = list(alphabet.letters) + [PAD]

    def succ(state):
        if state == start:
            for c1 in alphabet.letters:
                for c2 in alphabet.letters:
                    for c3 in alphabet.letters:
                        yield (c1, c2, c3), step(state, (c1, c2, c3))
            return
        for l1 in opts:
            for l2 in opts:
                v3 = result(state, l1, l2)
                for l3 in ((v3, PAD) if v3 == 0 else (v3,)):
                    sym = (l1, l2, l3)
                    if sym == (PAD, PAD, PAD):
                        continue
                    nxt = step(state, sym)
                    if nxt is not None:
                        yield sym, nxt

    def accepting(state):
        return state != start and state[0] == 0 and _ZERO not in state[2]

    mul = minimize(explore(a3, [start], succ, accepting))
    return _build(f"G_{p}", "gp", p, 1, domain, mul, {"e": "0", "u": "1"}, "0", r"x\d+")


def hp_core_step(p: int, state, letters):
    """Shared H_p multiplication check on one position.

    ``state`` is ``(at_position_zero, running_sum_of_second_alpha)``;
    ``letters`` are three packed (alpha, gamma) letters.  Returns the next
    core state or None.  Used by both the finite and the Buchi automaton.
    """
    first, s = state
    (a1, g1), (a2, g2), (a3, g3) = (divmod(x, p) for x in letters)
    if first and (g1 or g2 or g3):
        return None
    if (a1 + a2) % p != a3:
        return None
    if (g1 + g2 + a1 * s) % p != g3:
        return None
    return (False, (s + a2) % p)


def hp_result_letter(p: int, state, l1: int, l2: int) -> int:
    first, s = state
    a1, g1 = divmod(l1, p)
    a2, g2 = divmod(l2, p)
    return ((a1 + a2) % p) * p + (g1 + g2 + a1 * s) % p


def make_hp(p: int) -> Presentation:
    """H_p: two-coordinate letters (alpha_k, gamma_k), gamma_0 = 0."""
    _check_prime(p, odd=True)
    alphabet = Alphabet(p, 1, width=2)

    def dom_step(state, x):
        first, f = state
        if first and x % p:
            return None
        g = _flag(f, x)
        return None if g is None else (False, g)

    domain = _single_track_domain(alphabet, (True, _OK), dom_step, lambda st: st[1] == _OK)

    def step(state, sym):
        core, flags = state
        nc = hp_core_step(p, core, tuple(_val(x) for x in sym))
        if nc is None:
            return None
        nf = _flags(flags, sym)
        return None if nf is None else (nc, nf)

    mul = _ternary(
        alphabet, ((True, 0), (_OK, _OK, _OK)), step,
        lambda st: _ZERO not in st[1],
        lambda st, l1, l2: hp_result_letter(p, st[0], _val(l1), _val(l2)),
    )
    return _build(f"H_{p}", "hp", p, 2, domain, mul, {"e": ""}, "", r"(x\d+|z[1-9]\d*)")


def make_presentation(group: str, p: int = 3) -> Presentation:
    builders = {"fp": make_elem_abelian, "gp": make_gp, "hp": make_hp}
    try:
        builder = builders[group]
    except KeyError:
        raise ValueError(f"unknown group {group!r}; expected one of {sorted(builders)}") from None
    return builder(p)


def custom_presentation(name: str, domain: MultiTrackAutomaton, relations: dict,
                        constants: dict, identity: str | None = None) -> Presentation:
    """Presentation from user-supplied automata; arithmetic goes through M."""
    if "M" not in relations:
        raise PresentationMismatch("a presentation needs a ternary relation M")
    if "e" not in constants:
        raise PresentationMismatch("a presentation needs the identity constant e")
    for rel in relations.values():
        if not rel.alphabet.same_letters(domain.alphabet):
            raise PresentationMismatch("relation alphabet differs from the domain alphabet")
    relations = dict(relations)
    pres = Presentation(name, "custom", domain.alphabet.p, domain.alphabet.width, domain,
                        relations, dict(constants), Signature({}),
                        constants["e"] if identity is None else identity)
    if "inv" not in relations:
        relations["inv"] = _inverse_relation(pres)
    sig = Signature({n: r.tracks for n, r in relations.items()}, frozenset(constants))
    return replace(pres, signature=sig)


def relation_holds(pres: Presentation, name: str, elements: Sequence[str]) -> bool:
    """Run the relation automaton on element strings (H_p strings are unpacked)."""
    try:
        aut = pres.relations[name]
    except KeyError:
        raise UnknownSymbol(f"unknown relation {name!r}") from None
    if len(elements) != aut.tracks:
        raise ArityError(f"{name} takes {aut.tracks} arguments, got {len(elements)}")
    return accepts(aut, [to_letters(pres, s) for s in elements])


# ---------------------------------------------------------------------------
# canonical forms and direct arithmetic


def _require(pres: Presentation, s: str) -> None:
    if not is_canonical(pres, s):
        raise NotInDomain(f"{s!r} is not a canonical {pres.name} element")


def is_canonical(pres: Presentation, s: str) -> bool:
    if not isinstance(s, str):
        return False
    if pres.kind == "custom":
        return pres.in_domain(s)
    try:
        letters = to_letters(pres, s)
    except NotInDomain:
        return False
    if pres.kind == "fp":
        return not letters or letters[-1] != 0
    if pres.kind == "gp":
        return len(letters) == 1 or (len(letters) > 1 and letters[-1] != 0)
    if pres.kind == "hp":
        return (not letters) or (letters[0] % pres.p == 0 and letters[-1] != 0)
    return False


def _split(pres: Presentation, s: str):
    """(central part, alpha list) with the central part in kind-specific form."""
    p = pres.p
    if pres.kind == "fp":
        return None, [DIGITS.index(c) for c in s]
    if pres.kind == "gp":
        return DIGITS.index(s[0]), [DIGITS.index(c) for c in s[1:]]
    letters = to_letters(pres, s)
    return [x % p for x in letters], [x // p for x in letters]


def _join(pres: Presentation, central, alpha) -> str:
    p = pres.p
    if pres.kind == "fp":
        while alpha and alpha[-1] == 0:
            alpha.pop()
        return "".join(DIGITS[d] for d in alpha)
    if pres.kind == "gp":
        while alpha and alpha[-1] == 0:
            alpha.pop()
        return DIGITS[central % p] + "".join(DIGITS[d] for d in alpha)
    n = max(len(alpha), len(central))
    alpha = alpha + [0] * (n - len(alpha))
    gamma = central + [0] * (n - len(central))
    while n and alpha[n - 1] == 0 and gamma[n - 1] == 0:
        n -= 1
    return from_letters(pres, [alpha[i] * p + gamma[i] for i in range(n)])


def mul_elements(pres: Presentation, g: str, h: str) -> str:
    """The unique c with M(g, h, c), computed by streaming the formula."""
    _require(pres, g)
    _require(pres, h)
    if pres.kind == "custom":
        return _mul_by_search(pres, g, h)
    p = pres.p
    cg, ag = _split(pres, g)
    ch, ah = _split(pres, h)
    n = max(len(ag), len(ah))
    ag = ag + [0] * (n - len(ag))
    ah = ah + [0] * (n - len(ah))
    alpha = [(x + y) % p for x, y in zip(ag, ah)]
    if pres.kind == "fp":
        return _join(pres, None, alpha)
    if pres.kind == "gp":
        c = cg + ch
        s = 0
        for k in range(n):
            c += ag[k] * s
            s += ah[k]
        return _join(pres, c % p, alpha)
    gamma = [0] * n
    cg = cg + [0] * (n - len(cg))
    ch = ch + [0] * (n - len(ch))
    s = 0
    for k in range(n):
        gamma[k] = (cg[k] + ch[k] + ag[k] * s) % p
        s += ah[k]
    return _join(pres, gamma, alpha)


def _mul_by_search(pres: Presentation, g: str, h: str) -> str:
    restricted, _ = join(pres.M, ("a", "b", "c"), singleton(pres, g), ("a",))
    restricted, _ = join(restricted, ("a", "b", "c"), singleton(pres, h), ("b",))
    result = witness(project(project(restricted, 0), 0))
    if result is None:
        raise NotInDomain(f"M has no product for {g!r}, {h!r}")
    return from_letters(pres, [sym[0] for sym in result])


def inverse(pres: Presentation, g: str) -> str:
    _require(pres, g)
    p = pres.p
    if pres.kind == "custom":
        restricted, _ = join(pres.relations["inv"], ("a", "b"), singleton(pres, g), ("a",))
        return from_letters(pres, [sym[0] for sym in witness(project(restricted, 0))])
    c, alpha = _split(pres, g)
    neg = [(-x) % p for x in alpha]
    if pres.kind == "fp":
        return _join(pres, None, neg)
    if pres.kind == "gp":
        # c' = -c + sum_k alpha_k * (alpha_0 + ... + alpha_{k-1})
        s = corr = 0
        for x in alpha:
            corr += x * s
            s += x
        return _join(pres, -c + corr, neg)
    gamma = []
    s = 0
    for x, y in zip(alpha, c):
        gamma.append((-y + x * s) % p)
        s += x
    return _join(pres, gamma, neg)


def power(pres: Presentation, g: str, n: int) -> str:
    """``g ** n`` by repeated squaring; negative n uses the inverse."""
    _require(pres, g)
    if n < 0:
        g, n = inverse(pres, g), -n
    result = pres.identity
    base = g
    while n:
        if n & 1:
            result = mul_elements(pres, result, base)
        base = mul_elements(pres, base, base)
        n >>= 1
    return result


def commutator(pres: Presentation, g: str, h: str) -> str:
    """``[g, h] = g^-1 h^-1 g h``."""
    left = mul_elements(pres, inverse(pres, g), inverse(pres, h))
    return mul_elements(pres, left, mul_elements(pres, g, h))


# ---------------------------------------------------------------------------
# generator words


_SYLLABLE = re.compile(r"\s*([a-z][a-z0-9_]*)(?:\^(-?\d+))?")


def parse_generator_word(text: str) -> list:
    """``"x0^2 x1 u^-1"`` -> ``[("x0", 2), ("x1", 1), ("u", -1)]``; ``e`` is empty."""
    text = text.strip()
    out = []
    pos = 0
    while pos < len(text):
        m = _SYLLABLE.match(text, pos)
        if not m or m.end() == pos:
            raise BadGenerator(f"cannot read generator word {text!r}")
        name, exp = m.group(1), int(m.group(2) or 1)
        if name != "e":
            out.append((name, exp))
        pos = m.end()
        while pos < len(text) and text[pos] in " \t*.":
            pos += 1
    return out


def format_generator_word(word: Iterable) -> str:
    parts = [name + (f"^{e}" if e != 1 else "") for name, e in word]
    return " ".join(parts) if parts else "e"


def generator(pres: Presentation, name: str) -> str:
    """Canonical encoding of a single generator."""
    p = pres.p
    m = re.fullmatch(r"([a-z])(\d*)", name)
    if not m:
        raise BadGenerator(f"bad generator {name!r}")
    letter, idx = m.group(1), m.group(2)
    if pres.kind == "custom":
        if name in pres.constants:
            return pres.constants[name]
        raise BadGenerator(f"{name!r} is not a constant of {pres.name}")
    if letter == "x" and idx:
        i = int(idx)
        if pres.kind == "fp":
            return "0" * i + "1"
        if pres.kind == "gp":
            return "0" + "0" * i + "1"
        return from_letters(pres, [0] * i + [p])
    if letter == "u" and not idx and pres.kind == "gp":
        return "1"
    if letter == "z" and idx and pres.kind == "hp":
        k = int(idx)
        if k < 1:
            raise BadGenerator("z_0 does not exist; central generators start at z1")
        return from_letters(pres, [0] * k + [1])
    raise BadGenerator(f"{name!r} is not a generator of {pres.name}")


def encode(pres: Presentation, word: Sequence | str) -> str:
    """Fold the product of a generator word into its canonical string."""
    if isinstance(word, str):
        word = parse_generator_word(word)
    result = pres.identity
    for name, e in word:
        g = generator(pres, name)
        result = mul_elements(pres, result, power(pres, g, e % pres.p))
    return result


def decode(pres: Presentation, s: str) -> list:
    """Normal-form generator word ``x_0^{a_0} ... x_n^{a_n}`` times the central part."""
    _require(pres, s)
    if pres.kind == "custom":
        raise PresentationMismatch("custom presentations have no generator normal form")
    central, alpha = _split(pres, s)
    word = [(f"x{i}", e) for i, e in enumerate(alpha) if e]
    if pres.kind == "gp" and central:
        word.append(("u", central))
    if pres.kind == "hp":
        word.extend((f"z{k}", e) for k, e in enumerate(central) if e)
    return word
