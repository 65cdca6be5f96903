"""Symbolic arithmetic in the free nilpotent-of-class-2 exponent-p group.

Elements are kept in the normal form ``x_0^{a_0} x_1^{a_1} ... * prod y_{i,k}^{b_{i,k}}``
with the central generators ``y_{i,k}`` (``i < k``).  Products are computed by
the collection process: generator syllables are swapped into increasing
index order one adjacent pair at a time, and every swap of ``x_k^a`` past
``x_i^b`` (``i < k``) emits the central correction ``y_{i,k}^{a*b}``.  This
fixes the convention ``x_k x_i = x_i x_k y_{i,k}``, i.e. ``[x_k, x_i] = y_{i,k}``
with ``[g, h] = g^-1 h^-1 g h``.

This module deliberately shares no code with :mod:`autostruct.presentations`;
it is the reference the automata are checked against.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import BudgetExceeded, NotPrime, PresentationMismatch

ENUMERATION_BUDGET = 100_000


def _prime(p: int) -> None:
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise NotPrime(f"{p} is not prime")


@dataclass(frozen=True)
class Nil2Element:
    """Normal form; zero exponents are never stored, so ``==`` is group equality."""

    p: int
    a: tuple = ()   # sorted ((i, exponent), ...)
    b: tuple = ()   # sorted (((i, k), exponent), ...)

    @classmethod
    def make(cls, p: int, a: Mapping[int, int] | None = None,
             b: Mapping[tuple[int, int], int] | None = None) -> "Nil2Element":
        a_items = {}
        for i, e in (a or {}).items():
            if i < 0:
                raise ValueError(f"negative generator index {i}")
            e %= p
            if e:
                a_items[i] = e
        b_items = {}
        for (i, k), e in (b or {}).items():
            if not 0 <= i < k:
                raise ValueError(f"central generator y({i},{k}) needs 0 <= i < k")
            e %= p
            if e:
                b_items[(i, k)] = e
        return cls(p, tuple(sorted(a_items.items())), tuple(sorted(b_items.items())))

    @classmethod
    def identity(cls, p: int) -> "Nil2Element":
        return cls(p)

    @classmethod
    def x(cls, p: int, i: int, e: int = 1) -> "Nil2Element":
        return cls.make(p, {i: e})

    @classmethod
    def y(cls, p: int, i: int, k: int, e: int = 1) -> "Nil2Element":
        return cls.make(p, b={(i, k): e})

    @property
    def a_map(self) -> dict:
        return dict(self.a)

    @property
    def b_map(self) -> dict:
        return dict(self.b)

    def is_identity(self) -> bool:
        return not self.a and not self.b

    def is_central(self) -> bool:
        return not self.a

    def __mul__(self, other: "Nil2Element") -> "Nil2Element":
        return oracle_mul(self, other)

    def __str__(self):
        return format_element(self)


def collect(p: int, syllables) -> tuple[dict, dict]:
    """Collect a word of ``(index, exponent)`` syllables into normal form.

    Returns ``(a, corrections)`` where ``corrections`` holds the central
    exponents produced by the swaps.
    """
    word = [[i, e % p] for i, e in syllables if e % p]
    central: dict = {}
    changed = True
    while changed:
        changed = False
        j = 0
        while j < len(word) - 1:
            (k, ea), (i, eb) = word[j], word[j + 1]
            if k == i:
                e = (ea + eb) % p
                if e:
                    word[j] = [k, e]
                    del word[j + 1]
                else:
                    del word[j:j + 2]
                changed = True
                continue
            if k > i:
                word[j], word[j + 1] = word[j + 1], word[j]
                central[(i, k)] = (central.get((i, k), 0) + ea * eb) % p
                changed = True
            j += 1
    return {i: e for i, e in word}, central


def _add_central(p: int, *parts) -> dict:
    out: dict = {}
    for part in parts:
        for key, e in part.items():
            out[key] = (out.get(key, 0) + e) % p
    return out


def oracle_mul(g: Nil2Element, h: Nil2Element) -> Nil2Element:
    """Product ``g * h`` by collection."""
    if g.p != h.p:
        raise PresentationMismatch("elements over different primes")
    p = g.p
    a, corr = collect(p, list(g.a) + list(h.a))
    return Nil2Element.make(p, a, _add_central(p, g.b_map, h.b_map, corr))


def oracle_inverse(g: Nil2Element) -> Nil2Element:
    """Inverse by collecting the reversed word with negated exponents."""
    p = g.p
    a, corr = collect(p, [(i, -e) for i, e in reversed(g.a)])
    neg_b = {key: -e for key, e in g.b}
    return Nil2Element.make(p, a, _add_central(p, neg_b, corr))


def oracle_pow(g: Nil2Element, n: int) -> Nil2Element:
    if n < 0:
        raise ValueError("exponent must be non-negative")
    result = Nil2Element.identity(g.p)
    base = g
    while n:
        if n & 1:
            result = oracle_mul(result, base)
        base = oracle_mul(base, base)
        n >>= 1
    return result


def oracle_comm(g: Nil2Element, h: Nil2Element) -> Nil2Element:
    """Commutator ``g^-1 h^-1 g h``."""
    return oracle_mul(oracle_mul(oracle_inverse(g), oracle_inverse(h)), oracle_mul(g, h))


def from_word(p: int, word) -> Nil2Element:
    """Evaluate a sequence of ``(generator, exponent)`` pairs.

    Generators are ``("x", i)`` / ``("y", (i, k))`` tuples or the strings
    ``"x3"`` / ``"y(0,3)"``.
    """
    result = Nil2Element.identity(p)
    for gen, e in word:
        kind, idx = _gen(gen)
        if kind == "x":
            g = Nil2Element.x(p, idx, e)
        else:
            g = Nil2Element.y(p, idx[0], idx[1], e)
        result = oracle_mul(result, g)
    return result


_GEN_RE = re.compile(r"^(?:x(\d+)|y\((\d+),(\d+)\))$")


def _gen(gen):
    if isinstance(gen, tuple):
        return gen
    m = _GEN_RE.match(gen.replace(" ", ""))
    if not m:
        raise ValueError(f"bad generator {gen!r}")
    if m.group(1) is not None:
        return "x", int(m.group(1))
    return "y", (int(m.group(2)), int(m.group(3)))


# ---------------------------------------------------------------------------
# quotient maps


@dataclass(frozen=True)
class StructureConstants:
    """Where the central generator ``y_{i,k}`` goes in a quotient.

    ``target`` is ``"lp"`` (identity), ``"gp"`` (to ``u``), ``"hp"`` (to
    ``z_k``) or ``"fp"`` (to the identity: abelianization).
    """

    target: str

    def __post_init__(self):
        if self.target not in ("lp", "gp", "hp", "fp"):
            raise ValueError(f"unknown quotient target {self.target!r}")


def quotient(g: Nil2Element, sc: StructureConstants | str, pres=None) -> str:
    """Image of ``g`` in a presentation's canonical string encoding."""
    if isinstance(sc, str):
        sc = StructureConstants(sc)
    if pres is not None:
        if pres.kind != sc.target or pres.p != g.p:
            raise PresentationMismatch(
                f"structure constants for {sc.target} do not fit {pres.kind} (p={pres.p})"
            )
    p = g.p
    a = g.a_map
    n = max(a) + 1 if a else 0
    alpha = [a.get(i, 0) for i in range(n)]
    if sc.target == "fp":
        return _digits(_strip(alpha))
    if sc.target == "gp":
        c = sum(e for _, e in g.b) % p
        return _digits([c] + _strip(alpha))
    if sc.target == "hp":
        gamma: dict = {}
        for (i, k), e in g.b:
            gamma[k] = (gamma.get(k, 0) + e) % p
        m = max([n] + [k + 1 for k, e in gamma.items() if e])
        pairs = [(alpha[i] if i < n else 0, gamma.get(i, 0)) for i in range(m)]
        while pairs and pairs[-1] == (0, 0):
            pairs.pop()
        if not pairs:
            return ""
        return _digits([x for x, _ in pairs]) + "|" + _digits([y for _, y in pairs])
    raise PresentationMismatch("L_p has no string encoding")


def _strip(digits: list) -> list:
    digits = list(digits)
    while digits and digits[-1] == 0:
        digits.pop()
    return digits


def _digits(ds) -> str:
    return "".join("0123456789abcdefghijklmnopqrstuvwxyz"[d] for d in ds)


# ---------------------------------------------------------------------------
# enumeration and text form


def generator_words(p: int, max_index: int, max_len: int) -> Iterator[tuple]:
    """All words of length <= max_len over ``x_0 .. x_max_index``.

    A letter is a syllable ``(("x", i), e)`` with ``1 <= e <= p - 1``.
    """
    letters = [(("x", i), e) for i in range(max_index + 1) for e in range(1, p)]
    for n in range(max_len + 1):
        yield from itertools.product(letters, repeat=n)


def oracle_enumerate(p: int, max_index: int, max_len: int,
                     budget: int = ENUMERATION_BUDGET) -> Iterator[Nil2Element]:
    """Distinct normal forms of all generator words up to ``max_len``."""
    _prime(p)
    seen = set()
    for word in generator_words(p, max_index, max_len):
        g = from_word(p, word)
        if g not in seen:
            seen.add(g)
            if len(seen) > budget:
                raise BudgetExceeded(f"more than {budget} elements enumerated")
            yield g


def format_element(g: Nil2Element) -> str:
    """Debug form such as ``x0^2 x3 y(0,3)^2``; the identity prints as ``e``."""
    parts = []
    for i, e in g.a:
        parts.append(f"x{i}" + (f"^{e}" if e != 1 else ""))
    for (i, k), e in g.b:
        parts.append(f"y({i},{k})" + (f"^{e}" if e != 1 else ""))
    return " ".join(parts) if parts else "e"


_TOKEN_RE = re.compile(r"\s*(x\d+|y\(\s*\d+\s*,\s*\d+\s*\))(?:\^(-?\d+))?")


def parse_element(p: int, text: str) -> Nil2Element:
    """Inverse of :func:`format_element` (any word in that syntax is accepted)."""
    text = text.strip()
    if text in ("", "e", "1"):
        return Nil2Element.identity(p)
    word = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse {text[pos:]!r}")
        word.append((m.group(1).replace(" ", ""), int(m.group(2) or 1)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return from_word(p, word)
